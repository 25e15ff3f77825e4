//! Runs a memory-experiment config and prints the fitted exponents.
//!
//! ```text
//! cargo run --release --example threshold_sweep -- [crates/core/configs/quick.toml]
//! ```

use rydqec::bench::{emit_report, run_bench, ExperimentConfig, ReportFormat};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/configs/quick.toml").into());
    let cfg = ExperimentConfig::load(&path)?;
    let report = run_bench(&cfg)?;
    println!("{}", report.round_time);
    println!("\nordering               D  basis  gamma      p_L        failures");
    for r in &report.records {
        println!(
            "{:<22} {:<2} {:<6} {:<10.3e} {:<10.3e} {}{}",
            format!("{}/{:?}", r.ordering, r.boundary),
            r.distance,
            r.basis,
            r.gamma,
            r.p_l,
            r.failures,
            if r.low_confidence { " (low)" } else { "" }
        );
    }
    println!();
    for f in &report.fits {
        println!(
            "nu = {:.3} +- {:.3}  {} {:?} D={} basis {}",
            f.fit.nu, f.fit.sigma_nu, f.ordering, f.boundary, f.distance, f.basis
        );
    }
    for msg in &report.fit_failures {
        println!("not fitted: {msg}");
    }
    if let Some(csv) = &cfg.output.csv {
        for p in emit_report(&report, ReportFormat::Csv, csv)? {
            println!("wrote {}", p.display());
        }
    }
    Ok(())
}
