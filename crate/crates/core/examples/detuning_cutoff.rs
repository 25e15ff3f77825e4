//! Time-optimal CZ2 with zero laser phase and a bounded detuning track.
//!
//! `cargo run --release --example detuning_cutoff -- [M] [out.json]`
//! (default `M = 10`).

use std::time::Instant;

use rydqec::pulse::{self, GateKind, Parametrization, SynthConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let cutoff: f64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(10.0);
    let out = args.next();

    let cfg = SynthConfig::new(GateKind::Cz2, Parametrization::DetuningCutoff { cutoff });
    let start = Instant::now();
    let outcome = pulse::synthesize_time_optimal(&cfg)?;
    let p = &outcome.pulse;
    println!("M = {cutoff}: search took {:.1?}", start.elapsed());
    for (t, inf) in &outcome.history {
        println!("  T = {t:7.4}  best 1-F = {inf:.3e}");
    }
    let peak = p
        .waveform
        .measurement
        .detuning
        .iter()
        .chain(&p.waveform.data.detuning)
        .fold(0.0f64, |m, d| m.max(d.abs()));
    println!("T Omega_max = {:.4}", p.waveform.total_duration);
    println!("1 - F       = {:.3e}", p.infidelity);
    println!("max |Delta| = {peak:.3}");
    if let Some(path) = out {
        pulse::io::save(p, &path)?;
        println!("wrote {path}");
    }
    Ok(())
}
