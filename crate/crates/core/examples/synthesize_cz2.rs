//! Time-optimal CZ2 pulse with the phase parametrization.
//!
//! Run with `cargo run --release --example synthesize_cz2 [out.json]`.

use std::time::Instant;

use rydqec::pulse::{
    self, evaluate_fidelity, reference_pi_2pi_pi, rydberg_occupation_times, GateKind,
    Parametrization, SynthConfig,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::args().nth(1);
    let cfg = SynthConfig::new(GateKind::Cz2, Parametrization::Phase);

    let start = Instant::now();
    let outcome = pulse::synthesize_time_optimal(&cfg)?;
    let p = &outcome.pulse;
    println!("search took {:.1?}", start.elapsed());
    for (t, inf) in &outcome.history {
        println!("  T = {t:7.4}  best 1-F = {inf:.3e}");
    }

    let check = evaluate_fidelity(&p.waveform, GateKind::Cz2)?;
    println!("T Omega_max      = {:.4}", p.waveform.total_duration);
    println!("1 - F            = {:.3e} (full-space check {check:.3e})", p.infidelity);
    println!("theta_m, theta_d = {:.4}, {:.4}", p.theta_m, p.theta_d);
    println!("T_Ry measurement = {:.3}", p.rydberg_time_m);
    println!("T_Ry data (sum)  = {:.3}", p.rydberg_time_d);

    let reference = reference_pi_2pi_pi(GateKind::Cz2);
    let (ref_m, ref_d) = rydberg_occupation_times(&reference, GateKind::Cz2)?;
    println!(
        "pi-2pi-pi: T = {:.4}, duration ratio {:.3}, T_Ry {ref_m:.3} / {ref_d:.3}",
        reference.total_duration,
        p.waveform.total_duration / reference.total_duration
    );

    if let Some(path) = out {
        pulse::io::save(p, &path)?;
        println!("wrote {path}");
    }
    Ok(())
}
