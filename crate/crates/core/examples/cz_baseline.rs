//! Time-optimal CZ and the per-round gate time of both readout schemes.
//!
//! `cargo run --release --example cz_baseline -- [cz2.json] [out.json]`
//!
//! Without a CZ2 pulse file only the CZ gate is synthesized.

use std::time::Instant;

use rydqec::pulse::{self, GateKind, Parametrization, SynthConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let cz2 = args.next().map(pulse::io::load).transpose()?;
    let out = args.next();

    let cfg = SynthConfig::new(GateKind::Cz, Parametrization::Phase);
    let start = Instant::now();
    let outcome = pulse::synthesize_time_optimal(&cfg)?;
    let p = &outcome.pulse;
    println!("search took {:.1?}", start.elapsed());
    for (t, inf) in &outcome.history {
        println!("  T = {t:7.4}  best 1-F = {inf:.3e}");
    }
    println!("T_CZ Omega_max = {:.4}", p.waveform.total_duration);
    println!("1 - F          = {:.3e}", p.infidelity);

    if let Some(cz2) = cz2 {
        let two = 2.0 * cz2.waveform.total_duration;
        let four = 4.0 * p.waveform.total_duration;
        println!("round: 2 x T_CZ2 = {two:.2}, 4 x T_CZ = {four:.2}, ratio {:.3}", two / four);
    }
    if let Some(path) = out {
        pulse::io::save(p, &path)?;
        println!("wrote {path}");
    }
    Ok(())
}
