//! Pauli-twirled leakage channel of one readout variant.
//!
//! ```text
//! cargo run --release --example extract_channel -- cz2.json [cz.json] [variant] [gamma]
//! ```
//!
//! Defaults to `bulk_cz2` at `gamma = 1e-3`.

use std::time::Instant;

use rydqec::pulse;
use rydqec::twirl::{
    extract_pauli_channel, validate_channel, ExtractOptions, PulseSet, ReadoutVariant, VariantId,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let cz2 = pulse::io::load(args.first().ok_or("usage: extract_channel CZ2_PULSE [CZ_PULSE] [VARIANT] [GAMMA]")?)?;
    let mut rest = args[1..].iter().peekable();
    let cz = match rest.peek() {
        Some(p) if p.ends_with(".json") => Some(pulse::io::load(rest.next().unwrap())?),
        _ => None,
    };
    let variant: VariantId = rest.next().map(|s| s.parse()).transpose()?.unwrap_or(VariantId::BulkCz2);
    let gamma: f64 = rest.next().map(|s| s.parse()).transpose()?.unwrap_or(1e-3);

    let v = ReadoutVariant::build(variant, &PulseSet { cz2, cz })?;
    let start = Instant::now();
    let table = extract_pauli_channel(&v, gamma, &ExtractOptions::default())?;
    println!(
        "{variant} at gamma = {gamma:e}: {} entries in {:.1?}",
        table.entries().len(),
        start.elapsed()
    );
    print!("{}", validate_channel(&table, 12));
    println!("1 - lambda_I = {:.4e}", 1.0 - table.identity_weight());
    Ok(())
}
