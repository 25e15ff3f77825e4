//! Detector error model and matching graph of a small memory circuit, and
//! a few decoded syndromes.
//!
//! ```text
//! cargo run --release --example decode_dem -- [cz2.json cz.json] [gamma]
//! ```
//!
//! Without pulse files the sequential pi-2pi-pi pulses are used, which
//! extract in well under a second.

use std::f64::consts::PI;

use rydqec::dem_decode::{
    ambiguous_mass, build_dem, decompose_graphlike, misdecoded_mass, Decoder,
};
use rydqec::pulse::{self, reference_pi_2pi_pi, rydberg_occupation_times, GateKind, PulseResult};
use rydqec::surface::{
    build_memory_circuit, BoundaryMode, ChannelSet, CodeLayout, GateOrdering, MemoryBasis,
    MemorySpec, Pairing,
};
use rydqec::twirl::{extract_pauli_channel, ExtractOptions, PulseSet, ReadoutVariant, VariantId};

fn reference(kind: GateKind) -> Result<PulseResult, Box<dyn std::error::Error>> {
    let waveform = reference_pi_2pi_pi(kind);
    let (m, d) = rydberg_occupation_times(&waveform, kind)?;
    Ok(PulseResult {
        kind,
        waveform,
        theta_m: PI,
        theta_d: PI,
        infidelity: 0.0,
        rydberg_time_m: m,
        rydberg_time_d: d,
    })
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let (pulses, rest) = if args.len() >= 2 && args[0].ends_with(".json") {
        let p = PulseSet {
            cz2: pulse::io::load(&args[0])?,
            cz: Some(pulse::io::load(&args[1])?),
        };
        (p, &args[2..])
    } else {
        let p = PulseSet {
            cz2: reference(GateKind::Cz2)?,
            cz: Some(reference(GateKind::Cz)?),
        };
        (p, &args[..])
    };
    let gamma: f64 = rest.first().map_or(Ok(1e-3), |s| s.parse())?;

    let spec = MemorySpec {
        ordering: GateOrdering::two_cz2(Pairing::Ft),
        basis: MemoryBasis::Z,
        rounds: 3,
        boundary: BoundaryMode::LocalTimeOptimal,
    };
    let mut channels = ChannelSet::new();
    for id in [VariantId::BulkCz2, VariantId::BoundaryCz2Local] {
        let v = ReadoutVariant::build(id, &pulses)?;
        channels.insert(id, extract_pauli_channel(&v, gamma, &ExtractOptions::default())?);
    }
    let circuit = build_memory_circuit(&CodeLayout::new(3)?, &spec, &channels)?;
    let dem = build_dem(&circuit)?;
    let graph = decompose_graphlike(&dem)?;
    println!(
        "{} detectors, {} mechanisms, {} edges, {} hyperedges, {} undetectable logicals",
        dem.num_detectors,
        dem.mechanisms.len(),
        graph.edges.len(),
        graph.residual.len(),
        dem.undetectable_logicals().count()
    );
    for line in dem.to_text().lines().take(12) {
        println!("  {line}");
    }
    println!("  ...");

    let decoder = Decoder::new(&graph);
    let mut mechs: Vec<_> = dem.mechanisms.iter().collect();
    mechs.sort_by(|a, b| b.probability.total_cmp(&a.probability));
    println!("\nmost likely single faults, decoded:");
    for m in mechs.iter().take(6) {
        let out = decoder.decode(&m.detectors)?;
        println!(
            "  p = {:.2e} detectors {:?}: predicted flip {} (actual {}), weight {:.2}",
            m.probability, m.detectors, out.observables, m.observables, out.weight
        );
    }
    println!(
        "\nsingle-fault mass decoded wrong: {:.3e} (any decoder: at least {:.3e})",
        misdecoded_mass(&dem, &decoder)?,
        ambiguous_mass(&dem)
    );
    Ok(())
}
