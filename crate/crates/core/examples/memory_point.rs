//! One point of a distance-D memory experiment: extract (or load cached)
//! channels, build the circuit, sample, decode.
//!
//! ```text
//! cargo run --release --example memory_point -- cz2.json cz.json [ordering] [gamma] [D] [shots]
//! ```

use std::time::Instant;

use rydqec::dem_decode::{build_dem, count_failures, decode_batch, decompose_graphlike};
use rydqec::frame_sim::sample_circuit;
use rydqec::pulse;
use rydqec::surface::{
    build_memory_circuit, BoundaryMode, ChannelSet, CodeLayout, GateOrdering, MemoryBasis,
    MemorySpec,
};
use rydqec::twirl::{ChannelCache, ExtractOptions, PulseSet, ReadoutVariant, VariantId};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.len() < 2 {
        return Err("usage: memory_point CZ2 CZ [ordering] [gamma] [D] [shots]".into());
    }
    let pulses = PulseSet {
        cz2: pulse::io::load(&args[0])?,
        cz: Some(pulse::io::load(&args[1])?),
    };
    let ordering: GateOrdering = args.get(2).map_or("two_cz2_ft", |s| s).parse()?;
    let gamma: f64 = args.get(3).map_or(Ok(3e-3), |s| s.parse())?;
    let d: usize = args.get(4).map_or(Ok(3), |s| s.parse())?;
    let shots: usize = args.get(5).map_or(Ok(100_000), |s| s.parse())?;

    let cache = ChannelCache::new(std::env::temp_dir().join("rydqec-channels"))?;
    let layout = CodeLayout::new(d)?;
    let spec = MemorySpec {
        ordering,
        basis: MemoryBasis::Z,
        rounds: d,
        boundary: BoundaryMode::LocalTimeOptimal,
    };
    let mut channels = ChannelSet::new();
    for s in &layout.stabilizers {
        let id: VariantId = spec.ordering.variant(s, spec.boundary);
        if !channels.contains_key(&id) {
            let v = ReadoutVariant::build(id, &pulses)?;
            channels.insert(id, cache.get_or_extract(&v, gamma, &ExtractOptions::default())?);
        }
    }

    let circuit = build_memory_circuit(&layout, &spec, &channels)?;
    let dem = build_dem(&circuit)?;
    let graph = decompose_graphlike(&dem)?;
    println!(
        "{} D={d}: {} detectors, {} mechanisms, {} edges, {} hyperedges ({} undecomposable)",
        spec.ordering.label(),
        dem.num_detectors,
        dem.mechanisms.len(),
        graph.edges.len(),
        graph.residual.len(),
        graph.undecomposable().count()
    );
    println!("undetectable logical mechanisms: {}", dem.undetectable_logicals().count());

    let t = Instant::now();
    let batch = sample_circuit(&circuit, shots, 1)?;
    let sampled = t.elapsed();
    let t = Instant::now();
    let predictions = decode_batch(&graph, &batch)?;
    let decoded = t.elapsed();
    let failures = count_failures(&batch, &predictions);
    let p = failures as f64 / shots as f64;
    println!(
        "gamma = {gamma:e}: p_L = {p:.3e} +- {:.1e} ({failures}/{shots}); sample {sampled:.1?}, decode {decoded:.1?}",
        (p * (1.0 - p) / shots as f64).sqrt()
    );
    Ok(())
}
