mod common;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rydqec::dem_decode::{
    brute_force_min_weight, build_dem, count_failures, decode_batch, decompose_graphlike,
    edge_weight, xor_merge, BruteForceOracle, DecodeError, Decoder, DetectorErrorModel,
    EXACT_DP_MAX_DEFECTS,
};
use rydqec::frame_sim::sample_circuit;
use rydqec::pauli::Letter;
use rydqec::surface::{
    build_memory_circuit, noiseless_channels, BoundaryMode, CodeLayout, GateOrdering,
    Instruction, MemoryBasis, MemorySpec, Pairing,
};

use common::{dem, mech};

fn d3_circuit() -> (CodeLayout, rydqec::surface::Circuit) {
    let l = CodeLayout::new(3).unwrap();
    let spec = MemorySpec {
        ordering: GateOrdering::two_cz2(Pairing::Ft),
        basis: MemoryBasis::Z,
        rounds: 3,
        boundary: BoundaryMode::LocalTimeOptimal,
    };
    let c = build_memory_circuit(&l, &spec, &noiseless_channels()).unwrap();
    (l, c)
}

#[test]
fn noiseless_circuit_has_an_empty_model() {
    let (_, c) = d3_circuit();
    let d = build_dem(&c).unwrap();
    assert!(d.mechanisms.is_empty());
    assert_eq!(d.num_detectors, c.num_detectors());
    assert_eq!(d.circuit_hash, c.hash());
}

#[test]
fn one_flip_gives_one_mechanism() {
    let (l, mut c) = d3_circuit();
    let ch = c.add_channel(common::flip_table(Letter::X, 0.1));
    let q = 6;
    c.instructions.insert(2, Instruction::Noise { channel: ch, qubits: vec![q] });
    let d = build_dem(&c).unwrap();
    assert_eq!(d.mechanisms.len(), 1);
    let m = &d.mechanisms[0];
    assert!((m.probability - 0.1).abs() < 1e-15);
    let z_checks = l
        .of_type(rydqec::surface::StabilizerType::Z)
        .filter(|&s| l.stabilizers[s].data().any(|x| x == q))
        .count();
    assert_eq!(m.detectors.len(), z_checks);
}

#[test]
fn repetition_code_model() {
    let c = common::repetition_circuit(0.05);
    let d = build_dem(&c).unwrap();
    let sig: Vec<(Vec<usize>, u64)> = d.mechanisms.iter().map(|m| (m.detectors.clone(), m.observables)).collect();
    assert_eq!(sig, vec![(vec![0], 1), (vec![0, 1], 0), (vec![1], 0)]);
    let g = decompose_graphlike(&d).unwrap();
    assert!(g.residual.is_empty());
    assert_eq!(g.edges.len(), 3);
    // Decoding the sampled shots is the majority vote.
    let batch = sample_circuit(&c, 100_000, 5).unwrap();
    let fails = count_failures(&batch, &decode_batch(&g, &batch).unwrap());
    let p: f64 = 0.05;
    let closed = 3.0 * p * p * (1.0 - p) + p * p * p;
    let sigma = (closed * (1.0 - closed) / 1e5).sqrt();
    assert!((fails as f64 / 1e5 - closed).abs() < 4.0 * sigma);
}

#[test]
fn duplicate_signatures_merge() {
    let d = dem(3, vec![mech(0.1, &[0, 1], 0), mech(0.2, &[1, 0], 0), mech(0.05, &[2], 1)]);
    assert_eq!(d.mechanisms.len(), 2);
    let merged = d.mechanisms.iter().find(|m| m.detectors == vec![0, 1]).unwrap();
    assert!((merged.probability - (0.1 * 0.8 + 0.2 * 0.9)).abs() < 1e-15);
    assert!((xor_merge(0.1, 0.2) - 0.26).abs() < 1e-15);
    assert!(DetectorErrorModel::new(2, 1, [mech(1.2, &[0], 0)], "x").is_err());
    assert!(DetectorErrorModel::new(2, 1, [mech(0.1, &[5], 0)], "x").is_err());
}

#[test]
fn text_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let d = common::random_graphlike(&mut rng, 8, 15);
    let text = d.to_text();
    assert!(text.starts_with("# circuit test\n"));
    assert_eq!(DetectorErrorModel::from_text(&text).unwrap(), d);
    assert!(matches!(DetectorErrorModel::from_text("detectors x\n"), Err(DecodeError::Parse { .. })));
}

#[test]
fn graphlike_models_leave_no_residual() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let d = common::random_graphlike(&mut rng, 10, 30);
    let g = decompose_graphlike(&d).unwrap();
    assert!(g.residual.is_empty());
    assert_eq!(g.edges.len(), d.mechanisms.len());
}

#[test]
fn four_detector_mechanism_splits_into_edges() {
    let d = dem(
        4,
        vec![mech(0.1, &[0, 1], 1), mech(0.1, &[2, 3], 0), mech(0.01, &[0, 1, 2, 3], 1)],
    );
    let g = decompose_graphlike(&d).unwrap();
    assert_eq!(g.residual.len(), 1);
    let parts = g.residual[0].parts.as_ref().expect("decomposed");
    let mut pairs: Vec<(usize, usize)> = parts.iter().map(|&e| (g.edges[e].a, g.edges[e].b)).collect();
    pairs.sort();
    assert_eq!(pairs, vec![(0, 1), (2, 3)]);
    for &e in parts {
        assert!((g.edges[e].probability - xor_merge(0.1, 0.01)).abs() < 1e-15);
    }
}

#[test]
fn mechanism_without_a_matching_partition_is_kept_aside() {
    let d = dem(4, vec![mech(0.1, &[0, 1], 0), mech(0.1, &[2, 3], 0), mech(0.01, &[0, 1, 2, 3], 1)]);
    let g = decompose_graphlike(&d).unwrap();
    assert_eq!(g.undecomposable().count(), 1);
}

#[test]
fn trivial_syndromes() {
    let d = dem(3, vec![mech(0.1, &[0, 1], 1), mech(0.2, &[1, 2], 0), mech(0.05, &[2], 0)]);
    let g = decompose_graphlike(&d).unwrap();
    let dec = Decoder::new(&g);
    let empty = dec.decode(&[]).unwrap();
    assert_eq!((empty.observables, empty.weight), (0, 0.0));
    let one = dec.decode(&[0, 1]).unwrap();
    assert_eq!(one.observables, 1);
    assert!((one.weight - edge_weight(0.1).unwrap()).abs() < 1e-12);
    assert_eq!(brute_force_min_weight(&d, &[]).unwrap(), (0.0, 0));
    let (w, o) = brute_force_min_weight(&d, &[1, 2]).unwrap();
    assert_eq!(o, 0);
    assert!((w - edge_weight(0.2).unwrap()).abs() < 1e-12);
}

#[test]
fn unreachable_syndrome_is_an_error() {
    let d = dem(3, vec![mech(0.1, &[0, 1], 0)]);
    let g = decompose_graphlike(&d).unwrap();
    assert!(Decoder::new(&g).decode(&[2]).is_err());
    assert!(brute_force_min_weight(&d, &[2]).is_err());
}

#[test]
fn toy_model_all_syndromes() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let d = common::random_graphlike(&mut rng, 6, 14);
    let best = common::min_weights(&d);
    let g = decompose_graphlike(&d).unwrap();
    let dec = Decoder::new(&g);
    let oracle = BruteForceOracle::new(&d).unwrap();
    for (s, b) in best.iter().enumerate() {
        let min = b[0].min(b[1]);
        let defects = common::defects_of(s);
        match dec.decode(&defects) {
            Ok(r) => {
                assert!((r.weight - min).abs() < 1e-9, "{defects:?}: {} vs {min}", r.weight);
                assert!((oracle.query(&defects).unwrap().0 - min).abs() < 1e-9);
            }
            Err(_) => assert!(min.is_infinite()),
        }
    }
}

#[test]
fn matching_agrees_with_exhaustive_search_on_random_models() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let (mut checked, mut compared_flips) = (0usize, 0usize);
    for _ in 0..200 {
        let nd = rng.random_range(4..=12);
        let m = rng.random_range(5..=20);
        let d = common::random_graphlike(&mut rng, nd, m);
        let best = common::min_weights(&d);
        let dec = Decoder::new(&decompose_graphlike(&d).unwrap());
        for (s, b) in best.iter().enumerate() {
            let min = b[0].min(b[1]);
            if min.is_infinite() {
                continue;
            }
            let r = dec.decode(&common::defects_of(s)).unwrap();
            assert!((r.weight - min).abs() < 1e-9 * (1.0 + min));
            checked += 1;
            if (b[0] - b[1]).abs() > 1e-9 {
                let want = if b[0] < b[1] { 0 } else { 1 };
                assert_eq!(r.observables, want);
                compared_flips += 1;
            }
        }
    }
    assert!(checked > 10_000 && compared_flips > 5_000, "{checked} {compared_flips}");
}

#[test]
fn library_oracle_handles_25_mechanisms() {
    let mut rng = ChaCha8Rng::seed_from_u64(25);
    let d = common::random_graphlike(&mut rng, 12, 25);
    let best = common::min_weights(&d);
    let oracle = BruteForceOracle::new(&d).unwrap();
    for (s, b) in best.iter().enumerate() {
        let min = b[0].min(b[1]);
        match oracle.query(&common::defects_of(s)) {
            Some((w, _)) => assert!((w - min).abs() < 1e-9),
            None => assert!(min.is_infinite()),
        }
    }
}

// A chain of detectors with boundary edges at both ends. Matching on a line
// never crosses, so the optimum pairs neighbours or sends a defect to the
// nearer end; a small DP over sorted defects gives the exact weight.
#[test]
fn large_syndromes_on_a_chain() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let n = 60;
    let p: Vec<f64> = (0..=n).map(|_| rng.random_range(0.01..0.2)).collect();
    let w: Vec<f64> = p.iter().map(|&x| edge_weight(x).unwrap()).collect();
    let mut mechs = vec![mech(p[0], &[0], 1)];
    for i in 1..n {
        mechs.push(mech(p[i], &[i - 1, i], 0));
    }
    mechs.push(mech(p[n], &[n - 1], 0));
    let d = dem(n, mechs);
    let dec = Decoder::new(&decompose_graphlike(&d).unwrap());
    // prefix[i] = weight of edges 0..i, so the path from detector a to b
    // (a < b) costs prefix[b + 1] - prefix[a + 1].
    let mut prefix = vec![0.0];
    for x in &w {
        prefix.push(prefix.last().unwrap() + x);
    }
    let path = |a: usize, b: usize| prefix[b + 1] - prefix[a + 1];
    let to_boundary = |a: usize| prefix[a + 1].min(prefix[n + 1] - prefix[a + 1]);
    for trial in 0..40 {
        let k = if trial % 2 == 0 { EXACT_DP_MAX_DEFECTS + 1 + trial } else { trial % 12 };
        let mut defects: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            defects.swap(i, rng.random_range(0..=i));
        }
        defects.truncate(k.min(n));
        defects.sort_unstable();
        let mut dp = vec![0.0; defects.len() + 1];
        for i in 1..=defects.len() {
            dp[i] = dp[i - 1] + to_boundary(defects[i - 1]);
            if i >= 2 {
                dp[i] = dp[i].min(dp[i - 2] + path(defects[i - 2], defects[i - 1]));
            }
        }
        let r = dec.decode(&defects).unwrap();
        let want = dp[defects.len()];
        assert!((r.weight - want).abs() < 1e-6, "{} defects: {} vs {want}", defects.len(), r.weight);
    }
}
