use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dem_decode::{build_dem, count_failures, decode_batch, decompose_graphlike};
use crate::frame_sim::sample_circuit;
use crate::pulse::{self, GateKind, Parametrization, PulseResult, SynthConfig};
use crate::surface::{
    build_memory_circuit, BoundaryMode, ChannelSet, CodeLayout, MemoryBasis, MemorySpec, Scheme,
};
use crate::twirl::{ChannelCache, ExtractOptions, PulseSet, ReadoutVariant, VariantId};

use super::config::{ExperimentConfig, Series};
use super::fit::{fit_scaling_exponent, FitPoint};
use super::report::{round_time_summary, FitRow, Report};
use super::BenchError;

/// Outcome of one (series, basis, distance, decay rate) point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub ordering: String,
    pub boundary: BoundaryMode,
    /// `z`, `x`, or `both` for the pooled row.
    pub basis: String,
    pub distance: usize,
    pub rounds: usize,
    pub gamma: f64,
    pub shots: usize,
    pub failures: usize,
    pub p_l: f64,
    pub sigma: f64,
    /// Fewer failures than the configured minimum.
    pub low_confidence: bool,
    pub hyperedges: usize,
    pub undecomposable: usize,
    pub seed: u64,
}

impl ResultRecord {
    pub fn fit_point(&self) -> FitPoint {
        FitPoint {
            gamma: self.gamma,
            failures: self.failures,
            shots: self.shots,
        }
    }

    fn stats(mut self, min_failures: usize) -> Self {
        let p = self.failures as f64 / self.shots as f64;
        self.p_l = p;
        self.sigma = (p * (1.0 - p) / self.shots as f64).sqrt();
        self.low_confidence = self.failures < min_failures;
        self
    }
}

fn variants_for(scheme: Scheme, boundary: BoundaryMode) -> [VariantId; 2] {
    match (scheme, boundary) {
        (Scheme::FourCz, _) => [VariantId::Bulk4cz, VariantId::Boundary3cz],
        (Scheme::TwoCz2, BoundaryMode::GlobalPulse) => [VariantId::BulkCz2, VariantId::BoundaryCz2Global],
        (Scheme::TwoCz2, BoundaryMode::LocalTimeOptimal) => [VariantId::BulkCz2, VariantId::BoundaryCz2Local],
    }
}

fn load_or_synthesize(path: &Path, kind: GateKind, synthesize: bool) -> Result<PulseResult, BenchError> {
    if path.exists() {
        return Ok(pulse::io::load(path)?);
    }
    if !synthesize {
        return Err(BenchError::Config(format!("pulse file {} not found", path.display())));
    }
    log::info!("synthesizing {kind:?} pulse into {}", path.display());
    let out = pulse::synthesize_time_optimal(&SynthConfig::new(kind, Parametrization::Phase))?;
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    pulse::io::save(&out.pulse, path)?;
    Ok(out.pulse)
}

/// Pulses named by the config, synthesizing missing ones if allowed.
pub fn load_or_synthesize_pulses(cfg: &ExperimentConfig) -> Result<PulseSet, BenchError> {
    let needs_cz = cfg.series.iter().try_fold(false, |acc, s| {
        let o = s.gate_ordering()?;
        Ok::<_, BenchError>(acc || variants_for(o.scheme, s.boundary).iter().any(|v| v.needs(GateKind::Cz)))
    })?;
    let cz2 = load_or_synthesize(&cfg.pulses.cz2, GateKind::Cz2, cfg.pulses.synthesize_missing)?;
    let cz = match (&cfg.pulses.cz, needs_cz) {
        (Some(p), _) => Some(load_or_synthesize(p, GateKind::Cz, cfg.pulses.synthesize_missing)?),
        (None, true) => return Err(BenchError::Config("a CZ pulse path is required".into())),
        (None, false) => None,
    };
    Ok(PulseSet { cz2, cz })
}

/// Channel tables for every variant the series need, per decay rate.
pub fn provision_channels(
    cfg: &ExperimentConfig,
    pulses: &PulseSet,
) -> Result<BTreeMap<u64, ChannelSet>, BenchError> {
    let mut ids = BTreeSet::new();
    for s in &cfg.series {
        ids.extend(variants_for(s.gate_ordering()?.scheme, s.boundary));
    }
    let variants = ids
        .into_iter()
        .map(|id| ReadoutVariant::build(id, pulses))
        .collect::<Result<Vec<_>, _>>()?;
    let cache = ChannelCache::new(&cfg.cache_dir)?;
    let opts = ExtractOptions::default();
    let mut out = BTreeMap::new();
    for &g in &cfg.gammas {
        let set = variants
            .par_iter()
            .map(|v| Ok((v.id, cache.get_or_extract(v, g, &opts)?)))
            .collect::<Result<ChannelSet, BenchError>>()?;
        out.insert(g.to_bits(), set);
    }
    Ok(out)
}

struct Point<'a> {
    series: &'a Series,
    basis: MemoryBasis,
    distance: usize,
    gamma_index: usize,
    seed: u64,
}

fn run_point(
    cfg: &ExperimentConfig,
    pt: &Point,
    channels: &ChannelSet,
) -> Result<ResultRecord, BenchError> {
    let layout = CodeLayout::new(pt.distance)?;
    let spec = MemorySpec {
        ordering: pt.series.gate_ordering()?,
        basis: pt.basis,
        rounds: pt.distance,
        boundary: pt.series.boundary,
    };
    let circuit = build_memory_circuit(&layout, &spec, channels)?;
    let dem = build_dem(&circuit)?;
    let graph = decompose_graphlike(&dem)?;
    let shots = cfg.shots_for(pt.gamma_index);
    let batch = sample_circuit(&circuit, shots, pt.seed)?;
    let predictions = decode_batch(&graph, &batch)?;
    let failures = count_failures(&batch, &predictions);
    let gamma = cfg.gammas[pt.gamma_index];
    log::info!(
        "{} {:?} D={} gamma={gamma:.3e}: {failures}/{shots}",
        pt.series.label(),
        pt.basis,
        pt.distance
    );
    Ok(ResultRecord {
        ordering: pt.series.ordering.clone(),
        boundary: pt.series.boundary,
        basis: basis_name(pt.basis).into(),
        distance: pt.distance,
        rounds: pt.distance,
        gamma,
        shots,
        failures,
        p_l: 0.0,
        sigma: 0.0,
        low_confidence: false,
        hyperedges: graph.residual.len(),
        undecomposable: graph.undecomposable().count(),
        seed: pt.seed,
    }
    .stats(cfg.min_failures))
}

fn basis_name(b: MemoryBasis) -> &'static str {
    match b {
        MemoryBasis::Z => "z",
        MemoryBasis::X => "x",
    }
}

/// Samples and decodes every point of the config. Rows come out ordered
/// by series, distance, decay rate and basis; when more than one basis
/// runs, a pooled `both` row follows each group.
pub fn run_memory_experiment(cfg: &ExperimentConfig) -> Result<Vec<ResultRecord>, BenchError> {
    cfg.validate()?;
    let pulses = load_or_synthesize_pulses(cfg)?;
    let channels = provision_channels(cfg, &pulses)?;
    let mut points = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for series in &cfg.series {
        for &distance in &cfg.distances {
            for gamma_index in 0..cfg.gammas.len() {
                for &basis in &cfg.bases {
                    points.push(Point {
                        series,
                        basis,
                        distance,
                        gamma_index,
                        seed: rng.random(),
                    });
                }
            }
        }
    }
    let rows = points
        .par_iter()
        .map(|pt| run_point(cfg, pt, &channels[&cfg.gammas[pt.gamma_index].to_bits()]))
        .collect::<Result<Vec<_>, _>>()?;
    let mut out = Vec::with_capacity(rows.len() * 3 / 2);
    for group in rows.chunks(cfg.bases.len()) {
        out.extend_from_slice(group);
        if group.len() > 1 {
            let first = &group[0];
            let mut pooled = first.clone();
            pooled.basis = "both".into();
            pooled.shots = group.iter().map(|r| r.shots).sum();
            pooled.failures = group.iter().map(|r| r.failures).sum();
            pooled.hyperedges = group.iter().map(|r| r.hyperedges).max().unwrap_or(0);
            pooled.undecomposable = group.iter().map(|r| r.undecomposable).max().unwrap_or(0);
            out.push(pooled.stats(cfg.min_failures));
        }
    }
    Ok(out)
}

/// Runs the experiment, fits every curve and assembles the report.
pub fn run_bench(cfg: &ExperimentConfig) -> Result<Report, BenchError> {
    let records = run_memory_experiment(cfg)?;
    let pulses = load_or_synthesize_pulses(cfg)?;
    let mut curves: BTreeMap<(String, String, usize, String), Vec<FitPoint>> = BTreeMap::new();
    let mut boundaries = BTreeMap::new();
    for r in &records {
        let key = (r.ordering.clone(), format!("{:?}", r.boundary), r.distance, r.basis.clone());
        boundaries.insert(key.clone(), r.boundary);
        curves.entry(key).or_default().push(r.fit_point());
    }
    let mut fits = Vec::new();
    let mut fit_failures = Vec::new();
    for (key, pts) in &curves {
        let (ordering, _, distance, basis) = key.clone();
        match fit_scaling_exponent(pts, cfg.fit_points, cfg.min_failures) {
            Ok(fit) => fits.push(FitRow {
                ordering,
                boundary: boundaries[key],
                distance,
                basis,
                fit,
            }),
            Err(e) => fit_failures.push(format!("{ordering} {:?} D={distance} {basis}: {e}", boundaries[key])),
        }
    }
    Ok(Report {
        config: cfg.clone(),
        round_time: round_time_summary(&pulses),
        records,
        fits,
        fit_failures,
    })
}
