//! GRAPE synthesis and the outer duration search.

use std::cell::RefCell;

use argmin::core::{CostFunction, Executor, Gradient};
use argmin::solver::linesearch::MoreThuenteLineSearch;
use argmin::solver::quasinewton::LBFGS;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::blocks::{Controls, ReducedModel, Wrt};
use super::{
    evaluate::rydberg_occupation_times, ControlWaveform, GateKind, Parametrization, PulseError,
    PulseResult, RoleDrive,
};

/// Coarse duration grid scanned before bisection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DurationScan {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub kind: GateKind,
    pub parametrization: Parametrization,
    pub segments: usize,
    pub seed: u64,
    pub infidelity_goal: f64,
    pub restarts: usize,
    /// L-BFGS iterations per restart.
    pub max_iters: u64,
    /// Extra iterations spent on the final pulse after the search.
    pub polish_iters: u64,
    pub scan: DurationScan,
    /// Relative width at which bisection stops.
    pub resolution: f64,
}

impl SynthConfig {
    pub fn new(kind: GateKind, parametrization: Parametrization) -> Self {
        let scan = match kind {
            GateKind::Cz2 => DurationScan {
                lo: 9.0,
                hi: 12.0,
                step: 0.5,
            },
            GateKind::Cz => DurationScan {
                lo: 6.5,
                hi: 9.0,
                step: 0.5,
            },
        };
        Self {
            kind,
            parametrization,
            segments: 500,
            seed: 1,
            infidelity_goal: 1e-6,
            restarts: 20,
            max_iters: 1500,
            polish_iters: 3000,
            scan,
            resolution: 0.005,
        }
    }

    fn validate(&self) -> Result<(), PulseError> {
        let bad = |m: &str| Err(PulseError::InvalidArgument(m.to_string()));
        if self.segments < 100 {
            return bad("at least 100 segments are required");
        }
        if !(self.infidelity_goal > 0.0) {
            return bad("infidelity goal must be positive");
        }
        if self.restarts == 0 {
            return bad("at least one restart is required");
        }
        let s = self.scan;
        if !(s.lo > 0.0 && s.hi > s.lo && s.step > 0.0) {
            return bad("duration scan must satisfy 0 < lo < hi and step > 0");
        }
        if !(self.resolution > 0.0) {
            return bad("resolution must be positive");
        }
        if let Parametrization::DetuningCutoff { cutoff } = self.parametrization {
            if !(cutoff > 0.0) {
                return bad("detuning cutoff must be positive");
            }
        }
        Ok(())
    }
}

/// Result of the time-optimal search.
#[derive(Debug, Clone)]
pub struct SynthOutcome {
    pub pulse: PulseResult,
    /// Every duration tried, with the best infidelity found there.
    pub history: Vec<(f64, f64)>,
}

impl SynthOutcome {
    /// Best infidelity over all tried durations not exceeding `upper`.
    pub fn best_up_to(&self, upper: f64) -> f64 {
        self.history
            .iter()
            .filter(|(t, _)| *t <= upper)
            .map(|(_, f)| *f)
            .fold(f64::INFINITY, f64::min)
    }
}

struct Problem<'a> {
    model: &'a ReducedModel,
    parametrization: Parametrization,
    segments: usize,
    duration: f64,
    ones: Vec<f64>,
    zeros: Vec<f64>,
    cache: RefCell<Option<(Vec<f64>, f64, Vec<f64>)>>,
    best: RefCell<Option<(f64, Vec<f64>)>>,
}

impl<'a> Problem<'a> {
    fn new(model: &'a ReducedModel, cfg: &SynthConfig, duration: f64) -> Self {
        Self {
            model,
            parametrization: cfg.parametrization,
            segments: cfg.segments,
            duration,
            ones: vec![1.0; cfg.segments],
            zeros: vec![0.0; cfg.segments],
            cache: RefCell::new(None),
            best: RefCell::new(None),
        }
    }

    fn eval(&self, x: &[f64]) -> (f64, Vec<f64>) {
        if let Some((cx, c, g)) = self.cache.borrow().as_ref() {
            if cx.as_slice() == x {
                return (*c, g.clone());
            }
        }
        let k = self.segments;
        let dt = self.duration / k as f64;
        let (cost, grad) = match self.parametrization {
            Parametrization::Phase => {
                let ctrl = Controls {
                    dt,
                    amp_m: &self.ones,
                    amp_d: &self.ones,
                    phase_m: &x[..k],
                    phase_d: &x[k..2 * k],
                    det_m: &self.zeros,
                    det_d: &self.zeros,
                };
                let o = self.model.objective(&ctrl, x[2 * k], x[2 * k + 1], Wrt::Phase);
                let mut g = o.grad_m;
                g.extend(o.grad_d);
                g.push(o.grad_theta_m);
                g.push(o.grad_theta_d);
                (o.infidelity, g)
            }
            Parametrization::DetuningCutoff { cutoff } => {
                let det: Vec<f64> = x[..2 * k].iter().map(|y| cutoff * y.tanh()).collect();
                let ctrl = Controls {
                    dt,
                    amp_m: &self.ones,
                    amp_d: &self.ones,
                    phase_m: &self.zeros,
                    phase_d: &self.zeros,
                    det_m: &det[..k],
                    det_d: &det[k..],
                };
                let o = self.model.objective(&ctrl, x[2 * k], x[2 * k + 1], Wrt::Detuning);
                let mut g: Vec<f64> = o.grad_m.into_iter().chain(o.grad_d).collect();
                for (gi, y) in g.iter_mut().zip(&x[..2 * k]) {
                    let t = y.tanh();
                    *gi *= cutoff * (1.0 - t * t);
                }
                g.push(o.grad_theta_m);
                g.push(o.grad_theta_d);
                (o.infidelity, g)
            }
        };
        {
            let mut best = self.best.borrow_mut();
            if best.as_ref().is_none_or(|(b, _)| cost < *b) {
                *best = Some((cost, x.to_vec()));
            }
        }
        *self.cache.borrow_mut() = Some((x.to_vec(), cost, grad.clone()));
        (cost, grad)
    }
}

/// Runs L-BFGS from `x0` and returns the best point visited.
fn descend(
    model: &ReducedModel,
    cfg: &SynthConfig,
    duration: f64,
    x0: Vec<f64>,
    iters: u64,
    target: f64,
) -> (f64, Vec<f64>) {
    let problem = Problem::new(model, cfg, duration);
    let start_cost = problem.eval(&x0).0;
    let best_start = (start_cost, x0.clone());
    let solver = LBFGS::new(MoreThuenteLineSearch::new(), 12)
        .with_tolerance_grad(1e-14)
        .and_then(|s| s.with_tolerance_cost(0.0));
    if let Ok(solver) = solver {
        let run = Executor::new(&problem, solver)
            .configure(|s| s.param(x0).max_iters(iters).target_cost(target))
            .run();
        if let Err(e) = run {
            log::debug!("L-BFGS stopped early at T = {duration}: {e}");
        }
    }
    problem.best.into_inner().unwrap_or(best_start)
}

impl CostFunction for &Problem<'_> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, x: &Vec<f64>) -> Result<f64, argmin::core::Error> {
        Ok(self.eval(x).0)
    }
}

impl Gradient for &Problem<'_> {
    type Param = Vec<f64>;
    type Gradient = Vec<f64>;

    fn gradient(&self, x: &Vec<f64>) -> Result<Vec<f64>, argmin::core::Error> {
        Ok(self.eval(x).1)
    }
}

fn restart_rng(seed: u64, restart: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(restart as u64);
    rng
}

/// Smooth random control tracks built from a few Fourier modes.
fn random_start(cfg: &SynthConfig, restart: usize) -> Vec<f64> {
    let mut rng = restart_rng(cfg.seed, restart);
    let k = cfg.segments;
    let scale = match cfg.parametrization {
        Parametrization::Phase => 2.0,
        // Keep the initial detuning near 1.5 whatever the cutoff.
        Parametrization::DetuningCutoff { cutoff } => (1.5 / cutoff).min(0.5),
    };
    let mut x = Vec::with_capacity(2 * k + 2);
    for _ in 0..2 {
        let modes: Vec<(f64, f64)> = (1..=6)
            .map(|j| {
                let amp = scale * (2.0 * rng.random::<f64>() - 1.0) / j as f64;
                let off = 2.0 * std::f64::consts::PI * rng.random::<f64>();
                (amp, off)
            })
            .collect();
        for s in 0..k {
            let t = (s as f64 + 0.5) / k as f64;
            let v: f64 = modes
                .iter()
                .enumerate()
                .map(|(j, (a, o))| a * ((j + 1) as f64 * std::f64::consts::PI * t + o).sin())
                .sum();
            x.push(v);
        }
    }
    x.push(std::f64::consts::PI * (2.0 * rng.random::<f64>() - 1.0));
    x.push(std::f64::consts::PI * (2.0 * rng.random::<f64>() - 1.0));
    x
}

/// Best of all restarts at a fixed duration.
///
/// Restart 0 is seeded from `warm` when given. Restarts run in batches
/// sized to the thread pool and the search stops at the first batch that
/// reaches the goal; the lowest successful restart index wins so the
/// result does not depend on the thread count.
fn attempt(
    model: &ReducedModel,
    cfg: &SynthConfig,
    duration: f64,
    warm: Option<&[f64]>,
) -> (f64, Vec<f64>) {
    let batch = rayon::current_num_threads().max(1);
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut r0 = 0;
    while r0 < cfg.restarts {
        let r1 = (r0 + batch).min(cfg.restarts);
        let results: Vec<(f64, Vec<f64>)> = (r0..r1)
            .into_par_iter()
            .map(|r| {
                let x0 = match (r, warm) {
                    (0, Some(w)) => w.to_vec(),
                    _ => random_start(cfg, r),
                };
                descend(model, cfg, duration, x0, cfg.max_iters, cfg.infidelity_goal)
            })
            .collect();
        for res in results {
            if res.0 <= cfg.infidelity_goal {
                return res;
            }
            if best.as_ref().is_none_or(|b| res.0 < b.0) {
                best = Some(res);
            }
        }
        r0 = r1;
    }
    best.expect("at least one restart")
}

fn to_waveform(cfg: &SynthConfig, duration: f64, x: &[f64]) -> ControlWaveform {
    let k = cfg.segments;
    let mut m = RoleDrive::constant(k, 1.0);
    let mut d = RoleDrive::constant(k, 1.0);
    match cfg.parametrization {
        Parametrization::Phase => {
            m.phase = x[..k].to_vec();
            d.phase = x[k..2 * k].to_vec();
        }
        Parametrization::DetuningCutoff { cutoff } => {
            m.detuning = x[..k].iter().map(|y| cutoff * y.tanh()).collect();
            d.detuning = x[k..2 * k].iter().map(|y| cutoff * y.tanh()).collect();
        }
    }
    ControlWaveform {
        parametrization: cfg.parametrization,
        total_duration: duration,
        measurement: m,
        data: d,
    }
}

fn finish(cfg: &SynthConfig, duration: f64, inf: f64, x: &[f64]) -> Result<PulseResult, PulseError> {
    let k = cfg.segments;
    let waveform = to_waveform(cfg, duration, x);
    let (tm, td) = rydberg_occupation_times(&waveform, cfg.kind)?;
    Ok(PulseResult {
        kind: cfg.kind,
        waveform,
        theta_m: x[2 * k],
        theta_d: x[2 * k + 1],
        infidelity: inf,
        rydberg_time_m: tm,
        rydberg_time_d: td,
    })
}

/// Optimizes the controls at one fixed duration and returns the best
/// pulse found, whether or not it meets the goal.
pub fn optimize_at_duration(cfg: &SynthConfig, duration: f64) -> Result<PulseResult, PulseError> {
    cfg.validate()?;
    if !(duration > 0.0) {
        return Err(PulseError::InvalidArgument("duration must be positive".into()));
    }
    let model = ReducedModel::new(cfg.kind);
    let (inf, x) = attempt(&model, cfg, duration, None);
    finish(cfg, duration, inf, &x)
}

/// Finds the shortest duration on which the goal infidelity is reachable.
///
/// The coarse grid is walked downward from `scan.hi`, warm-starting each
/// point from the last feasible solution, until a point fails. The
/// bracket between the last success and the first failure is then bisected
/// to `resolution`, and the final pulse is polished.
pub fn synthesize_time_optimal(cfg: &SynthConfig) -> Result<SynthOutcome, PulseError> {
    cfg.validate()?;
    let model = ReducedModel::new(cfg.kind);
    let goal = cfg.infidelity_goal;
    let mut history = Vec::new();

    let mut grid = Vec::new();
    let mut t = cfg.scan.hi;
    while t >= cfg.scan.lo - 1e-12 {
        grid.push(t);
        t -= cfg.scan.step;
    }

    let mut feasible: Option<(f64, f64, Vec<f64>)> = None;
    let mut infeasible: Option<f64> = None;
    let mut last_best = f64::INFINITY;
    for &t in &grid {
        let warm = feasible.as_ref().map(|f| f.2.as_slice());
        let (inf, x) = attempt(&model, cfg, t, warm);
        log::info!("T = {t:.4}: best infidelity {inf:.3e}");
        history.push((t, inf));
        last_best = inf;
        if inf <= goal {
            feasible = Some((t, inf, x));
        } else {
            infeasible = Some(t);
            break;
        }
    }
    let Some(mut feasible) = feasible else {
        return Err(PulseError::NoFeasibleDuration {
            lo: cfg.scan.lo,
            hi: cfg.scan.hi,
            best: last_best,
        });
    };
    let Some(mut lo) = infeasible else {
        return Err(PulseError::BracketTooHigh {
            lo: feasible.0,
            best: feasible.1,
        });
    };

    while (feasible.0 - lo) / feasible.0 > cfg.resolution {
        let mid = 0.5 * (lo + feasible.0);
        let (inf, x) = attempt(&model, cfg, mid, Some(&feasible.2));
        log::info!("T = {mid:.4}: best infidelity {inf:.3e}");
        history.push((mid, inf));
        if inf <= goal {
            feasible = (mid, inf, x);
        } else {
            lo = mid;
        }
    }

    let (t, inf, x) = feasible;
    let (inf, x) = if cfg.polish_iters > 0 {
        let polished = descend(&model, cfg, t, x.clone(), cfg.polish_iters, 0.0);
        if polished.0 < inf {
            polished
        } else {
            (inf, x)
        }
    } else {
        (inf, x)
    };
    if inf > goal {
        return Err(PulseError::NotConverged {
            goal,
            best: inf,
            duration: t,
        });
    }
    Ok(SynthOutcome {
        pulse: finish(cfg, t, inf, &x)?,
        history,
    })
}
