//! Full-space evaluation of a waveform.
//!
//! Works on the complete projected Hilbert space of the gate (27 levels for
//! CZ2 minus the blockaded ones) and exponentiates each segment's complex
//! Hamiltonian directly, so it shares no propagation code with the
//! optimizer.

use argmin::core::{CostFunction, Executor};
use argmin::solver::brent::BrentOpt;
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64 as C;

use super::{ControlWaveform, GateKind, PulseError, Role};

const SCAN_POINTS: usize = 720;

/// Projected Hilbert space of one gate.
#[derive(Debug, Clone)]
pub(crate) struct GateSpace {
    pub atoms: usize,
    /// Level (0, 1 or 2 = r) of every atom for each kept state.
    pub levels: Vec<Vec<u8>>,
    /// Position of each computational state in `levels`.
    pub computational: Vec<usize>,
}

impl GateSpace {
    pub fn new(kind: GateKind) -> Self {
        let atoms = kind.atoms();
        let total = 3usize.pow(atoms as u32);
        let mut levels = Vec::new();
        for idx in 0..total {
            let mut l = vec![0u8; atoms];
            let mut rest = idx;
            for a in (0..atoms).rev() {
                l[a] = (rest % 3) as u8;
                rest /= 3;
            }
            let blockaded = l[0] == 2 && l[1..].contains(&2);
            if !blockaded {
                levels.push(l);
            }
        }
        let computational = (0..kind.dim())
            .map(|s| {
                let want: Vec<u8> = (0..atoms)
                    .map(|a| ((s >> (atoms - 1 - a)) & 1) as u8)
                    .collect();
                levels.iter().position(|l| *l == want).unwrap()
            })
            .collect();
        Self {
            atoms,
            levels,
            computational,
        }
    }

    pub fn dim(&self) -> usize {
        self.levels.len()
    }

    pub fn role(a: usize) -> Role {
        if a == 0 {
            Role::Measurement
        } else {
            Role::Data
        }
    }

    /// Real symmetric part of the segment Hamiltonian (phases stripped)
    /// and the per-state phase that dresses it.
    pub fn segment(&self, w: &ControlWaveform, k: usize) -> (DMatrix<f64>, Vec<f64>) {
        let n = self.dim();
        let mut h = DMatrix::<f64>::zeros(n, n);
        let mut theta = vec![0.0; n];
        for (i, l) in self.levels.iter().enumerate() {
            for a in 0..self.atoms {
                let d = w.drive(Self::role(a));
                if l[a] == 2 {
                    h[(i, i)] += d.detuning[k];
                    theta[i] += d.phase[k];
                }
                if l[a] == 1 {
                    let mut up = l.clone();
                    up[a] = 2;
                    if let Some(j) = self.levels.iter().position(|x| *x == up) {
                        let x = 0.5 * d.amplitude[k];
                        h[(i, j)] += x;
                        h[(j, i)] += x;
                    }
                }
            }
        }
        (h, theta)
    }
}

/// Projected propagator over the full (non-blockaded) space.
#[derive(Debug, Clone)]
pub struct FullPropagator {
    pub atoms: usize,
    /// Level of every atom (0, 1, 2 = r) for each row/column.
    pub levels: Vec<Vec<u8>>,
    pub matrix: DMatrix<C>,
}

impl FullPropagator {
    pub fn index_of(&self, levels: &[u8]) -> Option<usize> {
        self.levels.iter().position(|l| l == levels)
    }
}

/// Propagator of the waveform on the projected space, by direct matrix
/// exponentiation of each segment.
pub fn full_propagator(w: &ControlWaveform, kind: GateKind) -> Result<FullPropagator, PulseError> {
    w.validate()?;
    let space = GateSpace::new(kind);
    let n = space.dim();
    let dt = w.segment_duration();
    let mut u = DMatrix::<C>::identity(n, n);
    for k in 0..w.segment_count() {
        let (h, theta) = space.segment(w, k);
        let hc = DMatrix::<C>::from_fn(n, n, |i, j| {
            C::from_polar(h[(i, j)], theta[i] - theta[j]) * C::new(0.0, -dt)
        });
        u = hc.exp() * u;
    }
    Ok(FullPropagator {
        atoms: space.atoms,
        levels: space.levels,
        matrix: u,
    })
}

/// Outcome of the phase-optimized fidelity evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FidelityReport {
    pub infidelity: f64,
    pub theta_m: f64,
    pub theta_d: f64,
}

/// `1 - F` after optimizing the free single-qubit phases.
pub fn evaluate_fidelity(w: &ControlWaveform, kind: GateKind) -> Result<f64, PulseError> {
    Ok(evaluate_with_phases(w, kind)?.infidelity)
}

pub fn evaluate_with_phases(
    w: &ControlWaveform,
    kind: GateKind,
) -> Result<FidelityReport, PulseError> {
    let prop = full_propagator(w, kind)?;
    let space = GateSpace::new(kind);
    let d = kind.dim();
    let uc = DMatrix::<C>::from_fn(d, d, |i, j| {
        prop.matrix[(space.computational[i], space.computational[j])]
    });
    Ok(optimize_phases(kind, &uc))
}

struct PhaseSums {
    /// `c[m][k]`: sum of diagonal entries with measurement bit `m` and `k`
    /// data atoms in `|1>`, including the `(-1)^{mk}` target sign.
    c: [Vec<C>; 2],
}

impl PhaseSums {
    fn overlap(&self, theta_d: f64) -> (C, C) {
        let z = C::from_polar(1.0, -theta_d);
        let a = self.c[0].iter().rev().fold(C::new(0.0, 0.0), |acc, &x| acc * z + x);
        let b = self.c[1].iter().rev().fold(C::new(0.0, 0.0), |acc, &x| acc * z + x);
        (a, b)
    }

    fn best_abs(&self, theta_d: f64) -> f64 {
        let (a, b) = self.overlap(theta_d);
        a.norm() + b.norm()
    }
}

impl CostFunction for &PhaseSums {
    type Param = f64;
    type Output = f64;

    fn cost(&self, theta_d: &f64) -> Result<f64, argmin::core::Error> {
        Ok(-self.best_abs(*theta_d))
    }
}

fn optimize_phases(kind: GateKind, uc: &DMatrix<C>) -> FidelityReport {
    let nd = kind.data_atoms();
    let d = kind.dim();
    let mut c = [vec![C::new(0.0, 0.0); nd + 1], vec![C::new(0.0, 0.0); nd + 1]];
    for s in 0..d {
        let m = (s >> nd) & 1;
        let k = (s & ((1 << nd) - 1)).count_ones() as usize;
        let sign = if m * k % 2 == 1 { -1.0 } else { 1.0 };
        c[m][k] += uc[(s, s)] * sign;
    }
    let sums = PhaseSums { c };
    let step = 2.0 * std::f64::consts::PI / SCAN_POINTS as f64;
    let (best_i, _) = (0..SCAN_POINTS)
        .map(|i| (i, sums.best_abs(i as f64 * step)))
        .fold((0, f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc });
    let centre = best_i as f64 * step;
    let solver = BrentOpt::new(centre - step, centre + step).set_tolerance(1e-14, 1e-14);
    let theta_d = Executor::new(&sums, solver)
        .configure(|s| s.max_iters(200))
        .run()
        .ok()
        .and_then(|r| r.state.best_param)
        .unwrap_or(centre);
    let theta_d = if sums.best_abs(theta_d) >= sums.best_abs(centre) {
        theta_d
    } else {
        centre
    };
    let (a, b) = sums.overlap(theta_d);
    let theta_m = b.arg() - a.arg();
    let tr = a.norm() + b.norm();
    let frob: f64 = uc.iter().map(|x| x.norm_sqr()).sum();
    let df = d as f64;
    let fid = (tr * tr + frob) / (df * (df + 1.0));
    FidelityReport {
        infidelity: (1.0 - fid).max(0.0),
        theta_m: wrap(theta_m),
        theta_d: wrap(theta_d),
    }
}

fn wrap(x: f64) -> f64 {
    let tau = 2.0 * std::f64::consts::PI;
    let y = x.rem_euclid(tau);
    if y > std::f64::consts::PI {
        y - tau
    } else {
        y
    }
}

/// Time spent in `|r>` by the measurement atom and by the data atoms,
/// averaged uniformly over the computational basis states.
///
/// The data figure is the total over all data atoms driven by the global
/// data laser (the two atoms of a CZ2 gate share one waveform).
pub fn rydberg_occupation_times(
    w: &ControlWaveform,
    kind: GateKind,
) -> Result<(f64, f64), PulseError> {
    w.validate()?;
    let space = GateSpace::new(kind);
    let n = space.dim();
    let dt = w.segment_duration();
    let n_m: Vec<f64> = space
        .levels
        .iter()
        .map(|l| if l[0] == 2 { 1.0 } else { 0.0 })
        .collect();
    let n_d: Vec<f64> = space
        .levels
        .iter()
        .map(|l| l[1..].iter().filter(|&&x| x == 2).count() as f64)
        .collect();

    let mut states: Vec<DVector<C>> = space
        .computational
        .iter()
        .map(|&i| {
            let mut v = DVector::<C>::zeros(n);
            v[i] = C::new(1.0, 0.0);
            v
        })
        .collect();
    let mut t_m = 0.0;
    let mut t_d = 0.0;
    for k in 0..w.segment_count() {
        let (h, theta) = space.segment(w, k);
        let eig = SymmetricEigen::new(h);
        let v = &eig.eigenvectors;
        let lam = &eig.eigenvalues;
        let nm_t = v.transpose() * DMatrix::from_diagonal(&DVector::from_vec(n_m.clone())) * v;
        let nd_t = v.transpose() * DMatrix::from_diagonal(&DVector::from_vec(n_d.clone())) * v;
        let integral = DMatrix::<C>::from_fn(n, n, |i, j| {
            let x = lam[i] - lam[j];
            if (x * dt).abs() < 1e-9 {
                C::new(dt, 0.0)
            } else {
                (C::from_polar(1.0, x * dt) - 1.0) / C::new(0.0, x)
            }
        });
        for psi in states.iter_mut() {
            let c: DVector<C> = DVector::from_fn(n, |j, _| {
                (0..n)
                    .map(|i| v[(i, j)] * C::from_polar(1.0, -theta[i]) * psi[i])
                    .sum::<C>()
            });
            for i in 0..n {
                for j in 0..n {
                    let base = c[i].conj() * c[j] * integral[(i, j)];
                    t_m += (base * nm_t[(i, j)]).re;
                    t_d += (base * nd_t[(i, j)]).re;
                }
            }
            let evolved: Vec<C> = (0..n).map(|j| c[j] * C::from_polar(1.0, -lam[j] * dt)).collect();
            for i in 0..n {
                let x: C = (0..n).map(|j| v[(i, j)] * evolved[j]).sum();
                psi[i] = x * C::from_polar(1.0, theta[i]);
            }
        }
    }
    let norm = states.len() as f64;
    Ok((t_m / norm, t_d / norm))
}
