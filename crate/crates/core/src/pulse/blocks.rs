//! Reduced propagation used inside the optimizer.
//!
//! Under the blockade projector each computational basis state only mixes
//! with a handful of Rydberg states, so the projected Hamiltonian splits
//! into small independent blocks. For CZ2:
//!
//! * `d`   : `{1, r}` for a lone data atom
//! * `m`   : `{1, r}` for the measurement atom
//! * `md`  : `{11, r1, 1r}` measurement plus one data atom
//! * `mdd` : `{111, r11, S, 1rr}` with `S` the symmetric single data excitation
//!
//! Two data atoms in `|1>` without the measurement atom evolve as a product
//! of two `d` blocks. Every computational amplitude is a power of a block
//! amplitude, which keeps one GRAPE evaluation cheap.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64 as C;

use super::{GateKind, Role};

const MAXD: usize = 4;
type V4 = [C; MAXD];
type M4 = [[C; MAXD]; MAXD];

const ZERO: C = C::new(0.0, 0.0);

#[derive(Debug, Clone, Copy)]
struct Coupling {
    lo: usize,
    hi: usize,
    role: Role,
    factor: f64,
}

#[derive(Debug, Clone)]
struct Block {
    dim: usize,
    couplings: Vec<Coupling>,
    n_m: [f64; MAXD],
    n_d: [f64; MAXD],
}

/// Which control the gradient is taken with respect to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Wrt {
    Phase,
    Detuning,
}

/// Borrowed per-segment controls.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Controls<'a> {
    pub dt: f64,
    pub amp_m: &'a [f64],
    pub amp_d: &'a [f64],
    pub phase_m: &'a [f64],
    pub phase_d: &'a [f64],
    pub det_m: &'a [f64],
    pub det_d: &'a [f64],
}

impl Controls<'_> {
    fn len(&self) -> usize {
        self.amp_m.len()
    }
}

/// Infidelity and its gradient.
#[derive(Debug, Clone)]
pub(crate) struct Objective {
    pub infidelity: f64,
    pub grad_m: Vec<f64>,
    pub grad_d: Vec<f64>,
    pub grad_theta_m: f64,
    pub grad_theta_d: f64,
}

#[derive(Debug, Clone)]
pub(crate) struct ReducedModel {
    kind: GateKind,
    blocks: Vec<Block>,
    /// For each computational state: the block it follows and the power.
    states: Vec<(Option<usize>, u32)>,
}

fn two_level(role: Role) -> Block {
    let mut b = Block {
        dim: 2,
        couplings: vec![Coupling {
            lo: 0,
            hi: 1,
            role,
            factor: 1.0,
        }],
        n_m: [0.0; MAXD],
        n_d: [0.0; MAXD],
    };
    match role {
        Role::Measurement => b.n_m[1] = 1.0,
        Role::Data => b.n_d[1] = 1.0,
    }
    b
}

fn md_block() -> Block {
    Block {
        dim: 3,
        couplings: vec![
            Coupling {
                lo: 0,
                hi: 1,
                role: Role::Measurement,
                factor: 1.0,
            },
            Coupling {
                lo: 0,
                hi: 2,
                role: Role::Data,
                factor: 1.0,
            },
        ],
        n_m: [0.0, 1.0, 0.0, 0.0],
        n_d: [0.0, 0.0, 1.0, 0.0],
    }
}

fn mdd_block() -> Block {
    let s2 = std::f64::consts::SQRT_2;
    Block {
        dim: 4,
        couplings: vec![
            Coupling {
                lo: 0,
                hi: 1,
                role: Role::Measurement,
                factor: 1.0,
            },
            Coupling {
                lo: 0,
                hi: 2,
                role: Role::Data,
                factor: s2,
            },
            Coupling {
                lo: 2,
                hi: 3,
                role: Role::Data,
                factor: s2,
            },
        ],
        n_m: [0.0, 1.0, 0.0, 0.0],
        n_d: [0.0, 0.0, 1.0, 2.0],
    }
}

impl ReducedModel {
    pub fn new(kind: GateKind) -> Self {
        match kind {
            GateKind::Cz2 => Self {
                kind,
                blocks: vec![
                    two_level(Role::Data),
                    two_level(Role::Measurement),
                    md_block(),
                    mdd_block(),
                ],
                states: vec![
                    (None, 0),
                    (Some(0), 1),
                    (Some(0), 1),
                    (Some(0), 2),
                    (Some(1), 1),
                    (Some(2), 1),
                    (Some(2), 1),
                    (Some(3), 1),
                ],
            },
            GateKind::Cz => Self {
                kind,
                blocks: vec![
                    two_level(Role::Data),
                    two_level(Role::Measurement),
                    md_block(),
                ],
                states: vec![(None, 0), (Some(0), 1), (Some(1), 1), (Some(2), 1)],
            },
        }
    }

    /// Infidelity `1 - F` for the given free phases, with exact gradients.
    pub fn objective(&self, ctrl: &Controls, theta_m: f64, theta_d: f64, wrt: Wrt) -> Objective {
        let k = ctrl.len();
        let results: Vec<(C, Vec<C>, Vec<C>)> = self
            .blocks
            .iter()
            .map(|b| propagate(b, ctrl, Some(wrt)))
            .collect();

        let d = self.kind.dim() as f64;
        let norm = 1.0 / (d * (d + 1.0));
        let u: Vec<C> = self
            .states
            .iter()
            .map(|&(b, p)| match b {
                None => C::new(1.0, 0.0),
                Some(b) => results[b].0.powu(p),
            })
            .collect();
        let phases: Vec<C> = (0..u.len())
            .map(|s| C::from_polar(1.0, -self.kind.target_phase(s, theta_m, theta_d)))
            .collect();
        let tr: C = u.iter().zip(&phases).map(|(a, b)| a * b).sum();
        let sum_sq: f64 = u.iter().map(|a| a.norm_sqr()).sum();
        let fid = norm * (tr.norm_sqr() + sum_sq);

        // dF/du_b = 2 norm Re(w_b du_b).
        let mut w = vec![ZERO; self.blocks.len()];
        for (s, &(b, p)) in self.states.iter().enumerate() {
            if let Some(b) = b {
                let chain = p as f64 * results[b].0.powu(p - 1);
                w[b] += (tr.conj() * phases[s] + u[s].conj()) * chain;
            }
        }
        let mut grad_m = vec![0.0; k];
        let mut grad_d = vec![0.0; k];
        for (b, (_, gm, gd)) in results.iter().enumerate() {
            for i in 0..k {
                grad_m[i] -= 2.0 * norm * (w[b] * gm[i]).re;
                grad_d[i] -= 2.0 * norm * (w[b] * gd[i]).re;
            }
        }

        let nd = self.kind.data_atoms();
        let mut dtr_m = ZERO;
        let mut dtr_d = ZERO;
        for s in 0..u.len() {
            let m = ((s >> nd) & 1) as f64;
            let kk = (s & ((1 << nd) - 1)).count_ones() as f64;
            let t = phases[s] * u[s] * C::new(0.0, -1.0);
            dtr_m += t * m;
            dtr_d += t * kk;
        }
        Objective {
            infidelity: 1.0 - fid,
            grad_m,
            grad_d,
            grad_theta_m: -2.0 * norm * (tr.conj() * dtr_m).re,
            grad_theta_d: -2.0 * norm * (tr.conj() * dtr_d).re,
        }
    }
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

struct SegmentPropagator {
    /// Eigenvectors, column-major by eigenvalue.
    v: [[f64; MAXD]; MAXD],
    lambda: [f64; MAXD],
    /// `V exp(-i Lambda dt) V^T` in the rotated frame.
    w: M4,
}

fn diagonalize(b: &Block, am: f64, ad: f64, dm: f64, dd: f64, dt: f64) -> SegmentPropagator {
    let n = b.dim;
    let mut h = DMatrix::<f64>::zeros(n, n);
    for c in &b.couplings {
        let a = match c.role {
            Role::Measurement => am,
            Role::Data => ad,
        };
        let x = 0.5 * a * c.factor;
        h[(c.hi, c.lo)] += x;
        h[(c.lo, c.hi)] += x;
    }
    for i in 0..n {
        h[(i, i)] = dm * b.n_m[i] + dd * b.n_d[i];
    }
    let eig = SymmetricEigen::new(h);
    let mut v = [[0.0; MAXD]; MAXD];
    let mut lambda = [0.0; MAXD];
    for j in 0..n {
        lambda[j] = eig.eigenvalues[j];
        for i in 0..n {
            v[i][j] = eig.eigenvectors[(i, j)];
        }
    }
    let mut w = [[ZERO; MAXD]; MAXD];
    let ph: Vec<C> = (0..n).map(|j| C::from_polar(1.0, -lambda[j] * dt)).collect();
    for i in 0..n {
        for k in 0..n {
            let mut acc = ZERO;
            for j in 0..n {
                acc += ph[j] * (v[i][j] * v[k][j]);
            }
            w[i][k] = acc;
        }
    }
    SegmentPropagator { v, lambda, w }
}

/// Propagates the block's computational state through all segments.
///
/// Returns the final amplitude on the computational state and, if asked,
/// its derivative with respect to each segment's measurement and data
/// control.
fn propagate(b: &Block, ctrl: &Controls, wrt: Option<Wrt>) -> (C, Vec<C>, Vec<C>) {
    let k = ctrl.len();
    let n = b.dim;
    let dt = ctrl.dt;
    let mut props: Vec<SegmentPropagator> = Vec::with_capacity(k);
    let mut us: Vec<M4> = Vec::with_capacity(k);
    let mut last: Option<(f64, f64, f64, f64)> = None;
    for s in 0..k {
        let key = (ctrl.amp_m[s], ctrl.amp_d[s], ctrl.det_m[s], ctrl.det_d[s]);
        let p = if last == Some(key) {
            let prev = props.last().unwrap();
            SegmentPropagator {
                v: prev.v,
                lambda: prev.lambda,
                w: prev.w,
            }
        } else {
            diagonalize(b, key.0, key.1, key.2, key.3, dt)
        };
        last = Some(key);
        let mut rot = [ZERO; MAXD];
        for i in 0..n {
            rot[i] = C::from_polar(1.0, ctrl.phase_m[s] * b.n_m[i] + ctrl.phase_d[s] * b.n_d[i]);
        }
        let mut u = [[ZERO; MAXD]; MAXD];
        for i in 0..n {
            for j in 0..n {
                u[i][j] = rot[i] * p.w[i][j] * rot[j].conj();
            }
        }
        props.push(p);
        us.push(u);
    }

    let mut psi: Vec<V4> = Vec::with_capacity(k + 1);
    let mut cur = [ZERO; MAXD];
    cur[0] = C::new(1.0, 0.0);
    psi.push(cur);
    for u in &us {
        let mut next = [ZERO; MAXD];
        for i in 0..n {
            let mut acc = ZERO;
            for j in 0..n {
                acc += u[i][j] * cur[j];
            }
            next[i] = acc;
        }
        cur = next;
        psi.push(cur);
    }
    let amp = cur[0];
    let Some(wrt) = wrt else {
        return (amp, Vec::new(), Vec::new());
    };

    let mut gm = vec![ZERO; k];
    let mut gd = vec![ZERO; k];
    let mut chi = [ZERO; MAXD];
    chi[0] = C::new(1.0, 0.0);
    let expect = |a: &V4, bb: &V4, nn: &[f64; MAXD]| -> C {
        let mut acc = ZERO;
        for i in 0..n {
            acc += a[i].conj() * bb[i] * nn[i];
        }
        acc
    };
    for s in (0..k).rev() {
        // chi is chi_s (co-state after segment s), psi[s+1] the state after it.
        let mut prev = [ZERO; MAXD];
        for j in 0..n {
            let mut acc = ZERO;
            for i in 0..n {
                acc += us[s][i][j].conj() * chi[i];
            }
            prev[j] = acc;
        }
        match wrt {
            Wrt::Phase => {
                let i_unit = C::new(0.0, 1.0);
                gm[s] = i_unit
                    * (expect(&chi, &psi[s + 1], &b.n_m) - expect(&prev, &psi[s], &b.n_m));
                gd[s] = i_unit
                    * (expect(&chi, &psi[s + 1], &b.n_d) - expect(&prev, &psi[s], &b.n_d));
            }
            Wrt::Detuning => {
                let p = &props[s];
                let mut a = [ZERO; MAXD];
                let mut bb = [ZERO; MAXD];
                for i in 0..n {
                    let r = C::from_polar(
                        1.0,
                        -(ctrl.phase_m[s] * b.n_m[i] + ctrl.phase_d[s] * b.n_d[i]),
                    );
                    let x = r * chi[i];
                    let y = r * psi[s][i];
                    for j in 0..n {
                        a[j] += x * p.v[i][j];
                        bb[j] += y * p.v[i][j];
                    }
                }
                let mut g = [[ZERO; MAXD]; MAXD];
                for i in 0..n {
                    for j in 0..n {
                        let sum = p.lambda[i] + p.lambda[j];
                        let diff = p.lambda[i] - p.lambda[j];
                        g[i][j] = C::new(0.0, -dt)
                            * C::from_polar(1.0, -0.5 * sum * dt)
                            * sinc(0.5 * diff * dt);
                    }
                }
                let mut acc_m = ZERO;
                let mut acc_d = ZERO;
                for i in 0..n {
                    for j in 0..n {
                        let mut tm = 0.0;
                        let mut td = 0.0;
                        for l in 0..n {
                            tm += p.v[l][i] * b.n_m[l] * p.v[l][j];
                            td += p.v[l][i] * b.n_d[l] * p.v[l][j];
                        }
                        let base = a[i].conj() * g[i][j] * bb[j];
                        acc_m += base * tm;
                        acc_d += base * td;
                    }
                }
                gm[s] = acc_m;
                gd[s] = acc_d;
            }
        }
        chi = prev;
    }
    (amp, gm, gd)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{RngExt, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    struct Owned {
        amp_m: Vec<f64>,
        amp_d: Vec<f64>,
        phase_m: Vec<f64>,
        phase_d: Vec<f64>,
        det_m: Vec<f64>,
        det_d: Vec<f64>,
        dt: f64,
    }

    impl Owned {
        fn random(k: usize, seed: u64) -> Self {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut r = |s: f64| (0..k).map(|_| s * (rng.random::<f64>() - 0.5)).collect();
            Self {
                amp_m: vec![1.0; k],
                amp_d: vec![1.0; k],
                phase_m: r(4.0),
                phase_d: r(4.0),
                det_m: r(2.0),
                det_d: r(2.0),
                dt: 0.4,
            }
        }

        fn view(&self) -> Controls<'_> {
            Controls {
                dt: self.dt,
                amp_m: &self.amp_m,
                amp_d: &self.amp_d,
                phase_m: &self.phase_m,
                phase_d: &self.phase_d,
                det_m: &self.det_m,
                det_d: &self.det_d,
            }
        }
    }

    fn check_gradient(kind: GateKind, wrt: Wrt) {
        let model = ReducedModel::new(kind);
        let mut c = Owned::random(12, 7);
        let (tm, td) = (0.4, -1.1);
        let obj = model.objective(&c.view(), tm, td, wrt);
        let h = 1e-6;
        for s in [0usize, 5, 11] {
            for role in 0..2 {
                let track = match (wrt, role) {
                    (Wrt::Phase, 0) => &mut c.phase_m,
                    (Wrt::Phase, _) => &mut c.phase_d,
                    (Wrt::Detuning, 0) => &mut c.det_m,
                    (Wrt::Detuning, _) => &mut c.det_d,
                };
                track[s] += h;
                let plus = model.objective(&c.view(), tm, td, wrt).infidelity;
                let track = match (wrt, role) {
                    (Wrt::Phase, 0) => &mut c.phase_m,
                    (Wrt::Phase, _) => &mut c.phase_d,
                    (Wrt::Detuning, 0) => &mut c.det_m,
                    (Wrt::Detuning, _) => &mut c.det_d,
                };
                track[s] -= 2.0 * h;
                let minus = model.objective(&c.view(), tm, td, wrt).infidelity;
                let track = match (wrt, role) {
                    (Wrt::Phase, 0) => &mut c.phase_m,
                    (Wrt::Phase, _) => &mut c.phase_d,
                    (Wrt::Detuning, 0) => &mut c.det_m,
                    (Wrt::Detuning, _) => &mut c.det_d,
                };
                track[s] += h;
                let fd = (plus - minus) / (2.0 * h);
                let an = if role == 0 {
                    obj.grad_m[s]
                } else {
                    obj.grad_d[s]
                };
                assert!((fd - an).abs() < 1e-7, "{kind:?} {wrt:?} seg {s} role {role}: fd {fd} vs {an}");
            }
        }
        let fd_t = (model.objective(&c.view(), tm + h, td, wrt).infidelity
            - model.objective(&c.view(), tm - h, td, wrt).infidelity)
            / (2.0 * h);
        assert!((fd_t - obj.grad_theta_m).abs() < 1e-7);
        let fd_t = (model.objective(&c.view(), tm, td + h, wrt).infidelity
            - model.objective(&c.view(), tm, td - h, wrt).infidelity)
            / (2.0 * h);
        assert!((fd_t - obj.grad_theta_d).abs() < 1e-7);
    }

    #[test]
    fn phase_gradient_matches_finite_differences() {
        check_gradient(GateKind::Cz2, Wrt::Phase);
        check_gradient(GateKind::Cz, Wrt::Phase);
    }

    #[test]
    fn detuning_gradient_matches_finite_differences() {
        check_gradient(GateKind::Cz2, Wrt::Detuning);
        check_gradient(GateKind::Cz, Wrt::Detuning);
    }

    #[test]
    fn block_amplitudes_stay_unitary() {
        let model = ReducedModel::new(GateKind::Cz2);
        let c = Owned::random(30, 3);
        for b in &model.blocks {
            assert!(propagate(b, &c.view(), None).0.norm() <= 1.0 + 1e-12);
        }
    }
}
