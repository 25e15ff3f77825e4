//! Open-system dynamics of driven three-level atom registers.
//!
//! Every atom has levels `|0>`, `|1>` and `|r>`. Drives couple `|1>` and
//! `|r>`; the measurement atom blockades each data atom it is paired with.
//! Rydberg decay acts through two collapse operators per atom,
//! `sqrt(gamma/2) |q><r|` for `q` in `{0, 1}`, on every atom at all times.
//!
//! Full-register operators use the base-3 index with atom 0 as the most
//! significant digit and level codes `0, 1, 2 = r`.

mod dump;
pub(crate) mod engine;
pub(crate) mod space;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64 as C;
use thiserror::Error;

use crate::pulse::{ControlWaveform, Role};
use engine::{Generator, SegmentDrive, Workspace};
use space::{level_of, pow3, with_level, Space, L1, LR};

pub use dump::{read_density, write_density};

#[derive(Debug, Error)]
pub enum LindbladError {
    #[error("invalid register: {0}")]
    InvalidRegister(String),
    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),
    #[error("step-halving changed the result by {achieved:e} (tolerance {tolerance:e})")]
    Tolerance { achieved: f64, tolerance: f64 },
    #[error("operator has dimension {got}, expected {expected}")]
    Dimension { got: usize, expected: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Strength of a measurement-data blockade.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Blockade {
    /// Doubly excited pairs are projected out.
    Infinite,
    /// Energy shift `B` on the doubly excited pair.
    Finite(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct AtomRegister {
    roles: Vec<Role>,
    blockade: Vec<(usize, usize, Blockade)>,
}

impl AtomRegister {
    pub fn new(
        roles: Vec<Role>,
        blockade: Vec<(usize, usize, Blockade)>,
    ) -> Result<Self, LindbladError> {
        let bad = |m: String| Err(LindbladError::InvalidRegister(m));
        if roles.is_empty() || roles.len() > 6 {
            return bad(format!("{} atoms; 1 to 6 are supported", roles.len()));
        }
        if roles.iter().filter(|r| **r == Role::Measurement).count() != 1 {
            return bad("exactly one measurement atom is required".into());
        }
        for &(a, b, s) in &blockade {
            if a >= roles.len() || b >= roles.len() {
                return bad(format!("blockade pair ({a}, {b}) out of range"));
            }
            let mixed = (roles[a] == Role::Measurement) != (roles[b] == Role::Measurement);
            if !mixed {
                return bad(format!("blockade pair ({a}, {b}) is not measurement-data"));
            }
            if let Blockade::Finite(v) = s {
                if !v.is_finite() {
                    return bad("finite blockade strength must be finite".into());
                }
            }
        }
        Ok(Self { roles, blockade })
    }

    /// Measurement atom 0 blockading `data` data atoms `1..=data`.
    pub fn stabilizer(data: usize, blockade: Blockade) -> Self {
        let mut roles = vec![Role::Measurement];
        roles.extend(std::iter::repeat_n(Role::Data, data));
        let pairs = (1..=data).map(|d| (0, d, blockade)).collect();
        Self::new(roles, pairs).expect("well-formed stabilizer register")
    }

    pub fn len(&self) -> usize {
        self.roles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roles.is_empty()
    }

    pub fn role(&self, atom: usize) -> Role {
        self.roles[atom]
    }

    pub fn measurement(&self) -> usize {
        self.roles
            .iter()
            .position(|r| *r == Role::Measurement)
            .unwrap()
    }

    pub fn dim(&self) -> usize {
        pow3(self.len())
    }

    pub(crate) fn excluded_pairs(&self) -> Vec<(usize, usize)> {
        self.blockade
            .iter()
            .filter(|p| p.2 == Blockade::Infinite)
            .map(|p| (p.0, p.1))
            .collect()
    }

    pub(crate) fn finite_pairs(&self) -> Vec<(usize, usize, f64)> {
        self.blockade
            .iter()
            .filter_map(|p| match p.2 {
                Blockade::Finite(b) => Some((p.0, p.1, b)),
                Blockade::Infinite => None,
            })
            .collect()
    }
}

/// One gate window: a waveform played on a measurement atom and a set of
/// data atoms starting at `start`.
#[derive(Debug, Clone, PartialEq)]
pub struct DriveWindow {
    pub waveform: ControlWaveform,
    pub measurement: usize,
    pub data: Vec<usize>,
    pub start: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct DriveSchedule {
    pub windows: Vec<DriveWindow>,
}

impl DriveSchedule {
    /// Windows played back to back from `t = 0`.
    pub fn sequential(windows: Vec<(ControlWaveform, usize, Vec<usize>)>) -> Self {
        let mut t = 0.0;
        let windows = windows
            .into_iter()
            .map(|(waveform, measurement, data)| {
                let w = DriveWindow {
                    start: t,
                    measurement,
                    data,
                    waveform,
                };
                t += w.waveform.total_duration;
                w
            })
            .collect();
        Self { windows }
    }

    pub fn duration(&self) -> f64 {
        self.windows
            .iter()
            .map(|w| w.start + w.waveform.total_duration)
            .fold(0.0, f64::max)
    }

    /// Flattens the windows into constant-drive segments.
    pub(crate) fn segments(&self, reg: &AtomRegister) -> Result<Vec<SegmentDrive>, LindbladError> {
        let n = reg.len();
        let mut order: Vec<&DriveWindow> = self.windows.iter().collect();
        order.sort_by(|a, b| a.start.total_cmp(&b.start));
        let mut out = Vec::new();
        let mut t = 0.0;
        for w in order {
            w.waveform
                .validate()
                .map_err(|e| LindbladError::InvalidSchedule(e.to_string()))?;
            if w.start < t - 1e-12 {
                return Err(LindbladError::InvalidSchedule(format!(
                    "window at t = {} overlaps the previous one",
                    w.start
                )));
            }
            if w.measurement >= n || w.data.iter().any(|&d| d >= n) {
                return Err(LindbladError::InvalidSchedule(
                    "window addresses an atom outside the register".into(),
                ));
            }
            if reg.role(w.measurement) != Role::Measurement
                || w.data.iter().any(|&d| reg.role(d) != Role::Data)
            {
                return Err(LindbladError::InvalidSchedule(
                    "window roles disagree with the register".into(),
                ));
            }
            if w.start > t {
                out.push(SegmentDrive {
                    dt: w.start - t,
                    coupling: vec![C::new(0.0, 0.0); n],
                    detuning: vec![0.0; n],
                });
            }
            let dt = w.waveform.segment_duration();
            for k in 0..w.waveform.segment_count() {
                let mut coupling = vec![C::new(0.0, 0.0); n];
                let mut detuning = vec![0.0; n];
                let mut set = |atom: usize, role: Role| {
                    let d = w.waveform.drive(role);
                    coupling[atom] = C::from_polar(0.5 * d.amplitude[k], d.phase[k]);
                    detuning[atom] = d.detuning[k];
                };
                set(w.measurement, Role::Measurement);
                for &d in &w.data {
                    set(d, Role::Data);
                }
                out.push(SegmentDrive {
                    dt,
                    coupling,
                    detuning,
                });
            }
            t = w.start + w.waveform.total_duration;
        }
        Ok(out)
    }
}

/// Density operator (or any operator) on the full `3^n` register space.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    pub atoms: usize,
    pub matrix: DMatrix<C>,
}

impl DensityOperator {
    pub fn zeros(atoms: usize) -> Self {
        let d = pow3(atoms);
        Self {
            atoms,
            matrix: DMatrix::zeros(d, d),
        }
    }

    pub fn from_matrix(atoms: usize, matrix: DMatrix<C>) -> Result<Self, LindbladError> {
        let d = pow3(atoms);
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(LindbladError::Dimension {
                got: matrix.nrows(),
                expected: d,
            });
        }
        Ok(Self { atoms, matrix })
    }

    /// Full index of a product state given per-atom levels.
    pub fn index(levels: &[u8]) -> usize {
        levels.iter().fold(0, |acc, &l| acc * 3 + l as usize)
    }

    /// `|psi><phi|` for product states.
    pub fn outer(ket: &[u8], bra: &[u8]) -> Self {
        assert_eq!(ket.len(), bra.len());
        let mut rho = Self::zeros(ket.len());
        rho.matrix[(Self::index(ket), Self::index(bra))] = C::new(1.0, 0.0);
        rho
    }

    pub fn pure(levels: &[u8]) -> Self {
        Self::outer(levels, levels)
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> C {
        self.matrix.trace()
    }

    /// Largest entry of `rho - rho^dagger`.
    pub fn hermiticity_error(&self) -> f64 {
        let d = &self.matrix - self.matrix.adjoint();
        d.iter().map(|x| x.norm()).fold(0.0, f64::max)
    }

    /// `tr |A - B| / 2` of the Hermitian parts.
    pub fn trace_distance(&self, other: &DensityOperator) -> f64 {
        let d = &self.matrix - &other.matrix;
        let h = (&d + d.adjoint()) * C::new(0.5, 0.0);
        let eig = SymmetricEigen::new(h);
        0.5 * eig.eigenvalues.iter().map(|x| x.abs()).sum::<f64>()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let h = (&self.matrix + self.matrix.adjoint()) * C::new(0.5, 0.0);
        SymmetricEigen::new(h)
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// Trace of the part with no atom in `|r>`.
    pub fn qubit_trace(&self) -> C {
        (0..self.dim())
            .filter(|&i| (0..self.atoms).all(|a| level_of(i as u32, self.atoms, a) != LR))
            .map(|i| self.matrix[(i, i)])
            .sum()
    }
}

/// Time stepping of [`evolve_master_equation`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integrator {
    /// Largest RK4 step; `None` means `T/4000` for a schedule of length `T`.
    pub max_step: Option<f64>,
    /// Repeat with half the step and fail if the trace distance between
    /// the two results exceeds `tolerance`.
    pub validate: bool,
    pub tolerance: f64,
}

impl Default for Integrator {
    fn default() -> Self {
        Self {
            max_step: None,
            validate: false,
            tolerance: 1e-8,
        }
    }
}

/// Bound on the generator norm of one segment, used to keep RK4 stable
/// for large blockade shifts.
fn segment_scale(seg: &SegmentDrive, finite: &[(usize, usize, f64)], gamma: f64) -> f64 {
    let drive: f64 = seg.coupling.iter().map(|c| 2.0 * c.norm()).sum();
    let det: f64 = seg.detuning.iter().map(|d| d.abs()).sum();
    let shift: f64 = finite.iter().map(|p| p.2.abs()).sum();
    2.0 * (drive + det + shift) + gamma * seg.coupling.len() as f64
}

pub(crate) fn steps_for(h_max: f64, finite: &[(usize, usize, f64)], gamma: f64) -> impl Fn(&SegmentDrive) -> usize + '_ {
    move |seg: &SegmentDrive| {
        let by_step = (seg.dt / h_max - 1e-9).ceil().max(1.0);
        let by_norm = (seg.dt * segment_scale(seg, finite, gamma) / 1.5).ceil();
        by_step.max(by_norm) as usize
    }
}

/// Hamiltonian at time `t` on the full register space.
///
/// With infinite blockade the doubly excited pairs are projected out, so
/// their rows and columns are zero.
pub fn build_hamiltonian(
    reg: &AtomRegister,
    schedule: &DriveSchedule,
    t: f64,
) -> Result<DMatrix<C>, LindbladError> {
    let span = schedule.duration();
    if !(0.0..=span).contains(&t) {
        return Err(LindbladError::InvalidSchedule(format!(
            "t = {t} outside [0, {span}]"
        )));
    }
    let segs = schedule.segments(reg)?;
    let mut acc = 0.0;
    let mut seg = None;
    for s in &segs {
        if t < acc + s.dt || std::ptr::eq(s, segs.last().unwrap()) {
            seg = Some(s);
            break;
        }
        acc += s.dt;
    }
    let n = reg.len();
    let space = Space::full(n, &reg.excluded_pairs());
    Ok(match seg {
        Some(s) => embed(&space, &dense_hamiltonian(&space, s, &reg.finite_pairs()), n),
        None => DMatrix::zeros(pow3(n), pow3(n)),
    })
}

fn dense_hamiltonian(space: &Space, seg: &SegmentDrive, finite: &[(usize, usize, f64)]) -> DMatrix<C> {
    let m = space.len();
    let mut h = DMatrix::<C>::zeros(m, m);
    for i in 0..m {
        let mut e = 0.0;
        for a in 0..space.n {
            if space.level(i, a) == LR {
                e += seg.detuning[a];
            }
        }
        for &(a, b, s) in finite {
            if space.level(i, a) == LR && space.level(i, b) == LR {
                e += s;
            }
        }
        h[(i, i)] = C::new(e, 0.0);
    }
    for (a, c) in seg.coupling.iter().enumerate() {
        for &(i, k) in &space.up[a] {
            h[(k as usize, i as usize)] += c;
            h[(i as usize, k as usize)] += c.conj();
        }
    }
    h
}

fn embed(space: &Space, m: &DMatrix<C>, n: usize) -> DMatrix<C> {
    let d = pow3(n);
    let mut out = DMatrix::zeros(d, d);
    for i in 0..space.len() {
        for j in 0..space.len() {
            out[(space.states[i] as usize, space.states[j] as usize)] = m[(i, j)];
        }
    }
    out
}

/// Closed-system propagator on the full register space, by exact
/// diagonalization of each segment. Projected-out states map to zero.
pub fn closed_propagator(
    reg: &AtomRegister,
    schedule: &DriveSchedule,
) -> Result<DMatrix<C>, LindbladError> {
    let n = reg.len();
    let space = Space::full(n, &reg.excluded_pairs());
    let finite = reg.finite_pairs();
    let m = space.len();
    let mut u = DMatrix::<C>::identity(m, m);
    for seg in schedule.segments(reg)? {
        let h = dense_hamiltonian(&space, &seg, &finite);
        let eig = SymmetricEigen::new(h);
        let v = &eig.eigenvectors;
        let phases = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| C::from_polar(1.0, -l * seg.dt)));
        u = v * phases * v.adjoint() * u;
    }
    Ok(embed(&space, &u, n))
}

/// Integrates the master equation from `rho0` over the whole schedule.
///
/// Components of `rho0` on blockaded states are discarded.
pub fn evolve_master_equation(
    rho0: &DensityOperator,
    reg: &AtomRegister,
    schedule: &DriveSchedule,
    gamma: f64,
    integrator: &Integrator,
) -> Result<DensityOperator, LindbladError> {
    if rho0.atoms != reg.len() {
        return Err(LindbladError::Dimension {
            got: rho0.dim(),
            expected: reg.dim(),
        });
    }
    if !(gamma >= 0.0) {
        return Err(LindbladError::InvalidSchedule(format!("decay rate {gamma} < 0")));
    }
    let segs = schedule.segments(reg)?;
    let total = schedule.duration();
    let h_max = integrator
        .max_step
        .unwrap_or(if total > 0.0 { total / 4000.0 } else { 1.0 });
    let run = |h: f64| -> DensityOperator {
        let space = Space::full(reg.len(), &reg.excluded_pairs());
        let finite = reg.finite_pairs();
        let m = space.len();
        let mut rho: Vec<C> = Vec::with_capacity(m * m);
        for &si in &space.states {
            for &sj in &space.states {
                rho.push(rho0.matrix[(si as usize, sj as usize)]);
            }
        }
        let gen = Generator {
            ket: &space,
            bra: &space,
            gamma,
            finite: &finite,
        };
        let mut ws = Workspace::new(rho.len());
        engine::evolve(&gen, &mut rho, &segs, steps_for(h, &finite, gamma), &mut ws);
        let local = DMatrix::from_row_slice(m, m, &rho);
        DensityOperator {
            atoms: reg.len(),
            matrix: embed(&space, &local, reg.len()),
        }
    };
    let out = run(h_max);
    if integrator.validate {
        let fine = run(0.5 * h_max);
        let achieved = out.trace_distance(&fine);
        if achieved > integrator.tolerance {
            return Err(LindbladError::Tolerance {
                achieved,
                tolerance: integrator.tolerance,
            });
        }
        return Ok(fine);
    }
    Ok(out)
}

/// Applies `rho -> Pi rho Pi + <r|rho|r> Pi / 2` to every atom.
pub fn apply_rydberg_removal(rho: &DensityOperator) -> DensityOperator {
    let n = rho.atoms;
    let mut cur = rho.matrix.clone();
    for a in 0..n {
        let d = cur.nrows();
        let mut next = DMatrix::<C>::zeros(d, d);
        for i in 0..d {
            let li = level_of(i as u32, n, a);
            if li == LR {
                continue;
            }
            let ri = with_level(i as u32, n, a, LR) as usize;
            for j in 0..d {
                let lj = level_of(j as u32, n, a);
                if lj == LR {
                    continue;
                }
                let mut v = cur[(i, j)];
                if li == lj {
                    let rj = with_level(j as u32, n, a, LR) as usize;
                    v += 0.5 * cur[(ri, rj)];
                }
                next[(i, j)] = v;
            }
        }
        cur = next;
    }
    DensityOperator {
        atoms: n,
        matrix: cur,
    }
}

/// Conjugates by `diag(1, e^{-i theta_a})` on the qubit levels of every
/// atom, with `thetas[a]` the phase to undo on atom `a`.
pub fn apply_phase_correction(rho: &DensityOperator, thetas: &[f64]) -> DensityOperator {
    let n = rho.atoms;
    assert_eq!(thetas.len(), n);
    let phase = |i: usize| -> f64 {
        (0..n)
            .filter(|&a| level_of(i as u32, n, a) == L1)
            .map(|a| thetas[a])
            .sum()
    };
    let d = rho.dim();
    let ph: Vec<f64> = (0..d).map(phase).collect();
    let matrix = DMatrix::from_fn(d, d, |i, j| rho.matrix[(i, j)] * C::from_polar(1.0, ph[j] - ph[i]));
    DensityOperator { atoms: n, matrix }
}

/// Removes the single-qubit phases `theta_m` (measurement atom) and
/// `theta_d` (each data atom) left by one gate.
pub fn apply_virtual_z(
    rho: &DensityOperator,
    reg: &AtomRegister,
    theta_m: f64,
    theta_d: f64,
) -> DensityOperator {
    let thetas: Vec<f64> = (0..reg.len())
        .map(|a| match reg.role(a) {
            Role::Measurement => theta_m,
            Role::Data => theta_d,
        })
        .collect();
    apply_phase_correction(rho, &thetas)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pulse::{reference_pi_2pi_pi, GateKind};

    fn undriven(duration: f64) -> DriveSchedule {
        let mut w = ControlWaveform::resonant(10, duration);
        for d in [&mut w.measurement, &mut w.data] {
            d.amplitude.iter_mut().for_each(|a| *a = 0.0);
        }
        DriveSchedule::sequential(vec![(w, 0, vec![])])
    }

    #[test]
    fn single_atom_decay_is_exponential() {
        let reg = AtomRegister::new(vec![Role::Measurement], vec![]).unwrap();
        let (gamma, t) = (0.3, 2.0);
        let rho = evolve_master_equation(
            &DensityOperator::pure(&[LR]),
            &reg,
            &undriven(t),
            gamma,
            &Integrator::default(),
        )
        .unwrap();
        let ground = 1.0 - (-gamma * t).exp();
        assert!((rho.matrix[(0, 0)].re - ground / 2.0).abs() < 1e-10);
        assert!((rho.matrix[(1, 1)].re - ground / 2.0).abs() < 1e-10);
        assert!((rho.matrix[(2, 2)].re - (-gamma * t).exp()).abs() < 1e-10);
    }

    #[test]
    fn removal_channel_examples() {
        let r = apply_rydberg_removal(&DensityOperator::pure(&[LR]));
        assert!((r.matrix[(0, 0)].re - 0.5).abs() < 1e-15);
        assert!((r.matrix[(1, 1)].re - 0.5).abs() < 1e-15);
        assert_eq!(r.matrix[(2, 2)], C::new(0.0, 0.0));
        let r = apply_rydberg_removal(&DensityOperator::outer(&[0], &[LR]));
        assert!(r.matrix.iter().all(|x| *x == C::new(0.0, 0.0)));
        let q = DensityOperator::outer(&[0, 1], &[1, 1]);
        assert_eq!(apply_rydberg_removal(&q), q);
    }

    #[test]
    fn virtual_z_leaves_diagonal_states() {
        let reg = AtomRegister::stabilizer(2, Blockade::Infinite);
        let rho = DensityOperator::pure(&[1, 0, 1]);
        assert_eq!(apply_virtual_z(&rho, &reg, 0.3, 1.2), rho);
        let off = DensityOperator::outer(&[1, 0, 1], &[0, 0, 1]);
        assert_eq!(apply_virtual_z(&off, &reg, 0.0, 0.0), off);
    }

    #[test]
    fn closed_limit_matches_unitary() {
        let reg = AtomRegister::stabilizer(2, Blockade::Infinite);
        let w = reference_pi_2pi_pi(GateKind::Cz2);
        let sched = DriveSchedule::sequential(vec![(w, 0, vec![1, 2])]);
        let u = closed_propagator(&reg, &sched).unwrap();
        let ket = [1u8, 1, 0];
        let rho0 = DensityOperator::outer(&ket, &[1, 0, 1]);
        let rho = evolve_master_equation(&rho0, &reg, &sched, 0.0, &Integrator::default()).unwrap();
        let expect = &u * &rho0.matrix * u.adjoint();
        let diff = (&rho.matrix - &expect).iter().map(|x| x.norm()).fold(0.0, f64::max);
        assert!(diff < 1e-9, "{diff}");
    }

    #[test]
    fn blockaded_states_are_projected_out() {
        let reg = AtomRegister::stabilizer(1, Blockade::Infinite);
        let w = ControlWaveform::resonant(4, 1.0);
        let sched = DriveSchedule::sequential(vec![(w, 0, vec![1])]);
        let h = build_hamiltonian(&reg, &sched, 0.5).unwrap();
        let rr = DensityOperator::index(&[LR, LR]);
        assert!(h.row(rr).iter().all(|x| x.norm() == 0.0));
        assert!(h.column(rr).iter().all(|x| x.norm() == 0.0));
        let r1 = DensityOperator::index(&[LR, 1]);
        assert!(h.column(r1).iter().any(|x| x.norm() > 0.0));
    }
}
