//! Seed evolutions and the reduction to Pauli weights.
//!
//! The channel is linear, so instead of evolving the `4^n` Pauli operators
//! we evolve the matrix units `|a><b|` of the qubit subspace. Each unit only
//! explores a small part of the three-level space: an atom that starts in
//! `|0>` on one side stays there, and `|0>` appears on a side only through
//! a decay that hits both sides at once. Units with `a > b` follow from
//! Hermiticity of the map.

use nalgebra::DMatrix;
use num_complex::Complex64 as C;
use rayon::prelude::*;

use crate::lindblad::engine::{self, Generator, SegmentDrive, Workspace};
use crate::lindblad::space::{computational_full, level_set, with_level, Space, L1, LR};
use crate::lindblad::{steps_for, LindbladError};
use crate::pauli::PauliString;

use super::table::PauliChannelTable;
use super::variant::ReadoutVariant;
use super::TwirlError;

/// Cap on the default RK4 step, for waveforms with long segments.
const DEFAULT_MAX_STEP: f64 = 0.02;

/// Step control of the seed evolutions.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ExtractOptions {
    /// Largest RK4 step; `None` uses two steps per pulse segment, at most
    /// 0.02 long (shorter when the generator norm demands it).
    pub max_step: Option<f64>,
}

/// Everything needed to push one matrix unit through the readout.
pub(crate) struct SeedEvolver {
    n: usize,
    excluded: Vec<(usize, usize)>,
    finite: Vec<(usize, usize, f64)>,
    segments: Vec<SegmentDrive>,
    gamma: f64,
    h_max: f64,
    thetas: Vec<f64>,
    signs: Vec<f64>,
}

impl SeedEvolver {
    pub(crate) fn new(
        variant: &ReadoutVariant,
        gamma: f64,
        opts: &ExtractOptions,
    ) -> Result<Self, TwirlError> {
        if !(gamma >= 0.0) || !gamma.is_finite() {
            return Err(TwirlError::InvalidArgument(format!("decay rate {gamma}")));
        }
        let reg = &variant.register;
        let segments = variant.schedule.segments(reg)?;
        let shortest = segments
            .iter()
            .map(|s| s.dt)
            .filter(|d| *d > 0.0)
            .fold(f64::INFINITY, f64::min);
        let h_max = opts.max_step.unwrap_or(if shortest.is_finite() {
            (0.5 * shortest * (1.0 + 1e-9)).min(DEFAULT_MAX_STEP)
        } else {
            DEFAULT_MAX_STEP
        });
        if !(h_max > 0.0) {
            return Err(LindbladError::InvalidSchedule(format!("step {h_max}")).into());
        }
        let n = reg.len();
        Ok(Self {
            n,
            excluded: reg.excluded_pairs(),
            finite: reg.finite_pairs(),
            segments,
            gamma,
            h_max,
            thetas: variant.phase_correction.clone(),
            signs: (0..1u64 << n).map(|b| variant.ideal_sign(b)).collect(),
        })
    }

    fn side(&self, own: u64, other: u64) -> Vec<u8> {
        (0..self.n)
            .map(|q| {
                if (own >> q) & 1 == 0 {
                    level_set(&[0])
                } else if (other >> q) & 1 == 1 && self.gamma > 0.0 {
                    level_set(&[0, L1, LR])
                } else {
                    level_set(&[L1, LR])
                }
            })
            .collect()
    }

    /// Qubit block of `U^dag D(Lambda(|a><b|)) U` after the phase correction.
    pub(crate) fn output(&self, a: u64, b: u64) -> DMatrix<C> {
        let n = self.n;
        let ket = Space::new(&self.side(a, b), &self.excluded);
        let bra = Space::new(&self.side(b, a), &self.excluded);
        let nb = bra.len();
        let mut rho = vec![C::new(0.0, 0.0); ket.len() * nb];
        let i0 = ket.index(computational_full(a, n)).expect("seed ket in space");
        let j0 = bra.index(computational_full(b, n)).expect("seed bra in space");
        rho[i0 * nb + j0] = C::new(1.0, 0.0);
        let gen = Generator {
            ket: &ket,
            bra: &bra,
            gamma: self.gamma,
            finite: &self.finite,
        };
        let mut ws = Workspace::new(rho.len());
        engine::evolve(
            &gen,
            &mut rho,
            &self.segments,
            steps_for(self.h_max, &self.finite, self.gamma),
            &mut ws,
        );

        let d = 1usize << n;
        let phase = |bits: usize| -> f64 {
            (0..n)
                .filter(|q| (bits >> q) & 1 == 1)
                .map(|q| self.thetas[q])
                .sum()
        };
        let mut out = DMatrix::<C>::zeros(d, d);
        for i in 0..d {
            let fi = computational_full(i as u64, n);
            for j in 0..d {
                let fj = computational_full(j as u64, n);
                let same = !(i ^ j) & (d - 1);
                let mut acc = C::new(0.0, 0.0);
                // Rydberg removal on every atom: subsets of atoms that sat in
                // |r> on both sides, each contributing half its weight.
                let mut s = same;
                loop {
                    let (mut ri, mut rj) = (fi, fj);
                    for q in 0..n {
                        if (s >> q) & 1 == 1 {
                            ri = with_level(ri, n, q, LR);
                            rj = with_level(rj, n, q, LR);
                        }
                    }
                    if let (Some(x), Some(y)) = (ket.index(ri), bra.index(rj)) {
                        acc += rho[x * nb + y] * 0.5f64.powi(s.count_ones() as i32);
                    }
                    if s == 0 {
                        break;
                    }
                    s = (s - 1) & same;
                }
                let ph = phase(j) - phase(i);
                out[(i, j)] = acc * C::from_polar(self.signs[i] * self.signs[j], ph);
            }
        }
        out
    }
}

/// Outputs of all matrix units, indexed `a * 2^n + b`.
fn all_outputs<F>(n: usize, seed: F) -> Vec<DMatrix<C>>
where
    F: Fn(u64, u64) -> DMatrix<C> + Sync,
{
    let d = 1u64 << n;
    let upper: Vec<(u64, u64)> = (0..d).flat_map(|a| (a..d).map(move |b| (a, b))).collect();
    let computed: Vec<DMatrix<C>> = upper.par_iter().map(|&(a, b)| seed(a, b)).collect();
    let mut out = vec![DMatrix::<C>::zeros(0, 0); (d * d) as usize];
    for ((a, b), m) in upper.into_iter().zip(computed) {
        if a != b {
            out[(b * d + a) as usize] = m.adjoint();
        }
        out[(a * d + b) as usize] = m;
    }
    out
}

/// Pauli weights of a Pauli-twirled map given by its action on matrix
/// units, indexed by [`PauliString::index`]. Also returns the largest
/// imaginary part met along the way.
pub fn pauli_weights<F>(n: usize, seed: F) -> (Vec<f64>, f64)
where
    F: Fn(u64, u64) -> DMatrix<C> + Sync,
{
    let d = 1usize << n;
    let outs = all_outputs(n, seed);
    // f[x][v] = sum over y ^ w = v of <w^x| E(|y^x><y|) |w>.
    let f: Vec<Vec<C>> = (0..d)
        .into_par_iter()
        .map(|x| {
            let mut acc = vec![C::new(0.0, 0.0); d];
            for y in 0..d {
                let o = &outs[(y ^ x) * d + y];
                for w in 0..d {
                    acc[y ^ w] += o[(w ^ x, w)];
                }
            }
            acc
        })
        .collect();
    let all: Vec<PauliString> = PauliString::all(n).collect();
    let t: Vec<C> = all
        .iter()
        .map(|r| {
            let (x, z) = (r.x_mask() as usize, r.z_mask() as usize);
            let mut s = C::new(0.0, 0.0);
            for (v, fv) in f[x].iter().enumerate() {
                if (z & (v ^ x)).count_ones() % 2 == 0 {
                    s += fv;
                } else {
                    s -= fv;
                }
            }
            if (x & z).count_ones() % 2 == 1 {
                -s
            } else {
                s
            }
        })
        .collect();
    let norm = 1.0 / ((d * d * d) as f64);
    let lam: Vec<C> = all
        .par_iter()
        .map(|q| {
            all.iter()
                .zip(&t)
                .map(|(r, tr)| tr * q.commutation_sign(r))
                .sum::<C>()
                * norm
        })
        .collect();
    let imag = lam.iter().map(|l| l.im.abs()).fold(0.0, f64::max);
    (lam.into_iter().map(|l| l.re).collect(), imag)
}

/// The Pauli-twirled error channel of a readout variant at decay rate
/// `gamma`.
pub fn extract_pauli_channel(
    variant: &ReadoutVariant,
    gamma: f64,
    opts: &ExtractOptions,
) -> Result<PauliChannelTable, TwirlError> {
    let ev = SeedEvolver::new(variant, gamma, opts)?;
    let n = variant.qubits();
    let (lam, imag) = pauli_weights(n, |a, b| ev.output(a, b));
    let table = PauliChannelTable::from_weights(
        n,
        variant.id.name(),
        gamma,
        &variant.pulse_hash,
        &lam,
        imag,
    );
    table.check()?;
    Ok(table)
}

/// Error map applied to the Pauli operator `r`, restricted to the qubit
/// subspace.
pub fn apply_error_channel(
    r: &PauliString,
    variant: &ReadoutVariant,
    gamma: f64,
    opts: &ExtractOptions,
) -> Result<DMatrix<C>, TwirlError> {
    let n = variant.qubits();
    if r.num_qubits() != n {
        return Err(TwirlError::InvalidArgument(format!(
            "{}-qubit string for a {n}-qubit variant",
            r.num_qubits()
        )));
    }
    let ev = SeedEvolver::new(variant, gamma, opts)?;
    let x = r.x_mask();
    let parts: Vec<DMatrix<C>> = (0..1u64 << n)
        .into_par_iter()
        .map(|y| ev.output(y ^ x, y) * r.column_phase(y))
        .collect();
    let d = 1usize << n;
    Ok(parts.into_iter().fold(DMatrix::zeros(d, d), |acc, m| acc + m))
}
