//! Fixed-step RK4 for the master equation on restricted bases.
//!
//! The operator is stored row-major with rows indexed by the ket space and
//! columns by the bra space. Within a segment the generator is constant.

use num_complex::Complex64 as C;

use super::space::{Space, LR};

const ZERO: C = C::new(0.0, 0.0);

/// One piecewise-constant stretch of drive.
#[derive(Debug, Clone)]
pub struct SegmentDrive {
    pub dt: f64,
    /// `(Omega/2) e^{i phi}` per atom; zero for idle atoms.
    pub coupling: Vec<C>,
    pub detuning: Vec<f64>,
}

pub struct Generator<'a> {
    pub ket: &'a Space,
    pub bra: &'a Space,
    pub gamma: f64,
    /// Finite blockade pairs `(a, b, B)`.
    pub finite: &'a [(usize, usize, f64)],
}

struct SegmentTerms {
    diag_ket: Vec<C>,
    diag_bra: Vec<C>,
    coupling: Vec<C>,
}

impl Generator<'_> {
    fn energies(&self, space: &Space, seg: &SegmentDrive) -> Vec<f64> {
        (0..space.len())
            .map(|i| {
                let mut e = 0.0;
                for (a, d) in seg.detuning.iter().enumerate() {
                    if *d != 0.0 && space.level(i, a) == LR {
                        e += d;
                    }
                }
                for &(a, b, strength) in self.finite {
                    if space.level(i, a) == LR && space.level(i, b) == LR {
                        e += strength;
                    }
                }
                e
            })
            .collect()
    }

    fn terms(&self, seg: &SegmentDrive) -> SegmentTerms {
        let half = 0.5 * self.gamma;
        let ek = self.energies(self.ket, seg);
        let eb = self.energies(self.bra, seg);
        SegmentTerms {
            diag_ket: ek
                .iter()
                .zip(&self.ket.n_r)
                .map(|(e, n)| C::new(-half * n, -e))
                .collect(),
            diag_bra: eb
                .iter()
                .zip(&self.bra.n_r)
                .map(|(e, n)| C::new(-half * n, *e))
                .collect(),
            coupling: seg.coupling.clone(),
        }
    }

    /// `out = L(rho)`.
    fn apply(&self, t: &SegmentTerms, rho: &[C], out: &mut [C]) {
        let nb = self.bra.len();
        for (i, dk) in t.diag_ket.iter().enumerate() {
            let row = &rho[i * nb..(i + 1) * nb];
            let orow = &mut out[i * nb..(i + 1) * nb];
            for ((o, r), db) in orow.iter_mut().zip(row).zip(&t.diag_bra) {
                *o = (dk + db) * r;
            }
        }
        let mi = C::new(0.0, -1.0);
        for (a, &c) in t.coupling.iter().enumerate() {
            if c == ZERO {
                continue;
            }
            // -i H rho with H = c |r><1| + conj(c) |1><r|.
            let f_up = mi * c;
            let f_down = mi * c.conj();
            for &(i, k) in &self.ket.up[a] {
                let (i, k) = (i as usize, k as usize);
                for j in 0..nb {
                    let ri = rho[i * nb + j];
                    let rk = rho[k * nb + j];
                    out[k * nb + j] += f_up * ri;
                    out[i * nb + j] += f_down * rk;
                }
            }
            // +i rho H.
            let g_up = -mi * c;
            let g_down = -mi * c.conj();
            for &(j, k) in &self.bra.up[a] {
                let (j, k) = (j as usize, k as usize);
                for i in 0..self.ket.len() {
                    let row = i * nb;
                    let rj = rho[row + j];
                    let rk = rho[row + k];
                    out[row + j] += g_up * rk;
                    out[row + k] += g_down * rj;
                }
            }
        }
        if self.gamma > 0.0 {
            let half = 0.5 * self.gamma;
            for a in 0..self.ket.n {
                for q in 0..2 {
                    let kl = &self.ket.to_r[a][q];
                    let bl = &self.bra.to_r[a][q];
                    if kl.is_empty() || bl.is_empty() {
                        continue;
                    }
                    for &(i, ri) in kl {
                        let (row, rrow) = (i as usize * nb, ri as usize * nb);
                        for &(j, rj) in bl {
                            out[row + j as usize] += half * rho[rrow + rj as usize];
                        }
                    }
                }
            }
        }
    }
}

/// Scratch buffers for RK4.
pub struct Workspace {
    k: [Vec<C>; 4],
    tmp: Vec<C>,
}

impl Workspace {
    pub fn new(len: usize) -> Self {
        Self {
            k: [
                vec![ZERO; len],
                vec![ZERO; len],
                vec![ZERO; len],
                vec![ZERO; len],
            ],
            tmp: vec![ZERO; len],
        }
    }
}

/// Integrates `rho` through all segments with `steps` equal RK4 steps
/// per segment.
pub fn evolve(
    gen: &Generator,
    rho: &mut [C],
    segments: &[SegmentDrive],
    steps: impl Fn(&SegmentDrive) -> usize,
    ws: &mut Workspace,
) {
    for seg in segments {
        let n = steps(seg).max(1);
        let h = seg.dt / n as f64;
        if h == 0.0 {
            continue;
        }
        let terms = gen.terms(seg);
        for _ in 0..n {
            rk4_step(gen, &terms, rho, h, ws);
        }
    }
}

fn rk4_step(gen: &Generator, t: &SegmentTerms, rho: &mut [C], h: f64, ws: &mut Workspace) {
    let [k1, k2, k3, k4] = &mut ws.k;
    let tmp = &mut ws.tmp;
    gen.apply(t, rho, k1);
    for ((x, r), k) in tmp.iter_mut().zip(rho.iter()).zip(k1.iter()) {
        *x = r + k * (0.5 * h);
    }
    gen.apply(t, tmp, k2);
    for ((x, r), k) in tmp.iter_mut().zip(rho.iter()).zip(k2.iter()) {
        *x = r + k * (0.5 * h);
    }
    gen.apply(t, tmp, k3);
    for ((x, r), k) in tmp.iter_mut().zip(rho.iter()).zip(k3.iter()) {
        *x = r + k * h;
    }
    gen.apply(t, tmp, k4);
    let w = h / 6.0;
    for (i, r) in rho.iter_mut().enumerate() {
        *r += (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) * w;
    }
}
