//! Sampled detector and observable bits, and the batch file.
//!
//! File layout, all integers little-endian:
//!
//! | bytes | content |
//! |-------|---------|
//! | 4     | magic `RQB1` |
//! | 8     | shot count |
//! | 4     | detector count `D` |
//! | 4     | observable count `K` |
//! | ...   | per shot: `ceil(D/8)` detector bytes then `ceil(K/8)` observable bytes |
//!
//! Bit `i` of a row lives in byte `i / 8` at position `i % 8` (LSB first).

use std::io::{Read, Write};
use std::path::Path;

use super::SimError;

pub const MAGIC: &[u8; 4] = b"RQB1";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleBatch {
    pub shots: usize,
    pub num_detectors: usize,
    pub num_observables: usize,
    det: Vec<u64>,
    obs: Vec<u64>,
}

fn words(bits: usize) -> usize {
    bits.div_ceil(64)
}

impl SampleBatch {
    pub fn zeros(shots: usize, num_detectors: usize, num_observables: usize) -> Self {
        Self {
            shots,
            num_detectors,
            num_observables,
            det: vec![0; shots * words(num_detectors)],
            obs: vec![0; shots * words(num_observables)],
        }
    }

    /// Packed detector row of one shot.
    pub fn detector_row(&self, shot: usize) -> &[u64] {
        let w = words(self.num_detectors);
        &self.det[shot * w..(shot + 1) * w]
    }

    pub fn detector(&self, shot: usize, d: usize) -> bool {
        (self.detector_row(shot)[d / 64] >> (d % 64)) & 1 == 1
    }

    /// Indices of the flipped detectors of one shot.
    pub fn defects(&self, shot: usize) -> Vec<usize> {
        let mut out = Vec::new();
        for (wi, &w) in self.detector_row(shot).iter().enumerate() {
            let mut w = w;
            while w != 0 {
                out.push(wi * 64 + w.trailing_zeros() as usize);
                w &= w - 1;
            }
        }
        out
    }

    /// Observable flips of one shot as a bitmask.
    pub fn observables(&self, shot: usize) -> u64 {
        if self.num_observables == 0 {
            0
        } else {
            self.obs[shot * words(self.num_observables)]
        }
    }

    pub(crate) fn set_detector(&mut self, shot: usize, d: usize) {
        let w = words(self.num_detectors);
        self.det[shot * w + d / 64] |= 1 << (d % 64);
    }

    pub(crate) fn set_observable(&mut self, shot: usize, o: usize) {
        let w = words(self.num_observables);
        self.obs[shot * w + o / 64] |= 1 << (o % 64);
    }

    /// Copies all rows of `part` to shots `start..start + part.shots`.
    pub(crate) fn splice(&mut self, start: usize, part: &SampleBatch) {
        let (wd, wo) = (words(self.num_detectors), words(self.num_observables));
        self.det[start * wd..(start + part.shots) * wd].copy_from_slice(&part.det);
        self.obs[start * wo..(start + part.shots) * wo].copy_from_slice(&part.obs);
    }

    /// Fraction of shots in which each detector fired.
    pub fn detector_marginals(&self) -> Vec<f64> {
        let mut counts = vec![0usize; self.num_detectors];
        for s in 0..self.shots {
            for d in self.defects(s) {
                counts[d] += 1;
            }
        }
        counts.iter().map(|&c| c as f64 / self.shots as f64).collect()
    }

    pub fn write_to(&self, mut w: impl Write) -> Result<(), SimError> {
        w.write_all(MAGIC)?;
        w.write_all(&(self.shots as u64).to_le_bytes())?;
        w.write_all(&(self.num_detectors as u32).to_le_bytes())?;
        w.write_all(&(self.num_observables as u32).to_le_bytes())?;
        let (db, ob) = (self.num_detectors.div_ceil(8), self.num_observables.div_ceil(8));
        let mut row = vec![0u8; db + ob];
        for s in 0..self.shots {
            row.iter_mut().for_each(|b| *b = 0);
            for d in self.defects(s) {
                row[d / 8] |= 1 << (d % 8);
            }
            let o = self.observables(s);
            for k in 0..self.num_observables {
                if (o >> k) & 1 == 1 {
                    row[db + k / 8] |= 1 << (k % 8);
                }
            }
            w.write_all(&row)?;
        }
        Ok(())
    }

    pub fn read_from(mut r: impl Read) -> Result<Self, SimError> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(SimError::Format("not a batch file".into()));
        }
        let mut b8 = [0u8; 8];
        let mut b4 = [0u8; 4];
        r.read_exact(&mut b8)?;
        let shots = u64::from_le_bytes(b8) as usize;
        r.read_exact(&mut b4)?;
        let nd = u32::from_le_bytes(b4) as usize;
        r.read_exact(&mut b4)?;
        let no = u32::from_le_bytes(b4) as usize;
        if no > 64 {
            return Err(SimError::Format("at most 64 observables".into()));
        }
        let mut batch = SampleBatch::zeros(shots, nd, no);
        let (db, ob) = (nd.div_ceil(8), no.div_ceil(8));
        let mut row = vec![0u8; db + ob];
        for s in 0..shots {
            r.read_exact(&mut row)?;
            for d in 0..nd {
                if (row[d / 8] >> (d % 8)) & 1 == 1 {
                    batch.set_detector(s, d);
                }
            }
            for k in 0..no {
                if (row[db + k / 8] >> (k % 8)) & 1 == 1 {
                    batch.set_observable(s, k);
                }
            }
        }
        Ok(batch)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), SimError> {
        let f = std::fs::File::create(path)?;
        let mut w = std::io::BufWriter::new(f);
        self.write_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, SimError> {
        let f = std::fs::File::open(path)?;
        Self::read_from(std::io::BufReader::new(f))
    }
}
