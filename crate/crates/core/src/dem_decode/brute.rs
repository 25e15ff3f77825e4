use super::dem::DetectorErrorModel;
use super::{edge_weight, DecodeError};

pub const BRUTE_MAX_MECHANISMS: usize = 25;
const MAX_DETECTORS: usize = 24;
/// The running weight is recomputed from scratch this often, so rounding
/// error from the incremental updates stays below 1e-12.
const RESUM_EVERY: u64 = 1 << 12;

/// Minimum-weight explanation of every syndrome, by enumerating all
/// mechanism subsets once in Gray-code order.
pub struct BruteForceOracle {
    num_detectors: usize,
    best: Vec<(f64, u64)>,
}

impl BruteForceOracle {
    pub fn new(dem: &DetectorErrorModel) -> Result<Self, DecodeError> {
        let m = dem.mechanisms.len();
        if m > BRUTE_MAX_MECHANISMS {
            return Err(DecodeError::TooLarge(format!(
                "{m} mechanisms, limit {BRUTE_MAX_MECHANISMS}"
            )));
        }
        if dem.num_detectors > MAX_DETECTORS {
            return Err(DecodeError::TooLarge(format!(
                "{} detectors, limit {MAX_DETECTORS}",
                dem.num_detectors
            )));
        }
        let mut syn = Vec::with_capacity(m);
        let mut w = Vec::with_capacity(m);
        for mech in &dem.mechanisms {
            syn.push(mech.detectors.iter().fold(0usize, |s, &d| s | (1 << d)));
            w.push(edge_weight(mech.probability)?);
        }
        let mut best = vec![(f64::INFINITY, 0u64); 1 << dem.num_detectors];
        let mut in_set = vec![false; m];
        let (mut s, mut weight, mut obs) = (0usize, 0.0f64, 0u64);
        best[0] = (0.0, 0);
        for g in 1..(1u64 << m) {
            let i = g.trailing_zeros() as usize;
            in_set[i] = !in_set[i];
            s ^= syn[i];
            obs ^= dem.mechanisms[i].observables;
            weight += if in_set[i] { w[i] } else { -w[i] };
            if g % RESUM_EVERY == 0 {
                weight = (0..m).filter(|&k| in_set[k]).map(|k| w[k]).sum();
            }
            if weight < best[s].0 {
                best[s] = (weight, obs);
            }
        }
        Ok(Self {
            num_detectors: dem.num_detectors,
            best,
        })
    }

    /// `(weight, observable flips)` of the lightest mechanism subset firing
    /// exactly `syndrome`, or `None` if no subset does.
    pub fn query(&self, syndrome: &[usize]) -> Option<(f64, u64)> {
        let s = syndrome
            .iter()
            .filter(|&&d| d < self.num_detectors)
            .fold(0usize, |s, &d| s ^ (1 << d));
        let b = self.best[s];
        b.0.is_finite().then_some(b)
    }
}

pub fn brute_force_min_weight(
    dem: &DetectorErrorModel,
    syndrome: &[usize],
) -> Result<(f64, u64), DecodeError> {
    if let Some(&d) = syndrome.iter().find(|&&d| d >= dem.num_detectors) {
        return Err(DecodeError::Mismatch(format!("detector {d} out of range")));
    }
    BruteForceOracle::new(dem)?
        .query(syndrome)
        .ok_or_else(|| DecodeError::Unmatchable(syndrome.first().copied().unwrap_or(0)))
}
