//! First-order failure diagnostics: how much of the model's single-fault
//! probability a decoder gets wrong, and how much any decoder must.

use std::collections::HashMap;

use super::decoder::Decoder;
use super::dem::DetectorErrorModel;
use super::DecodeError;

/// Total probability of mechanisms that, occurring alone, are decoded to
/// the wrong observable mask. Mechanisms without detectors count when they
/// flip an observable.
pub fn misdecoded_mass(dem: &DetectorErrorModel, decoder: &Decoder) -> Result<f64, DecodeError> {
    let mut mass = 0.0;
    for m in &dem.mechanisms {
        let predicted = if m.detectors.is_empty() { 0 } else { decoder.decode(&m.detectors)?.observables };
        if predicted != m.observables {
            mass += m.probability;
        }
    }
    Ok(mass)
}

/// Lower bound on [`misdecoded_mass`] for any decoder: mechanisms sharing a
/// syndrome but not an observable mask cannot all be decoded correctly.
/// Per syndrome, everything but the heaviest observable class is lost.
pub fn ambiguous_mass(dem: &DetectorErrorModel) -> f64 {
    let mut by: HashMap<&[usize], HashMap<u64, f64>> = HashMap::new();
    for m in &dem.mechanisms {
        *by.entry(&m.detectors).or_default().entry(m.observables).or_default() += m.probability;
    }
    by.into_iter()
        .map(|(dets, classes)| {
            let total: f64 = classes.values().sum();
            let kept = if dets.is_empty() {
                classes.get(&0).copied().unwrap_or(0.0)
            } else {
                classes.values().copied().fold(0.0, f64::max)
            };
            total - kept
        })
        .sum()
}
