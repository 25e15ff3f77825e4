//! JSON pulse files.
//!
//! ```json
//! {
//!   "format": "rydqec-pulse",
//!   "version": 1,
//!   "kind": "cz2",
//!   "parametrization": { "mode": "phase" },
//!   "segment_count": 500,
//!   "total_duration": 10.27,
//!   "measurement": { "amplitude": [...], "phase": [...], "detuning": [...] },
//!   "data": { ... },
//!   "theta_m": 1.2, "theta_d": -0.4,
//!   "infidelity": 3.9e-8,
//!   "rydberg_time_m": 3.36, "rydberg_time_d": 1.91
//! }
//! ```

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{ControlWaveform, GateKind, Parametrization, PulseError, PulseResult, RoleDrive};

pub const FORMAT: &str = "rydqec-pulse";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
struct PulseFile {
    format: String,
    version: u32,
    kind: GateKind,
    parametrization: Parametrization,
    segment_count: usize,
    total_duration: f64,
    measurement: RoleDrive,
    data: RoleDrive,
    theta_m: f64,
    theta_d: f64,
    infidelity: f64,
    rydberg_time_m: f64,
    rydberg_time_d: f64,
}

pub fn to_json(p: &PulseResult) -> String {
    let f = PulseFile {
        format: FORMAT.into(),
        version: VERSION,
        kind: p.kind,
        parametrization: p.waveform.parametrization,
        segment_count: p.waveform.segment_count(),
        total_duration: p.waveform.total_duration,
        measurement: p.waveform.measurement.clone(),
        data: p.waveform.data.clone(),
        theta_m: p.theta_m,
        theta_d: p.theta_d,
        infidelity: p.infidelity,
        rydberg_time_m: p.rydberg_time_m,
        rydberg_time_d: p.rydberg_time_d,
    };
    serde_json::to_string_pretty(&f).expect("pulse serializes")
}

pub fn from_json(s: &str) -> Result<PulseResult, PulseError> {
    let f: PulseFile = serde_json::from_str(s)?;
    if f.format != FORMAT || f.version != VERSION {
        return Err(PulseError::InvalidWaveform(format!(
            "unsupported pulse file {} v{}",
            f.format, f.version
        )));
    }
    let waveform = ControlWaveform {
        parametrization: f.parametrization,
        total_duration: f.total_duration,
        measurement: f.measurement,
        data: f.data,
    };
    if waveform.segment_count() != f.segment_count {
        return Err(PulseError::InvalidWaveform(
            "segment_count disagrees with the tracks".into(),
        ));
    }
    waveform.validate()?;
    Ok(PulseResult {
        kind: f.kind,
        waveform,
        theta_m: f.theta_m,
        theta_d: f.theta_d,
        infidelity: f.infidelity,
        rydberg_time_m: f.rydberg_time_m,
        rydberg_time_d: f.rydberg_time_d,
    })
}

pub fn save(p: &PulseResult, path: impl AsRef<Path>) -> Result<(), PulseError> {
    fs::write(path, to_json(p))?;
    Ok(())
}

pub fn load(path: impl AsRef<Path>) -> Result<PulseResult, PulseError> {
    from_json(&fs::read_to_string(path)?)
}

/// Content hash of the waveform and phases, used to key derived data.
pub fn pulse_hash(p: &PulseResult) -> String {
    let mut h = Sha256::new();
    h.update(p.kind.to_string().as_bytes());
    let w = &p.waveform;
    h.update(w.total_duration.to_le_bytes());
    for d in [&w.measurement, &w.data] {
        for v in d.amplitude.iter().chain(&d.phase).chain(&d.detuning) {
            h.update(v.to_le_bytes());
        }
    }
    h.update(p.theta_m.to_le_bytes());
    h.update(p.theta_d.to_le_bytes());
    hex::encode(&h.finalize()[..16])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pulse::reference_pi_2pi_pi;

    fn sample() -> PulseResult {
        PulseResult {
            kind: GateKind::Cz2,
            waveform: reference_pi_2pi_pi(GateKind::Cz2),
            theta_m: std::f64::consts::PI,
            theta_d: std::f64::consts::PI,
            infidelity: 1e-16,
            rydberg_time_m: 1.5 * std::f64::consts::PI,
            rydberg_time_d: std::f64::consts::FRAC_PI_4,
        }
    }

    #[test]
    fn json_roundtrip_is_exact() {
        let p = sample();
        let q = from_json(&to_json(&p)).unwrap();
        assert_eq!(p, q);
        assert_eq!(pulse_hash(&p), pulse_hash(&q));
    }

    #[test]
    fn rejects_foreign_documents() {
        let s = to_json(&sample()).replace(FORMAT, "other");
        assert!(from_json(&s).is_err());
    }
}
