use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::surface::{BoundaryMode, GateOrdering, MemoryBasis};

use super::BenchError;

pub const CONFIG_VERSION: u32 = 1;

fn default_bases() -> Vec<MemoryBasis> {
    vec![MemoryBasis::Z, MemoryBasis::X]
}

fn default_fit_points() -> usize {
    5
}

fn default_min_failures() -> usize {
    10
}

fn default_true() -> bool {
    true
}

/// Eight points evenly spaced in log between `3e-4` and `3e-2`.
pub fn default_gamma_grid() -> Vec<f64> {
    let (lo, hi): (f64, f64) = (3e-4, 3e-2);
    (0..8)
        .map(|i| (lo.ln() + (hi.ln() - lo.ln()) * i as f64 / 7.0).exp())
        .collect()
}

/// One curve: an ordering and the boundary treatment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    /// `two_cz2_ft`, `two_cz2_nonft` or `four_cz`.
    pub ordering: String,
    #[serde(default = "default_boundary")]
    pub boundary: BoundaryMode,
}

fn default_boundary() -> BoundaryMode {
    BoundaryMode::LocalTimeOptimal
}

impl Series {
    pub fn gate_ordering(&self) -> Result<GateOrdering, BenchError> {
        self.ordering
            .parse()
            .map_err(|e| BenchError::Config(format!("{e}")))
    }

    pub fn label(&self) -> String {
        match self.boundary {
            BoundaryMode::GlobalPulse => format!("{}/global", self.ordering),
            BoundaryMode::LocalTimeOptimal => format!("{}/local", self.ordering),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulsePaths {
    pub cz2: PathBuf,
    /// Needed by `four_cz` and by local boundary treatment.
    pub cz: Option<PathBuf>,
    /// Synthesize and store pulses that are missing on disk.
    #[serde(default = "default_true")]
    pub synthesize_missing: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct OutputPaths {
    pub csv: Option<PathBuf>,
    pub json: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub version: u32,
    pub series: Vec<Series>,
    pub distances: Vec<usize>,
    /// Sorted, positive. Defaults to [`default_gamma_grid`].
    #[serde(default = "default_gamma_grid")]
    pub gammas: Vec<f64>,
    #[serde(default = "default_bases")]
    pub bases: Vec<MemoryBasis>,
    /// Shots per point.
    pub shots: usize,
    /// Shots for the two lowest decay rates, if larger.
    #[serde(default)]
    pub low_gamma_shots: Option<usize>,
    pub seed: u64,
    /// Number of lowest-rate qualifying points in each fit.
    #[serde(default = "default_fit_points")]
    pub fit_points: usize,
    /// Points with fewer failures are flagged and not fitted.
    #[serde(default = "default_min_failures")]
    pub min_failures: usize,
    pub cache_dir: PathBuf,
    pub pulses: PulsePaths,
    #[serde(default)]
    pub output: OutputPaths,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, BenchError> {
        let cfg: Self = toml::from_str(text).map_err(|e| BenchError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a config file. Relative paths inside it are resolved against
    /// the file's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, BenchError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| BenchError::Config(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::from_toml(&text)?;
        if let Some(base) = path.parent() {
            cfg.rebase(base);
        }
        Ok(cfg)
    }

    fn rebase(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.cache_dir);
        fix(&mut self.pulses.cz2);
        self.pulses.cz.iter_mut().for_each(fix);
        self.output.csv.iter_mut().for_each(fix);
        self.output.json.iter_mut().for_each(fix);
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        let bad = |m: String| Err(BenchError::Config(m));
        if self.version != CONFIG_VERSION {
            return bad(format!("unsupported version {}, expected {CONFIG_VERSION}", self.version));
        }
        if self.series.is_empty() {
            return bad("no series".into());
        }
        for s in &self.series {
            s.gate_ordering()?;
        }
        if self.distances.is_empty() {
            return bad("no distances".into());
        }
        if let Some(d) = self.distances.iter().find(|&&d| d < 3 || d % 2 == 0 || d > 15) {
            return bad(format!("distance {d} must be odd and in 3..=15"));
        }
        if self.gammas.is_empty() || self.gammas.iter().any(|&g| !(g > 0.0 && g.is_finite())) {
            return bad("decay rates must be positive".into());
        }
        if self.gammas.windows(2).any(|w| w[0] >= w[1]) {
            return bad("decay rates must be strictly increasing".into());
        }
        if self.bases.is_empty() {
            return bad("no bases".into());
        }
        if self.shots == 0 {
            return bad("shots must be positive".into());
        }
        if self.fit_points < 2 {
            return bad("a fit needs at least two points".into());
        }
        Ok(())
    }

    pub fn shots_for(&self, gamma_index: usize) -> usize {
        match self.low_gamma_shots {
            Some(n) if gamma_index < 2 => n.max(self.shots),
            _ => self.shots,
        }
    }
}
