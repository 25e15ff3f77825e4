use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::surface::BoundaryMode;
use crate::twirl::PulseSet;

use super::config::ExperimentConfig;
use super::fit::ExponentFit;
use super::run::ResultRecord;
use super::BenchError;

/// Duration of one bulk stabilizer readout under each scheme.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundTimeSummary {
    pub t_cz2: f64,
    pub t_cz: Option<f64>,
    /// `2 * t_cz2`.
    pub two_cz2: f64,
    /// `4 * t_cz`.
    pub four_cz: Option<f64>,
    pub ratio: Option<f64>,
    pub windows_two_cz2: usize,
    pub windows_four_cz: usize,
}

impl fmt::Display for RoundTimeSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "2 x T_CZ2 = {:.2} ({} windows)", self.two_cz2, self.windows_two_cz2)?;
        if let (Some(four), Some(r)) = (self.four_cz, self.ratio) {
            write!(f, ", 4 x T_CZ = {four:.2} ({} windows), ratio {r:.3}", self.windows_four_cz)?;
        }
        Ok(())
    }
}

pub fn round_time_summary(pulses: &PulseSet) -> RoundTimeSummary {
    let t_cz2 = pulses.cz2.waveform.total_duration;
    let t_cz = pulses.cz.as_ref().map(|p| p.waveform.total_duration);
    let two_cz2 = 2.0 * t_cz2;
    let four_cz = t_cz.map(|t| 4.0 * t);
    RoundTimeSummary {
        t_cz2,
        t_cz,
        two_cz2,
        four_cz,
        ratio: four_cz.map(|f| two_cz2 / f),
        windows_two_cz2: 2,
        windows_four_cz: 4,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitRow {
    pub ordering: String,
    pub boundary: BoundaryMode,
    pub distance: usize,
    pub basis: String,
    pub fit: ExponentFit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub config: ExperimentConfig,
    pub round_time: RoundTimeSummary,
    pub records: Vec<ResultRecord>,
    pub fits: Vec<FitRow>,
    /// Curves that could not be fitted, with the reason.
    pub fit_failures: Vec<String>,
}

impl Report {
    pub fn low_confidence(&self) -> bool {
        !self.fit_failures.is_empty()
    }

    pub fn fit_for(&self, ordering: &str, boundary: BoundaryMode, distance: usize, basis: &str) -> Option<&ExponentFit> {
        self.fits
            .iter()
            .find(|f| f.ordering == ordering && f.boundary == boundary && f.distance == distance && f.basis == basis)
            .map(|f| &f.fit)
    }

    pub fn to_json(&self) -> Result<String, BenchError> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self, BenchError> {
        Ok(serde_json::from_str(s)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

impl FromStr for ReportFormat {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            _ => Err(BenchError::Config(format!("unknown report format {s:?}"))),
        }
    }
}

#[derive(Serialize)]
struct FitCsv<'a> {
    ordering: &'a str,
    boundary: BoundaryMode,
    distance: usize,
    basis: &'a str,
    nu: f64,
    sigma_nu: f64,
    prefactor: f64,
    points: usize,
    gamma_min: f64,
    gamma_max: f64,
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("report");
    path.with_file_name(format!("{stem}_{suffix}.csv"))
}

fn create_parent(path: &Path) -> Result<(), BenchError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    Ok(())
}

/// Writes the report and returns the files written.
///
/// JSON goes to one file. CSV writes the records to `path` and the fits
/// and round-time summary to `<stem>_fits.csv` and `<stem>_round_time.csv`
/// beside it.
pub fn emit_report(report: &Report, format: ReportFormat, path: &Path) -> Result<Vec<PathBuf>, BenchError> {
    create_parent(path)?;
    match format {
        ReportFormat::Json => {
            std::fs::write(path, report.to_json()?)?;
            Ok(vec![path.to_path_buf()])
        }
        ReportFormat::Csv => {
            let mut w = csv::Writer::from_path(path)?;
            if report.records.is_empty() {
                w.write_record(RECORD_HEADER)?;
            }
            for r in &report.records {
                w.serialize(r)?;
            }
            w.flush()?;

            let fits_path = sibling(path, "fits");
            let mut w = csv::Writer::from_path(&fits_path)?;
            if report.fits.is_empty() {
                w.write_record(FIT_HEADER)?;
            }
            for f in &report.fits {
                w.serialize(FitCsv {
                    ordering: &f.ordering,
                    boundary: f.boundary,
                    distance: f.distance,
                    basis: &f.basis,
                    nu: f.fit.nu,
                    sigma_nu: f.fit.sigma_nu,
                    prefactor: f.fit.prefactor,
                    points: f.fit.gammas.len(),
                    gamma_min: f.fit.gammas.first().copied().unwrap_or(f64::NAN),
                    gamma_max: f.fit.gammas.last().copied().unwrap_or(f64::NAN),
                })?;
            }
            w.flush()?;

            let rt_path = sibling(path, "round_time");
            let mut w = csv::Writer::from_path(&rt_path)?;
            w.serialize(&report.round_time)?;
            w.flush()?;
            Ok(vec![path.to_path_buf(), fits_path, rt_path])
        }
    }
}

const RECORD_HEADER: [&str; 14] = [
    "ordering",
    "boundary",
    "basis",
    "distance",
    "rounds",
    "gamma",
    "shots",
    "failures",
    "p_l",
    "sigma",
    "low_confidence",
    "hyperedges",
    "undecomposable",
    "seed",
];

const FIT_HEADER: [&str; 10] = [
    "ordering", "boundary", "distance", "basis", "nu", "sigma_nu", "prefactor", "points", "gamma_min",
    "gamma_max",
];

pub fn read_records_csv(path: &Path) -> Result<Vec<ResultRecord>, BenchError> {
    let mut r = csv::Reader::from_path(path)?;
    Ok(r.deserialize().collect::<Result<Vec<_>, _>>()?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_matches_record_fields() {
        let r = ResultRecord {
            ordering: "four_cz".into(),
            boundary: BoundaryMode::GlobalPulse,
            basis: "z".into(),
            distance: 3,
            rounds: 3,
            gamma: 1.0 / 3.0,
            shots: 10,
            failures: 1,
            p_l: 0.1,
            sigma: 0.09486832980505137,
            low_confidence: true,
            hyperedges: 0,
            undecomposable: 0,
            seed: u64::MAX,
        };
        let mut w = csv::Writer::from_writer(Vec::new());
        w.serialize(&r).unwrap();
        let text = String::from_utf8(w.into_inner().unwrap()).unwrap();
        assert_eq!(text.lines().next().unwrap(), RECORD_HEADER.join(","));
    }
}
