//! End-to-end memory experiments, exponent fits and reports.

mod config;
mod fit;
mod report;
mod run;

use thiserror::Error;

pub use config::{default_gamma_grid, ExperimentConfig, OutputPaths, PulsePaths, Series, CONFIG_VERSION};
pub use fit::{fit_scaling_exponent, ExponentFit, FitPoint};
pub use report::{
    emit_report, read_records_csv, round_time_summary, FitRow, Report, ReportFormat,
    RoundTimeSummary,
};
pub use run::{load_or_synthesize_pulses, provision_channels, run_bench, run_memory_experiment, ResultRecord};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("config: {0}")]
    Config(String),
    #[error("not enough points for a fit: {have} qualifying, {need} needed")]
    InsufficientPoints { have: usize, need: usize },
    #[error(transparent)]
    Pulse(#[from] crate::pulse::PulseError),
    #[error(transparent)]
    Twirl(#[from] crate::twirl::TwirlError),
    #[error(transparent)]
    Surface(#[from] crate::surface::SurfaceError),
    #[error(transparent)]
    Sim(#[from] crate::frame_sim::SimError),
    #[error(transparent)]
    Decode(#[from] crate::dem_decode::DecodeError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl BenchError {
    /// Process exit code: 2 for configuration problems, 3 for compute
    /// failures. Low-confidence results exit with 4 from the CLI.
    pub fn exit_code(&self) -> i32 {
        match self {
            BenchError::Config(_) => 2,
            _ => 3,
        }
    }
}

pub const EXIT_LOW_CONFIDENCE: i32 = 4;
