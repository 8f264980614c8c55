//! JSON run report for `fse conceal`.

use fse::{JobReport, JobStatus, StopReason};
use serde::Serialize;

#[derive(Debug, Serialize)]
pub struct RunReport {
    pub config: ConfigEcho,
    pub jobs: Vec<JobEntry>,
    pub timing_ms: Timing,
    pub outputs: Outputs,
}

#[derive(Debug, Serialize)]
pub struct ConfigEcho {
    pub rho: f64,
    pub border: usize,
    pub fft: usize,
    pub iterations: usize,
    pub odc: bool,
    pub fast: bool,
    pub denominator: &'static str,
    pub parallel: bool,
}

#[derive(Debug, Serialize)]
pub struct JobEntry {
    pub x: usize,
    pub y: usize,
    pub width: usize,
    pub height: usize,
    pub status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fallback_steps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub iterations: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stop: Option<&'static str>,
}

impl From<&JobReport> for JobEntry {
    fn from(job: &JobReport) -> Self {
        let (status, fallback_steps, error) = match &job.status {
            JobStatus::Ok => ("ok", None, None),
            JobStatus::Fallback { steps } => ("fallback", Some(*steps), None),
            JobStatus::Failed { error } => ("failed", None, Some(error.clone())),
        };
        Self {
            x: job.block.x,
            y: job.block.y,
            width: job.block.width,
            height: job.block.height,
            status,
            fallback_steps,
            error,
            iterations: job.iterations,
            stop: job.stop.map(|s| match s {
                StopReason::MaxIterations => "max_iterations",
                StopReason::Converged => "converged",
                StopReason::ResidualEnergy => "residual_energy",
            }),
        }
    }
}

#[derive(Debug, Default, Serialize)]
pub struct Timing {
    pub read: f64,
    pub conceal: f64,
    pub write: f64,
}

#[derive(Debug, Serialize)]
pub struct Outputs {
    pub image: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<String>,
}
