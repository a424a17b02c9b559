//! Experiment configuration, as read from JSON and echoed into reports.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use tenscomp::metrics::PsnrPeak;
use tenscomp::solver::{Method, SolverConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum MethodName {
    Nmcp,
    Emcp,
    Bemcp,
}

impl From<MethodName> for Method {
    fn from(m: MethodName) -> Self {
        match m {
            MethodName::Nmcp => Method::Nmcp,
            MethodName::Emcp => Method::Emcp,
            MethodName::Bemcp => Method::Bemcp,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum PeakName {
    #[default]
    Band,
    Global,
}

impl From<PeakName> for PsnrPeak {
    fn from(p: PeakName) -> Self {
        match p {
            PeakName::Band => PsnrPeak::PerBand,
            PeakName::Global => PsnrPeak::Global,
        }
    }
}

/// Where the sampling mask comes from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MaskSource {
    /// DTF1 file of 0/1 entries.
    File(PathBuf),
    /// Uniform sampling of `round(rate · total)` entries.
    Generate { rate: f64, seed: u64 },
}

/// Solver parameters; every missing field takes its default.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSettings {
    pub method: MethodName,
    pub alpha: Option<Vec<f64>>,
    pub rho0: f64,
    pub mu: f64,
    pub eps: f64,
    pub max_iter: usize,
    pub gamma_init: f64,
    pub lambda_init: Option<f64>,
    pub epsilon_bar: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        let d = SolverConfig::default();
        Self {
            method: MethodName::Bemcp,
            alpha: d.alpha,
            rho0: d.rho0,
            mu: d.mu,
            eps: d.eps,
            max_iter: d.max_iter,
            gamma_init: d.gamma_init,
            lambda_init: d.lambda_init,
            epsilon_bar: d.epsilon_bar,
        }
    }
}

impl From<&SolverSettings> for SolverConfig {
    fn from(s: &SolverSettings) -> Self {
        SolverConfig {
            method: s.method.into(),
            alpha: s.alpha.clone(),
            rho0: s.rho0,
            mu: s.mu,
            eps: s.eps,
            max_iter: s.max_iter,
            gamma_init: s.gamma_init,
            lambda_init: s.lambda_init,
            epsilon_bar: s.epsilon_bar,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputPaths {
    pub completed: PathBuf,
    pub report: PathBuf,
    pub trace: Option<PathBuf>,
}

/// One complete experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub input: PathBuf,
    /// When present, the observation is taken from the ground truth and
    /// metrics are computed against it.
    pub truth: Option<PathBuf>,
    pub mask: MaskSource,
    #[serde(default)]
    pub solver: SolverSettings,
    #[serde(default)]
    pub psnr_peak: PeakName,
    pub output: OutputPaths,
}

#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialOutput {
    pub completed: Option<PathBuf>,
    pub report: Option<PathBuf>,
    pub trace: Option<PathBuf>,
}

/// A config file, any part of which may be left to command-line flags.
#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialConfig {
    pub input: Option<PathBuf>,
    pub truth: Option<PathBuf>,
    pub mask: Option<MaskSource>,
    #[serde(default)]
    pub solver: SolverSettings,
    pub psnr_peak: Option<PeakName>,
    #[serde(default)]
    pub output: PartialOutput,
}

impl PartialConfig {
    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    /// Fails naming the first required field that is still missing.
    pub fn finish(self) -> Result<ExperimentConfig, String> {
        let missing = |what: &str| format!("missing {what} (set it in the config file or by flag)");
        Ok(ExperimentConfig {
            input: self.input.ok_or_else(|| missing("input path"))?,
            truth: self.truth,
            mask: self.mask.ok_or_else(|| missing("mask source (--mask or --rate/--seed)"))?,
            solver: self.solver,
            psnr_peak: self.psnr_peak.unwrap_or_default(),
            output: OutputPaths {
                completed: self.output.completed.ok_or_else(|| missing("output tensor path"))?,
                report: self.output.report.ok_or_else(|| missing("report path"))?,
                trace: self.output.trace,
            },
        })
    }
}
