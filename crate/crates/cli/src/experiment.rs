//! One end-to-end completion run and its report.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, ensure, Context, Result};
use log::{info, warn};
use serde::{Deserialize, Serialize};
use tenscomp::metrics::{self, PsnrPeak, PSNR_CAP};
use tenscomp::solver::{generate_mask, ConvergenceTrace, Solver, SolverConfig};
use tenscomp::{DenseTensor, IndexSet};

use crate::config::{ExperimentConfig, MaskSource};
use crate::io;

/// Per-band metric values, in band order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BandMetrics {
    pub psnr: Vec<f64>,
    pub ssim: Vec<f64>,
    pub ergas: Vec<Option<f64>>,
}

/// Everything a run reports. Metrics are `null` without a ground truth, and
/// ERGAS is also `null` when every reference band has zero mean.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompletionReport {
    pub psnr: Option<f64>,
    pub ssim: Option<f64>,
    pub ergas: Option<f64>,
    pub rel_error: Option<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub final_inf_norm_diff: Option<f64>,
    pub wall_time_s: f64,
    pub observed: usize,
    pub total: usize,
    pub trace: Option<PathBuf>,
    pub bands: Option<BandMetrics>,
    pub config: ExperimentConfig,
}

impl CompletionReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report is always serializable")
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }
}

fn cap(psnr: f64) -> f64 {
    psnr.min(PSNR_CAP)
}

/// Turns a degenerate metric into `None` with a warning.
fn optional(name: &str, r: tenscomp::Result<f64>) -> Result<Option<f64>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(tenscomp::Error::DegenerateMetric { reason, .. }) => {
            warn!("{name} undefined: {reason}");
            Ok(None)
        }
        Err(e) => Err(e.into()),
    }
}

fn score(x: &DenseTensor, truth: &DenseTensor, peak: PsnrPeak) -> Result<(CompletionMetrics, BandMetrics)> {
    let psnr_bands: Option<Vec<f64>> = match metrics::psnr_per_band(x, truth, peak) {
        Ok(b) => Some(b.into_iter().map(cap).collect()),
        Err(tenscomp::Error::DegenerateMetric { reason, .. }) => {
            warn!("psnr undefined: {reason}");
            None
        }
        Err(e) => return Err(e.into()),
    };
    let ssim_bands = metrics::ssim_per_band(x, truth)?;
    let ergas_bands = metrics::ergas_terms(x, truth)?
        .into_iter()
        .map(|t| t.map(|v| 100.0 * v.sqrt()))
        .collect();
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let m = CompletionMetrics {
        psnr: psnr_bands.as_deref().map(mean),
        ssim: Some(mean(&ssim_bands)),
        ergas: optional("ergas", metrics::ergas(x, truth))?,
        rel_error: optional("rel_error", metrics::rel_error(x, truth))?,
    };
    let bands = BandMetrics {
        psnr: psnr_bands.unwrap_or_default(),
        ssim: ssim_bands,
        ergas: ergas_bands,
    };
    Ok((m, bands))
}

struct CompletionMetrics {
    psnr: Option<f64>,
    ssim: Option<f64>,
    ergas: Option<f64>,
    rel_error: Option<f64>,
}

fn resolve_mask(source: &MaskSource, shape: &[usize]) -> Result<IndexSet> {
    match source {
        MaskSource::File(path) => {
            let m = io::load_mask(path)?;
            ensure!(
                m.shape() == shape,
                "mask shape {:?} does not match tensor shape {:?}",
                m.shape(),
                shape
            );
            Ok(m)
        }
        MaskSource::Generate { rate, seed } => {
            ensure!(*rate > 0.0 && *rate <= 1.0, "sampling rate {rate} outside (0, 1]");
            Ok(generate_mask(shape, *rate, *seed)?)
        }
    }
}

/// Checks the config invariants before any work is done.
pub fn validate(cfg: &ExperimentConfig) -> Result<()> {
    let mut files = vec![&cfg.input];
    files.extend(&cfg.truth);
    if let MaskSource::File(p) = &cfg.mask {
        files.push(p);
    }
    for f in files {
        ensure!(f.is_file(), "input file {} does not exist", f.display());
    }
    if let MaskSource::Generate { rate, .. } = cfg.mask {
        ensure!(rate > 0.0 && rate <= 1.0, "sampling rate {rate} outside (0, 1]");
    }
    Ok(())
}

/// Writes the trace as CSV; a missing PSNR is an empty field.
pub fn write_trace(trace: &ConvergenceTrace, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    w.write_record(["iter", "inf_norm_diff", "elapsed_s", "psnr"])?;
    for r in &trace.records {
        w.write_record([
            r.iter.to_string(),
            r.inf_norm_diff.to_string(),
            r.elapsed_s.to_string(),
            r.psnr.map(|p| cap(p).to_string()).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Loads, completes, scores and writes every artifact named in `cfg`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<CompletionReport> {
    validate(cfg)?;
    let start = Instant::now();
    let input = io::load_tensor(&cfg.input)?;
    let truth = match &cfg.truth {
        Some(p) => {
            let t = io::load_tensor(p)?;
            if t.shape() != input.shape() {
                bail!("truth shape {:?} does not match input shape {:?}", t.shape(), input.shape());
            }
            Some(t)
        }
        None => None,
    };
    let mask = resolve_mask(&cfg.mask, input.shape())?;
    let z = truth.as_ref().unwrap_or(&input).project(&mask)?;
    info!(
        "{} on shape {:?}, {} of {} entries observed",
        tenscomp::Method::from(cfg.solver.method),
        input.shape(),
        mask.count(),
        mask.len()
    );

    let solver_cfg = SolverConfig::from(&cfg.solver);
    let mut solver = Solver::new(z, mask.clone(), solver_cfg)?;
    if let Some(t) = &truth {
        solver = solver.with_ground_truth(t.clone())?;
    }
    let (x, trace) = solver.run()?;
    io::save_tensor(&x, &cfg.output.completed)?;
    if let Some(p) = &cfg.output.trace {
        write_trace(&trace, p)?;
    }

    let (m, bands) = match &truth {
        Some(t) => {
            let (m, b) = score(&x, t, cfg.psnr_peak.into())?;
            (m, Some(b))
        }
        None => (
            CompletionMetrics {
                psnr: None,
                ssim: None,
                ergas: None,
                rel_error: None,
            },
            None,
        ),
    };
    let report = CompletionReport {
        psnr: m.psnr,
        ssim: m.ssim,
        ergas: m.ergas,
        rel_error: m.rel_error,
        iterations: trace.len(),
        converged: trace.converged,
        final_inf_norm_diff: trace.last().map(|r| r.inf_norm_diff),
        wall_time_s: start.elapsed().as_secs_f64(),
        observed: mask.count(),
        total: mask.len(),
        trace: cfg.output.trace.clone(),
        bands,
        config: cfg.clone(),
    };
    fs::write(&cfg.output.report, report.to_json())
        .with_context(|| format!("writing {}", cfg.output.report.display()))?;
    Ok(report)
}
