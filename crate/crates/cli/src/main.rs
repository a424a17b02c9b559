use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand};
use tenscomp::solver::generate_mask;
use tenscomp::tsvd::n_tubal_rank;
use tenscomp_cli::config::{MaskSource, MethodName, PartialConfig, PeakName};
use tenscomp_cli::{io, run_experiment};

/// Low-rank tensor completion with MCP-penalized t-SVD spectra.
#[derive(Parser)]
#[command(name = "tenscomp", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Complete a partially observed tensor and write a report.
    Complete(Box<CompleteArgs>),
    /// Print the N-tubal rank of a tensor.
    Rank {
        #[arg(long)]
        input: PathBuf,
    },
    /// Write a uniformly sampled mask.
    Mask {
        /// Extents, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        shape: Vec<usize>,
        #[arg(long)]
        rate: f64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Every flag overrides the matching field of `--config`.
#[derive(Args)]
struct CompleteArgs {
    /// JSON experiment config.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    truth: Option<PathBuf>,
    #[arg(long, conflicts_with_all = ["rate", "seed"])]
    mask: Option<PathBuf>,
    #[arg(long, requires = "seed")]
    rate: Option<f64>,
    #[arg(long, requires = "rate")]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    method: Option<MethodName>,
    /// Initial Γ (gamma_init).
    #[arg(long)]
    gamma: Option<f64>,
    /// Initial Λ (lambda_init); defaults to 0.1·max|z|.
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    rho0: Option<f64>,
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    /// Pair weights, comma separated, in (k1, k2) lexicographic order.
    #[arg(long, value_delimiter = ',')]
    alpha: Option<Vec<f64>>,
    #[arg(long)]
    epsilon_bar: Option<f64>,
    #[arg(long, value_enum)]
    psnr_peak: Option<PeakName>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long)]
    trace: Option<PathBuf>,
}

impl CompleteArgs {
    fn merge(self) -> Result<tenscomp_cli::ExperimentConfig> {
        let mut c = match &self.config {
            Some(p) => {
                let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                PartialConfig::from_json(&text).with_context(|| format!("parsing {}", p.display()))?
            }
            None => PartialConfig::default(),
        };
        macro_rules! set {
            ($dst:expr, $src:expr) => {
                if let Some(v) = $src {
                    $dst = v.into();
                }
            };
        }
        set!(c.input, self.input.map(Some));
        set!(c.truth, self.truth.map(Some));
        set!(c.mask, self.mask.map(|p| Some(MaskSource::File(p))));
        if let (Some(rate), Some(seed)) = (self.rate, self.seed) {
            c.mask = Some(MaskSource::Generate { rate, seed });
        }
        let s = &mut c.solver;
        set!(s.method, self.method);
        set!(s.gamma_init, self.gamma);
        set!(s.lambda_init, self.lambda.map(Some));
        set!(s.rho0, self.rho0);
        set!(s.mu, self.mu);
        set!(s.eps, self.eps);
        set!(s.max_iter, self.max_iter);
        set!(s.alpha, self.alpha.map(Some));
        set!(s.epsilon_bar, self.epsilon_bar);
        set!(c.psnr_peak, self.psnr_peak.map(Some));
        set!(c.output.completed, self.out.map(Some));
        set!(c.output.report, self.report.map(Some));
        set!(c.output.trace, self.trace.map(Some));
        c.finish().map_err(|e| anyhow!(e))
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".into(), |v| format!("{v:.6}"))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Complete(args) => {
            let cfg = (*args).merge()?;
            let r = run_experiment(&cfg)?;
            println!(
                "{} iterations (converged: {}), {:.3} s; psnr {} ssim {} ergas {} rel_error {}",
                r.iterations,
                r.converged,
                r.wall_time_s,
                fmt_opt(r.psnr),
                fmt_opt(r.ssim),
                fmt_opt(r.ergas),
                fmt_opt(r.rel_error),
            );
        }
        Command::Rank { input } => {
            let t = io::load_tensor(&input)?;
            let ranks = n_tubal_rank(&t)?;
            let parts: Vec<String> = ranks.iter().map(|r| r.to_string()).collect();
            println!("[{}]", parts.join(", "));
        }
        Command::Mask { shape, rate, seed, out } => {
            let m = generate_mask(&shape, rate, seed)?;
            io::save_mask(&m, &out)?;
            println!("{} of {} entries observed", m.count(), m.len());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    if let Ok(v) = std::env::var("TENSCOMP_THREADS") {
        match v.parse::<usize>() {
            Ok(n) if n > 0 => {
                if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                    log::warn!("could not size the thread pool: {e}");
                }
            }
            _ => log::warn!("ignoring TENSCOMP_THREADS={v:?}: expected a positive integer"),
        }
    }
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
