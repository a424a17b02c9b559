//! ADMM solvers for the NMCP, EMCP and BEMCP completion models.
//!
//! Every model couples the estimate `X` to one auxiliary tensor `Y` per
//! mode-k1k2 unfolding pair. One iteration updates each `Y` by a
//! spectral prox on its unfolding, then (EMCP/BEMCP) the penalty grids of
//! that pair, then averages the auxiliaries into `X` with the observed
//! entries pinned, and finally ascends the multipliers `Q`. All `ρ` then
//! grow by `μ`.
//!
//! Per iteration the cost is dominated by the `N(N−1)/2` t-SVDs: for each
//! pair, `⌈(J+1)/2⌉` SVDs of `I_k1 × I_k2` complex slices plus the FFTs,
//! where `J` is the product of the remaining extents.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use log::{debug, warn};
use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::metrics::psnr;
use crate::penalty::{shrink_spectrum, McpParams, PenaltyParamGrid};
use crate::tensor::{mode_fold, mode_unfold, DenseTensor, IndexSet, ModePair};

/// Lower clamp margin on BEMCP `Γ`, keeping `Γ > 1`.
pub const GAMMA_CLAMP_MARGIN: f64 = 1e-6;

/// Upper cap on BEMCP `Γ`.
///
/// Once `υ` sits on its floor `ε̄`, each update multiplies `Γ` by roughly
/// `sqrt(1 + 2σ/ε̄)` and it overflows within a few dozen iterations. At the
/// cap the shrinkage of that position is already indistinguishable from
/// soft thresholding by `Λ ≤ ε̄/cap`.
pub const GAMMA_CAP: f64 = 1e12;

/// Completion model.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    Nmcp,
    Emcp,
    Bemcp,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Nmcp => "nmcp",
            Method::Emcp => "emcp",
            Method::Bemcp => "bemcp",
        })
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "nmcp" => Ok(Method::Nmcp),
            "emcp" => Ok(Method::Emcp),
            "bemcp" => Ok(Method::Bemcp),
            other => Err(Error::InvalidParameter {
                name: "method",
                reason: format!("unknown method {other:?} (expected nmcp, emcp or bemcp)"),
            }),
        }
    }
}

/// Solver parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    pub method: Method,
    /// Weights over the unfolding pairs in lexicographic order; `None`
    /// means uniform.
    pub alpha: Option<Vec<f64>>,
    pub rho0: f64,
    pub mu: f64,
    pub eps: f64,
    pub max_iter: usize,
    pub gamma_init: f64,
    /// `None` means `0.1 · max|z|`.
    pub lambda_init: Option<f64>,
    pub epsilon_bar: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            method: Method::Bemcp,
            alpha: None,
            rho0: 1e-3,
            mu: 1.1,
            eps: 1e-4,
            max_iter: 500,
            gamma_init: 10.0,
            lambda_init: None,
            epsilon_bar: 1e-10,
        }
    }
}

fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

impl SolverConfig {
    pub fn with_method(method: Method) -> Self {
        Self {
            method,
            ..Self::default()
        }
    }

    /// Checks every field against an order-`order` problem.
    pub fn validate(&self, order: usize) -> Result<()> {
        self.weights(order)?;
        if !(self.rho0 > 0.0 && self.rho0.is_finite()) {
            return Err(invalid("rho0", "must be positive and finite"));
        }
        if !(self.mu > 1.0 && self.mu.is_finite()) {
            return Err(invalid("mu", "must be greater than 1"));
        }
        if !(self.eps > 0.0) {
            return Err(invalid("eps", "must be positive"));
        }
        if self.max_iter == 0 {
            return Err(invalid("max_iter", "must be at least 1"));
        }
        McpParams::new(self.lambda_init.unwrap_or(0.0), self.gamma_init)?;
        if !(self.epsilon_bar > 0.0 && self.epsilon_bar.is_finite()) {
            return Err(invalid("epsilon_bar", "must be positive and finite"));
        }
        Ok(())
    }

    /// Resolved pair weights for an order-`order` problem.
    pub fn weights(&self, order: usize) -> Result<Vec<f64>> {
        let n = ModePair::count(order);
        if n == 0 {
            return Err(Error::OrderMismatch {
                expected: 2,
                got: order,
            });
        }
        let Some(alpha) = &self.alpha else {
            return Ok(vec![1.0 / n as f64; n]);
        };
        if alpha.len() != n {
            return Err(invalid(
                "alpha",
                format!("expected {n} weights for an order-{order} tensor, got {}", alpha.len()),
            ));
        }
        if alpha.iter().any(|&a| !(a >= 0.0 && a.is_finite())) {
            return Err(invalid("alpha", "weights must be nonnegative"));
        }
        let sum: f64 = alpha.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(invalid("alpha", format!("weights sum to {sum}, not 1")));
        }
        Ok(alpha.clone())
    }

    /// Resolved initial `λ` for observation `z`.
    pub fn lambda0(&self, z: &DenseTensor) -> f64 {
        self.lambda_init.unwrap_or(0.1 * z.max_abs())
    }
}

/// Uniformly random mask with exactly `round(rate · total)` observed
/// entries, drawn without replacement from a ChaCha8 stream seeded by
/// `seed`.
pub fn generate_mask(shape: &[usize], rate: f64, seed: u64) -> Result<IndexSet> {
    if !(rate > 0.0 && rate <= 1.0) {
        return Err(invalid("sampling rate", format!("{rate} is outside (0, 1]")));
    }
    let total = IndexSet::empty(shape)?.len();
    let count = (rate * total as f64).round() as usize;
    let mut bits = vec![false; total];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for k in rand::seq::index::sample(&mut rng, total, count) {
        bits[k] = true;
    }
    IndexSet::new(shape.to_vec(), bits)
}

/// State attached to one unfolding pair.
#[derive(Clone, Debug, PartialEq)]
pub struct PairState {
    pub pair: ModePair,
    pub alpha: f64,
    pub rho: f64,
    /// Auxiliary tensor, in the original (folded) shape.
    pub y: DenseTensor,
    /// Multiplier, in the original shape.
    pub q: DenseTensor,
    /// `Λ`, `Γ`, `υ` for BEMCP; `Λ̄` and uniform `γ` for EMCP; uniform
    /// `λ`, `γ` for NMCP.
    pub grid: PenaltyParamGrid,
}

/// Full ADMM state.
#[derive(Clone, Debug, PartialEq)]
pub struct SolverState {
    pub x: DenseTensor,
    pub pairs: Vec<PairState>,
    /// Completed iterations.
    pub iter: usize,
}

impl SolverState {
    pub fn pair(&self, pair: ModePair) -> Option<&PairState> {
        self.pairs.iter().find(|p| p.pair == pair)
    }

    fn is_finite(&self) -> bool {
        self.x.is_finite()
            && self
                .pairs
                .iter()
                .all(|p| p.y.is_finite() && p.q.is_finite() && p.grid.is_finite() && p.rho.is_finite())
    }
}

fn check_problem(z: &DenseTensor, mask: &IndexSet, cfg: &SolverConfig) -> Result<()> {
    if z.shape() != mask.shape() {
        return Err(Error::ShapeMismatch {
            left: z.shape().to_vec(),
            right: mask.shape().to_vec(),
        });
    }
    cfg.validate(z.order())?;
    if mask.count() == 0 {
        return Err(Error::EmptyObservation);
    }
    if !z.project(mask)?.is_finite() {
        return Err(Error::NonFinite { context: "observation" });
    }
    Ok(())
}

/// Initial state: `X = P_Ω(z)`, every `Y = X`, every `Q = 0`, `ρ = ρ0`,
/// uniform grids `Λ0`, `Γ0` and `υ0 = Λ0·Γ0`.
pub fn init_state(z: &DenseTensor, mask: &IndexSet, cfg: &SolverConfig) -> Result<SolverState> {
    check_problem(z, mask, cfg)?;
    let x = z.project(mask)?;
    let weights = cfg.weights(z.order())?;
    let params = McpParams::new(cfg.lambda0(z), cfg.gamma_init)?;
    let zeros = DenseTensor::zeros(z.shape())?;
    let pairs = ModePair::all(z.order())
        .into_iter()
        .zip(weights)
        .map(|(pair, alpha)| {
            let [n1, n2, n3] = pair.unfolded_shape(z.shape())?;
            Ok(PairState {
                pair,
                alpha,
                rho: cfg.rho0,
                y: x.clone(),
                q: zeros.clone(),
                grid: PenaltyParamGrid::uniform(n3, n1.min(n2), params),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SolverState { x, pairs, iter: 0 })
}

/// Result of a `Y` update.
#[derive(Clone, Debug)]
pub struct YUpdate {
    pub y: DenseTensor,
    /// Fourier-slice singular values of the unfolded `Y⁺`, each row sorted
    /// nonincreasing.
    pub sigma: DMatrix<f64>,
}

/// `Y⁺ = fold(S(unfold(X + Q/ρ)))` where `S` shrinks every singular value
/// with effective parameters `(γρ/α, λα/ρ)` taken from the pair's grid.
///
/// These are the parameters that make the scaled subproblem
/// `min (α/ρ)·WTGN(Y) + ½‖Y − T‖²` a plain prox. A pair with `α = 0`
/// carries no penalty and returns `T` itself.
pub fn update_y(x: &DenseTensor, p: &PairState) -> Result<YUpdate> {
    let target = x.zip_map(&p.q, |xv, qv| xv + qv / p.rho)?;
    let unfolded = mode_unfold(&target, p.pair)?;
    let lambda = p.grid.lambda();
    let gamma = p.grid.gamma();
    let (shrunk, mut sigma) = shrink_spectrum(&unfolded, |i, j| {
        if p.alpha == 0.0 {
            (0.0, f64::INFINITY)
        } else {
            (lambda[(i, j)] * p.alpha / p.rho, gamma[(i, j)] * p.rho / p.alpha)
        }
    })?;
    for mut row in sigma.row_iter_mut() {
        let mut v: Vec<f64> = row.iter().copied().collect();
        v.sort_by(|a, b| b.total_cmp(a));
        row.copy_from_slice(&v);
    }
    Ok(YUpdate {
        y: mode_fold(&shrunk, p.pair, x.shape())?,
        sigma,
    })
}

/// EMCP weights `W = max(Λ̄ − σ/γ, 0)`; the caller then sets `Λ̄⁺ = W`.
pub fn update_w_emcp(lambda_bar: &DMatrix<f64>, sigma: &DMatrix<f64>, gamma: f64) -> DMatrix<f64> {
    lambda_bar.zip_map(sigma, |l, s| (l - s / gamma).max(0.0))
}

/// `υ⁺ = max(ΛΓ − σ, ε̄)`.
pub fn update_upsilon_bemcp(
    lambda: &DMatrix<f64>,
    gamma: &DMatrix<f64>,
    sigma: &DMatrix<f64>,
    epsilon_bar: f64,
) -> DMatrix<f64> {
    let lg = lambda.component_mul(gamma);
    lg.zip_map(sigma, |v, s| (v - s).max(epsilon_bar))
}

/// `Λ⁺ = υ⁺ / Γ` with the pre-update `Γ`.
pub fn update_lambda_bemcp(upsilon: &DMatrix<f64>, gamma: &DMatrix<f64>) -> DMatrix<f64> {
    upsilon.component_div(gamma)
}

/// `Γ⁺ = sqrt((2υ⁺σ + υ⁺²) / Λ⁺²)` before clamping.
pub fn gamma_bemcp_unclamped(
    upsilon: &DMatrix<f64>,
    lambda: &DMatrix<f64>,
    sigma: &DMatrix<f64>,
) -> DMatrix<f64> {
    DMatrix::from_fn(upsilon.nrows(), upsilon.ncols(), |i, j| {
        let (u, l, s) = (upsilon[(i, j)], lambda[(i, j)], sigma[(i, j)]);
        ((2.0 * u * s + u * u) / (l * l)).sqrt()
    })
}

/// [`gamma_bemcp_unclamped`] clamped to `[1 + 1e-6, GAMMA_CAP]`.
pub fn update_gamma_bemcp(
    upsilon: &DMatrix<f64>,
    lambda: &DMatrix<f64>,
    sigma: &DMatrix<f64>,
) -> DMatrix<f64> {
    gamma_bemcp_unclamped(upsilon, lambda, sigma).map(|g| g.clamp(1.0 + GAMMA_CLAMP_MARGIN, GAMMA_CAP))
}

/// `X⁺ = P_Ωᶜ(Σ(ρY − Q) / Σρ) + P_Ω(z)`.
pub fn update_x(pairs: &[PairState], z: &DenseTensor, mask: &IndexSet) -> Result<DenseTensor> {
    let mut num = DenseTensor::zeros(z.shape())?;
    let mut den = 0.0;
    for p in pairs {
        let term = p.y.zip_map(&p.q, |yv, qv| p.rho * yv - qv)?;
        num = num.add(&term)?;
        den += p.rho;
    }
    let data: Vec<f64> = num
        .data()
        .iter()
        .zip(z.data())
        .zip(mask.bits())
        .map(|((&n, &zv), &observed)| if observed { zv } else { n / den })
        .collect();
    DenseTensor::new(z.shape().to_vec(), data)
}

/// `Q⁺ = Q + ρ(X − Y)`.
pub fn update_q(p: &PairState, x: &DenseTensor) -> Result<DenseTensor> {
    let diff = x.sub(&p.y)?;
    p.q.zip_map(&diff, |qv, d| qv + p.rho * d)
}

/// One iteration's convergence record.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IterationRecord {
    /// 1-based iteration number.
    pub iter: usize,
    /// `‖X^{k+1} − X^k‖_∞`.
    pub inf_norm_diff: f64,
    /// Seconds since the solver was created.
    pub elapsed_s: f64,
    /// Mean per-band PSNR against the ground truth, when one was supplied.
    pub psnr: Option<f64>,
}

/// Per-iteration history of a run.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConvergenceTrace {
    pub records: Vec<IterationRecord>,
    /// Whether the last record met the tolerance (or no iteration was
    /// needed).
    pub converged: bool,
}

impl ConvergenceTrace {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn last(&self) -> Option<&IterationRecord> {
        self.records.last()
    }
}

/// Step-by-step driver of one completion run.
#[derive(Debug)]
pub struct Solver {
    z: DenseTensor,
    mask: IndexSet,
    cfg: SolverConfig,
    state: SolverState,
    truth: Option<DenseTensor>,
    frozen: bool,
    start: Instant,
}

impl Solver {
    pub fn new(z: DenseTensor, mask: IndexSet, cfg: SolverConfig) -> Result<Self> {
        let state = init_state(&z, &mask, &cfg)?;
        Ok(Self {
            z,
            mask,
            cfg,
            state,
            truth: None,
            frozen: false,
            start: Instant::now(),
        })
    }

    /// Records PSNR against `truth` after every iteration.
    pub fn with_ground_truth(mut self, truth: DenseTensor) -> Result<Self> {
        if truth.shape() != self.z.shape() {
            return Err(Error::ShapeMismatch {
                left: truth.shape().to_vec(),
                right: self.z.shape().to_vec(),
            });
        }
        self.truth = Some(truth);
        Ok(self)
    }

    /// Skips the penalty-parameter updates (EMCP `W`/`Λ̄`, BEMCP `υ`/`Λ`/`Γ`)
    /// so the grids stay at their initial values.
    pub fn freeze_penalty_params(mut self, frozen: bool) -> Self {
        self.frozen = frozen;
        self
    }

    pub fn state(&self) -> &SolverState {
        &self.state
    }

    pub fn config(&self) -> &SolverConfig {
        &self.cfg
    }

    /// Runs one full iteration and returns its record.
    pub fn step(&mut self) -> Result<IterationRecord> {
        let method = self.cfg.method;
        let frozen = self.frozen;
        let eps_bar = self.cfg.epsilon_bar;
        let x = &self.state.x;

        self.state.pairs.par_iter_mut().try_for_each(|p| -> Result<()> {
            let YUpdate { y, sigma } = update_y(x, p)?;
            p.y = y;
            if frozen {
                return Ok(());
            }
            match method {
                Method::Nmcp => {}
                Method::Emcp => {
                    let gamma = p.grid.gamma()[(0, 0)];
                    let w = update_w_emcp(p.grid.lambda(), &sigma, gamma);
                    p.grid.set_upsilon(w.clone());
                    p.grid.set_lambda(w);
                }
                Method::Bemcp => {
                    let upsilon = update_upsilon_bemcp(p.grid.lambda(), p.grid.gamma(), &sigma, eps_bar);
                    let lambda = update_lambda_bemcp(&upsilon, p.grid.gamma());
                    let gamma = update_gamma_bemcp(&upsilon, &lambda, &sigma);
                    p.grid.set_upsilon(upsilon);
                    p.grid.set_lambda(lambda);
                    p.grid.set_gamma(gamma);
                }
            }
            Ok(())
        })?;

        let x_new = update_x(&self.state.pairs, &self.z, &self.mask)?;
        self.state.pairs.par_iter_mut().try_for_each(|p| -> Result<()> {
            p.q = update_q(p, &x_new)?;
            Ok(())
        })?;
        let inf_norm_diff = x_new.inf_norm_diff(&self.state.x)?;
        self.state.x = x_new;
        self.state.iter += 1;
        let rho = self.cfg.rho0 * self.cfg.mu.powi(self.state.iter as i32);
        for p in &mut self.state.pairs {
            p.rho = rho;
        }

        if !self.state.is_finite() || !inf_norm_diff.is_finite() {
            return Err(Error::Diverged {
                iteration: self.state.iter,
            });
        }
        let psnr = match &self.truth {
            Some(t) => Some(psnr(&self.state.x, t)?),
            None => None,
        };
        let record = IterationRecord {
            iter: self.state.iter,
            inf_norm_diff,
            elapsed_s: self.start.elapsed().as_secs_f64(),
            psnr,
        };
        debug!(
            "iter {} diff {:.3e} rho {:.3e}",
            record.iter, record.inf_norm_diff, rho
        );
        Ok(record)
    }

    /// Iterates until `‖ΔX‖_∞ ≤ eps` or `max_iter` iterations.
    ///
    /// A fully observed input returns `z` with an empty trace.
    pub fn run(mut self) -> Result<(DenseTensor, ConvergenceTrace)> {
        let mut trace = ConvergenceTrace::default();
        if self.mask.is_full() {
            trace.converged = true;
            return Ok((self.z, trace));
        }
        while self.state.iter < self.cfg.max_iter {
            let record = self.step()?;
            trace.records.push(record);
            if record.inf_norm_diff <= self.cfg.eps {
                trace.converged = true;
                if record.iter == 1 && record.inf_norm_diff == 0.0 {
                    warn!(
                        "stopped after one iteration with the estimate unchanged: every auxiliary \
                         was shrunk to zero (try a smaller lambda_init or a larger rho0)"
                    );
                }
                break;
            }
        }
        Ok((self.state.x, trace))
    }
}

/// Completes `z` observed on `mask`.
pub fn solve(z: &DenseTensor, mask: &IndexSet, cfg: &SolverConfig) -> Result<(DenseTensor, ConvergenceTrace)> {
    Solver::new(z.clone(), mask.clone(), cfg.clone())?.run()
}
