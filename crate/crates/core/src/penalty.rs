//! Minimax-concave penalty (MCP) family and its proximal operators.
//!
//! `h_{γ,λ}(y) = λ|y| − y²/(2γ)` for `|y| ≤ γλ`, and the constant plateau
//! `γλ²/2` beyond. The same value is the minimum over `υ ≥ 0` of
//! `(2υ|y| + (υ − λγ)²)/(2γ)`, which is what lets both `λ` and `γ` become
//! per-singular-value variables in the tensor penalty
//!
//! ```text
//! ‖Y‖_{Γ,Λ} = Σ_i Σ_j h_{Γ(i,j),Λ(i,j)}(σ_j(Ȳ⁽ⁱ⁾))
//! ```
//!
//! where `Ȳ⁽ⁱ⁾` is the i-th frontal slice of `fft(Y, [], 3)` and `σ_j` its
//! j-th largest singular value. Parameter matrices are `I3 × min(I1, I2)`
//! and pair by sorted position.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::tensor::DenseTensor;
use crate::tsvd::{singular_spectrum, spectral_map, SingularSpectrum};

/// Smallest admissible `γ` is strictly above `1 + GAMMA_MARGIN`.
pub const GAMMA_MARGIN: f64 = 1e-9;

/// Scalar MCP parameters, `λ ≥ 0` and `γ > 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McpParams {
    lambda: f64,
    gamma: f64,
}

impl McpParams {
    pub fn new(lambda: f64, gamma: f64) -> Result<Self> {
        check_lambda(lambda)?;
        check_gamma(gamma)?;
        Ok(Self { lambda, gamma })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidParameter {
            name: "lambda",
            reason: format!("{lambda} is not a finite nonnegative number"),
        });
    }
    Ok(())
}

fn check_gamma(gamma: f64) -> Result<()> {
    if !(gamma > 1.0 + GAMMA_MARGIN) || gamma.is_nan() {
        return Err(Error::InvalidParameter {
            name: "gamma",
            reason: format!("{gamma} must exceed 1 + {GAMMA_MARGIN:e}"),
        });
    }
    Ok(())
}

/// MCP value `h_{γ,λ}(y)`.
pub fn mcp_value(y: f64, p: McpParams) -> f64 {
    let (lambda, gamma) = (p.lambda, p.gamma);
    let a = y.abs();
    if a <= gamma * lambda {
        lambda * a - a * a / (2.0 * gamma)
    } else {
        gamma * lambda * lambda / 2.0
    }
}

/// Inner objective `(2υ|y| + (υ − λγ)²)/(2γ)` of the variational form.
pub fn bemcp_objective(y: f64, upsilon: f64, p: McpParams) -> f64 {
    let d = upsilon - p.lambda * p.gamma;
    (2.0 * upsilon * y.abs() + d * d) / (2.0 * p.gamma)
}

/// Minimizing `υ` of [`bemcp_objective`]: `max(λγ − |y|, 0)`.
pub fn bemcp_minimizer(y: f64, p: McpParams) -> f64 {
    (p.lambda * p.gamma - y.abs()).max(0.0)
}

/// Proximal operator of the MCP (firm thresholding):
/// `min(|y|, max(γ(|y| − λ)/(γ − 1), 0)) · sign(y)`.
pub fn scalar_prox(y: f64, p: McpParams) -> f64 {
    let shrunk = singular_shrink(y.abs(), p.lambda, p.gamma);
    if y < 0.0 {
        -shrunk
    } else {
        shrunk
    }
}

/// Firm thresholding of a nonnegative magnitude.
///
/// Zero up to `λ`, slope `γ/(γ−1)` up to `γλ`, identity beyond. `λ = 0`
/// is the identity and `γ = ∞` is soft thresholding. The formula has no
/// meaning for `γ ≤ 1`, where `½(g−σ)² + h(g)` is no longer convex; there
/// the exact minimizer, a hard threshold at `√γ·λ`, is returned instead.
pub fn singular_shrink(sigma: f64, lambda: f64, gamma: f64) -> f64 {
    if lambda == 0.0 {
        return sigma;
    }
    if gamma.is_infinite() {
        return (sigma - lambda).max(0.0);
    }
    if gamma <= 1.0 {
        return if sigma > gamma.sqrt() * lambda { sigma } else { 0.0 };
    }
    sigma.min((gamma * (sigma - lambda) / (gamma - 1.0)).max(0.0))
}

/// Elementwise `Λ`, `Γ`, `υ` grids of one unfolding, all `I3 × R`.
///
/// The EMCP solver reuses the type: `lambda` holds `Λ̄`, `upsilon` holds the
/// weights `W`, and `gamma` stays uniform.
#[derive(Clone, Debug, PartialEq)]
pub struct PenaltyParamGrid {
    lambda: DMatrix<f64>,
    gamma: DMatrix<f64>,
    upsilon: DMatrix<f64>,
}

impl PenaltyParamGrid {
    pub fn new(lambda: DMatrix<f64>, gamma: DMatrix<f64>, upsilon: DMatrix<f64>) -> Result<Self> {
        if lambda.shape() != gamma.shape() || lambda.shape() != upsilon.shape() {
            return Err(Error::ShapeMismatch {
                left: vec![lambda.nrows(), lambda.ncols()],
                right: vec![gamma.nrows(), gamma.ncols(), upsilon.nrows(), upsilon.ncols()],
            });
        }
        lambda.iter().try_for_each(|&v| check_lambda(v))?;
        gamma.iter().try_for_each(|&v| check_gamma(v))?;
        if upsilon.iter().any(|&v| !(v >= 0.0)) {
            return Err(Error::InvalidParameter {
                name: "upsilon",
                reason: "entries must be nonnegative".into(),
            });
        }
        Ok(Self {
            lambda,
            gamma,
            upsilon,
        })
    }

    /// Uniform grids with `υ = λγ`.
    pub fn uniform(rows: usize, cols: usize, p: McpParams) -> Self {
        Self {
            lambda: DMatrix::from_element(rows, cols, p.lambda),
            gamma: DMatrix::from_element(rows, cols, p.gamma),
            upsilon: DMatrix::from_element(rows, cols, p.lambda * p.gamma),
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        self.lambda.shape()
    }

    pub fn lambda(&self) -> &DMatrix<f64> {
        &self.lambda
    }

    pub fn gamma(&self) -> &DMatrix<f64> {
        &self.gamma
    }

    pub fn upsilon(&self) -> &DMatrix<f64> {
        &self.upsilon
    }

    pub(crate) fn set_lambda(&mut self, m: DMatrix<f64>) {
        debug_assert_eq!(m.shape(), self.shape());
        self.lambda = m;
    }

    pub(crate) fn set_gamma(&mut self, m: DMatrix<f64>) {
        debug_assert_eq!(m.shape(), self.shape());
        self.gamma = m;
    }

    pub(crate) fn set_upsilon(&mut self, m: DMatrix<f64>) {
        debug_assert_eq!(m.shape(), self.shape());
        self.upsilon = m;
    }

    pub(crate) fn is_finite(&self) -> bool {
        self.lambda
            .iter()
            .chain(self.gamma.iter())
            .chain(self.upsilon.iter())
            .all(|v| v.is_finite())
    }
}

fn check_grid_shape(name: &'static str, m: &DMatrix<f64>, shape: (usize, usize)) -> Result<()> {
    if m.shape() != shape {
        return Err(Error::InvalidParameter {
            name,
            reason: format!("expected {}×{}, got {}×{}", shape.0, shape.1, m.nrows(), m.ncols()),
        });
    }
    Ok(())
}

/// WTGN of a precomputed spectrum.
pub fn wtgn_from_spectrum(
    spectrum: &SingularSpectrum,
    lambda: &DMatrix<f64>,
    gamma: &DMatrix<f64>,
) -> Result<f64> {
    let values = spectrum.values();
    check_grid_shape("lambda", lambda, values.shape())?;
    check_grid_shape("gamma", gamma, values.shape())?;
    let mut total = 0.0;
    for ((&s, &l), &g) in values.iter().zip(lambda.iter()).zip(gamma.iter()) {
        total += mcp_value(s, McpParams::new(l, g)?);
    }
    Ok(total)
}

/// Weighted tensor Γ-norm: MCP with elementwise parameters summed over the
/// Fourier-slice singular values of `y`.
pub fn wtgn_value(y: &DenseTensor, lambda: &DMatrix<f64>, gamma: &DMatrix<f64>) -> Result<f64> {
    wtgn_from_spectrum(&singular_spectrum(y)?, lambda, gamma)
}

/// `Σ_i Σ_j w(i,j) σ_j(Ȳ⁽ⁱ⁾)`.
pub fn weighted_tnn(spectrum: &SingularSpectrum, weights: &DMatrix<f64>) -> Result<f64> {
    check_grid_shape("weights", weights, spectrum.shape())?;
    if weights.iter().any(|&w| !(w >= 0.0)) {
        return Err(Error::InvalidParameter {
            name: "weights",
            reason: "entries must be nonnegative".into(),
        });
    }
    Ok(spectrum
        .values()
        .iter()
        .zip(weights.iter())
        .map(|(s, w)| s * w)
        .sum())
}

/// Applies [`singular_shrink`] with per-position `(λ, γ)` from `params` to
/// every Fourier-slice singular value of `y` and rebuilds the tensor.
///
/// Returns the result and its position-wise shrunk spectrum.
pub(crate) fn shrink_spectrum(
    y: &DenseTensor,
    params: impl Fn(usize, usize) -> (f64, f64),
) -> Result<(DenseTensor, DMatrix<f64>)> {
    spectral_map(y, |i, j, s| {
        let (lambda, gamma) = params(i, j);
        singular_shrink(s, lambda, gamma)
    })
}

/// Proximal operator of the weighted tensor Γ-norm.
///
/// Rows `i` and `I3 − i` of both matrices must be equal (conjugate-symmetric
/// pairing of Fourier slices), otherwise the minimizer is not real.
pub fn bewtgn_prox(
    y: &DenseTensor,
    lambda: &DMatrix<f64>,
    gamma: &DMatrix<f64>,
) -> Result<DenseTensor> {
    let (n1, n2, n3) = y.dims3()?;
    let shape = (n3, n1.min(n2));
    check_grid_shape("lambda", lambda, shape)?;
    check_grid_shape("gamma", gamma, shape)?;
    lambda.iter().try_for_each(|&v| check_lambda(v))?;
    gamma.iter().try_for_each(|&v| check_gamma(v))?;
    Ok(shrink_spectrum(y, |i, j| (lambda[(i, j)], gamma[(i, j)]))?.0)
}
