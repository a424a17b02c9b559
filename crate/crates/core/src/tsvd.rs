//! Third-order tensor algebra in the Fourier domain: t-product, conjugate
//! transpose, t-SVD, tubal/multi/N-tubal rank and the tensor nuclear norm.
//!
//! All factorizations work slice by slice on `fft(Y, [], 3)`. A real input
//! has conjugate-symmetric Fourier slices (`Ȳ⁽ᴵ³⁻ⁱ⁾ = conj(Ȳ⁽ⁱ⁾)`), so only
//! the first `⌊I3/2⌋ + 1` slices are decomposed; the rest are mirrored.
//! Slices that are their own mirror (the DC slice and, for even `I3`, the
//! Nyquist slice) are real and go through a real SVD so that spatial-domain
//! factors stay real.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::tensor::{dft_mode3, idft_mode3, mode_unfold, ComplexTensor, DenseTensor, ModePair};

/// Relative tolerance used to decide whether a singular value is nonzero.
pub const RANK_TOLERANCE: f64 = 1e-10;

const SVD_MAX_ITER: usize = 10_000;

pub type CMatrix = DMatrix<Complex64>;

/// Frontal slices of `fft(y, [], 3)` as `I1 × I2` complex matrices.
pub fn fourier_slices(y: &DenseTensor) -> Result<Vec<CMatrix>> {
    let (n1, n2, n3) = y.dims3()?;
    let f = dft_mode3(y)?;
    let data = f.data();
    Ok((0..n3)
        .map(|k| CMatrix::from_fn(n1, n2, |r, c| data[(r * n2 + c) * n3 + k]))
        .collect())
}

/// Inverse of [`fourier_slices`].
pub fn from_fourier_slices(slices: &[CMatrix]) -> Result<DenseTensor> {
    let n3 = slices.len();
    let (n1, n2) = slices.first().map(|m| m.shape()).ok_or(Error::InvalidShape {
        shape: vec![],
        reason: "no Fourier slices".into(),
    })?;
    let mut f = ComplexTensor::zeros(&[n1, n2, n3])?;
    let data = f.data_mut();
    for (k, m) in slices.iter().enumerate() {
        for r in 0..n1 {
            for c in 0..n2 {
                data[(r * n2 + c) * n3 + k] = m[(r, c)];
            }
        }
    }
    idft_mode3(&f)
}

/// Index of the Fourier slice whose content is the conjugate of slice `k`.
pub(crate) fn mirror(k: usize, n3: usize) -> usize {
    (n3 - k) % n3
}

/// t-product `a ∗ b` for `a: I1×I2×I3`, `b: I2×J×I3`.
pub fn t_product(a: &DenseTensor, b: &DenseTensor) -> Result<DenseTensor> {
    let (_, a2, a3) = a.dims3()?;
    let (b1, _, b3) = b.dims3()?;
    if a2 != b1 || a3 != b3 {
        return Err(Error::ShapeMismatch {
            left: a.shape().to_vec(),
            right: b.shape().to_vec(),
        });
    }
    let fa = fourier_slices(a)?;
    let fb = fourier_slices(b)?;
    let prod: Vec<CMatrix> = fa.iter().zip(&fb).map(|(x, y)| x * y).collect();
    from_fourier_slices(&prod)
}

/// Conjugate transpose: each frontal slice transposed, slices 2..I3 reversed.
pub fn conj_transpose(a: &DenseTensor) -> Result<DenseTensor> {
    let (n1, n2, n3) = a.dims3()?;
    DenseTensor::from_fn(&[n2, n1, n3], |idx| {
        a.get(&[idx[1], idx[0], mirror(idx[2], n3)])
    })
}

/// Identity tensor: first frontal slice is the identity matrix, others zero.
pub fn identity(n: usize, n3: usize) -> Result<DenseTensor> {
    DenseTensor::from_fn(&[n, n, n3], |idx| {
        if idx[0] == idx[1] && idx[2] == 0 {
            1.0
        } else {
            0.0
        }
    })
}

/// Singular values of every Fourier slice, `I3 × min(I1, I2)`, each row
/// nonincreasing.
#[derive(Clone, Debug, PartialEq)]
pub struct SingularSpectrum {
    values: DMatrix<f64>,
}

impl SingularSpectrum {
    pub fn new(values: DMatrix<f64>) -> Result<Self> {
        for i in 0..values.nrows() {
            let row = values.row(i);
            if row.iter().any(|&v| !(v >= 0.0)) {
                return Err(Error::InvalidParameter {
                    name: "spectrum",
                    reason: format!("row {} has a negative or NaN entry", i + 1),
                });
            }
            if row.iter().zip(row.iter().skip(1)).any(|(a, b)| b > a) {
                return Err(Error::InvalidParameter {
                    name: "spectrum",
                    reason: format!("row {} is not nonincreasing", i + 1),
                });
            }
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn into_values(self) -> DMatrix<f64> {
        self.values
    }

    pub fn shape(&self) -> (usize, usize) {
        self.values.shape()
    }

    pub fn max(&self) -> f64 {
        self.values.iter().fold(0.0, |m: f64, &v| m.max(v))
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    fn threshold(&self) -> f64 {
        RANK_TOLERANCE * self.max()
    }

    /// Per-slice ranks.
    pub fn multi_rank(&self) -> Vec<usize> {
        let tol = self.threshold();
        self.values
            .row_iter()
            .map(|row| row.iter().filter(|&&v| v > tol && v > 0.0).count())
            .collect()
    }

    /// Number of nonzero singular tubes.
    pub fn tubal_rank(&self) -> usize {
        self.multi_rank().into_iter().max().unwrap_or(0)
    }
}

/// Thin SVD of one Fourier slice: `m = u · diag(s) · vᴴ`.
pub(crate) struct SliceSvd {
    pub u: CMatrix,
    pub s: DVector<f64>,
    pub v: CMatrix,
}

fn real_part(m: &CMatrix) -> DMatrix<f64> {
    m.map(|c| c.re)
}

fn to_complex(m: &DMatrix<f64>) -> CMatrix {
    m.map(|v| Complex64::new(v, 0.0))
}

fn slice_svd(m: &CMatrix, self_conjugate: bool, slice: usize, vectors: bool) -> Result<SliceSvd> {
    if m.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return Err(Error::NonFinite { context: "t-SVD" });
    }
    if self_conjugate {
        let svd = real_part(m)
            .try_svd(vectors, vectors, f64::EPSILON, SVD_MAX_ITER)
            .ok_or(Error::SvdFailed { slice: slice + 1 })?;
        let (u, v) = if vectors {
            (
                to_complex(&svd.u.expect("requested")),
                to_complex(&svd.v_t.expect("requested").transpose()),
            )
        } else {
            (CMatrix::zeros(0, 0), CMatrix::zeros(0, 0))
        };
        Ok(SliceSvd {
            u,
            s: svd.singular_values,
            v,
        })
    } else {
        let svd = m
            .clone()
            .try_svd(vectors, vectors, f64::EPSILON, SVD_MAX_ITER)
            .ok_or(Error::SvdFailed { slice: slice + 1 })?;
        let (u, v) = if vectors {
            (
                svd.u.expect("requested"),
                svd.v_t.expect("requested").adjoint(),
            )
        } else {
            (CMatrix::zeros(0, 0), CMatrix::zeros(0, 0))
        };
        Ok(SliceSvd {
            u,
            s: svd.singular_values,
            v,
        })
    }
}

/// SVDs of slices `0..=I3/2`, computed in parallel.
pub(crate) fn half_spectrum_svds(slices: &[CMatrix], vectors: bool) -> Result<Vec<SliceSvd>> {
    let n3 = slices.len();
    (0..=n3 / 2)
        .into_par_iter()
        .map(|k| slice_svd(&slices[k], mirror(k, n3) == k, k, vectors))
        .collect()
}

fn spectrum_from_half(half: &[SliceSvd], n3: usize, r: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n3, r, |i, j| {
        let k = if i <= n3 / 2 { i } else { mirror(i, n3) };
        half[k].s[j]
    })
}

/// Singular values of every Fourier slice of `y`.
pub fn singular_spectrum(y: &DenseTensor) -> Result<SingularSpectrum> {
    let (n1, n2, n3) = y.dims3()?;
    let slices = fourier_slices(y)?;
    let half = half_spectrum_svds(&slices, false)?;
    Ok(SingularSpectrum {
        values: spectrum_from_half(&half, n3, n1.min(n2)),
    })
}

/// Rebuilds a tensor after replacing singular value `σ` at `(slice i,
/// position j)` by `f(i, j, σ)`, keeping the singular vectors of `y`.
///
/// `f` must agree on mirrored slices `i` and `I3 - i`, otherwise the result
/// would not be real and an error is returned. Also returns the replaced
/// values, position by position.
pub(crate) fn spectral_map(
    y: &DenseTensor,
    f: impl Fn(usize, usize, f64) -> f64,
) -> Result<(DenseTensor, DMatrix<f64>)> {
    let (n1, n2, n3) = y.dims3()?;
    let r = n1.min(n2);
    let slices = fourier_slices(y)?;
    let half = half_spectrum_svds(&slices, true)?;

    let mut mapped = DMatrix::zeros(n3, r);
    for i in 0..n3 {
        let k = if i <= n3 / 2 { i } else { mirror(i, n3) };
        for j in 0..r {
            mapped[(i, j)] = f(i, j, half[k].s[j]);
        }
    }
    for i in n3 / 2 + 1..n3 {
        let k = mirror(i, n3);
        if mapped.row(i) != mapped.row(k) {
            return Err(Error::InvalidParameter {
                name: "spectral map",
                reason: format!(
                    "rows {} and {} of a conjugate-symmetric spectrum were mapped differently",
                    k + 1,
                    i + 1
                ),
            });
        }
    }

    let mut out = Vec::with_capacity(n3);
    for i in 0..n3 {
        let k = if i <= n3 / 2 { i } else { mirror(i, n3) };
        let svd = &half[k];
        let mut scaled_u = svd.u.clone();
        for j in 0..r {
            let w = Complex64::new(mapped[(i, j)], 0.0);
            for row in 0..n1 {
                scaled_u[(row, j)] *= w;
            }
        }
        let slice = scaled_u * svd.v.adjoint();
        out.push(if k == i { slice } else { slice.map(|c| c.conj()) });
    }
    Ok((from_fourier_slices(&out)?, mapped))
}

/// Extends orthonormal columns `q` (`m × r`) to a full `m × m` unitary.
fn complete_basis(q: &CMatrix) -> CMatrix {
    let (m, r) = q.shape();
    if r == m {
        return q.clone();
    }
    let mut aug = CMatrix::zeros(m, r + m);
    aug.columns_mut(0, r).copy_from(q);
    aug.columns_mut(r, m).fill_with_identity();
    let full_q = aug.qr().q();
    let mut out = CMatrix::zeros(m, m);
    out.columns_mut(0, r).copy_from(q);
    out.columns_mut(r, m - r).copy_from(&full_q.columns(r, m - r));
    out
}

fn complete_basis_real(q: &CMatrix) -> CMatrix {
    let (m, r) = q.shape();
    if r == m {
        return q.clone();
    }
    let real = real_part(q);
    let mut aug = DMatrix::zeros(m, r + m);
    aug.columns_mut(0, r).copy_from(&real);
    aug.columns_mut(r, m).fill_with_identity();
    let full_q = aug.qr().q();
    let mut out = DMatrix::zeros(m, m);
    out.columns_mut(0, r).copy_from(&real);
    out.columns_mut(r, m - r).copy_from(&full_q.columns(r, m - r));
    to_complex(&out)
}

/// `y = U ∗ S ∗ Vᴴ` with orthogonal `U` (`I1×I1×I3`), `V` (`I2×I2×I3`) and
/// f-diagonal `S`.
#[derive(Clone, Debug)]
pub struct TSvdFactors {
    u_bar: ComplexTensor,
    s: DenseTensor,
    v_bar: ComplexTensor,
    spectrum: SingularSpectrum,
}

fn stack_slices(slices: &[CMatrix]) -> Result<ComplexTensor> {
    let n3 = slices.len();
    let (n1, n2) = slices[0].shape();
    let mut t = ComplexTensor::zeros(&[n1, n2, n3])?;
    let data = t.data_mut();
    for (k, m) in slices.iter().enumerate() {
        for r in 0..n1 {
            for c in 0..n2 {
                data[(r * n2 + c) * n3 + k] = m[(r, c)];
            }
        }
    }
    Ok(t)
}

impl TSvdFactors {
    /// Fourier-domain `Ū`.
    pub fn u_fourier(&self) -> &ComplexTensor {
        &self.u_bar
    }

    /// Fourier-domain `V̄`.
    pub fn v_fourier(&self) -> &ComplexTensor {
        &self.v_bar
    }

    /// Spatial-domain `U`.
    pub fn u(&self) -> Result<DenseTensor> {
        idft_mode3(&self.u_bar)
    }

    /// Spatial-domain `V`.
    pub fn v(&self) -> Result<DenseTensor> {
        idft_mode3(&self.v_bar)
    }

    /// Spatial-domain f-diagonal `S`.
    pub fn s(&self) -> &DenseTensor {
        &self.s
    }

    pub fn spectrum(&self) -> &SingularSpectrum {
        &self.spectrum
    }

    /// `U ∗ S ∗ Vᴴ`.
    pub fn reconstruct(&self) -> Result<DenseTensor> {
        let us = t_product(&self.u()?, &self.s)?;
        t_product(&us, &conj_transpose(&self.v()?)?)
    }
}

/// Full t-SVD of an order-3 tensor.
pub fn t_svd(y: &DenseTensor) -> Result<TSvdFactors> {
    let (n1, n2, n3) = y.dims3()?;
    let r = n1.min(n2);
    let slices = fourier_slices(y)?;
    let half = half_spectrum_svds(&slices, true)?;

    let mut us = Vec::with_capacity(n3);
    let mut vs = Vec::with_capacity(n3);
    let mut ss = Vec::with_capacity(n3);
    let full_half: Vec<(CMatrix, CMatrix)> = half
        .iter()
        .enumerate()
        .map(|(k, svd)| {
            if mirror(k, n3) == k {
                (complete_basis_real(&svd.u), complete_basis_real(&svd.v))
            } else {
                (complete_basis(&svd.u), complete_basis(&svd.v))
            }
        })
        .collect();
    for i in 0..n3 {
        let k = if i <= n3 / 2 { i } else { mirror(i, n3) };
        let (u, v) = &full_half[k];
        if k == i {
            us.push(u.clone());
            vs.push(v.clone());
        } else {
            us.push(u.map(|c| c.conj()));
            vs.push(v.map(|c| c.conj()));
        }
        let mut s = CMatrix::zeros(n1, n2);
        for j in 0..r {
            s[(j, j)] = Complex64::new(half[k].s[j], 0.0);
        }
        ss.push(s);
    }
    Ok(TSvdFactors {
        u_bar: stack_slices(&us)?,
        s: from_fourier_slices(&ss)?,
        v_bar: stack_slices(&vs)?,
        spectrum: SingularSpectrum {
            values: spectrum_from_half(&half, n3, r),
        },
    })
}

/// Number of nonzero singular tubes of `y`.
pub fn tubal_rank(y: &DenseTensor) -> Result<usize> {
    Ok(singular_spectrum(y)?.tubal_rank())
}

/// Ranks of the Fourier-domain frontal slices of `y`.
pub fn multi_rank(y: &DenseTensor) -> Result<Vec<usize>> {
    Ok(singular_spectrum(y)?.multi_rank())
}

/// Tensor nuclear norm: sum of all Fourier-slice singular values, no
/// `1/I3` normalization.
pub fn tnn(y: &DenseTensor) -> Result<f64> {
    Ok(singular_spectrum(y)?.sum())
}

/// Tubal ranks of all mode-k1k2 unfoldings, in lexicographic pair order.
pub fn n_tubal_rank(y: &DenseTensor) -> Result<Vec<usize>> {
    if y.order() < 3 {
        return Err(Error::OrderMismatch {
            expected: 3,
            got: y.order(),
        });
    }
    ModePair::all(y.order())
        .into_iter()
        .map(|p| tubal_rank(&mode_unfold(y, p)?))
        .collect()
}
