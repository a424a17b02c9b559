//! Reconstruction-quality metrics: PSNR, SSIM, ERGAS and relative error.
//!
//! Band-wise metrics treat a tensor as a stack of 2-D bands `I1 × I2`, one
//! per combination of the trailing indices. For an order-3 MSI or MRI
//! volume that is one band per spectral band or slice; for an order-4
//! video `H × W × 3 × T` it is one band per channel and frame. Order-1 and
//! order-2 tensors form a single band.

use log::warn;

use crate::error::{Error, Result};
use crate::tensor::DenseTensor;

/// Value written to files in place of an infinite PSNR.
pub const PSNR_CAP: f64 = 999.0;

const SSIM_WINDOW: usize = 11;
const SSIM_SIGMA: f64 = 1.5;
const SSIM_K1: f64 = 0.01;
const SSIM_K2: f64 = 0.03;

/// Peak used in the PSNR numerator.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum PsnrPeak {
    /// Maximum of the reference band.
    #[default]
    PerBand,
    /// Maximum of the whole reference tensor.
    Global,
}

struct Band {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Band {
    fn at(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    fn max(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    fn min(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }
}

fn bands(t: &DenseTensor) -> Vec<Band> {
    let shape = t.shape();
    let (rows, cols) = match shape.len() {
        1 => (shape[0], 1),
        _ => (shape[0], shape[1]),
    };
    let count = t.len() / (rows * cols);
    let data = t.data();
    (0..count)
        .map(|b| Band {
            rows,
            cols,
            data: (0..rows * cols).map(|rc| data[rc * count + b]).collect(),
        })
        .collect()
}

fn check_shapes(x: &DenseTensor, reference: &DenseTensor) -> Result<()> {
    if x.shape() != reference.shape() {
        return Err(Error::ShapeMismatch {
            left: x.shape().to_vec(),
            right: reference.shape().to_vec(),
        });
    }
    Ok(())
}

fn sq_err(a: &Band, b: &Band) -> f64 {
    a.data
        .iter()
        .zip(&b.data)
        .map(|(p, q)| (p - q) * (p - q))
        .sum()
}

/// Per-band PSNR in dB; `+∞` for a band reproduced exactly.
pub fn psnr_per_band(x: &DenseTensor, reference: &DenseTensor, peak: PsnrPeak) -> Result<Vec<f64>> {
    check_shapes(x, reference)?;
    let global_peak = reference.data().iter().copied().fold(f64::NEG_INFINITY, f64::max);
    bands(x)
        .iter()
        .zip(bands(reference).iter())
        .map(|(xb, rb)| {
            let p = match peak {
                PsnrPeak::PerBand => rb.max(),
                PsnrPeak::Global => global_peak,
            };
            let sse = sq_err(xb, rb);
            if sse == 0.0 {
                return Ok(f64::INFINITY);
            }
            if !(p > 0.0) {
                return Err(Error::DegenerateMetric {
                    metric: "psnr",
                    reason: format!("reference peak {p} is not positive"),
                });
            }
            Ok(10.0 * (p * p * rb.data.len() as f64 / sse).log10())
        })
        .collect()
}

/// Mean per-band PSNR with per-band peaks.
pub fn psnr(x: &DenseTensor, reference: &DenseTensor) -> Result<f64> {
    psnr_with_peak(x, reference, PsnrPeak::PerBand)
}

pub fn psnr_with_peak(x: &DenseTensor, reference: &DenseTensor, peak: PsnrPeak) -> Result<f64> {
    let per_band = psnr_per_band(x, reference, peak)?;
    Ok(per_band.iter().sum::<f64>() / per_band.len() as f64)
}

fn gaussian_window() -> Vec<f64> {
    let c = (SSIM_WINDOW / 2) as f64;
    let w: Vec<f64> = (0..SSIM_WINDOW)
        .map(|k| {
            let d = k as f64 - c;
            (-d * d / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp()
        })
        .collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|v| v / s).collect()
}

/// Separable "valid" filtering of `f(r, c)` with the 1-D kernel `w`.
fn filter_valid(band_rows: usize, band_cols: usize, w: &[f64], f: impl Fn(usize, usize) -> f64) -> Vec<f64> {
    let n = w.len();
    let out_cols = band_cols - n + 1;
    let out_rows = band_rows - n + 1;
    let mut horiz = vec![0.0; band_rows * out_cols];
    for r in 0..band_rows {
        for c in 0..out_cols {
            horiz[r * out_cols + c] = (0..n).map(|k| w[k] * f(r, c + k)).sum();
        }
    }
    let mut out = vec![0.0; out_rows * out_cols];
    for r in 0..out_rows {
        for c in 0..out_cols {
            out[r * out_cols + c] = (0..n).map(|k| w[k] * horiz[(r + k) * out_cols + c]).sum();
        }
    }
    out
}

fn ssim_formula(mx: f64, my: f64, vx: f64, vy: f64, cxy: f64, c1: f64, c2: f64) -> f64 {
    ((2.0 * mx * my + c1) * (2.0 * cxy + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2))
}

fn band_ssim(x: &Band, r: &Band) -> f64 {
    let mut range = r.max() - r.min();
    if range == 0.0 {
        range = 1.0;
    }
    let c1 = (SSIM_K1 * range).powi(2);
    let c2 = (SSIM_K2 * range).powi(2);

    if x.rows < SSIM_WINDOW || x.cols < SSIM_WINDOW {
        // global statistics over the whole band
        let n = x.data.len() as f64;
        let mx = x.mean();
        let my = r.mean();
        let exx = x.data.iter().map(|v| v * v).sum::<f64>() / n;
        let eyy = r.data.iter().map(|v| v * v).sum::<f64>() / n;
        let exy = x.data.iter().zip(&r.data).map(|(a, b)| a * b).sum::<f64>() / n;
        return ssim_formula(mx, my, exx - mx * mx, eyy - my * my, exy - mx * my, c1, c2);
    }

    let w = gaussian_window();
    let (rows, cols) = (x.rows, x.cols);
    let mu_x = filter_valid(rows, cols, &w, |i, j| x.at(i, j));
    let mu_y = filter_valid(rows, cols, &w, |i, j| r.at(i, j));
    let exx = filter_valid(rows, cols, &w, |i, j| x.at(i, j) * x.at(i, j));
    let eyy = filter_valid(rows, cols, &w, |i, j| r.at(i, j) * r.at(i, j));
    let exy = filter_valid(rows, cols, &w, |i, j| x.at(i, j) * r.at(i, j));
    let total: f64 = (0..mu_x.len())
        .map(|k| {
            let (mx, my) = (mu_x[k], mu_y[k]);
            ssim_formula(
                mx,
                my,
                exx[k] - mx * mx,
                eyy[k] - my * my,
                exy[k] - mx * my,
                c1,
                c2,
            )
        })
        .sum();
    total / mu_x.len() as f64
}

/// Per-band single-scale SSIM.
///
/// Uses an 11×11 Gaussian window (σ = 1.5) over valid positions, with
/// `K1 = 0.01`, `K2 = 0.03` and dynamic range `max − min` of the reference
/// band (1 for a constant band). Bands smaller than the window use global
/// band statistics instead.
pub fn ssim_per_band(x: &DenseTensor, reference: &DenseTensor) -> Result<Vec<f64>> {
    check_shapes(x, reference)?;
    Ok(bands(x)
        .iter()
        .zip(bands(reference).iter())
        .map(|(xb, rb)| band_ssim(xb, rb))
        .collect())
}

/// Mean per-band SSIM.
pub fn ssim(x: &DenseTensor, reference: &DenseTensor) -> Result<f64> {
    let per_band = ssim_per_band(x, reference)?;
    Ok(per_band.iter().sum::<f64>() / per_band.len() as f64)
}

/// Per-band `MSE_b / μ_b²`; `None` for a band whose reference mean is zero.
pub fn ergas_terms(x: &DenseTensor, reference: &DenseTensor) -> Result<Vec<Option<f64>>> {
    check_shapes(x, reference)?;
    Ok(bands(x)
        .iter()
        .zip(bands(reference).iter())
        .map(|(xb, rb)| {
            let mu = rb.mean();
            if mu == 0.0 {
                None
            } else {
                Some(sq_err(xb, rb) / rb.data.len() as f64 / (mu * mu))
            }
        })
        .collect())
}

/// ERGAS with resolution ratio 1: `100 · sqrt(mean_b MSE_b / μ_b²)`.
///
/// Bands with zero reference mean are skipped with a warning; if every band
/// is skipped the metric is undefined.
pub fn ergas(x: &DenseTensor, reference: &DenseTensor) -> Result<f64> {
    let terms = ergas_terms(x, reference)?;
    let kept: Vec<f64> = terms.iter().flatten().copied().collect();
    let skipped = terms.len() - kept.len();
    if skipped > 0 {
        warn!("ergas: skipped {skipped} band(s) with zero reference mean");
    }
    if kept.is_empty() {
        return Err(Error::DegenerateMetric {
            metric: "ergas",
            reason: "every reference band has zero mean".into(),
        });
    }
    Ok(100.0 * (kept.iter().sum::<f64>() / kept.len() as f64).sqrt())
}

/// `‖x − ref‖_F / ‖ref‖_F`.
pub fn rel_error(x: &DenseTensor, reference: &DenseTensor) -> Result<f64> {
    check_shapes(x, reference)?;
    let denom = reference.frobenius_norm();
    if denom == 0.0 {
        return Err(Error::DegenerateMetric {
            metric: "rel_error",
            reason: "reference is the zero tensor".into(),
        });
    }
    Ok(x.sub(reference)?.frobenius_norm() / denom)
}

/// All metrics of one reconstruction against its reference.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricReport {
    pub psnr: f64,
    pub ssim: f64,
    pub ergas: Option<f64>,
    pub rel_error: f64,
    pub psnr_bands: Vec<f64>,
    pub ssim_bands: Vec<f64>,
    pub ergas_bands: Vec<Option<f64>>,
}

/// Computes every metric; ERGAS is `None` when no band has a nonzero mean.
pub fn evaluate(x: &DenseTensor, reference: &DenseTensor, peak: PsnrPeak) -> Result<MetricReport> {
    let psnr_bands = psnr_per_band(x, reference, peak)?;
    let ssim_bands = ssim_per_band(x, reference)?;
    let ergas_bands: Vec<Option<f64>> = ergas_terms(x, reference)?
        .into_iter()
        .map(|t| t.map(|v| 100.0 * v.sqrt()))
        .collect();
    let ergas = match ergas(x, reference) {
        Ok(v) => Some(v),
        Err(Error::DegenerateMetric { .. }) => None,
        Err(e) => return Err(e),
    };
    Ok(MetricReport {
        psnr: psnr_bands.iter().sum::<f64>() / psnr_bands.len() as f64,
        ssim: ssim_bands.iter().sum::<f64>() / ssim_bands.len() as f64,
        ergas,
        rel_error: rel_error(x, reference)?,
        psnr_bands,
        ssim_bands,
        ergas_bands,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn wave(shape: &[usize]) -> DenseTensor {
        DenseTensor::from_fn(shape, |i| {
            1.0 + 0.5 * ((i[0] as f64) * 0.7).sin() * ((i[1] as f64) * 0.3 + i[2] as f64).cos()
        })
        .unwrap()
    }

    #[test]
    fn identical_inputs() {
        let r = wave(&[16, 14, 3]);
        assert_eq!(psnr(&r, &r).unwrap(), f64::INFINITY);
        assert_eq!(ssim(&r, &r).unwrap(), 1.0);
        assert_eq!(ergas(&r, &r).unwrap(), 0.0);
        assert_eq!(rel_error(&r, &r).unwrap(), 0.0);
        let small = wave(&[4, 5, 2]);
        assert_eq!(ssim(&small, &small).unwrap(), 1.0);
    }

    #[test]
    fn psnr_hand_value() {
        // one band, peak 1, MSE 0.01 → 20 dB
        let r = DenseTensor::new(vec![2, 2, 1], vec![1.0, 0.0, 0.0, 0.0]).unwrap();
        let x = r.map(|v| v + 0.1);
        assert_abs_diff_eq!(psnr(&x, &r).unwrap(), 20.0, epsilon = 1e-10);
    }

    #[test]
    fn psnr_scale_invariant() {
        let r = wave(&[6, 6, 2]);
        let x = r.map(|v| v * 0.97 + 0.01);
        let a = psnr(&x, &r).unwrap();
        let b = psnr(&x.scale(2.0), &r.scale(2.0)).unwrap();
        assert_abs_diff_eq!(a, b, epsilon = 1e-10);
    }

    #[test]
    fn psnr_global_peak() {
        let r = DenseTensor::new(vec![1, 2, 2], vec![1.0, 2.0, 1.0, 2.0]).unwrap();
        let x = r.map(|v| v + 0.1);
        let per_band = psnr_per_band(&x, &r, PsnrPeak::PerBand).unwrap();
        let global = psnr_per_band(&x, &r, PsnrPeak::Global).unwrap();
        assert!(per_band[0] < per_band[1]);
        assert_abs_diff_eq!(global[0], global[1], epsilon = 1e-12);
    }

    #[test]
    fn ssim_negated_zero_mean_band_is_negative() {
        let checker = |i: &[usize]| if (i[0] + i[1]).is_multiple_of(2) { 1.0 } else { -1.0 };
        let r = DenseTensor::from_fn(&[12, 12, 1], checker).unwrap();
        assert!(ssim(&r.scale(-1.0), &r).unwrap() < 0.0);
        let small = DenseTensor::from_fn(&[4, 4, 1], checker).unwrap();
        assert!(ssim(&small.scale(-1.0), &small).unwrap() < 0.0);
    }

    #[test]
    fn ssim_constant_bands_reduce_to_luminance() {
        // range 0 → dynamic range 1, C1 = 1e-4; variances vanish
        let c1 = 1e-4;
        let want = (2.0 * 2.0 * 3.0 + c1) / (4.0 + 9.0 + c1);
        for shape in [[4, 4, 1], [12, 13, 1]] {
            let r = DenseTensor::filled(&shape, 2.0).unwrap();
            let x = DenseTensor::filled(&shape, 3.0).unwrap();
            assert_abs_diff_eq!(ssim(&x, &r).unwrap(), want, epsilon = 1e-10);
        }
    }

    #[test]
    fn ergas_cases() {
        // one band, μ = 1, MSE = 0.01 → 10
        let r = DenseTensor::new(vec![2, 1, 1], vec![0.5, 1.5]).unwrap();
        let x = r.map(|v| v + 0.1);
        assert_abs_diff_eq!(ergas(&x, &r).unwrap(), 10.0, epsilon = 1e-10);
        let big = wave(&[5, 5, 3]);
        let y = big.map(|v| v * 1.02 - 0.01);
        assert_abs_diff_eq!(
            ergas(&y, &big).unwrap(),
            ergas(&y.scale(3.0), &big.scale(3.0)).unwrap(),
            epsilon = 1e-10
        );
    }

    #[test]
    fn ergas_skips_zero_mean_bands() {
        let r = DenseTensor::new(vec![2, 1, 2], vec![1.0, -1.0, 1.0, 1.0]).unwrap();
        let x = r.map(|v| v + 0.1);
        let terms = ergas_terms(&x, &r).unwrap();
        assert_eq!(terms[1], None);
        assert_abs_diff_eq!(ergas(&x, &r).unwrap(), 10.0, epsilon = 1e-10);
        let z = DenseTensor::new(vec![2, 1, 1], vec![1.0, -1.0]).unwrap();
        assert!(ergas(&z.map(|v| v + 0.1), &z).is_err());
    }

    #[test]
    fn rel_error_cases() {
        let r = wave(&[3, 3, 2]);
        assert_abs_diff_eq!(rel_error(&DenseTensor::zeros(&[3, 3, 2]).unwrap(), &r).unwrap(), 1.0);
        assert_abs_diff_eq!(rel_error(&r.scale(1.1), &r).unwrap(), 0.1, epsilon = 1e-12);
        let z = DenseTensor::zeros(&[3, 3, 2]).unwrap();
        assert!(rel_error(&r, &z).is_err());
        assert!(rel_error(&r, &DenseTensor::zeros(&[3, 3]).unwrap()).is_err());
    }

    #[test]
    fn bands_of_order4_are_channel_frame_slices() {
        let t = DenseTensor::from_fn(&[2, 2, 3, 4], |i| (i[2] * 10 + i[3]) as f64 + 1.0).unwrap();
        let b = bands(&t);
        assert_eq!(b.len(), 12);
        assert!(b[5].data.iter().all(|&v| v == 12.0));
    }

    #[test]
    fn evaluate_identical() {
        let r = wave(&[12, 12, 2]);
        let m = evaluate(&r, &r, PsnrPeak::PerBand).unwrap();
        assert_eq!(m.ssim, 1.0);
        assert_eq!(m.ergas, Some(0.0));
        assert_eq!(m.rel_error, 0.0);
        assert_eq!(m.psnr_bands.len(), 2);
    }
}
