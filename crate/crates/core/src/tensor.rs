//! Dense N-way tensors and the index algebra used by the completion models.
//!
//! Storage is row-major with the last index varying fastest, so for an
//! order-3 tensor every tube `t(i1, i2, :)` is a contiguous run of memory.
//! Indices passed to the API are 0-based; mode numbers in [`ModePair`] and
//! indices in error messages follow the 1-based convention of the
//! mode-k1k2 unfolding formula.

use std::cell::RefCell;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Largest supported tensor order.
pub const MAX_ORDER: usize = 8;

fn checked_len(shape: &[usize]) -> Result<usize> {
    if shape.is_empty() || shape.len() > MAX_ORDER {
        return Err(Error::InvalidShape {
            shape: shape.to_vec(),
            reason: format!("order must be between 1 and {MAX_ORDER}"),
        });
    }
    if shape.contains(&0) {
        return Err(Error::InvalidShape {
            shape: shape.to_vec(),
            reason: "all extents must be at least 1".into(),
        });
    }
    shape
        .iter()
        .try_fold(1usize, |acc, &e| acc.checked_mul(e))
        .ok_or_else(|| Error::InvalidShape {
            shape: shape.to_vec(),
            reason: "element count overflows".into(),
        })
}

fn unravel(mut offset: usize, shape: &[usize]) -> Vec<usize> {
    let mut idx = vec![0; shape.len()];
    for k in (0..shape.len()).rev() {
        idx[k] = offset % shape[k];
        offset /= shape[k];
    }
    idx
}

fn one_based(idx: &[usize]) -> Vec<usize> {
    idx.iter().map(|i| i + 1).collect()
}

fn ensure_same_shape(a: &[usize], b: &[usize]) -> Result<()> {
    if a != b {
        return Err(Error::ShapeMismatch {
            left: a.to_vec(),
            right: b.to_vec(),
        });
    }
    Ok(())
}

/// Real-valued N-way array.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseTensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

impl DenseTensor {
    pub fn new(shape: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        let expected = checked_len(&shape)?;
        if data.len() != expected {
            return Err(Error::LengthMismatch {
                shape,
                len: data.len(),
                expected,
            });
        }
        Ok(Self { shape, data })
    }

    pub fn filled(shape: &[usize], value: f64) -> Result<Self> {
        let len = checked_len(shape)?;
        Ok(Self {
            shape: shape.to_vec(),
            data: vec![value; len],
        })
    }

    pub fn zeros(shape: &[usize]) -> Result<Self> {
        Self::filled(shape, 0.0)
    }

    /// Builds a tensor by evaluating `f` at every 0-based multi-index.
    pub fn from_fn(shape: &[usize], mut f: impl FnMut(&[usize]) -> f64) -> Result<Self> {
        let len = checked_len(shape)?;
        let mut idx = vec![0usize; shape.len()];
        let mut data = Vec::with_capacity(len);
        for _ in 0..len {
            data.push(f(&idx));
            for k in (0..shape.len()).rev() {
                idx[k] += 1;
                if idx[k] < shape[k] {
                    break;
                }
                idx[k] = 0;
            }
        }
        Ok(Self {
            shape: shape.to_vec(),
            data,
        })
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn order(&self) -> usize {
        self.shape.len()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn offset(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.shape.len());
        idx.iter()
            .zip(&self.shape)
            .fold(0, |acc, (&i, &e)| acc * e + i)
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.data[self.offset(idx)]
    }

    pub fn set(&mut self, idx: &[usize], value: f64) {
        let o = self.offset(idx);
        self.data[o] = value;
    }

    /// `(I1, I2, I3)` of an order-3 tensor.
    pub fn dims3(&self) -> Result<(usize, usize, usize)> {
        match self.shape[..] {
            [a, b, c] => Ok((a, b, c)),
            _ => Err(Error::OrderMismatch {
                expected: 3,
                got: self.order(),
            }),
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            shape: self.shape.clone(),
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        ensure_same_shape(&self.shape, &other.shape)?;
        Ok(Self {
            shape: self.shape.clone(),
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Elementwise product.
    pub fn hadamard(&self, other: &Self) -> Result<Self> {
        self.zip_map(other, |a, b| a * b)
    }

    /// Elementwise quotient; fails on the first zero divisor.
    pub fn hadamard_div(&self, other: &Self) -> Result<Self> {
        ensure_same_shape(&self.shape, &other.shape)?;
        if let Some(pos) = other.data.iter().position(|&b| b == 0.0) {
            return Err(Error::ZeroDivisor {
                index: one_based(&unravel(pos, &self.shape)),
            });
        }
        self.zip_map(other, |a, b| a / b)
    }

    /// `max |a - b|` over all entries.
    pub fn inf_norm_diff(&self, other: &Self) -> Result<f64> {
        ensure_same_shape(&self.shape, &other.shape)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs())))
    }

    /// Keeps the entries in `mask`, zeroes the rest.
    pub fn project(&self, mask: &IndexSet) -> Result<Self> {
        ensure_same_shape(&self.shape, mask.shape())?;
        Ok(Self {
            shape: self.shape.clone(),
            data: self
                .data
                .iter()
                .zip(mask.bits())
                .map(|(&v, &keep)| if keep { v } else { 0.0 })
                .collect(),
        })
    }

    fn to_complex(&self) -> ComplexTensor {
        ComplexTensor {
            shape: self.shape.clone(),
            data: self.data.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        }
    }
}

/// Complex-valued N-way array, same layout as [`DenseTensor`].
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexTensor {
    shape: Vec<usize>,
    data: Vec<Complex64>,
}

impl ComplexTensor {
    pub fn new(shape: Vec<usize>, data: Vec<Complex64>) -> Result<Self> {
        let expected = checked_len(&shape)?;
        if data.len() != expected {
            return Err(Error::LengthMismatch {
                shape,
                len: data.len(),
                expected,
            });
        }
        Ok(Self { shape, data })
    }

    pub fn zeros(shape: &[usize]) -> Result<Self> {
        let len = checked_len(shape)?;
        Ok(Self {
            shape: shape.to_vec(),
            data: vec![Complex64::new(0.0, 0.0); len],
        })
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn get(&self, idx: &[usize]) -> Complex64 {
        let o = idx
            .iter()
            .zip(&self.shape)
            .fold(0, |acc, (&i, &e)| acc * e + i);
        self.data[o]
    }

    pub fn dims3(&self) -> Result<(usize, usize, usize)> {
        match self.shape[..] {
            [a, b, c] => Ok((a, b, c)),
            _ => Err(Error::OrderMismatch {
                expected: 3,
                got: self.shape.len(),
            }),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// Observed-entry set Ω over a reference shape.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndexSet {
    shape: Vec<usize>,
    bits: Vec<bool>,
}

impl IndexSet {
    pub fn new(shape: Vec<usize>, bits: Vec<bool>) -> Result<Self> {
        let expected = checked_len(&shape)?;
        if bits.len() != expected {
            return Err(Error::LengthMismatch {
                shape,
                len: bits.len(),
                expected,
            });
        }
        Ok(Self { shape, bits })
    }

    pub fn full(shape: &[usize]) -> Result<Self> {
        Ok(Self {
            shape: shape.to_vec(),
            bits: vec![true; checked_len(shape)?],
        })
    }

    pub fn empty(shape: &[usize]) -> Result<Self> {
        Ok(Self {
            shape: shape.to_vec(),
            bits: vec![false; checked_len(shape)?],
        })
    }

    /// Reads a 0/1 indicator tensor; any other entry value is rejected.
    pub fn from_indicator(t: &DenseTensor) -> Result<Self> {
        let bits = t
            .data()
            .iter()
            .enumerate()
            .map(|(pos, &v)| {
                if v == 1.0 {
                    Ok(true)
                } else if v == 0.0 {
                    Ok(false)
                } else {
                    Err(Error::InvalidParameter {
                        name: "mask",
                        reason: format!(
                            "entry {:?} is {v}, expected 0 or 1",
                            one_based(&unravel(pos, t.shape()))
                        ),
                    })
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            shape: t.shape().to_vec(),
            bits,
        })
    }

    pub fn to_indicator(&self) -> DenseTensor {
        DenseTensor {
            shape: self.shape.clone(),
            data: self.bits.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect(),
        }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn contains(&self, idx: &[usize]) -> bool {
        let o = idx
            .iter()
            .zip(&self.shape)
            .fold(0, |acc, (&i, &e)| acc * e + i);
        self.bits[o]
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.bits.iter().all(|&b| b)
    }

    pub fn complement(&self) -> Self {
        Self {
            shape: self.shape.clone(),
            bits: self.bits.iter().map(|&b| !b).collect(),
        }
    }
}

/// `P_Ω(t)`: entries in `mask` preserved, all others zero.
pub fn project_mask(t: &DenseTensor, mask: &IndexSet) -> Result<DenseTensor> {
    t.project(mask)
}

/// An unfolding mode pair `k1 < k2`, stored 0-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ModePair {
    k1: usize,
    k2: usize,
}

impl ModePair {
    /// Builds a pair from 1-based mode numbers, `1 <= k1 < k2`.
    pub fn new(k1: usize, k2: usize) -> Result<Self> {
        if k1 == 0 || k1 >= k2 || k2 > MAX_ORDER {
            return Err(Error::InvalidModePair { k1, k2, order: 0 });
        }
        Ok(Self {
            k1: k1 - 1,
            k2: k2 - 1,
        })
    }

    /// All pairs of an order-`order` tensor in lexicographic order
    /// (1,2), (1,3), …, (1,N), (2,3), …, (N-1,N).
    pub fn all(order: usize) -> Vec<ModePair> {
        (0..order)
            .flat_map(|a| (a + 1..order).map(move |b| ModePair { k1: a, k2: b }))
            .collect()
    }

    /// Number of pairs for an order-`order` tensor, `N(N-1)/2`.
    pub fn count(order: usize) -> usize {
        order * order.saturating_sub(1) / 2
    }

    /// 1-based first mode.
    pub fn k1(&self) -> usize {
        self.k1 + 1
    }

    /// 1-based second mode.
    pub fn k2(&self) -> usize {
        self.k2 + 1
    }

    fn check(&self, order: usize) -> Result<()> {
        if self.k2 >= order {
            return Err(Error::InvalidModePair {
                k1: self.k1(),
                k2: self.k2(),
                order,
            });
        }
        Ok(())
    }

    /// Shape `I_k1 × I_k2 × Π_{s≠k1,k2} I_s` of the unfolding of `shape`.
    pub fn unfolded_shape(&self, shape: &[usize]) -> Result<[usize; 3]> {
        self.check(shape.len())?;
        let rest: usize = shape
            .iter()
            .enumerate()
            .filter(|&(s, _)| s != self.k1 && s != self.k2)
            .map(|(_, &e)| e)
            .product();
        Ok([shape[self.k1], shape[self.k2], rest])
    }

    /// Offset in the unfolded tensor contributed by a unit step along each
    /// original mode.
    fn unfolded_strides(&self, shape: &[usize]) -> Vec<usize> {
        let [_, i2, j] = self.unfolded_shape(shape).expect("checked by caller");
        let mut strides = vec![0; shape.len()];
        let mut js = 1;
        for (s, &e) in shape.iter().enumerate() {
            if s == self.k1 {
                strides[s] = i2 * j;
            } else if s == self.k2 {
                strides[s] = j;
            } else {
                strides[s] = js;
                js *= e;
            }
        }
        strides
    }
}

impl fmt::Display for ModePair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.k1(), self.k2())
    }
}

/// Visits every offset of a row-major `shape` together with the matching
/// offset under `strides`.
fn for_each_mapped(shape: &[usize], strides: &[usize], mut f: impl FnMut(usize, usize)) {
    let len: usize = shape.iter().product();
    let mut idx = vec![0usize; shape.len()];
    let mut mapped = 0usize;
    for offset in 0..len {
        f(offset, mapped);
        for k in (0..shape.len()).rev() {
            idx[k] += 1;
            mapped += strides[k];
            if idx[k] < shape[k] {
                break;
            }
            mapped -= strides[k] * shape[k];
            idx[k] = 0;
        }
    }
}

/// Mode-k1k2 unfolding: element `(i_1, …, i_N)` lands at
/// `(i_k1, i_k2, j)` with the remaining modes ordered lexicographically,
/// earliest mode varying fastest along `j`.
pub fn mode_unfold(t: &DenseTensor, pair: ModePair) -> Result<DenseTensor> {
    let out_shape = pair.unfolded_shape(t.shape())?;
    let strides = pair.unfolded_strides(t.shape());
    let mut out = vec![0.0; t.len()];
    for_each_mapped(t.shape(), &strides, |src, dst| out[dst] = t.data[src]);
    DenseTensor::new(out_shape.to_vec(), out)
}

/// Inverse of [`mode_unfold`].
pub fn mode_fold(u: &DenseTensor, pair: ModePair, shape: &[usize]) -> Result<DenseTensor> {
    let expected = pair.unfolded_shape(shape)?;
    if u.shape() != expected {
        return Err(Error::ShapeMismatch {
            left: u.shape().to_vec(),
            right: expected.to_vec(),
        });
    }
    let strides = pair.unfolded_strides(shape);
    let mut out = vec![0.0; u.len()];
    for_each_mapped(shape, &strides, |dst, src| out[dst] = u.data[src]);
    DenseTensor::new(shape.to_vec(), out)
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(len: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(len)
        } else {
            p.plan_fft_forward(len)
        }
    })
}

/// Unnormalized forward DFT of every tube `t(i1, i2, :)`.
pub fn dft_mode3(t: &DenseTensor) -> Result<ComplexTensor> {
    let (_, _, n3) = t.dims3()?;
    let mut out = t.to_complex();
    if n3 > 1 {
        plan(n3, false).process(&mut out.data);
    }
    Ok(out)
}

/// Inverse DFT along mode 3 with `1/I3` normalization.
///
/// The input must be the transform of a real tensor; an imaginary residue
/// above `1e-8 · ‖t‖_F` is reported as [`Error::SymmetryViolation`].
pub fn idft_mode3(t: &ComplexTensor) -> Result<DenseTensor> {
    let (_, _, n3) = t.dims3()?;
    let mut buf = t.data.clone();
    if n3 > 1 {
        plan(n3, true).process(&mut buf);
    }
    let scale = 1.0 / n3 as f64;
    let residue = buf.iter().fold(0.0f64, |m, c| m.max(c.im.abs())) * scale;
    let tolerance = 1e-8 * t.frobenius_norm().max(f64::MIN_POSITIVE);
    if residue > tolerance {
        return Err(Error::SymmetryViolation { residue, tolerance });
    }
    DenseTensor::new(t.shape.clone(), buf.iter().map(|c| c.re * scale).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn ramp(shape: &[usize]) -> DenseTensor {
        let mut k = 0.0;
        DenseTensor::from_fn(shape, |_| {
            k += 1.0;
            k
        })
        .unwrap()
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(DenseTensor::zeros(&[2, 0, 3]).is_err());
        assert!(DenseTensor::zeros(&[]).is_err());
        assert!(DenseTensor::new(vec![2, 2], vec![0.0; 3]).is_err());
    }

    #[test]
    fn frobenius_cases() {
        assert_eq!(DenseTensor::zeros(&[2, 3, 4]).unwrap().frobenius_norm(), 0.0);
        let mut t = DenseTensor::zeros(&[2, 3, 4]).unwrap();
        t.set(&[1, 2, 3], 3.0);
        assert_eq!(t.frobenius_norm(), 3.0);
        assert_eq!(DenseTensor::filled(&[2, 2], 1.0).unwrap().frobenius_norm(), 2.0);
    }

    #[test]
    fn hadamard_cases() {
        let a = DenseTensor::new(vec![2], vec![1.0, 2.0]).unwrap();
        let b = DenseTensor::new(vec![2], vec![3.0, 4.0]).unwrap();
        assert_eq!(a.hadamard(&b).unwrap().data(), &[3.0, 8.0]);
        let ones = DenseTensor::filled(&[2], 1.0).unwrap();
        assert_eq!(a.hadamard(&ones).unwrap(), a);
        let zeros = DenseTensor::zeros(&[2]).unwrap();
        assert_eq!(a.hadamard(&zeros).unwrap(), zeros);
        assert!(a.hadamard(&DenseTensor::zeros(&[3]).unwrap()).is_err());
    }

    #[test]
    fn hadamard_div_cases() {
        let a = DenseTensor::new(vec![2], vec![6.0, 9.0]).unwrap();
        let b = DenseTensor::new(vec![2], vec![2.0, 3.0]).unwrap();
        assert_eq!(a.hadamard_div(&b).unwrap().data(), &[3.0, 3.0]);
        let ones = DenseTensor::filled(&[2], 1.0).unwrap();
        assert_eq!(a.hadamard_div(&ones).unwrap(), a);

        let x = ramp(&[2, 3]);
        let mut d = DenseTensor::filled(&[2, 3], 1.0).unwrap();
        d.set(&[1, 2], 0.0);
        assert_eq!(
            x.hadamard_div(&d),
            Err(Error::ZeroDivisor { index: vec![2, 3] })
        );
    }

    #[test]
    fn unfold_order3_first_pair_is_identity() {
        let t = ramp(&[3, 4, 5]);
        let pair = ModePair::new(1, 2).unwrap();
        assert_eq!(mode_unfold(&t, pair).unwrap(), t);
        assert_eq!(mode_fold(&t, pair, &[3, 4, 5]).unwrap(), t);
    }

    #[test]
    fn unfold_order4_modes_1_3_matches_hand_enumeration() {
        // (k1,k2) = (1,3) on 2×2×2×2: j = 1 + (i2-1) + (i4-1)·2.
        let t = ramp(&[2, 2, 2, 2]);
        let u = mode_unfold(&t, ModePair::new(1, 3).unwrap()).unwrap();
        assert_eq!(u.shape(), &[2, 2, 4]);
        for i1 in 1..=2 {
            for i2 in 1..=2 {
                for i3 in 1..=2 {
                    for i4 in 1..=2 {
                        let j = 1 + (i2 - 1) + (i4 - 1) * 2;
                        assert_eq!(
                            u.get(&[i1 - 1, i3 - 1, j - 1]),
                            t.get(&[i1 - 1, i2 - 1, i3 - 1, i4 - 1])
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn fold_of_zero_is_zero() {
        let pair = ModePair::new(2, 4).unwrap();
        let shape = [2, 3, 4, 5];
        let u = DenseTensor::zeros(&pair.unfolded_shape(&shape).unwrap()).unwrap();
        assert_eq!(
            mode_fold(&u, pair, &shape).unwrap(),
            DenseTensor::zeros(&shape).unwrap()
        );
    }

    #[test]
    fn unfold_rejects_bad_pairs() {
        assert!(ModePair::new(2, 2).is_err());
        assert!(ModePair::new(0, 1).is_err());
        let t = ramp(&[2, 2, 2]);
        assert!(mode_unfold(&t, ModePair::new(1, 4).unwrap()).is_err());
        let wrong = DenseTensor::zeros(&[2, 2, 3]).unwrap();
        assert!(mode_fold(&wrong, ModePair::new(1, 2).unwrap(), &[2, 2, 2]).is_err());
    }

    #[test]
    fn mode_pairs_are_lexicographic() {
        let pairs: Vec<_> = ModePair::all(4)
            .iter()
            .map(|p| (p.k1(), p.k2()))
            .collect();
        assert_eq!(pairs, vec![(1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)]);
        assert_eq!(ModePair::count(4), 6);
    }

    #[test]
    fn dft_trivial_cases() {
        let t = ramp(&[2, 3, 1]);
        let f = dft_mode3(&t).unwrap();
        for (c, v) in f.data().iter().zip(t.data()) {
            assert_eq!(*c, Complex64::new(*v, 0.0));
        }
        let c = DenseTensor::filled(&[1, 1, 2], 1.5).unwrap();
        let f = dft_mode3(&c).unwrap();
        assert_eq!(f.data(), &[Complex64::new(3.0, 0.0), Complex64::new(0.0, 0.0)]);
        assert_eq!(idft_mode3(&f).unwrap(), c);
        let z = ComplexTensor::zeros(&[2, 2, 4]).unwrap();
        assert_eq!(idft_mode3(&z).unwrap(), DenseTensor::zeros(&[2, 2, 4]).unwrap());
    }

    #[test]
    fn idft_flags_asymmetric_input() {
        let mut f = ComplexTensor::zeros(&[1, 1, 4]).unwrap();
        f.data_mut()[1] = Complex64::new(0.0, 1.0);
        assert!(matches!(
            idft_mode3(&f),
            Err(Error::SymmetryViolation { .. })
        ));
    }

    #[test]
    fn projection_and_norms() {
        let t = ramp(&[2, 3]);
        let full = IndexSet::full(&[2, 3]).unwrap();
        assert_eq!(t.project(&full).unwrap(), t);
        let none = IndexSet::empty(&[2, 3]).unwrap();
        assert_eq!(t.project(&none).unwrap(), DenseTensor::zeros(&[2, 3]).unwrap());

        let mut u = t.clone();
        assert_eq!(t.inf_norm_diff(&u).unwrap(), 0.0);
        u.set(&[1, 1], t.get(&[1, 1]) + 0.5);
        assert_abs_diff_eq!(t.inf_norm_diff(&u).unwrap(), 0.5);
    }

    #[test]
    fn indicator_round_trip() {
        let bits = vec![true, false, false, true, true, false];
        let m = IndexSet::new(vec![2, 3], bits).unwrap();
        assert_eq!(IndexSet::from_indicator(&m.to_indicator()).unwrap(), m);
        assert_eq!(m.complement().complement(), m);
        let bad = DenseTensor::filled(&[2], 0.5).unwrap();
        assert!(IndexSet::from_indicator(&bad).is_err());
    }
}
