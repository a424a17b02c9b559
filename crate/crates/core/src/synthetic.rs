//! Seeded generators for synthetic test data.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::Result;
use crate::tensor::DenseTensor;
use crate::tsvd::t_product;

/// Tensor with i.i.d. standard normal entries.
pub fn gaussian(shape: &[usize], seed: u64) -> Result<DenseTensor> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    DenseTensor::from_fn(shape, |_| StandardNormal.sample(&mut rng))
}

/// `A ∗ B` with Gaussian `A: n1×r×n3` and `B: r×n2×n3`, so the tubal rank
/// is at most `r`.
pub fn low_tubal_rank(n1: usize, n2: usize, n3: usize, r: usize, seed: u64) -> Result<DenseTensor> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = DenseTensor::from_fn(&[n1, r, n3], |_| StandardNormal.sample(&mut rng))?;
    let b = DenseTensor::from_fn(&[r, n2, n3], |_| StandardNormal.sample(&mut rng))?;
    t_product(&a, &b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tsvd::tubal_rank;

    #[test]
    fn seeded_and_low_rank() {
        let a = low_tubal_rank(8, 7, 4, 2, 5).unwrap();
        assert_eq!(a, low_tubal_rank(8, 7, 4, 2, 5).unwrap());
        assert_ne!(a, low_tubal_rank(8, 7, 4, 2, 6).unwrap());
        assert_eq!(tubal_rank(&a).unwrap(), 2);
        assert_eq!(gaussian(&[3, 4], 1).unwrap(), gaussian(&[3, 4], 1).unwrap());
    }
}
