use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Tensor;
use crate::error::{Error, Result};

/// Inverted-dropout mask: each entry is 0 with probability `rate`, otherwise
/// `1 / (1 − rate)`.
pub fn dropout_mask(shape: &[usize], rate: f64, seed: u64) -> Result<Tensor> {
    dropout_mask_with(shape, rate, &mut ChaCha8Rng::seed_from_u64(seed))
}

pub fn dropout_mask_with<R: Rng + ?Sized>(
    shape: &[usize],
    rate: f64,
    rng: &mut R,
) -> Result<Tensor> {
    if !(0.0..1.0).contains(&rate) {
        return Err(Error::InvalidHyperparameter(format!(
            "dropout rate must be in [0, 1), got {rate}"
        )));
    }
    let keep = 1.0 / (1.0 - rate);
    let mut mask = Tensor::zeros(shape);
    for x in mask.data_mut() {
        *x = if rng.random::<f64>() < rate {
            0.0
        } else {
            keep
        };
    }
    Ok(mask)
}
