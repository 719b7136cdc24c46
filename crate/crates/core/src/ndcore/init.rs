use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::Tensor;

/// Normal draws scaled by `std`, resampling any draw beyond two standard
/// deviations.
pub fn truncated_normal<R: Rng + ?Sized>(shape: &[usize], std: f64, rng: &mut R) -> Tensor {
    let mut t = Tensor::zeros(shape);
    for x in t.data_mut() {
        let z = loop {
            let z: f64 = StandardNormal.sample(rng);
            if z.abs() <= 2.0 {
                break z;
            }
        };
        *x = z * std;
    }
    t
}
