//! Complex additive white Gaussian noise.

use num_complex::Complex64;
use rand::prelude::*;

/// Add circularly symmetric complex Gaussian noise of total variance
/// `noise_var` per sample (i.e. `noise_var / 2` per real dimension).
///
/// With unit-energy resource elements and unitary transforms everywhere,
/// the same variance describes the noise per time-domain sample and per
/// post-FFT resource element, so `noise_var = 10^(-SNR_dB/10)`.
pub fn apply_awgn(samples: &mut [Complex64], noise_var: f64, rng: &mut impl Rng) {
    if noise_var <= 0.0 {
        return;
    }
    let sigma = (noise_var / 2.0).sqrt();
    for v in samples.iter_mut() {
        let g1: f64 = rand_distr::StandardNormal.sample(rng);
        let g2: f64 = rand_distr::StandardNormal.sample(rng);
        *v += Complex64::new(g1 * sigma, g2 * sigma);
    }
}
