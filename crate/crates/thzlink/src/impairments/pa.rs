//! Power-amplifier nonlinearity (memoryless Rapp AM/AM, no AM/PM).

use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::waveform::TimeSignal;

/// Memoryless power-amplifier model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase")]
pub enum PaModel {
    /// Pass-through.
    Ideal,
    /// Rapp solid-state model: `g(r) = r / (1 + (r/A)^(2p))^(1/(2p))`.
    /// Smoothness `p` controls how abruptly the output saturates at
    /// amplitude `sat_amplitude`; large `p` approaches a hard clipper.
    /// Phase is preserved.
    Rapp { smoothness_p: f64, sat_amplitude: f64 },
}

impl Default for PaModel {
    fn default() -> Self {
        PaModel::Rapp { smoothness_p: 2.0, sat_amplitude: 1.0 }
    }
}

impl PaModel {
    /// AM/AM response: output amplitude for input amplitude `r >= 0`.
    pub fn am_am(&self, r: f64) -> f64 {
        match *self {
            PaModel::Ideal => r,
            PaModel::Rapp { smoothness_p: p, sat_amplitude: a } => {
                if r == 0.0 {
                    return 0.0;
                }
                // log-domain form of r * (1 + (r/a)^(2p))^(-1/(2p)); the
                // direct expression overflows for large p * ln(r/a)
                let t = 2.0 * p * (r / a).ln();
                let ln_den = if t > 700.0 {
                    (r / a).ln()
                } else {
                    t.exp().ln_1p() / (2.0 * p)
                };
                r * (-ln_den).exp()
            }
        }
    }

    pub fn sat_amplitude(&self) -> f64 {
        match *self {
            PaModel::Ideal => 1.0,
            PaModel::Rapp { sat_amplitude, .. } => sat_amplitude,
        }
    }
}

/// Drive the PA at an operating point `backoff_db` below saturation.
///
/// The signal is first scaled so its mean power is
/// `sat_amplitude^2 * 10^(-backoff_db/10)`, then the AM/AM curve is applied
/// sample-wise. The ideal PA passes the signal through untouched.
pub fn apply_pa(sig: &mut TimeSignal, pa: &PaModel, backoff_db: f64) -> Result<()> {
    if matches!(pa, PaModel::Ideal) {
        return Ok(());
    }
    if backoff_db < 0.0 {
        return Err(SimError::InvalidArgument(format!(
            "backoff must be >= 0 dB, got {backoff_db}"
        )));
    }
    let p_in = sig.mean_power();
    if p_in <= 0.0 {
        return Ok(());
    }
    let sat = pa.sat_amplitude();
    let scale = (sat * sat * 10f64.powf(-backoff_db / 10.0) / p_in).sqrt();
    for v in sig.samples.iter_mut() {
        let r = v.norm() * scale;
        if r > 0.0 {
            *v *= pa.am_am(r) / v.norm();
        } else {
            *v *= 0.0;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn rapp_limits() {
        let pa = PaModel::Rapp { smoothness_p: 2.0, sat_amplitude: 1.0 };
        // small signal: linear
        assert!((pa.am_am(1e-3) / 1e-3 - 1.0).abs() < 1e-6);
        // saturation: output -> A
        assert!((pa.am_am(100.0) - 1.0).abs() < 1e-4);
        // at r == A the Rapp compression is exactly 2^(-1/(2p))
        let expect = 2f64.powf(-1.0 / 4.0);
        assert!((pa.am_am(1.0) - expect).abs() < 1e-12);
    }

    #[test]
    fn huge_smoothness_is_a_hard_clipper_without_overflow() {
        let pa = PaModel::Rapp { smoothness_p: 1000.0, sat_amplitude: 0.7 };
        assert!((pa.am_am(0.3) - 0.3).abs() < 1e-9);
        for r in [0.71, 1.0, 5.0, 1e6] {
            let g = pa.am_am(r);
            assert!(g.is_finite() && (g - 0.7).abs() < 1e-3, "r={r} g={g}");
        }
    }

    #[test]
    fn operating_point_sets_mean_power() {
        // constant-envelope input: pure compression, exact power algebra
        let pa = PaModel::Rapp { smoothness_p: 2.0, sat_amplitude: 2.0 };
        let mut sig = TimeSignal {
            samples: vec![Complex64::from_polar(5.0, 0.7); 256],
            sample_rate_hz: 1.0,
        };
        apply_pa(&mut sig, &pa, 6.0).unwrap();
        // input scaled to power 4 * 10^-0.6, i.e. amplitude r = 2*10^-0.3,
        // then compressed by the AM/AM curve
        let r = 2.0 * 10f64.powf(-0.3);
        let expect = pa.am_am(r);
        for v in &sig.samples {
            assert!((v.norm() - expect).abs() < 1e-12);
            assert!((v.arg() - 0.7).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_envelope_has_no_regrowth() {
        // a pure tone stays a pure tone through any AM/AM curve: every
        // sample is compressed by the same factor
        let n = 512;
        let pa = PaModel::Rapp { smoothness_p: 2.0, sat_amplitude: 1.0 };
        let mut sig = TimeSignal {
            samples: (0..n)
                .map(|t| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * 17.0 * t as f64 / n as f64))
                .collect(),
            sample_rate_hz: 1.0,
        };
        let clean = sig.clone();
        apply_pa(&mut sig, &pa, 0.0).unwrap();
        let g0 = sig.samples[0].norm();
        for (v, c) in sig.samples.iter().zip(&clean.samples) {
            assert!((v - c * g0).norm() < 1e-12);
        }
    }

    #[test]
    fn ideal_is_identity_and_negative_backoff_rejected() {
        let mut sig = TimeSignal {
            samples: vec![Complex64::new(1.5, -2.5); 4],
            sample_rate_hz: 1.0,
        };
        let before = sig.samples.clone();
        apply_pa(&mut sig, &PaModel::Ideal, 3.0).unwrap();
        assert_eq!(sig.samples, before);
        assert!(apply_pa(&mut sig, &PaModel::default(), -1.0).is_err());
    }
}
