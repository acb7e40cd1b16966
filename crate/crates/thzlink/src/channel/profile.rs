//! Power-delay profiles for the tapped-delay-line channel.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT_MPS: f64 = 299_792_458.0;

/// TR 38.901 Table 7.7.1-5 (CDL-E) cluster delays, in normalized delay
/// units, with the specular (LOS) ray removed. The first cluster keeps its
/// Laplacian (diffuse) component only; the LOS ray is reintroduced by the
/// Rician K-factor split at realization time.
const CDL_E_NORM_DELAYS: [f64; 14] = [
    0.0000, 0.5133, 0.5440, 0.5630, 0.5440, 0.7112, 1.9092, 1.9293, 1.9589,
    2.6426, 3.7136, 5.4524, 12.0034, 20.6419,
];

/// TR 38.901 Table 7.7.1-5 (CDL-E) cluster powers in dB (diffuse part
/// only, i.e. the LOS row's specular component excluded).
const CDL_E_POWERS_DB: [f64; 14] = [
    -22.03, -15.8, -18.1, -19.8, -22.9, -22.4, -18.6, -20.8, -22.6, -22.3,
    -25.6, -20.2, -29.8, -29.2,
];

/// Which propagation model a link runs over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChannelKind {
    /// Ideal identity channel (no fading, no delay spread). The two ports
    /// are passed through independently.
    Awgn,
    /// Rician TDL derived from the CDL-E cluster profile.
    CdlE,
}

impl ChannelKind {
    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "awgn" => Ok(ChannelKind::Awgn),
            "cdl-e" | "cdle" | "cdl_e" => Ok(ChannelKind::CdlE),
            other => Err(SimError::InvalidArgument(format!(
                "unknown channel kind '{other}' (expected 'awgn' or 'cdl-e')"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ChannelKind::Awgn => "awgn",
            ChannelKind::CdlE => "cdl-e",
        }
    }
}

/// A tapped-delay-line profile plus the large-scale parameters needed to
/// realize it.
///
/// `taps` holds the diffuse (Rayleigh) part of the profile: `(delay_s,
/// power_db)` pairs whose linear powers sum to 1. The LOS ray is described
/// separately by `rician_k_db` and rides on the first tap, so the realized
/// profile puts `K/(K+1)` of the power there and scales every diffuse tap
/// by `1/(K+1)`. Delays are already scaled so that the *realized* profile
/// (LOS included) has RMS delay spread `rms_delay_spread_s`.
#[derive(Debug, Clone)]
pub struct ChannelProfile {
    /// Diffuse taps as `(delay_s, power_db)`; linear powers sum to 1 and
    /// the first tap sits at delay 0.
    pub taps: Vec<(f64, f64)>,
    /// LOS-to-diffuse power ratio on the first tap, in dB. `+inf` degenerates
    /// to a pure static LOS channel.
    pub rician_k_db: f64,
    /// RMS delay spread of the realized (K-split) profile, in seconds.
    pub rms_delay_spread_s: f64,
    /// UE speed in m/s (sets the maximum Doppler shift).
    pub ue_speed_mps: f64,
    /// Carrier frequency in Hz (sets the maximum Doppler shift).
    pub carrier_hz: f64,
}

impl ChannelProfile {
    /// CDL-E profile rescaled so that the realized (K-split) profile has the
    /// requested RMS delay spread.
    pub fn cdl_e(
        rms_ds_ns: f64,
        rician_k_db: f64,
        ue_speed_kmh: f64,
        carrier_hz: f64,
    ) -> Result<Self> {
        if !(rms_ds_ns > 0.0) {
            return Err(SimError::InvalidArgument(
                "RMS delay spread must be positive".into(),
            ));
        }
        if !(carrier_hz > 0.0) || ue_speed_kmh < 0.0 {
            return Err(SimError::InvalidArgument(
                "carrier must be positive and UE speed non-negative".into(),
            ));
        }

        // Normalize the diffuse cluster powers to unit total.
        let lin: Vec<f64> =
            CDL_E_POWERS_DB.iter().map(|p| 10f64.powf(p / 10.0)).collect();
        let total: f64 = lin.iter().sum();
        let norm: Vec<f64> = lin.iter().map(|p| p / total).collect();

        // RMS delay spread of the K-split profile in normalized delay
        // units: the LOS ray contributes weight K/(K+1) at delay 0 and each
        // diffuse tap weight norm[i]/(K+1).
        let k_lin = 10f64.powf(rician_k_db / 10.0);
        let diffuse_share = 1.0 / (1.0 + k_lin);
        let mut mean = 0.0;
        let mut mean_sq = 0.0;
        for (i, &d) in CDL_E_NORM_DELAYS.iter().enumerate() {
            let w = norm[i] * diffuse_share;
            mean += w * d;
            mean_sq += w * d * d;
        }
        let ds_norm = (mean_sq - mean * mean).sqrt();
        if !(ds_norm > 0.0) {
            return Err(SimError::InvalidArgument(
                "K-factor too large to scale a finite delay spread".into(),
            ));
        }
        let scale_s = rms_ds_ns * 1e-9 / ds_norm;

        let taps = CDL_E_NORM_DELAYS
            .iter()
            .zip(norm.iter())
            .map(|(&d, &p)| (d * scale_s, 10.0 * p.log10()))
            .collect();

        Ok(Self {
            taps,
            rician_k_db,
            rms_delay_spread_s: rms_ds_ns * 1e-9,
            ue_speed_mps: ue_speed_kmh / 3.6,
            carrier_hz,
        })
    }

    /// Single-tap profile at delay zero (flat channel).
    pub fn flat(rician_k_db: f64, ue_speed_mps: f64, carrier_hz: f64) -> Self {
        Self {
            taps: vec![(0.0, 0.0)],
            rician_k_db,
            rms_delay_spread_s: 0.0,
            ue_speed_mps,
            carrier_hz,
        }
    }

    /// Maximum Doppler shift `v * f_c / c` in Hz.
    pub fn max_doppler_hz(&self) -> f64 {
        self.ue_speed_mps * self.carrier_hz / SPEED_OF_LIGHT_MPS
    }

    /// Linear diffuse tap powers (should sum to 1).
    pub fn linear_powers(&self) -> Vec<f64> {
        self.taps.iter().map(|&(_, p)| 10f64.powf(p / 10.0)).collect()
    }

    /// Linear K-factor, safe at `rician_k_db = +inf`.
    pub fn k_linear(&self) -> f64 {
        10f64.powf(self.rician_k_db / 10.0)
    }

    /// LOS power share `K/(K+1)`, computed without overflow at K = inf.
    pub fn los_share(&self) -> f64 {
        let k = self.k_linear();
        if k.is_infinite() {
            1.0
        } else {
            k / (1.0 + k)
        }
    }

    /// Diffuse power share `1/(K+1)`.
    pub fn diffuse_share(&self) -> f64 {
        1.0 - self.los_share()
    }

    /// RMS delay spread of the realized (K-split) profile implied by the
    /// tap table, in seconds.
    pub fn derived_rms_delay_spread_s(&self) -> f64 {
        let powers = self.linear_powers();
        let share = self.diffuse_share();
        let mut mean = 0.0;
        let mut mean_sq = 0.0;
        for (&(d, _), &p) in self.taps.iter().zip(powers.iter()) {
            let w = p * share;
            mean += w * d;
            mean_sq += w * d * d;
        }
        // The LOS ray sits at the first tap's delay (zero by convention)
        // with weight K/(K+1); include it for generality.
        let d0 = self.taps.first().map(|&(d, _)| d).unwrap_or(0.0);
        let w0 = self.los_share();
        mean += w0 * d0;
        mean_sq += w0 * d0 * d0;
        (mean_sq - mean * mean).max(0.0).sqrt()
    }

    /// Largest tap delay in seconds.
    pub fn max_delay_s(&self) -> f64 {
        self.taps.iter().map(|&(d, _)| d).fold(0.0, f64::max)
    }

    /// Validate the profile invariants: unit total diffuse power, first tap
    /// at delay zero, non-negative delays, and delay spread consistency.
    pub fn validate(&self) -> Result<()> {
        if self.taps.is_empty() {
            return Err(SimError::InvalidArgument("profile has no taps".into()));
        }
        let total: f64 = self.linear_powers().iter().sum();
        if (total - 1.0).abs() > 1e-6 {
            return Err(SimError::InvalidArgument(format!(
                "diffuse tap powers sum to {total}, expected 1"
            )));
        }
        if self.taps[0].0 != 0.0 {
            return Err(SimError::InvalidArgument("first tap must be at delay 0".into()));
        }
        if self.taps.iter().any(|&(d, _)| d < 0.0) {
            return Err(SimError::InvalidArgument("tap delays must be >= 0".into()));
        }
        if self.rms_delay_spread_s > 0.0 {
            let derived = self.derived_rms_delay_spread_s();
            let err = (derived - self.rms_delay_spread_s).abs()
                / self.rms_delay_spread_s;
            if err > 0.01 {
                return Err(SimError::InvalidArgument(format!(
                    "profile delay spread {derived:.3e}s deviates more than \
                     1% from the declared {:.3e}s",
                    self.rms_delay_spread_s
                )));
            }
        }
        Ok(())
    }
}
