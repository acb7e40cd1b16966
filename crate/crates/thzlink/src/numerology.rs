//! OFDM numerology for sub-THz operation: subcarrier spacings from 120 kHz
//! (the highest FR2 value of 3GPP TS 38.211) up to 3840 kHz, with FFT size,
//! cyclic prefix and slot geometry derived from the allocation.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};

/// Supported subcarrier spacings in kHz.
pub const SUPPORTED_SCS_KHZ: [u32; 6] = [120, 240, 480, 960, 1920, 3840];

/// Symbols per slot. The slot is always 14 symbols; all symbols use the same
/// cyclic prefix length (no extended first CP), which keeps the slot a few
/// tenths of a percent shorter than the nominal NR slot grid.
pub const SYMBOLS_PER_SLOT: usize = 14;

/// Maximum occupied bandwidth, matching a 2.16 GHz channelization.
pub const MAX_OCCUPIED_BW_HZ: f64 = 2.16e9;

/// Fraction of the FFT that may carry active subcarriers.
const MAX_OCCUPANCY: f64 = 0.85;

/// Normal CP ratio of TS 38.211: 144 samples per 2048-point symbol.
const CP_NUM: usize = 144;
const CP_DEN: usize = 2048;

/// Largest allocation per subcarrier spacing, sized so the occupied
/// bandwidth never exceeds [`MAX_OCCUPIED_BW_HZ`].
pub fn max_prbs(scs_khz: u32) -> Result<usize> {
    match scs_khz {
        120 | 240 | 480 | 960 => Ok(180),
        1920 => Ok(90),
        3840 => Ok(45),
        other => Err(SimError::InvalidConfig(format!(
            "unsupported subcarrier spacing {other} kHz (supported: {SUPPORTED_SCS_KHZ:?})"
        ))),
    }
}

/// Derived slot geometry for one (subcarrier spacing, allocation) pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Numerology {
    pub scs_hz: f64,
    pub fft_size: usize,
    pub cp_samples: usize,
    pub prb_count: usize,
}

impl Numerology {
    /// Derive the slot geometry. The FFT is the smallest power of two that
    /// keeps occupancy at or below 85%; the CP reuses the 144/2048 normal-CP
    /// ratio for every symbol.
    pub fn derive(scs_khz: u32, prb_count: usize) -> Result<Self> {
        let limit = max_prbs(scs_khz)?;
        if prb_count == 0 || prb_count > limit {
            return Err(SimError::InvalidConfig(format!(
                "prb_count {prb_count} outside [1, {limit}] for {scs_khz} kHz"
            )));
        }
        let active = prb_count * 12;
        let mut fft = crate::math::next_pow2(active);
        while (active as f64) > MAX_OCCUPANCY * fft as f64 {
            fft *= 2;
        }
        let cp = ((fft * CP_NUM) as f64 / CP_DEN as f64).round() as usize;
        let num = Numerology {
            scs_hz: scs_khz as f64 * 1e3,
            fft_size: fft,
            cp_samples: cp,
            prb_count,
        };
        debug_assert!(num.occupied_bw_hz() <= MAX_OCCUPIED_BW_HZ + 1.0);
        Ok(num)
    }

    pub fn active_subcarriers(&self) -> usize {
        self.prb_count * 12
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.scs_hz * self.fft_size as f64
    }

    pub fn occupied_bw_hz(&self) -> f64 {
        self.scs_hz * self.active_subcarriers() as f64
    }

    /// Nominal channel bandwidth. The full 180-PRB allocation occupies 96%
    /// of a 2.16 GHz channel; the same ratio is applied to all allocations.
    pub fn channel_bw_hz(&self) -> f64 {
        self.occupied_bw_hz() / 0.96
    }

    pub fn samples_per_symbol(&self) -> usize {
        self.fft_size + self.cp_samples
    }

    pub fn samples_per_slot(&self) -> usize {
        self.samples_per_symbol() * SYMBOLS_PER_SLOT
    }

    pub fn symbol_duration_s(&self) -> f64 {
        self.samples_per_symbol() as f64 / self.sample_rate_hz()
    }

    pub fn slot_duration_s(&self) -> f64 {
        self.samples_per_slot() as f64 / self.sample_rate_hz()
    }

    pub fn cp_duration_s(&self) -> f64 {
        self.cp_samples as f64 / self.sample_rate_hz()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_geometries() {
        let n = Numerology::derive(960, 180).unwrap();
        assert_eq!(n.fft_size, 4096);
        assert_eq!(n.cp_samples, 288);
        assert_eq!(n.active_subcarriers(), 2160);
        assert!((n.sample_rate_hz() - 3.93216e9).abs() < 1.0);

        let n = Numerology::derive(3840, 45).unwrap();
        assert_eq!(n.fft_size, 1024);
        assert_eq!(n.active_subcarriers(), 540);
        assert_eq!(n.cp_samples, 72);
        assert!((n.sample_rate_hz() - 3.93216e9).abs() < 1.0);

        let n = Numerology::derive(120, 1).unwrap();
        assert_eq!(n.fft_size, 16);
        assert_eq!(n.cp_samples, 1);
    }

    #[test]
    fn occupancy_bound_holds_for_all_supported_pairs() {
        for &scs in &SUPPORTED_SCS_KHZ {
            let limit = max_prbs(scs).unwrap();
            for prb in [1, limit / 2, limit] {
                if prb == 0 {
                    continue;
                }
                let n = Numerology::derive(scs, prb).unwrap();
                assert!(n.active_subcarriers() as f64 <= 0.85 * n.fft_size as f64);
                // smallest such power of two
                assert!(n.active_subcarriers() as f64 > 0.85 * (n.fft_size / 2) as f64);
                assert!(n.occupied_bw_hz() <= MAX_OCCUPIED_BW_HZ + 1.0);
                assert_eq!(
                    n.cp_samples,
                    ((n.fft_size * 144) as f64 / 2048.0).round() as usize
                );
            }
        }
    }

    #[test]
    fn full_allocations_occupy_the_channel() {
        for (scs, prb) in [(960u32, 180usize), (1920, 90), (3840, 45)] {
            let n = Numerology::derive(scs, prb).unwrap();
            assert!((n.occupied_bw_hz() - 2.0736e9).abs() < 1.0);
            assert!((n.channel_bw_hz() - 2.16e9).abs() < 1e3);
        }
    }

    #[test]
    fn cp_duration_halves_per_scs_doubling_at_fixed_prb() {
        let pairs = [(120u32, 45usize), (240, 45), (480, 45), (960, 45)];
        let mut prev: Option<f64> = None;
        for (scs, prb) in pairs {
            let n = Numerology::derive(scs, prb).unwrap();
            if let Some(p) = prev {
                let ratio = p / n.cp_duration_s();
                assert!((ratio - 2.0).abs() < 1e-12, "ratio {ratio}");
            }
            prev = Some(n.cp_duration_s());
        }
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(Numerology::derive(60, 10).is_err());
        assert!(Numerology::derive(120, 0).is_err());
        assert!(Numerology::derive(120, 181).is_err());
        assert!(Numerology::derive(1920, 91).is_err());
        assert!(Numerology::derive(3840, 46).is_err());
    }
}
