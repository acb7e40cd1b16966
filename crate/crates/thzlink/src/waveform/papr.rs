//! Peak-to-average power ratio statistics.
//!
//! PAPR is evaluated per symbol period: the peak sample power within each
//! symbol over the mean power of the whole signal, with the CCDF taken
//! across symbols. This is the convention behind the usual OFDM CCDF
//! curves (a 2160-subcarrier QPSK CP-OFDM signal sits near 11.7 dB at the
//! 1e-3 point).

use crate::error::{Result, SimError};
use crate::math::lin_to_db;

use super::TimeSignal;

/// Streaming collector of per-symbol peaks, so CCDFs over 1e5 symbols do
/// not require holding 1e5 symbols of samples in memory.
#[derive(Debug, Default, Clone)]
pub struct PaprAccumulator {
    power_sum: f64,
    n_samples: u64,
    peaks: Vec<f64>,
}

impl PaprAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    /// Add a signal chunked into `symbol_samples`-long symbols. A trailing
    /// partial symbol is ignored.
    pub fn add_signal(&mut self, sig: &TimeSignal, symbol_samples: usize) {
        assert!(symbol_samples > 0);
        for chunk in sig.samples.chunks_exact(symbol_samples) {
            let mut peak = 0.0f64;
            for v in chunk {
                let p = v.norm_sqr();
                self.power_sum += p;
                if p > peak {
                    peak = p;
                }
            }
            self.peaks.push(peak);
        }
        self.n_samples += (sig.samples.len() / symbol_samples * symbol_samples) as u64;
    }

    pub fn n_symbols(&self) -> usize {
        self.peaks.len()
    }

    fn mean_power(&self) -> f64 {
        if self.n_samples == 0 {
            0.0
        } else {
            self.power_sum / self.n_samples as f64
        }
    }

    /// PAPR level (dB) exceeded with probability `p`.
    pub fn ccdf_level(&self, p: f64) -> Result<f64> {
        if !(0.0 < p && p < 1.0) {
            return Err(SimError::InvalidArgument(format!("ccdf probability {p} outside (0,1)")));
        }
        let n = self.peaks.len();
        if (n as f64) * p < 10.0 {
            return Err(SimError::InvalidArgument(format!(
                "{n} symbols too few to resolve CCDF at {p}"
            )));
        }
        let mean = self.mean_power();
        if mean <= 0.0 {
            return Err(SimError::InvalidArgument("zero-power signal".into()));
        }
        let mut pk = self.peaks.clone();
        let idx = ((1.0 - p) * (n as f64 - 1.0)).round() as usize;
        let (_, q, _) = pk.select_nth_unstable_by(idx, f64::total_cmp);
        Ok(lin_to_db(*q / mean))
    }

    /// CCDF probabilities at the given PAPR levels (dB).
    pub fn ccdf_curve(&self, levels_db: &[f64]) -> Result<Vec<f64>> {
        let mean = self.mean_power();
        if mean <= 0.0 {
            return Err(SimError::InvalidArgument("zero-power signal".into()));
        }
        let n = self.peaks.len() as f64;
        Ok(levels_db
            .iter()
            .map(|&l| {
                let thr = mean * crate::math::db_to_lin(l);
                self.peaks.iter().filter(|&&p| p > thr).count() as f64 / n
            })
            .collect())
    }
}

/// One-shot PAPR level at CCDF probability `p` for a single signal.
pub fn papr_ccdf(sig: &TimeSignal, symbol_samples: usize, p: f64) -> Result<f64> {
    let mut acc = PaprAccumulator::new();
    acc.add_signal(sig, symbol_samples);
    acc.ccdf_level(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modulation::Modulation;
    use crate::numerology::Numerology;
    use crate::waveform::{ofdm_modulate, scfdma_modulate, ResourceGrid, ScFdmaFrame};
    use num_complex::Complex64;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn single_tone_has_zero_papr() {
        let sig = TimeSignal {
            samples: (0..200_000)
                .map(|i| Complex64::from_polar(2.0, 0.1 * i as f64))
                .collect(),
            sample_rate_hz: 1e6,
        };
        for p in [0.3, 1e-2, 1e-3] {
            let papr = papr_ccdf(&sig, 20, p).unwrap();
            assert!(papr.abs() < 1e-9, "papr {papr} at ccdf {p}");
        }
    }

    fn random_bits(rng: &mut impl Rng, n: usize) -> Vec<u8> {
        (0..n).map(|_| rng.gen_range(0..2)).collect()
    }

    /// Monte-Carlo PAPR oracle over 1500 slots (21000 symbols); the 1e-3
    /// quantile is stable to ~0.1 dB at this size. Reference values from a
    /// 1e5-symbol run of the same generator (papr_oracle_100k_symbols):
    ///   OFDM QPSK 180 PRB @ 960 kHz:    11.78 dB
    ///   SC-FDMA QPSK 180 PRB @ 960 kHz:  7.98 dB  (gap 3.80 dB)
    #[test]
    fn qpsk_papr_levels_and_waveform_gap() {
        let num = Numerology::derive(960, 180).unwrap();
        let m = Modulation::Qpsk;
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let slots = 1500;
        let sym_samples = num.samples_per_symbol();

        let mut ofdm_acc = PaprAccumulator::new();
        let mut sc_acc = PaprAccumulator::new();
        for _ in 0..slots {
            let mut grid = ResourceGrid::for_slot(&num);
            for sym in 0..grid.n_symbols {
                let syms = m
                    .map_bits(&random_bits(&mut rng, 2 * grid.n_subcarriers))
                    .unwrap();
                grid.symbol_mut(sym).copy_from_slice(&syms);
            }
            ofdm_acc.add_signal(&ofdm_modulate(&grid, &num).unwrap(), sym_samples);

            let mut frame = ScFdmaFrame::for_slot(&num);
            for sym in 0..frame.n_symbols {
                let syms = m.map_bits(&random_bits(&mut rng, 2 * frame.m)).unwrap();
                frame.symbol_mut(sym).copy_from_slice(&syms);
            }
            sc_acc.add_signal(&scfdma_modulate(&frame, &num).unwrap(), sym_samples);
        }

        let p_ofdm = ofdm_acc.ccdf_level(1e-3).unwrap();
        let p_sc = sc_acc.ccdf_level(1e-3).unwrap();
        assert!(
            (11.0..12.0).contains(&p_ofdm),
            "OFDM QPSK PAPR@1e-3 = {p_ofdm:.2} dB, expected 11..12"
        );
        assert!(
            p_ofdm - p_sc >= 2.5,
            "waveform PAPR gap {:.2} dB below 2.5 (ofdm {p_ofdm:.2}, sc-fdma {p_sc:.2})",
            p_ofdm - p_sc
        );
    }

    #[test]
    fn ccdf_curve_is_monotone_nonincreasing() {
        let num = Numerology::derive(120, 12).unwrap();
        let m = Modulation::Qpsk;
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        let mut acc = PaprAccumulator::new();
        for _ in 0..20 {
            let mut grid = ResourceGrid::for_slot(&num);
            for sym in 0..grid.n_symbols {
                let syms = m
                    .map_bits(&random_bits(&mut rng, 2 * grid.n_subcarriers))
                    .unwrap();
                grid.symbol_mut(sym).copy_from_slice(&syms);
            }
            acc.add_signal(&ofdm_modulate(&grid, &num).unwrap(), num.samples_per_symbol());
        }
        let levels: Vec<f64> = (0..48).map(|i| i as f64 * 0.25).collect();
        let curve = acc.ccdf_curve(&levels).unwrap();
        for w in curve.windows(2) {
            assert!(w[1] <= w[0] + 1e-12);
        }
        assert!((curve[0] - 1.0).abs() < 1e-12); // every symbol peaks above 0 dB
    }

    /// Large oracle used to freeze the reference values quoted above.
    /// Run explicitly with --ignored when recalibrating.
    #[test]
    #[ignore]
    fn papr_oracle_100k_symbols() {
        let num = Numerology::derive(960, 180).unwrap();
        let m = Modulation::Qpsk;
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let slots = 7143; // 100k symbols
        let sym_samples = num.samples_per_symbol();
        let mut ofdm_acc = PaprAccumulator::new();
        let mut sc_acc = PaprAccumulator::new();
        for _ in 0..slots {
            let mut grid = ResourceGrid::for_slot(&num);
            for sym in 0..grid.n_symbols {
                let syms = m
                    .map_bits(&random_bits(&mut rng, 2 * grid.n_subcarriers))
                    .unwrap();
                grid.symbol_mut(sym).copy_from_slice(&syms);
            }
            ofdm_acc.add_signal(&ofdm_modulate(&grid, &num).unwrap(), sym_samples);
            let mut frame = ScFdmaFrame::for_slot(&num);
            for sym in 0..frame.n_symbols {
                let syms = m.map_bits(&random_bits(&mut rng, 2 * frame.m)).unwrap();
                frame.symbol_mut(sym).copy_from_slice(&syms);
            }
            sc_acc.add_signal(&scfdma_modulate(&frame, &num).unwrap(), sym_samples);
        }
        println!(
            "PAPR@1e-3: OFDM {:.2} dB, SC-FDMA {:.2} dB over {} symbols",
            ofdm_acc.ccdf_level(1e-3).unwrap(),
            sc_acc.ccdf_level(1e-3).unwrap(),
            ofdm_acc.n_symbols()
        );
    }
}
