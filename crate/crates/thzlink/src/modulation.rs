//! QAM mapping and soft demapping.
//!
//! Constellations follow the Gray mappings of 3GPP TS 38.211 section 5.1:
//! even-indexed bits drive the in-phase axis, odd-indexed bits the
//! quadrature axis, and each axis is an independently Gray-labeled PAM.
//! All constellations have unit average energy.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Modulation {
    #[serde(rename = "qpsk")]
    Qpsk,
    #[serde(rename = "16qam")]
    Qam16,
    #[serde(rename = "64qam")]
    Qam64,
    #[serde(rename = "256qam")]
    Qam256,
}

/// LLR magnitude clip applied by the demapper.
pub const LLR_CLIP: f64 = 60.0;

impl Modulation {
    pub fn bits_per_symbol(&self) -> usize {
        match self {
            Modulation::Qpsk => 2,
            Modulation::Qam16 => 4,
            Modulation::Qam64 => 6,
            Modulation::Qam256 => 8,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Modulation::Qpsk => "qpsk",
            Modulation::Qam16 => "16qam",
            Modulation::Qam64 => "64qam",
            Modulation::Qam256 => "256qam",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "qpsk" => Ok(Modulation::Qpsk),
            "16qam" | "qam16" => Ok(Modulation::Qam16),
            "64qam" | "qam64" => Ok(Modulation::Qam64),
            "256qam" | "qam256" => Ok(Modulation::Qam256),
            other => Err(SimError::InvalidConfig(format!("unknown modulation '{other}'"))),
        }
    }

    fn bits_per_axis(&self) -> usize {
        self.bits_per_symbol() / 2
    }

    /// Normalization factor so the constellation has unit average energy.
    fn amp(&self) -> f64 {
        match self {
            Modulation::Qpsk => 1.0 / 2f64.sqrt(),
            Modulation::Qam16 => 1.0 / 10f64.sqrt(),
            Modulation::Qam64 => 1.0 / 42f64.sqrt(),
            Modulation::Qam256 => 1.0 / 170f64.sqrt(),
        }
    }

    /// Unnormalized PAM level for one axis. `bits` holds the axis bits in
    /// TS 38.211 order (most significant is the sign bit).
    fn pam_level(bits: &[u8]) -> f64 {
        // TS 38.211 nesting: (1-2b0)*(2^(m-1) - (1-2b1)*(2^(m-2) - ...))
        let s = |b: u8| 1.0 - 2.0 * b as f64;
        match bits.len() {
            1 => s(bits[0]),
            2 => s(bits[0]) * (2.0 - s(bits[1])),
            3 => s(bits[0]) * (4.0 - s(bits[1]) * (2.0 - s(bits[2]))),
            4 => s(bits[0]) * (8.0 - s(bits[1]) * (4.0 - s(bits[2]) * (2.0 - s(bits[3])))),
            _ => unreachable!(),
        }
    }

    /// Map one symbol worth of bits (length `bits_per_symbol`).
    pub fn map_symbol(&self, bits: &[u8]) -> Complex64 {
        debug_assert_eq!(bits.len(), self.bits_per_symbol());
        let m = self.bits_per_axis();
        let mut ib = [0u8; 4];
        let mut qb = [0u8; 4];
        for k in 0..m {
            ib[k] = bits[2 * k];
            qb[k] = bits[2 * k + 1];
        }
        Complex64::new(Self::pam_level(&ib[..m]), Self::pam_level(&qb[..m])) * self.amp()
    }

    /// Map a bit stream; length must be a multiple of `bits_per_symbol`.
    pub fn map_bits(&self, bits: &[u8]) -> Result<Vec<Complex64>> {
        let bps = self.bits_per_symbol();
        if bits.len() % bps != 0 {
            return Err(SimError::InvalidArgument(format!(
                "bit count {} not a multiple of {}",
                bits.len(),
                bps
            )));
        }
        Ok(bits.chunks(bps).map(|c| self.map_symbol(c)).collect())
    }

    /// All PAM levels of one axis with their Gray labels, normalized.
    /// Index = integer formed by the axis bits (b_msb first).
    fn axis_table(&self) -> Vec<f64> {
        let m = self.bits_per_axis();
        let amp = self.amp();
        (0..1usize << m)
            .map(|v| {
                let mut bits = [0u8; 4];
                for k in 0..m {
                    bits[k] = ((v >> (m - 1 - k)) & 1) as u8;
                }
                Self::pam_level(&bits[..m]) * amp
            })
            .collect()
    }

    /// Max-log LLRs for a block of received symbols.
    ///
    /// `sinr` is the per-symbol post-equalization SINR (linear) used as the
    /// inverse noise variance of a unit-energy constellation. Positive LLR
    /// means bit 0 is more likely. Output is clipped to `±LLR_CLIP`.
    pub fn demap_llr(&self, rx: &[Complex64], sinr: &[f64], out: &mut Vec<f32>) {
        debug_assert_eq!(rx.len(), sinr.len());
        let m = self.bits_per_axis();
        let table = self.axis_table();
        out.reserve(rx.len() * self.bits_per_symbol());
        let mut min0 = [0.0f64; 4];
        let mut min1 = [0.0f64; 4];
        for (y, &g) in rx.iter().zip(sinr) {
            let g = g.max(0.0);
            for axis in 0..2 {
                let yv = if axis == 0 { y.re } else { y.im };
                min0[..m].fill(f64::INFINITY);
                min1[..m].fill(f64::INFINITY);
                for (v, &lvl) in table.iter().enumerate() {
                    let d = yv - lvl;
                    let d2 = d * d;
                    for k in 0..m {
                        if (v >> (m - 1 - k)) & 1 == 0 {
                            if d2 < min0[k] {
                                min0[k] = d2;
                            }
                        } else if d2 < min1[k] {
                            min1[k] = d2;
                        }
                    }
                }
                for k in 0..m {
                    let llr = g * (min1[k] - min0[k]);
                    let llr = llr.clamp(-LLR_CLIP, LLR_CLIP);
                    out.push(llr as f32);
                }
                // interleave: axis-0 bit k sits at position 2k, axis-1 at 2k+1
                if axis == 0 {
                    continue;
                }
                let n = out.len();
                // swap into interleaved order: currently [i0..im, q0..qm]
                let start = n - 2 * m;
                let mut tmp = [0.0f32; 8];
                tmp[..2 * m].copy_from_slice(&out[start..]);
                for k in 0..m {
                    out[start + 2 * k] = tmp[k];
                    out[start + 2 * k + 1] = tmp[m + k];
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    const ALL: [Modulation; 4] = [
        Modulation::Qpsk,
        Modulation::Qam16,
        Modulation::Qam64,
        Modulation::Qam256,
    ];

    #[test]
    fn qpsk_reference_points() {
        let s = 1.0 / 2f64.sqrt();
        assert!((Modulation::Qpsk.map_symbol(&[0, 0]) - Complex64::new(s, s)).norm() < 1e-15);
        assert!((Modulation::Qpsk.map_symbol(&[1, 1]) - Complex64::new(-s, -s)).norm() < 1e-15);
    }

    #[test]
    fn unit_average_energy() {
        for m in ALL {
            let bps = m.bits_per_symbol();
            let mut e = 0.0;
            let n = 1usize << bps;
            for v in 0..n {
                let bits: Vec<u8> = (0..bps).map(|k| ((v >> (bps - 1 - k)) & 1) as u8).collect();
                e += m.map_symbol(&bits).norm_sqr();
            }
            assert!((e / n as f64 - 1.0).abs() < 1e-12, "{m:?}");
        }
    }

    #[test]
    fn gray_neighbors_differ_in_one_bit() {
        for m in ALL {
            let table = m.axis_table();
            let mb = m.bits_per_axis();
            // sort labels by level, then check adjacent Hamming distance
            let mut idx: Vec<usize> = (0..table.len()).collect();
            idx.sort_by(|&a, &b| table[a].total_cmp(&table[b]));
            for w in idx.windows(2) {
                let d = (w[0] ^ w[1]).count_ones();
                assert_eq!(d, 1, "{m:?}: labels {:04b} {:04b} ({mb} bits)", w[0], w[1]);
            }
        }
    }

    #[test]
    fn hard_decision_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for m in ALL {
            let bits: Vec<u8> = (0..m.bits_per_symbol() * 500).map(|_| rng.gen_range(0..2)).collect();
            let syms = m.map_bits(&bits).unwrap();
            let sinr = vec![1e4; syms.len()];
            let mut llr = Vec::new();
            m.demap_llr(&syms, &sinr, &mut llr);
            let hard: Vec<u8> = llr.iter().map(|&l| if l < 0.0 { 1 } else { 0 }).collect();
            assert_eq!(hard, bits, "{m:?}");
        }
    }

    #[test]
    fn llr_scales_linearly_with_sinr_for_qpsk() {
        // QPSK max-log LLR is exactly 4 * sinr * y_axis / sqrt(2)-normalized
        let y = [Complex64::new(0.3, -0.2)];
        let mut l1 = Vec::new();
        let mut l2 = Vec::new();
        Modulation::Qpsk.demap_llr(&y, &[2.0], &mut l1);
        Modulation::Qpsk.demap_llr(&y, &[4.0], &mut l2);
        for (a, b) in l1.iter().zip(&l2) {
            assert!((b / a - 2.0).abs() < 1e-6);
        }
        // sign: positive re/im => bit 0 on the respective position
        assert!(l1[0] > 0.0 && l1[1] < 0.0);
    }

    /// Monte-Carlo QPSK BER against the closed form Q(sqrt(Es/N0)).
    #[test]
    fn qpsk_awgn_ber_matches_q_function() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let es_n0_db = 4.0;
        let g = crate::math::db_to_lin(es_n0_db);
        let sigma = (1.0 / (2.0 * g)).sqrt(); // per-axis noise std
        let n = 200_000usize;
        let mut bit_errs = 0u64;
        let m = Modulation::Qpsk;
        let bits: Vec<u8> = (0..2 * n).map(|_| rng.gen_range(0..2)).collect();
        let syms = m.map_bits(&bits).unwrap();
        let rx: Vec<Complex64> = syms
            .iter()
            .map(|s| {
                let nr: f64 = rand_distr::StandardNormal.sample(&mut rng);
                let ni: f64 = rand_distr::StandardNormal.sample(&mut rng);
                s + Complex64::new(nr * sigma, ni * sigma)
            })
            .collect();
        let sinr = vec![g; n];
        let mut llr = Vec::new();
        m.demap_llr(&rx, &sinr, &mut llr);
        for (l, &b) in llr.iter().zip(&bits) {
            let hard = if *l < 0.0 { 1u8 } else { 0u8 };
            if hard != b {
                bit_errs += 1;
            }
        }
        let ber = bit_errs as f64 / (2 * n) as f64;
        // Q(sqrt(g)) via erfc: Q(x) = 0.5 erfc(x/sqrt(2))
        let x = g.sqrt();
        let q = 0.5 * erfc(x / 2f64.sqrt());
        let tol = 4.0 * (q / (2 * n) as f64).sqrt(); // ~4 sigma
        assert!(
            (ber - q).abs() < tol,
            "ber {ber:.5} vs theory {q:.5} (tol {tol:.5})"
        );
    }

    /// Abramowitz & Stegun 7.1.26, |error| < 1.5e-7.
    fn erfc(x: f64) -> f64 {
        let t = 1.0 / (1.0 + 0.3275911 * x.abs());
        let poly = t
            * (0.254829592
                + t * (-0.284496736 + t * (1.421413741 + t * (-1.453152027 + t * 1.061405429))));
        let v = poly * (-x * x).exp();
        if x >= 0.0 {
            v
        } else {
            2.0 - v
        }
    }
}
