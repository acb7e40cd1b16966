//! Waveform synthesis and recovery: CP-OFDM and DFT-s-OFDM (SC-FDMA).
//!
//! Subcarrier mapping is centered: subcarrier index `s` in `[0, active)`
//! occupies FFT bin `(s - active/2) mod fft_size`, so the allocation
//! straddles DC and the DC bin itself is used. All transforms are unitary,
//! which makes the energy of a resource grid equal to the energy of the
//! CP-stripped time-domain symbol bodies.

mod ofdm;
mod papr;
mod scfdma;

pub use ofdm::{
    ofdm_demodulate, ofdm_demodulate_oversampled, ofdm_modulate, ofdm_modulate_oversampled,
};
pub use papr::{papr_ccdf, PaprAccumulator};
pub use scfdma::{
    scfdma_demodulate, scfdma_despread, scfdma_modulate, scfdma_modulate_oversampled,
    scfdma_spread, ScFdmaFrame,
};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::numerology::{Numerology, SYMBOLS_PER_SLOT};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Waveform {
    Ofdm,
    ScFdma,
}

impl Waveform {
    pub fn name(&self) -> &'static str {
        match self {
            Waveform::Ofdm => "ofdm",
            Waveform::ScFdma => "sc-fdma",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ofdm" | "cp-ofdm" => Ok(Waveform::Ofdm),
            "sc-fdma" | "scfdma" | "dft-s-ofdm" => Ok(Waveform::ScFdma),
            other => Err(SimError::InvalidConfig(format!("unknown waveform '{other}'"))),
        }
    }
}

/// FFT bin carrying subcarrier `s` of a centered `active`-wide allocation.
#[inline]
pub fn bin_for_subcarrier(s: usize, active: usize, fft: usize) -> usize {
    debug_assert!(s < active);
    (s + fft - active / 2) % fft
}

/// One slot worth of frequency-domain resource elements for a single layer.
/// Row-major: symbol index first, then subcarrier.
#[derive(Debug, Clone, PartialEq)]
pub struct ResourceGrid {
    pub n_symbols: usize,
    pub n_subcarriers: usize,
    re: Vec<Complex64>,
}

impl ResourceGrid {
    pub fn new(n_symbols: usize, n_subcarriers: usize) -> Self {
        ResourceGrid {
            n_symbols,
            n_subcarriers,
            re: vec![Complex64::default(); n_symbols * n_subcarriers],
        }
    }

    /// Grid sized for one slot of the given numerology.
    pub fn for_slot(num: &Numerology) -> Self {
        Self::new(SYMBOLS_PER_SLOT, num.active_subcarriers())
    }

    #[inline]
    pub fn get(&self, sym: usize, sc: usize) -> Complex64 {
        self.re[sym * self.n_subcarriers + sc]
    }

    #[inline]
    pub fn set(&mut self, sym: usize, sc: usize, v: Complex64) {
        self.re[sym * self.n_subcarriers + sc] = v;
    }

    pub fn symbol(&self, sym: usize) -> &[Complex64] {
        &self.re[sym * self.n_subcarriers..(sym + 1) * self.n_subcarriers]
    }

    pub fn symbol_mut(&mut self, sym: usize) -> &mut [Complex64] {
        &mut self.re[sym * self.n_subcarriers..(sym + 1) * self.n_subcarriers]
    }

    pub fn energy(&self) -> f64 {
        self.re.iter().map(|v| v.norm_sqr()).sum()
    }
}

/// Complex baseband samples with their sample rate.
#[derive(Debug, Clone)]
pub struct TimeSignal {
    pub samples: Vec<Complex64>,
    pub sample_rate_hz: f64,
}

impl TimeSignal {
    pub fn mean_power(&self) -> f64 {
        crate::math::mean_power(&self.samples)
    }
}

/// Synthesize one CP-OFDM symbol from `fft`-sized spectrum bins already in
/// DFT order. `os` is the integer oversampling factor; the CP scales with it.
/// Output power matches the critically sampled symbol for any `os`.
pub(crate) fn symbol_to_time(
    bins: &[Complex64],
    fft: usize,
    cp: usize,
    os: usize,
    out: &mut Vec<Complex64>,
) {
    debug_assert_eq!(bins.len(), fft);
    let n = fft * os;
    let mut buf = vec![Complex64::default(); n];
    let half = fft / 2;
    // move DFT-ordered bins of the small grid into the oversampled grid,
    // keeping positive frequencies at the front and negatives at the tail
    buf[..half.max(1)].copy_from_slice(&bins[..half.max(1)]);
    if half > 0 {
        buf[n - half..].copy_from_slice(&bins[fft - half..]);
    }
    crate::math::ifft_unitary(&mut buf);
    let scale = (os as f64).sqrt();
    if os > 1 {
        for v in buf.iter_mut() {
            *v *= scale;
        }
    }
    let cp_os = cp * os;
    out.extend_from_slice(&buf[n - cp_os..]);
    out.extend_from_slice(&buf);
}

/// Recover the `fft` spectrum bins of symbol `sym` from a (possibly
/// oversampled) time signal. Inverse of [`symbol_to_time`].
pub(crate) fn time_to_symbol(
    samples: &[Complex64],
    fft: usize,
    cp: usize,
    os: usize,
    sym: usize,
) -> Vec<Complex64> {
    let n = fft * os;
    let step = (fft + cp) * os;
    let start = sym * step + cp * os;
    let mut buf = samples[start..start + n].to_vec();
    crate::math::fft_unitary(&mut buf);
    let scale = 1.0 / (os as f64).sqrt();
    let half = fft / 2;
    let mut bins = vec![Complex64::default(); fft];
    bins[..half.max(1)].copy_from_slice(&buf[..half.max(1)]);
    if half > 0 {
        bins[fft - half..].copy_from_slice(&buf[n - half..]);
    }
    if os > 1 {
        for v in bins.iter_mut() {
            *v *= scale;
        }
    }
    bins
}
