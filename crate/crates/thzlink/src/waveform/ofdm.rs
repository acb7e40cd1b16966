//! CP-OFDM modulation and demodulation.

use num_complex::Complex64;

use crate::error::{Result, SimError};
use crate::numerology::Numerology;

use super::{bin_for_subcarrier, symbol_to_time, time_to_symbol, ResourceGrid, TimeSignal};

fn check_grid(grid: &ResourceGrid, num: &Numerology) -> Result<()> {
    if grid.n_subcarriers != num.active_subcarriers() {
        return Err(SimError::InvalidArgument(format!(
            "grid has {} subcarriers, numerology expects {}",
            grid.n_subcarriers,
            num.active_subcarriers()
        )));
    }
    Ok(())
}

/// Modulate a resource grid into CP-OFDM time samples (critically sampled).
pub fn ofdm_modulate(grid: &ResourceGrid, num: &Numerology) -> Result<TimeSignal> {
    ofdm_modulate_oversampled(grid, num, 1)
}

/// CP-OFDM modulation with an integer oversampling factor. The oversampled
/// output represents the same analog signal sampled `os` times faster (same
/// power); it exists for spectral regrowth and PA analyses.
pub fn ofdm_modulate_oversampled(
    grid: &ResourceGrid,
    num: &Numerology,
    os: usize,
) -> Result<TimeSignal> {
    check_grid(grid, num)?;
    if os == 0 {
        return Err(SimError::InvalidArgument("oversampling factor must be >= 1".into()));
    }
    let fft = num.fft_size;
    let active = num.active_subcarriers();
    let mut out = Vec::with_capacity(grid.n_symbols * num.samples_per_symbol() * os);
    let mut bins = vec![Complex64::default(); fft];
    for sym in 0..grid.n_symbols {
        bins.iter_mut().for_each(|v| *v = Complex64::default());
        let res = grid.symbol(sym);
        for (s, &v) in res.iter().enumerate() {
            bins[bin_for_subcarrier(s, active, fft)] = v;
        }
        symbol_to_time(&bins, fft, num.cp_samples, os, &mut out);
    }
    Ok(TimeSignal {
        samples: out,
        sample_rate_hz: num.sample_rate_hz() * os as f64,
    })
}

/// Demodulate `n_symbols` CP-OFDM symbols back into a resource grid.
/// The signal may be an oversampled modulator output; `os` must match.
pub fn ofdm_demodulate_oversampled(
    sig: &TimeSignal,
    num: &Numerology,
    n_symbols: usize,
    os: usize,
) -> Result<ResourceGrid> {
    let need = n_symbols * num.samples_per_symbol() * os;
    if sig.samples.len() < need {
        return Err(SimError::InvalidArgument(format!(
            "signal too short: {} < {need} samples",
            sig.samples.len()
        )));
    }
    let fft = num.fft_size;
    let active = num.active_subcarriers();
    let mut grid = ResourceGrid::new(n_symbols, active);
    for sym in 0..n_symbols {
        let bins = time_to_symbol(&sig.samples, fft, num.cp_samples, os, sym);
        let row = grid.symbol_mut(sym);
        for (s, slot) in row.iter_mut().enumerate() {
            *slot = bins[bin_for_subcarrier(s, active, fft)];
        }
    }
    Ok(grid)
}

/// Demodulate a critically sampled CP-OFDM signal.
pub fn ofdm_demodulate(sig: &TimeSignal, num: &Numerology, n_symbols: usize) -> Result<ResourceGrid> {
    ofdm_demodulate_oversampled(sig, num, n_symbols, 1)
}
