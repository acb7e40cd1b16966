//! DFT-s-OFDM (SC-FDMA) modulation and demodulation.
//!
//! Each OFDM symbol period carries `M = active_subcarriers` sub-symbols.
//! The caller assembles the sub-symbol stream (data plus any time-domain
//! PTRS groups) per symbol; this module applies the length-`M` DFT spread,
//! maps the result onto the active subcarriers and reuses the CP-OFDM
//! synthesis chain. The inverse path ends with a length-`M` IDFT, after
//! which per-sub-symbol processing (PN tracking, demapping) takes place.

use num_complex::Complex64;

use crate::error::{Result, SimError};
use crate::math::{fft_unitary, ifft_unitary};
use crate::numerology::Numerology;

use super::{ofdm_demodulate, ofdm_modulate_oversampled, ResourceGrid, TimeSignal};

/// One slot of SC-FDMA sub-symbols, row-major `n_symbols x m`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScFdmaFrame {
    pub n_symbols: usize,
    pub m: usize,
    subsymbols: Vec<Complex64>,
}

impl ScFdmaFrame {
    pub fn new(n_symbols: usize, m: usize) -> Self {
        ScFdmaFrame {
            n_symbols,
            m,
            subsymbols: vec![Complex64::default(); n_symbols * m],
        }
    }

    pub fn for_slot(num: &Numerology) -> Self {
        Self::new(crate::numerology::SYMBOLS_PER_SLOT, num.active_subcarriers())
    }

    #[inline]
    pub fn get(&self, sym: usize, k: usize) -> Complex64 {
        self.subsymbols[sym * self.m + k]
    }

    #[inline]
    pub fn set(&mut self, sym: usize, k: usize, v: Complex64) {
        self.subsymbols[sym * self.m + k] = v;
    }

    pub fn symbol(&self, sym: usize) -> &[Complex64] {
        &self.subsymbols[sym * self.m..(sym + 1) * self.m]
    }

    pub fn symbol_mut(&mut self, sym: usize) -> &mut [Complex64] {
        &mut self.subsymbols[sym * self.m..(sym + 1) * self.m]
    }
}

/// DFT-spread a sub-symbol frame into a resource grid.
pub fn scfdma_spread(frame: &ScFdmaFrame, num: &Numerology) -> Result<ResourceGrid> {
    if frame.m != num.active_subcarriers() {
        return Err(SimError::InvalidArgument(format!(
            "frame has M={}, numerology expects {}",
            frame.m,
            num.active_subcarriers()
        )));
    }
    let mut grid = ResourceGrid::new(frame.n_symbols, frame.m);
    for sym in 0..frame.n_symbols {
        let row = grid.symbol_mut(sym);
        row.copy_from_slice(frame.symbol(sym));
        fft_unitary(row);
    }
    Ok(grid)
}

/// Undo the DFT spread of an equalized resource grid.
pub fn scfdma_despread(grid: &ResourceGrid) -> ScFdmaFrame {
    let mut frame = ScFdmaFrame::new(grid.n_symbols, grid.n_subcarriers);
    for sym in 0..grid.n_symbols {
        let row = frame.symbol_mut(sym);
        row.copy_from_slice(grid.symbol(sym));
        ifft_unitary(row);
    }
    frame
}

/// SC-FDMA modulation (critically sampled).
pub fn scfdma_modulate(frame: &ScFdmaFrame, num: &Numerology) -> Result<TimeSignal> {
    scfdma_modulate_oversampled(frame, num, 1)
}

/// SC-FDMA modulation with integer oversampling, for PA analyses.
pub fn scfdma_modulate_oversampled(
    frame: &ScFdmaFrame,
    num: &Numerology,
    os: usize,
) -> Result<TimeSignal> {
    let grid = scfdma_spread(frame, num)?;
    ofdm_modulate_oversampled(&grid, num, os)
}

/// Demodulate a critically sampled SC-FDMA signal back to sub-symbols.
pub fn scfdma_demodulate(sig: &TimeSignal, num: &Numerology, n_symbols: usize) -> Result<ScFdmaFrame> {
    let grid = ofdm_demodulate(sig, num, n_symbols)?;
    Ok(scfdma_despread(&grid))
}
