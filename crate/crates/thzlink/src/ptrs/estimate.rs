//! PN estimation from PTRS observations and the matching compensators.

use num_complex::Complex64;
use std::f64::consts::TAU;

use super::pattern::TdPattern;
use crate::error::{Result, SimError};
use crate::math::{fft_unitary, ifft_unitary, solve_ls_ridge};
use crate::waveform::bin_for_subcarrier;

/// Common phase error from matched pilot correlation:
/// `arg( sum rx * conj(tx) )`.
pub fn estimate_cpe(rx: &[Complex64], tx: &[Complex64]) -> Result<f64> {
    if rx.len() != tx.len() || rx.is_empty() {
        return Err(SimError::InvalidArgument(
            "pilot sequences must be non-empty and equal length".into(),
        ));
    }
    let energy: f64 = tx.iter().map(|p| p.norm_sqr()).sum();
    if energy <= 0.0 {
        return Err(SimError::EstimationFailed(
            "reference pilots carry no energy".into(),
        ));
    }
    let acc: Complex64 =
        rx.iter().zip(tx.iter()).map(|(r, t)| r * t.conj()).sum();
    if acc.norm_sqr() == 0.0 {
        return Err(SimError::EstimationFailed(
            "received pilots carry no energy".into(),
        ));
    }
    Ok(acc.arg())
}

/// Derotate a sequence (grid row, layer, ...) by a constant phase.
pub fn compensate_cpe(row: &mut [Complex64], phase: f64) {
    let rot = Complex64::from_polar(1.0, -phase);
    for v in row.iter_mut() {
        *v *= rot;
    }
}

/// Estimated frequency-domain ICI filter: complex taps for subcarrier
/// offsets `-q ..= +q` around DC (`taps[q]` is the DC term).
#[derive(Debug, Clone)]
pub struct IciFilterEstimate {
    pub taps: Vec<Complex64>,
}

impl IciFilterEstimate {
    pub fn q(&self) -> usize {
        (self.taps.len() - 1) / 2
    }

    pub fn dc(&self) -> Complex64 {
        self.taps[self.q()]
    }

    /// A pure CPE filter (single DC tap of the given phase).
    pub fn from_cpe(phase: f64) -> Self {
        Self { taps: vec![Complex64::from_polar(1.0, phase)] }
    }
}

/// Least-squares fit of the convolution model
/// `rx[k] = sum_{o=-q..q} c_o tx[k-o]`
/// over interior positions of a contiguous pilot block (rows where the
/// full 2q+1 window stays inside the block).
///
/// A small relative ridge (`1e-10 x trace(A^H A)/(2q+1)`) keeps the normal
/// equations well-posed without disturbing exact recovery beyond 1e-9.
pub fn estimate_ici(
    rx: &[Complex64],
    tx: &[Complex64],
    q: usize,
) -> Result<IciFilterEstimate> {
    let n = rx.len();
    if tx.len() != n {
        return Err(SimError::InvalidArgument(
            "pilot sequences must be equal length".into(),
        ));
    }
    let cols = 2 * q + 1;
    if n < 2 * q + cols {
        return Err(SimError::InvalidArgument(format!(
            "block of {n} pilots is too short for a {cols}-tap ICI fit"
        )));
    }
    let rows = n - 2 * q;
    let mut a = Vec::with_capacity(rows * cols);
    let mut b = Vec::with_capacity(rows);
    for k in q..n - q {
        for j in 0..cols {
            // Column j models offset o = j - q; its regressor is tx[k - o].
            a.push(tx[k + q - j]);
        }
        b.push(rx[k]);
    }
    let trace: f64 = a.iter().map(|v| v.norm_sqr()).sum();
    let lambda = 1e-10 * trace / cols as f64;
    let taps = solve_ls_ridge(&a, &b, rows, cols, lambda)
        .map_err(|_| SimError::EstimationFailed("rank-deficient ICI system".into()))?;
    Ok(IciFilterEstimate { taps })
}

/// Compensate one OFDM grid row for the estimated ICI filter.
///
/// The filter taps are the low-order DFT coefficients of the multiplicative
/// PN waveform `u[n]`; compensation reconstructs the band-limited `u` over
/// the FFT body and derotates the time samples by its conjugate phase
/// (`conj(u)/|u|`, amplitude-preserving), then returns to the frequency
/// domain. With a single DC tap this reduces exactly to CPE derotation.
/// Guard bins are taken as empty, which discards ICI leakage past the
/// allocation edge — acceptable for the in-band data REs.
///
/// Returns `Ok(false)` (compensation skipped) when the filter carries
/// almost no energy.
pub fn compensate_ici(
    row: &mut [Complex64],
    ici: &IciFilterEstimate,
    fft_size: usize,
) -> Result<bool> {
    let active = row.len();
    if active == 0 || active > fft_size {
        return Err(SimError::InvalidArgument(
            "row must be non-empty and fit the FFT".into(),
        ));
    }
    let energy: f64 = ici.taps.iter().map(|c| c.norm_sqr()).sum();
    if energy < 1e-12 {
        return Ok(false);
    }
    let n = fft_size;
    let q = ici.q() as isize;
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    for (s, &v) in row.iter().enumerate() {
        buf[bin_for_subcarrier(s, active, n)] = v;
    }
    ifft_unitary(&mut buf);
    for (i, sample) in buf.iter_mut().enumerate() {
        let mut u = Complex64::new(0.0, 0.0);
        for (j, &c) in ici.taps.iter().enumerate() {
            let o = (j as isize - q) as f64;
            u += c * Complex64::from_polar(1.0, TAU * o * i as f64 / n as f64);
        }
        let mag = u.norm();
        if mag > 1e-15 {
            *sample *= u.conj() / mag;
        }
    }
    fft_unitary(&mut buf);
    for (s, v) in row.iter_mut().enumerate() {
        *v = buf[bin_for_subcarrier(s, active, n)];
    }
    Ok(true)
}

/// Track intra-symbol PN from SC-FDMA pilot groups.
///
/// `rx`/`tx` hold the pilot sub-symbols in the pattern's flattened group
/// order. Per group, the phase comes from matched correlation; phases are
/// unwrapped group-to-group, linearly interpolated between group centers,
/// and held constant beyond the outermost centers. With a single group the
/// result degenerates to a constant (CPE) estimate. Returns one phase per
/// sub-symbol position (`pattern.m` values).
pub fn track_pn_td(
    rx: &[Complex64],
    tx: &[Complex64],
    pattern: &TdPattern,
) -> Result<Vec<f64>> {
    let total = pattern.pilots_per_symbol();
    if rx.len() != total || tx.len() != total {
        return Err(SimError::InvalidArgument(format!(
            "expected {total} pilot sub-symbols"
        )));
    }
    if pattern.groups.is_empty() {
        return Err(SimError::InvalidArgument("no pilot groups".into()));
    }

    let mut centers = Vec::with_capacity(pattern.groups.len());
    let mut phases = Vec::with_capacity(pattern.groups.len());
    let mut cursor = 0usize;
    for g in &pattern.groups {
        let len = g.len();
        let acc: Complex64 = (0..len)
            .map(|i| rx[cursor + i] * tx[cursor + i].conj())
            .sum();
        if acc.norm_sqr() == 0.0 {
            return Err(SimError::EstimationFailed(
                "pilot group carries no energy".into(),
            ));
        }
        let mut theta = acc.arg();
        // Unwrap relative to the previous group so interpolation never
        // jumps across the +-pi branch cut.
        if let Some(&prev) = phases.last() {
            while theta - prev > std::f64::consts::PI {
                theta -= TAU;
            }
            while theta - prev < -std::f64::consts::PI {
                theta += TAU;
            }
        }
        phases.push(theta);
        centers.push(g.iter().sum::<usize>() as f64 / len as f64);
        cursor += len;
    }

    let m = pattern.m;
    let mut out = Vec::with_capacity(m);
    if centers.len() == 1 {
        out.resize(m, phases[0]);
        return Ok(out);
    }
    for n in 0..m {
        let x = n as f64;
        let theta = if x <= centers[0] {
            phases[0]
        } else if x >= *centers.last().unwrap() {
            *phases.last().unwrap()
        } else {
            let idx = centers.iter().rposition(|&c| c <= x).unwrap();
            let (c0, c1) = (centers[idx], centers[idx + 1]);
            let t = (x - c0) / (c1 - c0);
            phases[idx] * (1.0 - t) + phases[idx + 1] * t
        };
        out.push(theta);
    }
    Ok(out)
}

/// Derotate a sub-symbol stream by a per-position phase sequence.
pub fn compensate_td(subsymbols: &mut [Complex64], phases: &[f64]) {
    assert_eq!(subsymbols.len(), phases.len());
    for (v, &p) in subsymbols.iter_mut().zip(phases.iter()) {
        *v *= Complex64::from_polar(1.0, -p);
    }
}
