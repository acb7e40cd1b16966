//! Per-subcarrier linear MMSE equalization with per-layer post-SINR.

use super::fading::Mat2;
use crate::error::{Result, SimError};
use crate::waveform::ResourceGrid;

/// Equalizer output: one grid per transmitted layer plus the matching
/// per-RE post-equalization SINR (`sinr[layer][symbol * n_sc + sc]`,
/// linear).
#[derive(Debug, Clone)]
pub struct EqualizedSlot {
    pub layers: Vec<ResourceGrid>,
    pub sinr: Vec<Vec<f64>>,
}

/// Upper clamp for reported SINR (keeps downstream LLRs finite when the
/// noise variance is exactly zero).
const SINR_MAX: f64 = 1e15;

/// Linear MMSE equalization of a two-port received slot.
///
/// `h[symbol][subcarrier]` is the genie effective channel for unit-power
/// layer symbols: for rank 2 the full 2x2 matrix (any transmit power
/// allocation folded in by the caller), for rank 1 only its first column
/// is used. The filter is `W = (H^H H + noise_var I)^-1 H^H`, de-biased per
/// layer so a noiseless invertible channel returns the layers exactly;
/// `SINR_i = 1 / (noise_var [(H^H H + noise_var I)^-1]_ii) - 1`.
///
/// A relative ridge keeps the solve finite even at `noise_var = 0` on a
/// singular channel.
pub fn mmse_equalize(
    rx: &[ResourceGrid; 2],
    h: &[Vec<Mat2>],
    noise_var: f64,
    rank: usize,
) -> Result<EqualizedSlot> {
    if rank != 1 && rank != 2 {
        return Err(SimError::InvalidArgument("rank must be 1 or 2".into()));
    }
    if noise_var < 0.0 || !noise_var.is_finite() {
        return Err(SimError::InvalidArgument("noise variance must be >= 0".into()));
    }
    let n_symbols = rx[0].n_symbols;
    let n_sc = rx[0].n_subcarriers;
    if rx[1].n_symbols != n_symbols || rx[1].n_subcarriers != n_sc {
        return Err(SimError::InvalidArgument(
            "receive-port grids must have equal dimensions".into(),
        ));
    }
    if h.len() != n_symbols || h.iter().any(|row| row.len() != n_sc) {
        return Err(SimError::InvalidArgument(
            "channel response does not match the grid dimensions".into(),
        ));
    }

    let mut layers = vec![ResourceGrid::new(n_symbols, n_sc); rank];
    let mut sinr = vec![vec![0.0; n_symbols * n_sc]; rank];

    for s in 0..n_symbols {
        for k in 0..n_sc {
            let m = &h[s][k];
            let y = [rx[0].get(s, k), rx[1].get(s, k)];
            match rank {
                1 => {
                    let col = [m[0][0], m[1][0]];
                    let e = col[0].norm_sqr() + col[1].norm_sqr();
                    let reg = noise_var + 1e-12 * e + f64::MIN_POSITIVE;
                    // Unbiased MMSE on a vector channel is MRC.
                    let num = col[0].conj() * y[0] + col[1].conj() * y[1];
                    layers[0].set(s, k, num / e.max(f64::MIN_POSITIVE));
                    sinr[0][s * n_sc + k] = (e / reg).min(SINR_MAX);
                }
                _ => {
                    let ea = m[0][0].norm_sqr() + m[1][0].norm_sqr();
                    let ed = m[0][1].norm_sqr() + m[1][1].norm_sqr();
                    let reg =
                        noise_var + 1e-12 * (ea + ed) + f64::MIN_POSITIVE;
                    let a = ea + reg;
                    let d = ed + reg;
                    let b = m[0][0].conj() * m[0][1] + m[1][0].conj() * m[1][1];
                    let det = a * d - b.norm_sqr();
                    // `A = H^H H + reg I` is Hermitian positive definite, so
                    // det >= reg^2 > 0.
                    let inv00 = d / det;
                    let inv11 = a / det;
                    let hh_y = [
                        m[0][0].conj() * y[0] + m[1][0].conj() * y[1],
                        m[0][1].conj() * y[0] + m[1][1].conj() * y[1],
                    ];
                    let x0 = (hh_y[0] * d - hh_y[1] * b) / det;
                    let x1 = (hh_y[1] * a - hh_y[0] * b.conj()) / det;
                    let g0 = (1.0 - reg * inv00).max(1e-30);
                    let g1 = (1.0 - reg * inv11).max(1e-30);
                    layers[0].set(s, k, x0 / g0);
                    layers[1].set(s, k, x1 / g1);
                    sinr[0][s * n_sc + k] =
                        (g0 / (reg * inv00)).min(SINR_MAX).max(0.0);
                    sinr[1][s * n_sc + k] =
                        (g1 / (reg * inv11)).min(SINR_MAX).max(0.0);
                }
            }
        }
    }

    Ok(EqualizedSlot { layers, sinr })
}
