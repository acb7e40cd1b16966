//! Shared numerics: unitary FFTs, Welch spectral estimation, dB helpers,
//! deterministic seed derivation and a small dense complex solver.

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::Arc;

use crate::error::{Result, SimError};

// ─── FFT plumbing ───────────────────────────────────────────────────────────

thread_local! {
    static FFT_CACHE: RefCell<HashMap<(usize, bool), Arc<dyn Fft<f64>>>> =
        RefCell::new(HashMap::new());
}

fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    FFT_CACHE.with(|c| {
        c.borrow_mut()
            .entry((n, inverse))
            .or_insert_with(|| {
                let mut planner = FftPlanner::new();
                if inverse {
                    planner.plan_fft_inverse(n)
                } else {
                    planner.plan_fft_forward(n)
                }
            })
            .clone()
    })
}

/// In-place forward DFT without normalization.
pub fn fft_raw(buf: &mut [Complex64]) {
    plan(buf.len(), false).process(buf);
}

/// In-place inverse DFT without normalization (no `1/N`).
pub fn ifft_raw(buf: &mut [Complex64]) {
    plan(buf.len(), true).process(buf);
}

/// In-place unitary forward DFT (`1/sqrt(N)` scaling).
pub fn fft_unitary(buf: &mut [Complex64]) {
    fft_raw(buf);
    let s = 1.0 / (buf.len() as f64).sqrt();
    for v in buf.iter_mut() {
        *v *= s;
    }
}

/// In-place unitary inverse DFT (`1/sqrt(N)` scaling).
pub fn ifft_unitary(buf: &mut [Complex64]) {
    ifft_raw(buf);
    let s = 1.0 / (buf.len() as f64).sqrt();
    for v in buf.iter_mut() {
        *v *= s;
    }
}

/// Smallest power of two that is `>= n`.
pub fn next_pow2(n: usize) -> usize {
    n.next_power_of_two()
}

// ─── dB helpers ─────────────────────────────────────────────────────────────

pub fn db_to_lin(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn lin_to_db(lin: f64) -> f64 {
    10.0 * lin.log10()
}

/// Mean of `|x|^2` over a slice.
pub fn mean_power(x: &[Complex64]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    x.iter().map(|v| v.norm_sqr()).sum::<f64>() / x.len() as f64
}

// ─── Welch periodogram ──────────────────────────────────────────────────────

/// Two-sided Welch power spectral density estimate.
///
/// Hann window, 50% overlap. Output element `k` is the PSD at frequency
/// `k * fs / seg_len` for `k < seg_len/2` and `(k - seg_len) * fs / seg_len`
/// above, i.e. the natural DFT ordering. Units: input power per Hz, so a
/// white sequence of variance `s2` estimates to `s2 / fs` in every bin.
pub fn welch_psd(x: &[Complex64], seg_len: usize, fs: f64) -> Result<Vec<f64>> {
    if seg_len == 0 || x.len() < seg_len {
        return Err(SimError::InvalidArgument(format!(
            "welch_psd: signal length {} shorter than segment {}",
            x.len(),
            seg_len
        )));
    }
    let hop = seg_len / 2;
    let window: Vec<f64> = (0..seg_len)
        .map(|i| {
            let w = std::f64::consts::PI * i as f64 / seg_len as f64;
            let s = w.sin();
            s * s
        })
        .collect();
    let win_energy: f64 = window.iter().map(|w| w * w).sum();
    let scale = 1.0 / (fs * win_energy);

    let mut acc = vec![0.0f64; seg_len];
    let mut segs = 0usize;
    let mut buf = vec![Complex64::default(); seg_len];
    let mut start = 0;
    while start + seg_len <= x.len() {
        for i in 0..seg_len {
            buf[i] = x[start + i] * window[i];
        }
        fft_raw(&mut buf);
        for i in 0..seg_len {
            acc[i] += buf[i].norm_sqr() * scale;
        }
        segs += 1;
        start += hop;
    }
    for v in acc.iter_mut() {
        *v /= segs as f64;
    }
    Ok(acc)
}

/// Frequency (Hz) of Welch bin `k` under the natural DFT ordering.
pub fn welch_bin_freq(k: usize, seg_len: usize, fs: f64) -> f64 {
    if k <= seg_len / 2 {
        k as f64 * fs / seg_len as f64
    } else {
        (k as f64 - seg_len as f64) * fs / seg_len as f64
    }
}

// ─── Deterministic seed derivation ──────────────────────────────────────────

/// One round of splitmix64.
fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E3779B97F4A7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// Mix a seed with a tag. Chaining calls derives domain-separated streams:
/// `mix(mix(master, SNR_IDX), DROP_IDX)` and so on. Stable across platforms.
pub fn mix_seed(seed: u64, tag: u64) -> u64 {
    splitmix(seed ^ splitmix(tag.wrapping_add(0xA5A5_5A5A_0F0F_F0F0)))
}

// ─── Small dense complex linear algebra ─────────────────────────────────────

/// Solve `A x = b` for a small dense complex system (row-major `a`,
/// `n x n`). Gaussian elimination with partial pivoting. `a` and `b` are
/// consumed as scratch.
pub fn solve_dense(a: &mut [Complex64], b: &mut [Complex64], n: usize) -> Result<Vec<Complex64>> {
    assert_eq!(a.len(), n * n);
    assert_eq!(b.len(), n);
    for col in 0..n {
        let mut piv = col;
        let mut best = a[col * n + col].norm_sqr();
        for r in col + 1..n {
            let m = a[r * n + col].norm_sqr();
            if m > best {
                best = m;
                piv = r;
            }
        }
        if best < 1e-300 {
            return Err(SimError::Numerical("singular system in solve_dense".into()));
        }
        if piv != col {
            for k in 0..n {
                a.swap(col * n + k, piv * n + k);
            }
            b.swap(col, piv);
        }
        let d = a[col * n + col];
        for r in col + 1..n {
            let f = a[r * n + col] / d;
            if f == Complex64::default() {
                continue;
            }
            for k in col..n {
                let v = a[col * n + k];
                a[r * n + k] -= f * v;
            }
            let bv = b[col];
            b[r] -= f * bv;
        }
    }
    let mut x = vec![Complex64::default(); n];
    for col in (0..n).rev() {
        let mut s = b[col];
        for k in col + 1..n {
            s -= a[col * n + k] * x[k];
        }
        x[col] = s / a[col * n + col];
    }
    Ok(x)
}

/// Ridge-regularized least squares `min ||A x - b||^2 + lambda ||x||^2`
/// via the normal equations. `a` is row-major `rows x cols`.
pub fn solve_ls_ridge(
    a: &[Complex64],
    b: &[Complex64],
    rows: usize,
    cols: usize,
    lambda: f64,
) -> Result<Vec<Complex64>> {
    assert_eq!(a.len(), rows * cols);
    assert_eq!(b.len(), rows);
    let mut gram = vec![Complex64::default(); cols * cols];
    let mut rhs = vec![Complex64::default(); cols];
    for r in 0..rows {
        let row = &a[r * cols..(r + 1) * cols];
        for i in 0..cols {
            let ci = row[i].conj();
            rhs[i] += ci * b[r];
            for j in 0..cols {
                gram[i * cols + j] += ci * row[j];
            }
        }
    }
    for i in 0..cols {
        gram[i * cols + i] += Complex64::new(lambda, 0.0);
    }
    solve_dense(&mut gram, &mut rhs, cols)
}

// ─── Bessel J0 ──────────────────────────────────────────────────────────────

/// Bessel function of the first kind, order zero. Abramowitz & Stegun
/// 9.4.1/9.4.3 rational approximations, |error| < 1e-7.
pub fn bessel_j0(x: f64) -> f64 {
    let ax = x.abs();
    if ax < 8.0 {
        let y = x * x;
        let p1 = 57568490574.0 + y * (-13362590354.0 + y * (651619640.7
            + y * (-11214424.18 + y * (77392.33017 + y * -184.9052456))));
        let p2 = 57568490411.0 + y * (1029532985.0 + y * (9494680.718
            + y * (59272.64853 + y * (267.8532712 + y))));
        p1 / p2
    } else {
        let z = 8.0 / ax;
        let y = z * z;
        let xx = ax - 0.785398164;
        let p1 = 1.0 + y * (-0.1098628627e-2 + y * (0.2734510407e-4
            + y * (-0.2073370639e-5 + y * 0.2093887211e-6)));
        let p2 = -0.1562499995e-1 + y * (0.1430488765e-3 + y * (-0.6911147651e-5
            + y * (0.7621095161e-6 + y * -0.934935152e-7)));
        (0.636619772 / ax).sqrt() * (xx.cos() * p1 - z * xx.sin() * p2)
    }
}
