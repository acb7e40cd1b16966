//! Channel realization (Rician block fading with Jakes Doppler) and
//! time-domain application to transmit signals.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::TAU;

use super::profile::ChannelProfile;
use crate::error::{Result, SimError};
use crate::numerology::Numerology;
use crate::waveform::{bin_for_subcarrier, TimeSignal};

/// A 2x2 channel matrix indexed `[rx][tx]`.
pub type Mat2 = [[Complex64; 2]; 2];

/// Sinusoids per sum-of-sinusoids fading waveform. 32 is enough for the
/// autocorrelation to track the Bessel reference within a few percent.
const JAKES_SINUSOIDS: usize = 32;

/// Cross-polarization power ratio of the LOS ray, dB. TR 38.901 quotes
/// XPR = 8 dB for CDL-E; the LOS ray mixes the two effective ports through
/// a fixed rotation with `tan^2(theta) = 10^(-XPR/10)`.
const LOS_XPR_DB: f64 = 8.0;

/// Fixed unitary polarization-mixing matrix applied to the LOS ray.
fn los_matrix() -> Mat2 {
    let s2 = 1.0 / (1.0 + crate::math::db_to_lin(LOS_XPR_DB));
    let s = s2.sqrt();
    let c = (1.0 - s2).sqrt();
    [
        [Complex64::new(c, 0.0), Complex64::new(s, 0.0)],
        [Complex64::new(-s, 0.0), Complex64::new(c, 0.0)],
    ]
}

/// One drawn channel: per-OFDM-symbol 2x2 matrices for every tap
/// (block fading — the channel is constant within a symbol).
///
/// Normalization: summed over taps and transmit ports, each receive port
/// sees expected power 2. A transmitter that splits unit total power across
/// ports (rank 2, per-layer amplitude `1/sqrt(2)`) or sends it all on port
/// 0 (rank 1) therefore delivers unit average power per receive port.
#[derive(Debug, Clone)]
pub struct MimoChannelRealization {
    /// Tap delays in seconds (continuous; rounded to samples on use).
    pub delays_s: Vec<f64>,
    /// `taps[symbol][tap][rx][tx]`.
    pub taps: Vec<Vec<Mat2>>,
    /// Spacing between fading samples (one OFDM symbol incl. CP).
    pub symbol_period_s: f64,
    /// Maximum Doppler shift used for the fading processes, Hz.
    pub max_doppler_hz: f64,
}

impl MimoChannelRealization {
    pub fn n_symbols(&self) -> usize {
        self.taps.len()
    }

    pub fn max_delay_s(&self) -> f64 {
        self.delays_s.iter().copied().fold(0.0, f64::max)
    }

    /// True when some tap delay reaches or exceeds the CP, i.e. the slot
    /// operates in the inter-symbol-interference regime.
    pub fn exceeds_cp(&self, num: &Numerology) -> bool {
        self.max_delay_s() >= num.cp_duration_s() - 1e-15
    }

    /// An identity channel realization (both ports passed through).
    pub fn identity(n_symbols: usize, symbol_period_s: f64) -> Self {
        let eye = [
            [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
            [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
        ];
        Self {
            delays_s: vec![0.0],
            taps: vec![vec![eye]; n_symbols],
            symbol_period_s,
            max_doppler_hz: 0.0,
        }
    }

    /// Genie frequency response on the active subcarriers of `num` for one
    /// OFDM symbol: `H_k = sum_taps M_tap * exp(-j 2 pi b_k d_tap / N)`
    /// with `d_tap` the tap delay rounded to samples (matching
    /// [`apply_channel`]) and `b_k` the FFT bin of subcarrier `k`.
    pub fn freq_response(&self, symbol: usize, num: &Numerology) -> Vec<Mat2> {
        let fs = num.sample_rate_hz();
        let n = num.fft_size as f64;
        let active = num.active_subcarriers();
        let mats = &self.taps[symbol.min(self.n_symbols() - 1)];
        let zero = Complex64::new(0.0, 0.0);
        let mut out = vec![[[zero; 2]; 2]; active];
        for (tap, &delay) in self.delays_s.iter().enumerate() {
            let d = (delay * fs).round();
            let m = &mats[tap];
            for (s, h) in out.iter_mut().enumerate() {
                let b = bin_for_subcarrier(s, active, num.fft_size) as f64;
                let rot = Complex64::from_polar(1.0, -TAU * b * d / n);
                for rx in 0..2 {
                    for tx in 0..2 {
                        h[rx][tx] += m[rx][tx] * rot;
                    }
                }
            }
        }
        out
    }
}

/// One complex sum-of-sinusoids fading waveform: unit average power,
/// autocorrelation approaching `J0(2 pi fD tau)` as the number of
/// sinusoids grows.
struct JakesWaveform {
    /// Per-sinusoid angular Doppler `2 pi fD cos(alpha_n)`.
    omegas: [f64; JAKES_SINUSOIDS],
    phases: [f64; JAKES_SINUSOIDS],
}

impl JakesWaveform {
    fn draw(max_doppler_hz: f64, rng: &mut impl Rng) -> Self {
        let mut omegas = [0.0; JAKES_SINUSOIDS];
        let mut phases = [0.0; JAKES_SINUSOIDS];
        for i in 0..JAKES_SINUSOIDS {
            let alpha: f64 = rng.gen_range(0.0..TAU);
            omegas[i] = TAU * max_doppler_hz * alpha.cos();
            phases[i] = rng.gen_range(0.0..TAU);
        }
        Self { omegas, phases }
    }

    fn eval(&self, t: f64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..JAKES_SINUSOIDS {
            acc += Complex64::from_polar(1.0, self.omegas[i] * t + self.phases[i]);
        }
        acc / (JAKES_SINUSOIDS as f64).sqrt()
    }
}

/// Draw a block-fading channel realization covering `duration_s`.
///
/// The LOS ray (share `K/(K+1)`) rides statically on the first tap through
/// a fixed polarization rotation; every tap additionally carries an
/// independent Rayleigh 2x2 process with Jakes Doppler spectrum, scaled so
/// the diffuse taps share `1/(K+1)` of the power. Deterministic in `seed`.
pub fn realize_channel(
    profile: &ChannelProfile,
    duration_s: f64,
    symbol_period_s: f64,
    seed: u64,
) -> Result<MimoChannelRealization> {
    profile.validate()?;
    if !(symbol_period_s > 0.0) || !(duration_s > 0.0) {
        return Err(SimError::InvalidArgument(
            "duration and symbol period must be positive".into(),
        ));
    }
    let n_symbols = (duration_s / symbol_period_s).ceil() as usize;
    let n_taps = profile.taps.len();
    let fd = profile.max_doppler_hz();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // Draw every fading waveform up front in a fixed order so the
    // realization is a pure function of the seed.
    let mut waveforms = Vec::with_capacity(n_taps * 4);
    for _ in 0..n_taps * 4 {
        waveforms.push(JakesWaveform::draw(fd, &mut rng));
    }

    let diffuse = profile.diffuse_share();
    let powers = profile.linear_powers();
    let los_amp = (2.0 * profile.los_share()).sqrt();
    let los = los_matrix();
    let zero = Complex64::new(0.0, 0.0);

    let mut taps = Vec::with_capacity(n_symbols);
    for sym in 0..n_symbols {
        let t = (sym as f64 + 0.5) * symbol_period_s;
        let mut mats = vec![[[zero; 2]; 2]; n_taps];
        for (tap, mat) in mats.iter_mut().enumerate() {
            let amp = (powers[tap] * diffuse).sqrt();
            for rx in 0..2 {
                for tx in 0..2 {
                    let w = &waveforms[(tap * 2 + rx) * 2 + tx];
                    mat[rx][tx] = w.eval(t) * amp;
                    if tap == 0 {
                        mat[rx][tx] += los[rx][tx] * los_amp;
                    }
                }
            }
        }
        taps.push(mats);
    }

    Ok(MimoChannelRealization {
        delays_s: profile.taps.iter().map(|&(d, _)| d).collect(),
        taps,
        symbol_period_s,
        max_doppler_hz: fd,
    })
}

/// Pass a two-port transmit signal through the realized channel:
/// `y_rx[t] = sum_taps sum_tx M[sym(t)][tap][rx][tx] x_tx[t - d_tap]`,
/// with tap delays rounded to the nearest sample at the signal's rate and
/// the fading matrix held constant over each `samples_per_symbol` block.
///
/// Samples before the start of the signal are taken as zero. Delays at or
/// beyond the CP are not an error here — the slot then simply operates in
/// the ISI regime; callers can detect it with
/// [`MimoChannelRealization::exceeds_cp`].
pub fn apply_channel(
    tx: &[TimeSignal; 2],
    real: &MimoChannelRealization,
    samples_per_symbol: usize,
) -> Result<[TimeSignal; 2]> {
    if tx[0].samples.len() != tx[1].samples.len()
        || tx[0].sample_rate_hz != tx[1].sample_rate_hz
    {
        return Err(SimError::InvalidArgument(
            "the two transmit ports must share length and sample rate".into(),
        ));
    }
    if samples_per_symbol == 0 {
        return Err(SimError::InvalidArgument(
            "samples_per_symbol must be positive".into(),
        ));
    }
    let fs = tx[0].sample_rate_hz;
    let len = tx[0].samples.len();
    let n_sym = real.n_symbols();
    let delays: Vec<usize> = real
        .delays_s
        .iter()
        .map(|&d| (d * fs).round() as usize)
        .collect();

    let zero = Complex64::new(0.0, 0.0);
    let mut out = [vec![zero; len], vec![zero; len]];
    for (tap, &d) in delays.iter().enumerate() {
        for t in d..len {
            let sym = (t / samples_per_symbol).min(n_sym - 1);
            let m = &real.taps[sym][tap];
            let x0 = tx[0].samples[t - d];
            let x1 = tx[1].samples[t - d];
            out[0][t] += m[0][0] * x0 + m[0][1] * x1;
            out[1][t] += m[1][0] * x0 + m[1][1] * x1;
        }
    }
    let [y0, y1] = out;
    Ok([
        TimeSignal { samples: y0, sample_rate_hz: fs },
        TimeSignal { samples: y1, sample_rate_hz: fs },
    ])
}
