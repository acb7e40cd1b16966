//! One Monte-Carlo drop: the full transmit → impair → receive → decode
//! chain for a single slot, deterministic in
//! `(master_seed, snr_index, drop_index)`.
//!
//! Pipeline order: payload bits → CRC → LDPC → QAM mapping → PTRS
//! insertion → waveform modulation → transmit-side phase noise → channel →
//! receive-side phase noise → AWGN → demodulation → genie MMSE
//! equalization → PTRS-based phase compensation → LLR demapping → LDPC
//! decoding → CRC check.
//!
//! Power conventions: data and pilot resource elements carry unit energy
//! per layer before the `1/sqrt(rank)` layer scaling; the equalizer is
//! handed the effective channel with that scaling folded in, so equalized
//! streams are unit-scale and pilots are compared unscaled. Noise variance
//! is `10^(-snr/10)` per receive port per complex sample. Both transmit
//! ports share one oscillator (one phase trajectory), as do both receive
//! ports.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::channel::{
    apply_channel, mmse_equalize, realize_channel, ChannelProfile, Mat2, MimoChannelRealization,
};
use crate::error::{Result, SimError};
use crate::fec::{decode_block, encode_block, CodeConfig, LdpcCode};
use crate::impairments::{apply_awgn, apply_pn, synthesize_pn, PnPoleZeroModel};
use crate::math::mix_seed;
use crate::modulation::Modulation;
use crate::numerology::{Numerology, SYMBOLS_PER_SLOT};
use crate::ptrs::{
    compensate_cpe, compensate_ici, compensate_td, estimate_cpe, estimate_ici, ptrs_pilots,
    ptrs_positions, track_pn_td, FdPattern, PtrsConfig, PtrsPositions, PtrsScheme, TdPattern,
};
use crate::waveform::{
    ofdm_demodulate, ofdm_modulate, scfdma_despread, scfdma_modulate, ResourceGrid, ScFdmaFrame,
    TimeSignal, Waveform,
};

use super::config::LinkConfig;

// Sub-seed domains hung off the per-drop base seed; the pilot domain hangs
// off the master seed (pilots are part of the link configuration).
const DOM_DATA: u64 = 0x11;
const DOM_PN_TX: u64 = 0x22;
const DOM_PN_RX: u64 = 0x33;
const DOM_CHANNEL: u64 = 0x44;
const DOM_NOISE: u64 = 0x55;
const DOM_PILOT: u64 = 0x66;
const DOM_DROP: u64 = 0x77;

/// Outcome of one drop.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DropResult {
    /// Transport block was not recovered.
    pub block_error: bool,
    /// The error came from a numerical failure in the chain (estimator or
    /// solver), recorded as a block error per the error policy.
    pub numerical_failure: bool,
    /// LDPC iterations spent (0 when channel decisions already passed).
    pub ldpc_iterations: usize,
}

/// Everything derivable from a [`LinkConfig`] once, shared read-only by
/// all drops of a sweep.
pub struct LinkContext {
    pub cfg: LinkConfig,
    pub num: Numerology,
    pub waveform: Waveform,
    pub modulation: Modulation,
    pub rank: usize,
    pub ptrs: PtrsConfig,
    pub profile: Option<ChannelProfile>,
    pub code_cfg: CodeConfig,
    pub code: LdpcCode,
    positions: PtrsPositions,
    /// Unit-scale pilot values: one per pilot subcarrier (frequency
    /// domain) or per flattened pilot sub-symbol (time domain).
    pilots: Vec<Complex64>,
    /// Per-column pilot flag (subcarriers or sub-symbol positions).
    pilot_mask: Vec<bool>,
    /// Data positions per slot (pilot-free resource elements or
    /// sub-symbols, counted once per layer).
    pub n_data_positions: usize,
    ici_q: usize,
    pn_tx_model: Option<PnPoleZeroModel>,
    pn_rx_model: Option<PnPoleZeroModel>,
}

impl LinkContext {
    pub fn new(cfg: LinkConfig) -> Result<Self> {
        cfg.validate()?;
        let num = cfg.resolve_numerology()?;
        let ptrs = cfg.resolve_ptrs()?;
        let positions = ptrs_positions(&ptrs, &num)?;
        let n_cols = num.active_subcarriers();

        let mut pilot_mask = vec![false; n_cols];
        let (pilot_count, bearing_symbols) = match &positions {
            PtrsPositions::FreqDomain(p) => {
                for &sc in &p.subcarriers {
                    pilot_mask[sc] = true;
                }
                let bearing = (0..SYMBOLS_PER_SLOT).filter(|&s| p.present_in_symbol(s)).count();
                (p.subcarriers.len(), bearing)
            }
            PtrsPositions::TimeDomain(p) => {
                for k in p.flat() {
                    pilot_mask[k] = true;
                }
                (p.pilots_per_symbol(), SYMBOLS_PER_SLOT)
            }
        };
        let n_data_positions =
            SYMBOLS_PER_SLOT * n_cols - bearing_symbols * pilot_count;
        let pilots = ptrs_pilots(
            pilot_count,
            mix_seed(cfg.sweep.master_seed, DOM_PILOT),
        );

        let rank = cfg.waveform.rank;
        let avail_bits =
            n_data_positions * rank * cfg.waveform.modulation.bits_per_symbol();
        let code_cfg = CodeConfig::for_available_bits(avail_bits)?;
        let code = LdpcCode::new(code_cfg);

        let pn_tx_model = cfg.pn.enabled.then(|| cfg.pn.tx_profile.model());
        let pn_rx_model = cfg.pn.enabled.then(|| cfg.pn.rx_profile.model());
        let profile = cfg.resolve_channel_profile()?;
        let ici_q = cfg.ici_half_taps();
        if ici_q == 0 || 4 * ici_q + 1 > pilot_count {
            if ptrs.scheme == PtrsScheme::BlockFd {
                return Err(SimError::InvalidConfig(format!(
                    "ici_half_taps {ici_q} incompatible with {pilot_count} block pilots"
                )));
            }
        }

        Ok(Self {
            num,
            waveform: cfg.waveform.waveform,
            modulation: cfg.waveform.modulation,
            rank,
            ptrs,
            profile,
            code_cfg,
            code,
            positions,
            pilots,
            pilot_mask,
            n_data_positions,
            ici_q,
            pn_tx_model,
            pn_rx_model,
            cfg,
        })
    }

    fn fd_pattern(&self) -> Option<&FdPattern> {
        match &self.positions {
            PtrsPositions::FreqDomain(p) => Some(p),
            PtrsPositions::TimeDomain(_) => None,
        }
    }

    fn td_pattern(&self) -> Option<&TdPattern> {
        match &self.positions {
            PtrsPositions::TimeDomain(p) => Some(p),
            PtrsPositions::FreqDomain(_) => None,
        }
    }

    fn bears_pilots(&self, sym: usize) -> bool {
        match &self.positions {
            PtrsPositions::FreqDomain(p) => p.present_in_symbol(sym),
            PtrsPositions::TimeDomain(_) => true,
        }
    }

    /// Visit the slot's data positions in the canonical (symbol-major,
    /// column-minor) order used by both mapping and demapping.
    fn for_each_data_position(&self, mut f: impl FnMut(usize, usize)) {
        let n_cols = self.num.active_subcarriers();
        for sym in 0..SYMBOLS_PER_SLOT {
            let bearing = self.bears_pilots(sym);
            for col in 0..n_cols {
                if bearing && self.pilot_mask[col] {
                    continue;
                }
                f(sym, col);
            }
        }
    }

    /// Per-drop base seed; sub-streams are domain-separated off it.
    fn drop_base(&self, snr_index: usize, drop_index: u64) -> u64 {
        let a = mix_seed(self.cfg.sweep.master_seed, DOM_DROP);
        let b = mix_seed(a, snr_index as u64);
        mix_seed(b, drop_index)
    }
}

/// Effective per-symbol SINR of a DFT-spread stream from its per-subcarrier
/// MMSE SINRs: the despreader averages the per-subcarrier MMSE error, so
/// `1/(1+g_eff) = mean(1/(1+g_k))`.
pub fn despread_sinr(gammas: &[f64]) -> f64 {
    if gammas.is_empty() {
        return 0.0;
    }
    let m = gammas.iter().map(|&g| g / (1.0 + g)).sum::<f64>() / gammas.len() as f64;
    if m >= 1.0 - 1e-15 {
        1e15
    } else {
        (m / (1.0 - m)).min(1e15)
    }
}

/// Run one drop. Numerical failures inside the chain are recorded as
/// block errors with the `numerical_failure` flag set; configuration
/// errors cannot occur here because [`LinkContext::new`] validated them.
pub fn run_drop(ctx: &LinkContext, snr_db: f64, snr_index: usize, drop_index: u64) -> DropResult {
    match run_drop_inner(ctx, snr_db, snr_index, drop_index) {
        Ok((block_error, iters)) => DropResult {
            block_error,
            numerical_failure: false,
            ldpc_iterations: iters,
        },
        Err(_) => DropResult { block_error: true, numerical_failure: true, ldpc_iterations: 0 },
    }
}

fn zero_signal(n: usize, fs: f64) -> TimeSignal {
    TimeSignal { samples: vec![Complex64::default(); n], sample_rate_hz: fs }
}

fn run_drop_inner(
    ctx: &LinkContext,
    snr_db: f64,
    snr_index: usize,
    drop_index: u64,
) -> Result<(bool, usize)> {
    let num = &ctx.num;
    let rank = ctx.rank;
    let n_cols = num.active_subcarriers();
    let amp = 1.0 / (rank as f64).sqrt();
    let base = ctx.drop_base(snr_index, drop_index);

    // ── Transport block ──────────────────────────────────────────────
    let mut data_rng = ChaCha8Rng::seed_from_u64(mix_seed(base, DOM_DATA));
    let payload: Vec<u8> = (0..ctx.code_cfg.payload_bits())
        .map(|_| data_rng.gen_range(0..2u8))
        .collect();
    let mut bits = encode_block(&payload, &ctx.code_cfg)?;
    let coded_len = bits.len();
    let total_bits =
        ctx.n_data_positions * rank * ctx.modulation.bits_per_symbol();
    bits.extend((0..total_bits - coded_len).map(|_| data_rng.gen_range(0..2u8)));
    let syms = ctx.modulation.map_bits(&bits)?;

    // ── Per-layer mapping and modulation ─────────────────────────────
    let mut tx: Vec<TimeSignal> = match ctx.waveform {
        Waveform::Ofdm => {
            let mut grids = vec![ResourceGrid::for_slot(num); rank];
            let pattern = ctx.fd_pattern().expect("FD scheme on OFDM");
            for sym in 0..SYMBOLS_PER_SLOT {
                if pattern.present_in_symbol(sym) {
                    for (i, &sc) in pattern.subcarriers.iter().enumerate() {
                        // Pilots ride layer 0; layer 1 is muted there.
                        grids[0].set(sym, sc, ctx.pilots[i] * amp);
                    }
                }
            }
            let mut next = 0usize;
            ctx.for_each_data_position(|sym, sc| {
                for grid in grids.iter_mut() {
                    grid.set(sym, sc, syms[next] * amp);
                    next += 1;
                }
            });
            grids
                .iter()
                .map(|g| ofdm_modulate(g, num))
                .collect::<Result<Vec<_>>>()?
        }
        Waveform::ScFdma => {
            let mut frames = vec![ScFdmaFrame::for_slot(num); rank];
            let pattern = ctx.td_pattern().expect("TD scheme on SC-FDMA");
            let flat = pattern.flat();
            for sym in 0..SYMBOLS_PER_SLOT {
                for (i, &k) in flat.iter().enumerate() {
                    // Every layer carries the pilot sub-symbols.
                    for frame in frames.iter_mut() {
                        frame.set(sym, k, ctx.pilots[i] * amp);
                    }
                }
            }
            let mut next = 0usize;
            ctx.for_each_data_position(|sym, k| {
                for frame in frames.iter_mut() {
                    frame.set(sym, k, syms[next] * amp);
                    next += 1;
                }
            });
            frames
                .iter()
                .map(|f| scfdma_modulate(f, num))
                .collect::<Result<Vec<_>>>()?
        }
    };
    let n_samples = num.samples_per_slot();
    let fs = num.sample_rate_hz();
    if rank == 1 {
        tx.push(zero_signal(n_samples, fs));
    }

    // ── Transmit phase noise (one oscillator, both ports) ────────────
    if let Some(model) = &ctx.pn_tx_model {
        let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(base, DOM_PN_TX));
        let phase = synthesize_pn(model, n_samples, fs, ctx.cfg.carrier_hz(), &mut rng)?;
        for port in tx.iter_mut() {
            apply_pn(port, &phase);
        }
    }

    // ── Channel ──────────────────────────────────────────────────────
    let realization: MimoChannelRealization = match &ctx.profile {
        None => MimoChannelRealization::identity(SYMBOLS_PER_SLOT, num.symbol_duration_s()),
        Some(p) => realize_channel(
            p,
            num.slot_duration_s(),
            num.symbol_duration_s(),
            mix_seed(base, DOM_CHANNEL),
        )?,
    };
    let tx_pair = [tx.remove(0), tx.remove(0)];
    let mut rx = apply_channel(&tx_pair, &realization, num.samples_per_symbol())?;

    // ── Receive phase noise (one oscillator, both ports) ─────────────
    if let Some(model) = &ctx.pn_rx_model {
        let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(base, DOM_PN_RX));
        let phase = synthesize_pn(model, n_samples, fs, ctx.cfg.carrier_hz(), &mut rng)?;
        for port in rx.iter_mut() {
            apply_pn(port, &phase);
        }
    }

    // ── Additive noise ───────────────────────────────────────────────
    let noise_var = 10f64.powf(-snr_db / 10.0);
    {
        let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(base, DOM_NOISE));
        apply_awgn(&mut rx[0].samples, noise_var, &mut rng);
        apply_awgn(&mut rx[1].samples, noise_var, &mut rng);
    }

    // ── Demodulation and genie MMSE equalization ─────────────────────
    let rx_grids = [
        ofdm_demodulate(&rx[0], num, SYMBOLS_PER_SLOT)?,
        ofdm_demodulate(&rx[1], num, SYMBOLS_PER_SLOT)?,
    ];
    let mut h: Vec<Vec<Mat2>> = Vec::with_capacity(SYMBOLS_PER_SLOT);
    for sym in 0..SYMBOLS_PER_SLOT {
        let mut hs = realization.freq_response(sym, num);
        if rank == 2 {
            for m in hs.iter_mut() {
                for row in m.iter_mut() {
                    for v in row.iter_mut() {
                        *v *= amp;
                    }
                }
            }
        }
        h.push(hs);
    }
    let mut eq = mmse_equalize(&rx_grids, &h, noise_var, rank)?;

    // ── Phase-noise compensation per scheme ──────────────────────────
    // Estimates come from layer 0 (where pilots are guaranteed clean) and
    // are applied to every layer: the oscillators are common to both.
    let mut td_frames: Option<Vec<ScFdmaFrame>> = None;
    match ctx.ptrs.scheme {
        PtrsScheme::DistributedFd => {
            let pattern = ctx.fd_pattern().unwrap();
            let mut phase = 0.0f64;
            for sym in 0..SYMBOLS_PER_SLOT {
                if pattern.present_in_symbol(sym) {
                    let rx_p: Vec<Complex64> = pattern
                        .subcarriers
                        .iter()
                        .map(|&sc| eq.layers[0].get(sym, sc))
                        .collect();
                    phase = estimate_cpe(&rx_p, &ctx.pilots)?;
                }
                for layer in eq.layers.iter_mut() {
                    compensate_cpe(layer.symbol_mut(sym), phase);
                }
            }
        }
        PtrsScheme::BlockFd => {
            let pattern = ctx.fd_pattern().unwrap();
            for sym in 0..SYMBOLS_PER_SLOT {
                let rx_p: Vec<Complex64> = pattern
                    .subcarriers
                    .iter()
                    .map(|&sc| eq.layers[0].get(sym, sc))
                    .collect();
                let ici = estimate_ici(&rx_p, &ctx.pilots, ctx.ici_q)?;
                for layer in eq.layers.iter_mut() {
                    compensate_ici(layer.symbol_mut(sym), &ici, num.fft_size)?;
                }
            }
        }
        PtrsScheme::TdGroups | PtrsScheme::TdGroupsEnhanced => {
            let pattern = ctx.td_pattern().unwrap();
            let flat = pattern.flat();
            let mut frames: Vec<ScFdmaFrame> =
                eq.layers.iter().map(scfdma_despread).collect();
            for sym in 0..SYMBOLS_PER_SLOT {
                let rx_p: Vec<Complex64> =
                    flat.iter().map(|&k| frames[0].get(sym, k)).collect();
                let phases = track_pn_td(&rx_p, &ctx.pilots, pattern)?;
                for frame in frames.iter_mut() {
                    compensate_td(frame.symbol_mut(sym), &phases);
                }
            }
            td_frames = Some(frames);
        }
    }

    // ── Collection, demapping, decoding ──────────────────────────────
    let n_syms_total = ctx.n_data_positions * rank;
    let mut rx_syms = Vec::with_capacity(n_syms_total);
    let mut sinrs = Vec::with_capacity(n_syms_total);
    match &td_frames {
        Some(frames) => {
            // Per-symbol effective SINR of the despread stream, per layer.
            let mut eff = vec![[0.0f64; SYMBOLS_PER_SLOT]; rank];
            for (l, eff_l) in eff.iter_mut().enumerate() {
                for (sym, e) in eff_l.iter_mut().enumerate() {
                    let g = &eq.sinr[l][sym * n_cols..(sym + 1) * n_cols];
                    *e = despread_sinr(g);
                }
            }
            ctx.for_each_data_position(|sym, k| {
                for (l, frame) in frames.iter().enumerate() {
                    rx_syms.push(frame.get(sym, k));
                    sinrs.push(eff[l][sym]);
                }
            });
        }
        None => {
            ctx.for_each_data_position(|sym, sc| {
                for l in 0..rank {
                    rx_syms.push(eq.layers[l].get(sym, sc));
                    sinrs.push(eq.sinr[l][sym * n_cols + sc]);
                }
            });
        }
    }
    let mut llrs = Vec::new();
    ctx.modulation.demap_llr(&rx_syms, &sinrs, &mut llrs);
    llrs.truncate(coded_len);
    let out = decode_block(&llrs, &ctx.code, ctx.cfg.fec.max_decoder_iters);
    let block_error = !out.success || out.payload != payload;
    Ok((block_error, out.iterations))
}
