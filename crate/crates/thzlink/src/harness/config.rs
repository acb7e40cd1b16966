//! Link configuration: TOML schema with defaults, dotted-path overrides,
//! and resolution into validated simulator objects.
//!
//! Unknown keys anywhere in the file are errors. Every section is optional
//! except `[numerology]` and `[waveform]`; defaults reproduce the reference
//! setup (90 GHz carrier, CDL-E 10 ns with K = 15 dB at 3 km/h, phase noise
//! on, 25 decoder iterations, 0.5 dB grid).

use serde::{Deserialize, Serialize};

use crate::channel::{ChannelKind, ChannelProfile};
use crate::error::{Result, SimError};
use crate::impairments::PnProfile;
use crate::modulation::Modulation;
use crate::numerology::{max_prbs, Numerology};
use crate::ptrs::{PtrsConfig, PtrsScheme};
use crate::waveform::Waveform;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkConfig {
    /// Identifier echoed into every output row.
    #[serde(default = "default_id")]
    pub id: String,
    /// Carrier frequency in GHz (phase-noise scaling and Doppler).
    #[serde(default = "default_carrier_ghz")]
    pub carrier_ghz: f64,
    pub numerology: NumerologySection,
    pub waveform: WaveformSection,
    #[serde(default)]
    pub channel: ChannelSection,
    #[serde(default)]
    pub pn: PnSection,
    #[serde(default)]
    pub ptrs: PtrsSection,
    #[serde(default)]
    pub fec: FecSection,
    #[serde(default)]
    pub sweep: SweepSection,
}

fn default_id() -> String {
    "link".into()
}

fn default_carrier_ghz() -> f64 {
    90.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NumerologySection {
    pub scs_khz: u32,
    /// Allocation width; defaults to the largest allowed for the spacing.
    #[serde(default)]
    pub prb_count: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaveformSection {
    pub waveform: Waveform,
    pub modulation: Modulation,
    #[serde(default = "default_rank")]
    pub rank: usize,
}

fn default_rank() -> usize {
    1
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChannelSection {
    pub channel: ChannelKind,
    pub rms_ds_ns: f64,
    pub rician_k_db: f64,
    pub ue_speed_kmh: f64,
}

impl Default for ChannelSection {
    fn default() -> Self {
        Self {
            channel: ChannelKind::CdlE,
            rms_ds_ns: 10.0,
            rician_k_db: 15.0,
            ue_speed_kmh: 3.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PnSection {
    pub enabled: bool,
    /// Oscillator model at the transmit side (downlink: base station).
    pub tx_profile: PnProfile,
    /// Oscillator model at the receive side (downlink: terminal).
    pub rx_profile: PnProfile,
}

impl Default for PnSection {
    fn default() -> Self {
        Self { enabled: true, tx_profile: PnProfile::Bs, rx_profile: PnProfile::Ue }
    }
}

/// Phase-tracking configuration. Every field except `scheme` falls back to
/// the scheme's canonical value when omitted.
#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct PtrsSection {
    /// Defaults per waveform: distributed for OFDM, grouped for SC-FDMA.
    pub scheme: Option<PtrsScheme>,
    pub fd_prb_spacing: Option<usize>,
    pub fd_symbol_spacing: Option<usize>,
    pub block_prbs: Option<usize>,
    pub groups: Option<usize>,
    pub subsymbols_per_group: Option<usize>,
    /// One-sided ICI filter order Q for the block scheme (2Q+1 taps).
    pub ici_half_taps: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FecSection {
    pub max_decoder_iters: usize,
}

impl Default for FecSection {
    fn default() -> Self {
        Self { max_decoder_iters: 25 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub snr_start_db: f64,
    pub snr_stop_db: f64,
    pub snr_step_db: f64,
    pub min_blocks: u64,
    pub max_blocks: u64,
    pub min_errors: u64,
    pub master_seed: u64,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            snr_start_db: 0.0,
            snr_stop_db: 30.0,
            snr_step_db: 0.5,
            min_blocks: 0,
            max_blocks: 2000,
            min_errors: 50,
            master_seed: 1,
        }
    }
}

impl LinkConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: LinkConfig = toml::from_str(text)
            .map_err(|e| SimError::InvalidConfig(format!("config parse error: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Parse with `key=value` dotted-path overrides applied between
    /// parsing and validation (e.g. `sweep.master_seed=7`,
    /// `waveform.modulation="64qam"`). Values are parsed as TOML literals
    /// and fall back to strings.
    pub fn from_toml_str_with_overrides(text: &str, overrides: &[String]) -> Result<Self> {
        let mut value: toml::Value = toml::from_str(text)
            .map_err(|e| SimError::InvalidConfig(format!("config parse error: {e}")))?;
        for ov in overrides {
            apply_override(&mut value, ov)?;
        }
        let cfg: LinkConfig = value
            .try_into()
            .map_err(|e| SimError::InvalidConfig(format!("config error: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    /// Cheap structural validation; full resolution happens in
    /// [`crate::harness::LinkContext::new`].
    pub fn validate(&self) -> Result<()> {
        if !(self.carrier_ghz > 0.0) {
            return Err(SimError::InvalidConfig("carrier_ghz must be > 0".into()));
        }
        if self.waveform.rank != 1 && self.waveform.rank != 2 {
            return Err(SimError::InvalidConfig(format!(
                "rank must be 1 or 2, got {}",
                self.waveform.rank
            )));
        }
        let s = &self.sweep;
        if !(s.snr_step_db > 0.0) {
            return Err(SimError::InvalidConfig("sweep.snr_step_db must be > 0".into()));
        }
        if s.snr_stop_db < s.snr_start_db {
            return Err(SimError::InvalidConfig(
                "sweep.snr_stop_db must be >= snr_start_db".into(),
            ));
        }
        if s.min_errors < 20 {
            return Err(SimError::InvalidConfig(
                "sweep.min_errors must be >= 20 (statistical floor)".into(),
            ));
        }
        if s.max_blocks == 0 {
            return Err(SimError::InvalidConfig("sweep.max_blocks must be > 0".into()));
        }
        if self.fec.max_decoder_iters == 0 {
            return Err(SimError::InvalidConfig("fec.max_decoder_iters must be > 0".into()));
        }
        self.resolve_numerology()?;
        self.resolve_ptrs()?;
        self.resolve_channel_profile()?;
        Ok(())
    }

    pub fn carrier_hz(&self) -> f64 {
        self.carrier_ghz * 1e9
    }

    pub fn resolve_numerology(&self) -> Result<Numerology> {
        let prbs = match self.numerology.prb_count {
            Some(p) => p,
            None => max_prbs(self.numerology.scs_khz)?,
        };
        Numerology::derive(self.numerology.scs_khz, prbs)
    }

    /// PTRS config: scheme default chosen per waveform, overrides applied
    /// on top of the scheme's canonical parameters, waveform pairing
    /// enforced.
    pub fn resolve_ptrs(&self) -> Result<PtrsConfig> {
        let scheme = self.ptrs.scheme.unwrap_or(match self.waveform.waveform {
            Waveform::Ofdm => PtrsScheme::DistributedFd,
            Waveform::ScFdma => PtrsScheme::TdGroups,
        });
        let mut cfg = PtrsConfig::for_scheme(scheme);
        if let Some(v) = self.ptrs.fd_prb_spacing {
            cfg.fd_prb_spacing = v;
        }
        if let Some(v) = self.ptrs.fd_symbol_spacing {
            cfg.fd_symbol_spacing = v;
        }
        if let Some(v) = self.ptrs.block_prbs {
            cfg.block_prbs = v;
        }
        if let Some(v) = self.ptrs.groups {
            cfg.groups = v;
        }
        if let Some(v) = self.ptrs.subsymbols_per_group {
            cfg.subsymbols_per_group = v;
        }
        cfg.validate()?;
        cfg.check_waveform(self.waveform.waveform)?;
        Ok(cfg)
    }

    /// One-sided ICI filter order for the block scheme.
    pub fn ici_half_taps(&self) -> usize {
        self.ptrs.ici_half_taps.unwrap_or(2)
    }

    /// `None` for the AWGN (identity) channel.
    pub fn resolve_channel_profile(&self) -> Result<Option<ChannelProfile>> {
        match self.channel.channel {
            ChannelKind::Awgn => Ok(None),
            ChannelKind::CdlE => Ok(Some(ChannelProfile::cdl_e(
                self.channel.rms_ds_ns,
                self.channel.rician_k_db,
                self.channel.ue_speed_kmh,
                self.carrier_hz(),
            )?)),
        }
    }

    /// SNR grid points, ascending.
    pub fn snr_grid(&self) -> Vec<f64> {
        let s = &self.sweep;
        let n = ((s.snr_stop_db - s.snr_start_db) / s.snr_step_db).round() as usize + 1;
        (0..n).map(|i| s.snr_start_db + i as f64 * s.snr_step_db).collect()
    }
}

/// Apply one `dotted.path=value` override to a parsed TOML tree.
fn apply_override(root: &mut toml::Value, spec: &str) -> Result<()> {
    let (path, raw) = spec.split_once('=').ok_or_else(|| {
        SimError::InvalidConfig(format!("override '{spec}' is not key=value"))
    })?;
    let path = path.trim();
    let raw = raw.trim();
    if path.is_empty() {
        return Err(SimError::InvalidConfig(format!("override '{spec}' has an empty key")));
    }
    // Parse the value as a TOML literal; bare words become strings.
    let parsed: toml::Value = match toml::from_str::<toml::Value>(&format!("v = {raw}")) {
        Ok(toml::Value::Table(t)) => t.get("v").cloned().unwrap(),
        _ => toml::Value::String(raw.trim_matches('"').to_string()),
    };
    let mut node = root;
    let parts: Vec<&str> = path.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let table = node.as_table_mut().ok_or_else(|| {
            SimError::InvalidConfig(format!("override path '{path}' crosses a non-table"))
        })?;
        if i + 1 == parts.len() {
            table.insert(part.to_string(), parsed);
            return Ok(());
        }
        node = table
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(Default::default()));
    }
    unreachable!("loop returns on the last component");
}
