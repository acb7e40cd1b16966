//! Phase-tracking reference signal (PTRS) patterns and the matching
//! receiver-side phase-noise estimators/compensators.
//!
//! Four schemes are modeled:
//! - `DistributedFd`: classic NR CP-OFDM PTRS — one subcarrier in every
//!   `fd_prb_spacing`-th PRB, present in every `fd_symbol_spacing`-th
//!   symbol; supports common-phase-error (CPE) derotation.
//! - `BlockFd`: a frequency-contiguous block of `block_prbs` PRBs of
//!   pilots in every symbol; dense enough to estimate low-order ICI
//!   components around DC, not just the CPE.
//! - `TdGroups` / `TdGroupsEnhanced`: SC-FDMA pre-DFT pilot sub-symbols in
//!   `groups` evenly spaced groups of `subsymbols_per_group`, enabling
//!   intra-symbol time-domain phase tracking. The enhanced variant uses 12
//!   groups of 4 — the same 48-position overhead as a 4-PRB block.
//!
//! Pilots ride on the first spatial layer only (shared-oscillator
//! assumption); estimates are applied to every layer.

mod estimate;
mod pattern;

pub use estimate::{
    compensate_cpe, compensate_ici, compensate_td, estimate_cpe, estimate_ici,
    track_pn_td, IciFilterEstimate,
};
pub use pattern::{ptrs_pilots, ptrs_positions, FdPattern, PtrsPositions, TdPattern};

use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::waveform::Waveform;

/// PTRS scheme selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PtrsScheme {
    DistributedFd,
    BlockFd,
    TdGroups,
    TdGroupsEnhanced,
}

impl PtrsScheme {
    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "distributed-fd" | "distributed" => Ok(Self::DistributedFd),
            "block-fd" | "block" => Ok(Self::BlockFd),
            "td-groups" | "td" => Ok(Self::TdGroups),
            "td-groups-enhanced" | "td-enhanced" | "enhanced" => {
                Ok(Self::TdGroupsEnhanced)
            }
            other => Err(SimError::InvalidConfig(format!(
                "unknown PTRS scheme '{other}'"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::DistributedFd => "distributed-fd",
            Self::BlockFd => "block-fd",
            Self::TdGroups => "td-groups",
            Self::TdGroupsEnhanced => "td-groups-enhanced",
        }
    }

    /// The waveform family the scheme is defined for.
    pub fn waveform(&self) -> Waveform {
        match self {
            Self::DistributedFd | Self::BlockFd => Waveform::Ofdm,
            Self::TdGroups | Self::TdGroupsEnhanced => Waveform::ScFdma,
        }
    }
}

/// Full PTRS configuration. Only the fields relevant to the selected
/// scheme are consulted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PtrsConfig {
    pub scheme: PtrsScheme,
    /// Distributed: PTRS in every n-th PRB (2 or 4).
    #[serde(default = "default_prb_spacing")]
    pub fd_prb_spacing: usize,
    /// Distributed: PTRS in every n-th symbol (1, 2 or 4).
    #[serde(default = "default_symbol_spacing")]
    pub fd_symbol_spacing: usize,
    /// Block: width of the contiguous pilot block in PRBs.
    #[serde(default = "default_block_prbs")]
    pub block_prbs: usize,
    /// TD: number of pilot groups per SC-FDMA symbol.
    #[serde(default = "default_groups")]
    pub groups: usize,
    /// TD: pilot sub-symbols per group.
    #[serde(default = "default_subsymbols")]
    pub subsymbols_per_group: usize,
}

fn default_prb_spacing() -> usize {
    2
}
fn default_symbol_spacing() -> usize {
    1
}
fn default_block_prbs() -> usize {
    4
}
fn default_groups() -> usize {
    8
}
fn default_subsymbols() -> usize {
    4
}

impl PtrsConfig {
    /// A configuration with the conventional defaults for `scheme`:
    /// distributed (2, 1) — the densest NR pattern; block of 4 PRBs;
    /// 8 groups of 4 for TD; 12 groups of 4 for enhanced TD.
    pub fn for_scheme(scheme: PtrsScheme) -> Self {
        Self {
            scheme,
            fd_prb_spacing: 2,
            fd_symbol_spacing: 1,
            block_prbs: 4,
            groups: if scheme == PtrsScheme::TdGroupsEnhanced { 12 } else { 8 },
            subsymbols_per_group: 4,
        }
    }

    /// Validate field domains and scheme consistency.
    pub fn validate(&self) -> Result<()> {
        match self.scheme {
            PtrsScheme::DistributedFd => {
                if ![2, 4].contains(&self.fd_prb_spacing) {
                    return Err(SimError::InvalidConfig(
                        "fd_prb_spacing must be 2 or 4".into(),
                    ));
                }
                if ![1, 2, 4].contains(&self.fd_symbol_spacing) {
                    return Err(SimError::InvalidConfig(
                        "fd_symbol_spacing must be 1, 2 or 4".into(),
                    ));
                }
            }
            PtrsScheme::BlockFd => {
                if self.block_prbs == 0 {
                    return Err(SimError::InvalidConfig(
                        "block_prbs must be positive".into(),
                    ));
                }
            }
            PtrsScheme::TdGroups => {
                if ![2, 4, 8].contains(&self.groups) {
                    return Err(SimError::InvalidConfig(
                        "groups must be 2, 4 or 8 for td-groups".into(),
                    ));
                }
                if ![2, 4].contains(&self.subsymbols_per_group) {
                    return Err(SimError::InvalidConfig(
                        "subsymbols_per_group must be 2 or 4".into(),
                    ));
                }
            }
            PtrsScheme::TdGroupsEnhanced => {
                if self.groups != 12 {
                    return Err(SimError::InvalidConfig(
                        "td-groups-enhanced uses 12 groups".into(),
                    ));
                }
                if ![2, 4].contains(&self.subsymbols_per_group) {
                    return Err(SimError::InvalidConfig(
                        "subsymbols_per_group must be 2 or 4".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Check the scheme is defined for the waveform in use.
    pub fn check_waveform(&self, waveform: Waveform) -> Result<()> {
        if self.scheme.waveform() != waveform {
            return Err(SimError::InvalidConfig(format!(
                "PTRS scheme '{}' is defined for {} transmission",
                self.scheme.name(),
                self.scheme.waveform().name(),
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scheme_waveform_compatibility_is_enforced() {
        let dist = PtrsConfig::for_scheme(PtrsScheme::DistributedFd);
        assert!(dist.check_waveform(Waveform::Ofdm).is_ok());
        assert!(dist.check_waveform(Waveform::ScFdma).is_err());
        let td = PtrsConfig::for_scheme(PtrsScheme::TdGroups);
        assert!(td.check_waveform(Waveform::ScFdma).is_ok());
        assert!(td.check_waveform(Waveform::Ofdm).is_err());
    }

    #[test]
    fn field_domains_are_validated() {
        let mut cfg = PtrsConfig::for_scheme(PtrsScheme::DistributedFd);
        cfg.validate().unwrap();
        cfg.fd_prb_spacing = 3;
        assert!(cfg.validate().is_err());

        let mut cfg = PtrsConfig::for_scheme(PtrsScheme::TdGroups);
        cfg.validate().unwrap();
        cfg.groups = 12;
        assert!(cfg.validate().is_err(), "12 groups is the enhanced scheme");
        let mut cfg = PtrsConfig::for_scheme(PtrsScheme::TdGroupsEnhanced);
        cfg.validate().unwrap();
        assert_eq!(cfg.groups, 12);
        cfg.groups = 8;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn scheme_names_round_trip() {
        for s in [
            PtrsScheme::DistributedFd,
            PtrsScheme::BlockFd,
            PtrsScheme::TdGroups,
            PtrsScheme::TdGroupsEnhanced,
        ] {
            assert_eq!(PtrsScheme::parse(s.name()).unwrap(), s);
        }
        assert!(PtrsScheme::parse("bogus").is_err());
    }
}
