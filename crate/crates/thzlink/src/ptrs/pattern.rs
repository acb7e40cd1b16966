//! PTRS position generation and pilot sequences.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{PtrsConfig, PtrsScheme};
use crate::error::{Result, SimError};
use crate::numerology::Numerology;

/// Subcarriers per PRB.
const PRB_SC: usize = 12;

/// Frequency-domain PTRS pattern (CP-OFDM schemes).
#[derive(Debug, Clone)]
pub struct FdPattern {
    /// Sorted subcarrier indices carrying PTRS (in symbols where present).
    pub subcarriers: Vec<usize>,
    /// PTRS appears in symbols `s` with `s % symbol_spacing == 0`.
    pub symbol_spacing: usize,
}

impl FdPattern {
    pub fn present_in_symbol(&self, symbol: usize) -> bool {
        symbol % self.symbol_spacing == 0
    }

    /// Index of the most recent PTRS-bearing symbol at or before `symbol`.
    pub fn latest_bearing_symbol(&self, symbol: usize) -> usize {
        symbol - symbol % self.symbol_spacing
    }
}

/// Time-domain PTRS pattern (SC-FDMA schemes): pilot sub-symbol positions
/// within every SC-FDMA symbol, organized in groups.
#[derive(Debug, Clone)]
pub struct TdPattern {
    /// `groups[g]` = consecutive sub-symbol indices of group `g`.
    pub groups: Vec<Vec<usize>>,
    /// Sub-symbols per SC-FDMA symbol (the DFT-spread length M).
    pub m: usize,
}

impl TdPattern {
    /// All pilot sub-symbol indices, flattened in group order.
    pub fn flat(&self) -> Vec<usize> {
        self.groups.iter().flatten().copied().collect()
    }

    pub fn pilots_per_symbol(&self) -> usize {
        self.groups.iter().map(Vec::len).sum()
    }
}

/// Scheme-resolved PTRS placement.
#[derive(Debug, Clone)]
pub enum PtrsPositions {
    FreqDomain(FdPattern),
    TimeDomain(TdPattern),
}

/// Resolve the PTRS placement for a configuration and numerology.
///
/// - Distributed: subcarrier 0 of every `fd_prb_spacing`-th PRB, in every
///   `fd_symbol_spacing`-th symbol.
/// - Block: `block_prbs` contiguous PRBs of pilots centered in the
///   allocation, every symbol.
/// - TD groups: `groups` runs of `subsymbols_per_group` pilot sub-symbols,
///   group `g` centered at `(g + 0.5) * M / groups`.
pub fn ptrs_positions(
    cfg: &PtrsConfig,
    num: &Numerology,
) -> Result<PtrsPositions> {
    cfg.validate()?;
    match cfg.scheme {
        PtrsScheme::DistributedFd => {
            if num.prb_count < cfg.fd_prb_spacing {
                return Err(SimError::InvalidConfig(format!(
                    "{} PRB allocation cannot carry PTRS every {} PRBs",
                    num.prb_count, cfg.fd_prb_spacing
                )));
            }
            let subcarriers = (0..num.prb_count)
                .step_by(cfg.fd_prb_spacing)
                .map(|prb| prb * PRB_SC)
                .collect();
            Ok(PtrsPositions::FreqDomain(FdPattern {
                subcarriers,
                symbol_spacing: cfg.fd_symbol_spacing,
            }))
        }
        PtrsScheme::BlockFd => {
            if cfg.block_prbs > num.prb_count {
                return Err(SimError::InvalidConfig(format!(
                    "block of {} PRBs does not fit in {} PRBs",
                    cfg.block_prbs, num.prb_count
                )));
            }
            let start = (num.prb_count - cfg.block_prbs) / 2 * PRB_SC;
            let subcarriers =
                (start..start + cfg.block_prbs * PRB_SC).collect();
            Ok(PtrsPositions::FreqDomain(FdPattern {
                subcarriers,
                symbol_spacing: 1,
            }))
        }
        PtrsScheme::TdGroups | PtrsScheme::TdGroupsEnhanced => {
            let m = num.active_subcarriers();
            let g = cfg.groups;
            let l = cfg.subsymbols_per_group;
            if g * l > m {
                return Err(SimError::InvalidConfig(format!(
                    "{g} groups of {l} sub-symbols do not fit in M = {m}"
                )));
            }
            let mut groups = Vec::with_capacity(g);
            for i in 0..g {
                let center = (i as f64 + 0.5) * m as f64 / g as f64;
                let start = ((center - l as f64 / 2.0).round() as isize)
                    .clamp(0, (m - l) as isize) as usize;
                groups.push((start..start + l).collect());
            }
            Ok(PtrsPositions::TimeDomain(TdPattern { groups, m }))
        }
    }
}

/// Unit-energy QPSK pilot sequence, deterministic in `seed`.
pub fn ptrs_pilots(count: usize, seed: u64) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = std::f64::consts::FRAC_1_SQRT_2;
    (0..count)
        .map(|_| {
            let re = if rng.gen::<bool>() { a } else { -a };
            let im = if rng.gen::<bool>() { a } else { -a };
            Complex64::new(re, im)
        })
        .collect()
}
