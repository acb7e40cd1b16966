//! Monte-Carlo link orchestration: configuration ingestion, the per-drop
//! simulation chain, SNR sweeps with stopping rules, required-SNR
//! extraction at the 10% BLER target, and CSV persistence.
//!
//! Reproducibility contract: a configuration file plus master seed fully
//! determines every output byte. Drop-level randomness is derived as
//! `mix(mix(mix(master, DROP), snr_index), drop_index)` with
//! domain-separated sub-streams for data bits, both phase-noise
//! trajectories, the channel realization, and the additive noise, so no
//! stream reuses another's draws. Scheduling runs in fixed-size batches
//! reduced in index order, making results independent of thread count.

mod config;
mod csvout;
mod drop;
mod sweep;

pub use config::{
    ChannelSection, FecSection, LinkConfig, NumerologySection, PnSection, PtrsSection,
    SweepSection, WaveformSection,
};
pub use csvout::{points_csv, summary_csv, write_config_snapshot, write_sweep_outputs};
pub use drop::{despread_sinr, run_drop, DropResult, LinkContext};
pub use sweep::{
    compare_schemes, monotonicity_flags, required_snr_at_target, run_point, run_sweep,
    SchemeComparison, SnrPoint, SweepResult, BLER_TARGET, DROP_BATCH, EARLY_EXIT_BLER,
};
