//! Transceiver impairments: oscillator phase noise, the Rapp power
//! amplifier with its back-off search, additive noise, and the EVM/ACLR
//! measurements the back-off search is driven by.

mod awgn;
mod backoff;
mod metrics;
mod pa;
mod pn;

pub use awgn::apply_awgn;
pub use backoff::{
    diag_eval, evm_limit_pct, required_backoff, required_backoff_with_limits, BackoffResult,
    ACLR_LIMIT_DB,
};
pub use metrics::{measure_aclr, measure_evm};
pub use pa::{apply_pa, PaModel};
pub use pn::{apply_pn, psd_match_worst_band_db, synthesize_pn, PnPoleZeroModel, PnProfile};
