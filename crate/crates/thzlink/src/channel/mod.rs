//! Effective 2x2 Rician tapped-delay-line channel derived from the
//! TR 38.901 CDL-E cluster profile, with Jakes Doppler, and per-subcarrier
//! MMSE equalization.
//!
//! The LOS ray carries `K/(K+1)` of the power on the first tap through a
//! fixed polarization-mixing rotation; the cluster powers share the
//! remaining `1/(K+1)` as independently Rayleigh-fading 2x2 matrices. The
//! per-tap matrices are normalized so each receive port collects unit
//! average power for a unit-total-power transmission in either rank mode
//! (row and column expected powers equal 2 per entry-pair).

mod fading;
mod mmse;
mod profile;

pub use fading::{apply_channel, realize_channel, Mat2, MimoChannelRealization};
pub use mmse::{mmse_equalize, EqualizedSlot};
pub use profile::{ChannelKind, ChannelProfile, SPEED_OF_LIGHT_MPS};
