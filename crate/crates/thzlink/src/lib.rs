//! Link-level simulator for sub-THz (FR2-2 and above) NR-style radio links.
//!
//! The crate models a single downlink between one base station and one user
//! terminal at carrier frequencies around 90 GHz: CP-OFDM and DFT-s-OFDM
//! (SC-FDMA) waveforms, oscillator phase noise on both ends, a Rician
//! tapped-delay-line channel derived from the CDL-E profile of 3GPP TR 38.901,
//! phase-tracking reference signals with several estimation schemes, a
//! rate-2/3 quasi-cyclic LDPC code, and a Monte-Carlo block-error-rate
//! harness.
//!
//! Conventions used throughout:
//! * all DFTs are unitary (`1/sqrt(N)` on both directions), so energy is
//!   identical in time and frequency domain;
//! * resource elements carry unit average energy at the transmitter before
//!   per-layer power scaling;
//! * per-resource-element SNR is defined against noise of variance
//!   `10^(-snr_db/10)` per receive port.

pub mod channel;
pub mod error;
pub mod fec;
pub mod harness;
pub mod impairments;
pub mod math;
pub mod modulation;
pub mod numerology;
pub mod ptrs;
pub mod waveform;

pub use error::SimError;
