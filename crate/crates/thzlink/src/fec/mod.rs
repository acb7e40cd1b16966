//! Forward error correction: CRC-24 transport blocks over a rate-2/3
//! quasi-cyclic LDPC code.
//!
//! One slot carries one transport block. The lifting size is chosen as
//! the largest that fits the available coded bits, the payload is the
//! systematic part minus a 24-bit CRC, and decode success requires both
//! a satisfied LDPC parity check and a passing CRC.

pub mod crc;
pub mod ldpc;

pub use crc::{attach_crc, check_crc, crc24, CRC_BITS};
pub use ldpc::{encode, parity_ok, CodeConfig, LdpcCode, LdpcOutcome};

use crate::error::{Result, SimError};

/// Result of decoding one transport block.
#[derive(Debug, Clone)]
pub struct DecodeOutcome {
    /// Recovered payload bits (without CRC), valid when `success`.
    pub payload: Vec<u8>,
    /// Block decoded correctly: parity check and CRC both passed.
    pub success: bool,
    /// LDPC parity check satisfied.
    pub parity_ok: bool,
    /// CRC over the systematic part passed.
    pub crc_ok: bool,
    /// LDPC iterations used.
    pub iterations: usize,
}

/// Attach the CRC and LDPC-encode one payload of `cfg.payload_bits()` bits.
pub fn encode_block(payload: &[u8], cfg: &CodeConfig) -> Result<Vec<u8>> {
    if payload.len() != cfg.payload_bits() {
        return Err(SimError::InvalidArgument(format!(
            "expected {} payload bits, got {}",
            cfg.payload_bits(),
            payload.len()
        )));
    }
    encode(&attach_crc(payload), cfg)
}

/// Decode one transport block from codeword LLRs (positive = bit 0).
pub fn decode_block(llrs: &[f32], code: &LdpcCode, max_iters: usize) -> DecodeOutcome {
    let out = code.decode(llrs, max_iters);
    let info = &out.codeword[..code.config().info_bits()];
    let crc_ok = check_crc(info);
    DecodeOutcome {
        payload: info[..code.config().payload_bits()].to_vec(),
        success: out.parity_ok && crc_ok,
        parity_ok: out.parity_ok,
        crc_ok,
        iterations: out.iterations,
    }
}
