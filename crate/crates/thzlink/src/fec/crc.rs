//! CRC-24A (polynomial 0x864CFB, as in TS 38.212) over bit sequences.

/// CRC length in bits.
pub const CRC_BITS: usize = 24;

const POLY: u32 = 0x86_4C_FB;
const MASK: u32 = 0xFF_FF_FF;

/// CRC-24A remainder of `bits` (each element 0 or 1), MSB-first.
pub fn crc24(bits: &[u8]) -> [u8; CRC_BITS] {
    let mut reg: u32 = 0;
    for &b in bits {
        let feedback = ((reg >> 23) & 1) ^ u32::from(b & 1);
        reg = (reg << 1) & MASK;
        if feedback == 1 {
            reg ^= POLY;
        }
    }
    let mut out = [0u8; CRC_BITS];
    for (i, bit) in out.iter_mut().enumerate() {
        *bit = ((reg >> (CRC_BITS - 1 - i)) & 1) as u8;
    }
    out
}

/// Append the CRC-24A of `payload` to it.
pub fn attach_crc(payload: &[u8]) -> Vec<u8> {
    let crc = crc24(payload);
    let mut out = Vec::with_capacity(payload.len() + CRC_BITS);
    out.extend_from_slice(payload);
    out.extend_from_slice(&crc);
    out
}

/// True when the trailing 24 bits are the CRC of the leading bits.
pub fn check_crc(block: &[u8]) -> bool {
    if block.len() <= CRC_BITS {
        return false;
    }
    // Remainder of the full block (payload + CRC) is zero for a valid block.
    crc24(block).iter().all(|&b| b == 0)
}
