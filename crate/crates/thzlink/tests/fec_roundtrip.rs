//! Noiseless end-to-end FEC identity: payload -> CRC -> LDPC -> map ->
//! demap at extreme SINR -> decode must reproduce the payload exactly,
//! for every supported modulation order, with zero decoder iterations.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use thzlink::fec::{decode_block, encode_block, CodeConfig, LdpcCode};
use thzlink::modulation::Modulation;

#[test]
fn noiseless_roundtrip_is_exact_for_all_modulations() {
    // 33z = 792 coded bits: divisible by 2, 4, 6 and 8 bits/symbol.
    let cfg = CodeConfig::new(24).unwrap();
    let code = LdpcCode::new(cfg);
    let mods = [
        Modulation::Qpsk,
        Modulation::Qam16,
        Modulation::Qam64,
        Modulation::Qam256,
    ];
    let blocks_per_mod = 250; // 1000 blocks in total
    let mut rng = ChaCha8Rng::seed_from_u64(0xF0F0);
    let mut llrs = Vec::new();
    for modulation in mods {
        let sinr = vec![1e9; cfg.codeword_bits() / modulation.bits_per_symbol()];
        for block in 0..blocks_per_mod {
            let payload: Vec<u8> =
                (0..cfg.payload_bits()).map(|_| rng.gen_range(0..2u8)).collect();
            let cw = encode_block(&payload, &cfg).unwrap();
            let symbols = modulation.map_bits(&cw).unwrap();
            llrs.clear();
            modulation.demap_llr(&symbols, &sinr, &mut llrs);
            let out = decode_block(&llrs, &code, 25);
            assert!(
                out.success,
                "{} block {block}: decode failed (parity {}, crc {})",
                modulation.name(),
                out.parity_ok,
                out.crc_ok
            );
            assert_eq!(
                out.payload,
                payload,
                "{} block {block}: payload mismatch",
                modulation.name()
            );
            assert_eq!(
                out.iterations, 0,
                "{} block {block}: noiseless decode should not iterate",
                modulation.name()
            );
        }
    }
}
