#![no_main]

use binquant::quantizers::{decode_bqt, encode_bqt};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(q) = decode_bqt(data) {
        let again = encode_bqt(&q);
        assert_eq!(decode_bqt(&again).unwrap(), q);
        let _ = q.reconstruct();
    }
});
