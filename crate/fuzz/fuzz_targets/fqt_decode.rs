#![no_main]

use binquant::tensor::{decode_fqt, encode_fqt};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(t) = decode_fqt(data) {
        let again = encode_fqt(&t);
        assert_eq!(decode_fqt(&again).unwrap(), t);
    }
});
