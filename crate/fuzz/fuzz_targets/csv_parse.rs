#![no_main]

use binquant::tensor::{format_csv, parse_csv};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(v) = parse_csv(text) {
        assert_eq!(parse_csv(&format_csv(&v)).unwrap(), v);
    }
});
