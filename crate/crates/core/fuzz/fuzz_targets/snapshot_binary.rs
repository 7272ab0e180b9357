#![no_main]

use flga::snapshot::{decode_binary, encode_binary};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(state) = decode_binary(data) {
        assert_eq!(encode_binary(&state), data);
    }
});
