#![no_main]

use flga::snapshot::{read_csv, write_csv};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(state) = read_csv(data) {
        let mut out = Vec::new();
        write_csv(&state, &mut out).unwrap();
        let again = read_csv(&out[..]).expect("written snapshot reads back");
        assert_eq!(again.f.len(), state.f.len());
        for (a, b) in again.f.iter().zip(&state.f) {
            assert!(a == b || (a.is_nan() && b.is_nan()));
        }
    }
});
