#![no_main]

use flga::qflga::Circuit;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|text: &str| {
    if let Ok(c) = Circuit::parse(text) {
        let printed = c.to_string();
        let again = Circuit::parse(&printed).expect("printed circuit parses");
        assert_eq!(again.to_string(), printed);
    }
});
