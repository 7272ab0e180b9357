#![no_main]

use flga::harness::RunConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|text: &str| {
    if let Ok(cfg) = RunConfig::parse(text) {
        assert!(cfg.validate().is_empty());
    }
});
