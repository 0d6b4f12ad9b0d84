#![no_main]

use ecg_bench::config::parse_experiment_config;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(cfg) = parse_experiment_config(text) {
        assert_eq!(parse_experiment_config(&cfg.to_json()).expect("rendered config parses"), cfg);
    }
});
