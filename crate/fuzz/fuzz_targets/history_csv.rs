#![no_main]

use ecg_bench::train::{parse_history, render_history};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(history) = parse_history(text) {
        let again = parse_history(&render_history(&history)).expect("rendered history parses");
        assert_eq!(again.len(), history.len());
    }
});
