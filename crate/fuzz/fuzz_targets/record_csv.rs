#![no_main]

use ecg_bench::data::{parse_record, render_record};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(record) = parse_record(text) {
        let again = parse_record(&render_record(&record)).expect("rendered record parses");
        assert_eq!(again.id, record.id);
        assert_eq!(again.label, record.label);
    }
});
