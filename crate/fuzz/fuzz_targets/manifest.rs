#![no_main]

use ecg_bench::data::parse_manifest;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(manifest) = parse_manifest(text, "base") {
        let again = parse_manifest(&manifest.to_json(), "base").expect("rendered manifest parses");
        assert_eq!(again.labels(), manifest.labels());
    }
});
