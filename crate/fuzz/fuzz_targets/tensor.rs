#![no_main]

use ecg_bench::data::{decode_feature_tensor, parse_tensor_sidecar};
use libfuzzer_sys::fuzz_target;

// Input: u16 LE sidecar length, sidecar JSON, then the raw payload.
fuzz_target!(|data: &[u8]| {
    if data.len() < 2 {
        return;
    }
    let n = u16::from_le_bytes([data[0], data[1]]) as usize;
    let rest = &data[2..];
    if n > rest.len() {
        return;
    }
    let Ok(text) = std::str::from_utf8(&rest[..n]) else { return };
    if let Ok(sidecar) = parse_tensor_sidecar(text) {
        let _ = decode_feature_tensor(&sidecar, &rest[n..]);
    }
});
