#![no_main]

use ecg_bench::train::{decode_checkpoint, parse_checkpoint_meta};
use libfuzzer_sys::fuzz_target;

// Input: u16 LE metadata length, metadata JSON, then the raw payload.
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
    if let Ok(meta) = parse_checkpoint_meta(text) {
        let _ = decode_checkpoint(meta, &rest[n..]);
    }
});
