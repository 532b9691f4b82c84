#![no_main]

use boxlab_core::ExtendedExponent;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let _ = text.parse::<ExtendedExponent>();
    let _ = serde_json::from_str::<ExtendedExponent>(text);
});
