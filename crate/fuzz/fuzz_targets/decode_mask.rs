#![no_main]

use boxlab_core::bitmask::{from_hex, to_hex};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Some((&len, rest)) = data.split_first() else { return };
    let Ok(text) = std::str::from_utf8(rest) else { return };
    if let Ok(bits) = from_hex(text, len as usize) {
        assert_eq!(bits.len(), len as usize);
        assert_eq!(from_hex(&to_hex(&bits), bits.len()).unwrap(), bits);
    }
});
