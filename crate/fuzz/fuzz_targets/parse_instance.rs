#![no_main]

use boxlab_core::Instance;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(inst) = Instance::from_json_bytes(data) {
        // accepted instances must survive a round trip
        let again = Instance::from_json_str(&inst.to_json_string()).expect("round trip");
        assert_eq!(again.to_json_string(), inst.to_json_string());
    }
});
