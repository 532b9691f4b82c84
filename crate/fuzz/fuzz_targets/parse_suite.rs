#![no_main]

use boxlab_cli::suite::SuiteSpec;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let _ = serde_json::from_slice::<SuiteSpec>(data);
});
