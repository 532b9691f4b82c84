#![no_main]

use boxlab_cli::report::RunReport;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(report) = RunReport::from_json(text) {
        let again = RunReport::from_json(&report.to_json()).expect("round trip");
        assert_eq!(again.to_json(), report.to_json());
    }
});
