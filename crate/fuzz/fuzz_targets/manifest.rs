#![no_main]

use libfuzzer_sys::fuzz_target;
use semicirc::io::RunManifest;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(m) = RunManifest::parse(text) {
            let json = m.to_json().unwrap();
            let _ = RunManifest::parse(&json).unwrap();
            let _ = semicirc::io::config_to_args(&json);
        }
    }
});
