#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(args) = semicirc::io::config_to_args(text) {
            assert!(args.iter().filter(|a| a.starts_with("--")).count() * 2 >= args.len());
        }
    }
});
