#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(rows) = semicirc::io::read_sweep(data) {
        let mut buf = Vec::new();
        semicirc::io::write_sweep(&mut buf, &rows).unwrap();
        let again = semicirc::io::read_sweep(buf.as_slice()).unwrap();
        assert_eq!(again.len(), rows.len());
        let _ = semicirc::io::tau_points(&rows);
    }
});
