#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(rows) = semicirc::io::read_decay(data) {
        let mut buf = Vec::new();
        semicirc::io::write_decay(&mut buf, &rows).unwrap();
        assert_eq!(semicirc::io::read_decay(buf.as_slice()).unwrap().len(), rows.len());
        let _ = semicirc::io::crossover_curves(&rows);
    }
});
