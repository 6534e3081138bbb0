#![no_main]

use cogrisk::ndjson::{read_log, write_log};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(log) = read_log(text, "fuzz") {
        assert_eq!(read_log(&write_log(&log), "fuzz").expect("written logs parse"), log);
    }
});
