#![no_main]

use cogrisk::calibrate::CalibrationSpec;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(spec) = serde_json::from_slice::<CalibrationSpec>(data) {
        let _ = spec.validate();
    }
});
