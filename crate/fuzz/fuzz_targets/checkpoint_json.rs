#![no_main]

use cogrisk_neural::Checkpoint;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(ckpt) = Checkpoint::from_json(text) {
        assert_eq!(Checkpoint::from_json(&ckpt.to_json()).expect("written checkpoints parse"), ckpt);
    }
});
