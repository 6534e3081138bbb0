#![no_main]

use cogrisk::config::ToolkitConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(config) = ToolkitConfig::from_toml(text, "fuzz") {
        assert_eq!(ToolkitConfig::from_toml(&config.to_toml(), "fuzz").expect("written configs parse"), config);
    }
});
