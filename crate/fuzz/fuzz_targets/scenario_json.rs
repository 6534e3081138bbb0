#![no_main]

use cogrisk::scenario_file::{parse_scenario, ScenarioFile};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(scenario) = parse_scenario(text, "fuzz") {
        let again = ScenarioFile::from_scenario(&scenario).to_json();
        parse_scenario(&again, "fuzz").expect("written scenarios parse");
    }
});
