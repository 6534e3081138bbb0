#![no_main]

use cogrisk::trajectory_csv::{parse_trajectories, to_scenario, write_trajectories};
use cogrisk_core::PedestrianModelKind::CrSfm;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(set) = parse_trajectories(text, "fuzz") {
        let again = parse_trajectories(&write_trajectories(&set), "fuzz").expect("written tables parse");
        assert_eq!(again.agent_ids, set.agent_ids);
        let _ = to_scenario(&set, "fuzz", CrSfm, 0);
    }
});
