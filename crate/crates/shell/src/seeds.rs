//! Every random stream in the toolkit is derived from one master seed.

/// Sub-seed for scenario generation.
pub const GENERATE: u64 = 1;
/// Sub-seed for training.
pub const TRAIN: u64 = 2;
/// Sub-seed for stochastic evaluation policies.
pub const EVAL: u64 = 3;
/// Sub-seed for calibration sampling.
pub const CALIBRATE: u64 = 4;
/// Sub-seed for single-episode simulation.
pub const SIMULATE: u64 = 5;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for substream `component` of `master`.
pub fn derive(master: u64, component: u64) -> u64 {
    splitmix64(splitmix64(master) ^ component.wrapping_mul(0xd1b5_4a32_d192_ed03))
}
