//! Operational surface of the toolkit: file formats, scenario generation and
//! ingestion, calibration, rendering and the command line.

pub mod calibrate;
pub mod cli;
pub mod config;
pub mod error;
pub mod generate;
pub mod io;
pub mod ndjson;
pub mod par;
pub mod render;
pub mod scenario_file;
pub mod seeds;
pub mod trajectory_csv;

pub use error::{Result, ShellError};
