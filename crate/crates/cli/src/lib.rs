//! Standard-library companion of `gbirthday-core`: the instance file
//! format, CSV and SVG renderings, run manifests, the thread-parallel Monte
//! Carlo driver and the `gbirthday` command line.

pub mod app;
pub mod instance_file;
pub mod manifest;
pub mod parallel;
pub mod report;
pub mod svg;

pub use gbirthday_core as core;
