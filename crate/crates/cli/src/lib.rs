//! Command-line front end for `qinterf-core`: config files, threaded
//! sampling, the theorem fuzzer and report rendering.

pub mod app;
pub mod config;
pub mod fuzz;
pub mod parallel;
pub mod report;
