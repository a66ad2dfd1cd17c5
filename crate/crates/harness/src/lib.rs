//! Benchmark harness for reliability quantification experiments: dataset
//! registry, experiment runners and report emission. The `reliaq` binary is a
//! thin CLI over this library.

#![forbid(unsafe_code)]

pub mod config;
pub mod experiments;
pub mod gen;
pub mod registry;
pub mod report;
