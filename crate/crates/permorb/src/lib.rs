//! Command-line front end for `permorb-core`: CSV and JSON formats,
//! checkpointed certification and thread-parallel runners.

pub mod checkpoint;
pub mod commands;
pub mod csv_io;
pub mod error;
pub mod json;
pub mod runners;
