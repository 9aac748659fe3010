//! Command-line driver for `zn-elliptic`: config resolution, CSV and
//! manifest formats, and the JSON run report.

pub mod config;
pub mod csv_io;
pub mod error;
pub mod manifest;
pub mod report;
pub mod run;
