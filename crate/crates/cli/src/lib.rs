//! Configuration, artifact formats and subcommand drivers of `diracres`.

pub mod config;
pub mod pipeline;
pub mod records;
