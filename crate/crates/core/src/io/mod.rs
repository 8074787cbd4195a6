//! Run configuration files and the trace CSV format.

mod config;
mod csv;

pub use config::{parse_config, parse_config_with_warnings, RunConfig, StopKind, CONFIG_KEYS};
pub use csv::{read_trace_csv, read_trace_file, write_trace_csv, write_trace_file, CSV_HEADER};
