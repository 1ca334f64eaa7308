//! File formats, JSON reports and the `cellcover` command-line tool.

pub mod cli;
pub mod format;
pub mod report;
pub mod sweep;
