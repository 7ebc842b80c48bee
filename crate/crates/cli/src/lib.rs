//! Command-line front end: expression parsing, example families, reports.

pub mod app;
pub mod families;
pub mod parse;
pub mod report;
