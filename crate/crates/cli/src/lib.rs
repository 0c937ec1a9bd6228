//! Library half of the `asymcat` command-line tool: the problem-file
//! model, command implementations, and output rendering. The binary in
//! `main.rs` is a thin argument-parsing layer over this crate.

pub mod commands;
pub mod file;
pub mod report;

pub use commands::{CliError, ComposeArgs, GlobalOpts};
pub use file::{parse_problem_file, FileError, ProblemFile, FORMAT_VERSION};
pub use report::CommandOutput;
