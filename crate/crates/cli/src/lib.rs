//! Operator CLI over the detection engine; the subcommand implementations
//! live here so integration tests can call them in-process.

pub mod commands;
pub mod config;

use chainwatch_core::Error;

/// Process exit codes: 0 success, 2 usage (from the argument parser),
/// then one code per failure family.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Io(_) => 5,
        Error::Numeric(_) => 4,
        _ => 3,
    }
}
