use std::fmt;

use wqed::Error;

pub const OK: i32 = 0;
pub const USAGE: i32 = 2;
pub const VERIFY_FAILED: i32 = 3;
pub const NUMERICAL: i32 = 4;

#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

/// Exit status for a failed run.
pub fn code_for(err: &anyhow::Error) -> i32 {
    if err.downcast_ref::<UsageError>().is_some() {
        return USAGE;
    }
    match err.downcast_ref::<Error>() {
        Some(Error::Domain(_) | Error::Range(_) | Error::Capacity(_)) => USAGE,
        Some(_) => NUMERICAL,
        // I/O and serialization failures
        None => 1,
    }
}
