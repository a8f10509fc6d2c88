//! Error type shared by every module.

use alloc::string::String;

/// Failure modes of the library.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A parameter violates an operation's precondition.
    #[error("parameter error: {0}")]
    Param(String),
    /// A density or statistic evaluated to a non-finite value.
    #[error("numeric error: {0}")]
    Numeric(String),
    /// An input violates a structural contract (shape, symmetry).
    #[error("contract error: {0}")]
    Contract(String),
    /// The request exceeds an enumeration limit.
    #[error("refused: {0}")]
    Refused(String),
    /// The operation does not support the requested problem.
    #[error("unsupported: {0}")]
    Unsupported(String),
}

/// Result alias.
pub type Result<T> = core::result::Result<T, Error>;

macro_rules! param_err {
    ($($arg:tt)*) => { $crate::error::Error::Param(alloc::format!($($arg)*)) };
}
macro_rules! ensure {
    ($cond:expr, $($arg:tt)*) => {
        if !$cond { return Err($crate::error::Error::Param(alloc::format!($($arg)*))); }
    };
}
pub(crate) use ensure;
pub(crate) use param_err;
