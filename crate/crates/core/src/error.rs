use alloc::string::String;
use core::fmt;

/// Error type shared by all modules.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A parameter is outside its legal range.
    InvalidArgument(String),
    /// A replica exceeded its particle budget; never silently truncated.
    PopulationCap { created: usize, cap: usize },
    /// An iterative solve failed to converge; carries diagnostics.
    NoConvergence(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidArgument(msg) => write!(f, "invalid argument: {msg}"),
            Error::PopulationCap { created, cap } => {
                write!(f, "population cap exceeded: {created} particles created, cap {cap}")
            }
            Error::NoConvergence(msg) => write!(f, "no convergence: {msg}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Error {}

macro_rules! invalid {
    ($($arg:tt)*) => {
        $crate::Error::InvalidArgument(alloc::format!($($arg)*))
    };
}
pub(crate) use invalid;
