//! Error types shared across the crate.

use core::fmt;

/// Errors produced by sketch construction, estimation, theory evaluation, and
/// the exact oracle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// A parameter lies outside its mathematical domain.
    Domain(&'static str),
    /// A parameter set is structurally valid but not realizable by any pair of
    /// sets (e.g. a resemblance larger than the cardinality ratio permits).
    Infeasible(&'static str),
    /// Two sketches cannot be compared because their parameters differ.
    Incompatible(&'static str),
    /// A serialized sketch could not be decoded.
    Parse(ParseError),
}

/// Decoding failures for the binary sketch format, kept distinct so callers
/// can tell corruption from version skew.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParseError {
    /// Input does not start with the `BBMH` magic bytes.
    BadMagic,
    /// Format version not understood by this crate.
    UnsupportedVersion(u8),
    /// Unknown sketch kind tag.
    BadKind(u8),
    /// Input ended before the declared payload and checksum.
    Truncated,
    /// CRC32 over header and payload does not match the stored value.
    ChecksumMismatch,
    /// Header fields are internally inconsistent.
    BadHeader(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
            Error::Infeasible(msg) => write!(f, "infeasible parameters: {msg}"),
            Error::Incompatible(msg) => write!(f, "incompatible sketches: {msg}"),
            Error::Parse(e) => write!(f, "parse error: {e}"),
        }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseError::BadMagic => write!(f, "bad magic bytes"),
            ParseError::UnsupportedVersion(v) => write!(f, "unsupported format version {v}"),
            ParseError::BadKind(k) => write!(f, "unknown sketch kind {k}"),
            ParseError::Truncated => write!(f, "truncated input"),
            ParseError::ChecksumMismatch => write!(f, "checksum mismatch"),
            ParseError::BadHeader(msg) => write!(f, "inconsistent header: {msg}"),
        }
    }
}

impl From<ParseError> for Error {
    fn from(e: ParseError) -> Self {
        Error::Parse(e)
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Error {}

#[cfg(feature = "std")]
impl std::error::Error for ParseError {}

/// Crate-wide result alias.
pub type Result<T> = core::result::Result<T, Error>;
