use thiserror::Error;

/// Failures reading the text formats (rational literals, map files, orbit files).
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("malformed rational literal `{0}`")]
    Rational(String),
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },
    #[error("malformed orbit: {0}")]
    Orbit(String),
    #[error("invalid map: {0}")]
    Map(String),
}
