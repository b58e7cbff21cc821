use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// Malformed textual input such as a half-integer label.
    #[error("parse error: {0}")]
    Parse(String),
    /// A numerical procedure failed to reach its accuracy target.
    #[error("numerical error: {0}")]
    Numerical(String),
    /// Two independent constructions of the same object disagree.
    #[error("internal consistency error: {0}")]
    Consistency(String),
    /// The integrator step size collapsed, typically near a singular endpoint.
    #[error("step size underflow at omega = {omega:e}")]
    Singularity { omega: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
