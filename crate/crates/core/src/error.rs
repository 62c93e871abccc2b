use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
    #[error("postselection impossible: success probability {0:e}")]
    PostselectionImpossible(f64),
    #[error("capacity exceeded: {0}")]
    Capacity(String),
    #[error("linear program failed: {0}")]
    Lp(String),
    #[error("not implemented: {0}")]
    Unsupported(String),
    #[error("ensemble produced no usable trajectories ({excluded} excluded)")]
    EmptyEnsemble { excluded: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_probability(name: &str, p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) || p.is_nan() {
        return Err(Error::InvalidParameter(format!("{name} = {p} outside [0, 1]")));
    }
    Ok(())
}
