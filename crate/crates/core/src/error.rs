use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TiaError {
    #[error("lattice mismatch: {0}")]
    LatticeMismatch(String),

    #[error("invalid generator: {0}")]
    InvalidGenerator(String),

    #[error("invalid lattice: {0}")]
    InvalidLattice(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("density is not proportional to a basis density: {0}")]
    NotInBasis(String),

    #[error("factor outside the star domain W: {0}")]
    NotInW(String),

    #[error("augmentation needs a chain of decorated points, found {0}")]
    NotAPointChain(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("inner product is singular: {0}")]
    SingularGram(String),

    #[error("implicit midpoint did not converge at step {step} (residual {residual:e})")]
    MidpointDiverged { step: usize, residual: f64 },
}

pub type Result<T> = std::result::Result<T, TiaError>;
