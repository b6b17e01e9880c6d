//! Graded linear algebra, dg-algebras, Hodge data, homotopy transfer and the
//! residual checkers for the A∞-identities.

pub mod algebra;
pub mod graded;
pub mod hodge;
pub mod homotopy;
pub mod residual;
pub mod samples;
pub mod transfer;

pub use algebra::{AlgebraDoc, DgAlgebra};
pub use graded::{BasisLabel, GradedBasis, GradedElement, MultiLinear};
pub use hodge::{hodge_data, HodgeData};
pub use homotopy::{homotopy_between, solve_f2, HomotopyFit};
pub use residual::{
    ainf_morphism_residual, ainf_residual, ainf_residual_at, homotopy_m3_residual,
    pairing_cyclic_residual, q_adjoint_residual,
};
pub use transfer::{
    inclusion_morphism, lambda_n, transfer, transfer_from_table, AinfMorphism, AinfStructure,
    LambdaTable,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AinfError {
    #[error("duplicate basis label {0:?}")]
    DuplicateLabel(String),
    #[error("expected {expected} coefficients, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("basis index {0} out of range")]
    IndexOutOfRange(usize),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("element is not homogeneous")]
    NotHomogeneous,
    #[error("map does not respect degrees (largest offending entry {0:e})")]
    DegreeInconsistent(f64),
    #[error("d∘d is nonzero (max entry {0:e})")]
    DSquaredNonzero(f64),
    #[error("multiplication is not associative (residual {0:e})")]
    NotAssociative(f64),
    #[error("d is not a derivation (residual {0:e})")]
    LeibnizViolated(f64),
    #[error("inner product is not Hermitian (residual {0:e})")]
    InnerNotHermitian(f64),
    #[error("inner product is not positive definite (smallest eigenvalue {0:e})")]
    InnerNotPositive(f64),
    #[error("inner product pairs different degrees")]
    InnerMixesDegrees,
    #[error("Hodge data needs an inner product")]
    MissingInner,
    #[error("1 - Qd - dQ differs from the harmonic projector by {0:e}")]
    ProjectorMismatch(f64),
    #[error("singular {0}")]
    Singular(&'static str),
    #[error("arity {0} is below the minimum of 2")]
    ArityTooSmall(usize),
    #[error("pairing is not Q-adjoint (residual {0:e})")]
    AdjointnessViolated(f64),
    #[error("invalid algebra document: {0}")]
    Json(String),
}
