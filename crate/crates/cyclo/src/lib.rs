//! Exact arithmetic over cyclotomic fields Q(ζ_N) and dense linear algebra on top of it.

mod field;
mod idempotent;
mod matrix;
mod poly;
mod scalar;
mod signature;
mod text;

pub use field::{cyclotomic_poly, field, Field};
pub use idempotent::lift_idempotent;
pub use matrix::MatrixS;
pub use poly::{min_poly, roots_in_field, Poly};
pub use scalar::Scalar;
pub use signature::{sym_int_signature, sym_rational_signature};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KernelError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("matrix is not symmetric")]
    NotSymmetric,
    #[error("idempotent lifting did not converge within {0} iterations")]
    NoConvergence(usize),
    #[error("cannot parse scalar {text:?}: {msg}")]
    Parse { text: String, msg: String },
    #[error("field mismatch: Q(zeta_{0}) vs Q(zeta_{1})")]
    FieldMismatch(u32, u32),
}
