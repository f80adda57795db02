//! Finite-field arithmetic over GF(2^m) and Reed-Solomon codes on top of it.

pub mod field;
pub mod rs;

pub use field::{FieldContext, FieldError, Gf};
pub use rs::{ReedSolomon, RsError};
