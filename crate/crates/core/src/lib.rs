pub mod calculus;
pub mod data;
pub mod error;
pub mod matfun;
pub mod operators;
pub mod oracle;
pub mod solver;
pub mod verify;

pub use error::{Error, Result};
pub use matfun::{ComplexMatrix, LUFactorization, C64};
