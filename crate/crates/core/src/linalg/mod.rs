//! Dense and pattern-sparse symmetric matrices and SPD factorizations.

mod dense;
mod pattern;
mod spd;

pub use dense::{cholesky, eigenvalues_sym, CholeskyFactor, SymmetricDense};
pub use pattern::{project_to_pattern, PatternJson, PatternMatrix, SupportPattern};
pub use spd::{spd_inverse, SparseSpd, SparseSpdJson};
