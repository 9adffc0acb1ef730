//! Sparse-precision Gaussian estimation and Gaussian-Markov-random-field
//! mixture models.
//!
//! * [`mle`]: maximum likelihood for a precision matrix restricted to a known
//!   support, solved by projected Newton with a preconditioned CG inner loop.
//! * [`glasso`]: diagonal-unpenalized graphical lasso (proximal Newton over a
//!   free set) and the two-step debiased estimator built on it.
//! * [`mixture`]: EM for mixtures whose M-step uses any of the estimators.
//! * [`synthetic`]: lattice Laplacian and anisotropic-diffusion precisions and
//!   an exact GMRF sampler.
//! * [`evaluation`]: NMI/VI and the eigenvalue-bias diagnostics.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod data;
pub mod error;
pub mod evaluation;
pub mod experiments;
pub mod glasso;
pub mod io;
pub mod linalg;
pub mod mixture;
pub mod mle;
pub mod par;
pub mod rng;
pub mod synthetic;

pub use data::DataMatrix;
pub use error::{Error, Result};
pub use linalg::{PatternMatrix, SparseSpd, SupportPattern, SymmetricDense};
