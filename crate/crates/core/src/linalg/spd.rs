use std::sync::Arc;

use faer::Mat;
use serde::{Deserialize, Serialize};

use super::dense::{cholesky_faer, CholeskyFactor, SymmetricDense};
use super::pattern::{PatternMatrix, SupportPattern};
use crate::error::{Error, Result};

/// Symmetric positive-definite precision matrix stored on a support pattern,
/// with its Cholesky factor and log-determinant cached at construction.
#[derive(Clone, Debug)]
pub struct SparseSpd {
    matrix: PatternMatrix,
    chol: CholeskyFactor,
}

impl SparseSpd {
    /// Validates positive-definiteness and caches the factorization.
    pub fn new(matrix: PatternMatrix) -> Result<Self> {
        let n = matrix.dim();
        let mut dense = Mat::<f64>::zeros(n, n);
        for (&(i, j), &v) in matrix.pattern().pairs().iter().zip(matrix.values()) {
            dense[(j, i)] = v;
            dense[(i, j)] = v;
        }
        let chol = cholesky_faer(dense.as_ref())?;
        Ok(Self { matrix, chol })
    }

    pub fn from_parts(pattern: Arc<SupportPattern>, values: Vec<f64>) -> Result<Self> {
        Self::new(PatternMatrix::new(pattern, values)?)
    }

    pub fn identity(n: usize) -> Self {
        Self::new(PatternMatrix::identity(n)).expect("identity is SPD")
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        Self::new(PatternMatrix::from_diagonal(diag))
    }

    /// The dense matrix on the full pattern.
    pub fn from_dense(m: &SymmetricDense) -> Result<Self> {
        Self::new(PatternMatrix::restrict(m, Arc::new(SupportPattern::full(m.dim())))?)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn pattern(&self) -> &Arc<SupportPattern> {
        self.matrix.pattern()
    }

    pub fn values(&self) -> &[f64] {
        self.matrix.values()
    }

    pub fn matrix(&self) -> &PatternMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> PatternMatrix {
        self.matrix
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.matrix.get(i, j)
    }

    pub fn cholesky(&self) -> &CholeskyFactor {
        &self.chol
    }

    pub fn log_det(&self) -> f64 {
        self.chol.log_det()
    }

    pub fn to_dense(&self) -> SymmetricDense {
        self.matrix.to_dense()
    }

    /// Dense inverse `Q⁻¹`.
    pub fn inverse(&self) -> SymmetricDense {
        self.chol.inverse()
    }

    /// `xᵀ Q x` through the sparse pattern.
    pub fn quad_form(&self, x: &[f64]) -> f64 {
        self.matrix.quad_form(x)
    }

    /// Re-expresses the matrix on a superset pattern (no refactorization).
    pub fn on_pattern(&self, pattern: Arc<SupportPattern>) -> Result<Self> {
        Ok(Self {
            matrix: self.matrix.on_pattern(pattern)?,
            chol: self.chol.clone(),
        })
    }

    /// Drops off-diagonal entries with `|q_ij| <= eps`; refactorizes only if
    /// something was removed.
    pub fn pruned(&self, eps: f64) -> Result<Self> {
        let pruned = self.matrix.pruned(eps);
        if pruned.pattern().len() == self.matrix.pattern().len() {
            return Ok(self.clone());
        }
        Self::new(pruned)
    }

    pub fn to_json(&self) -> SparseSpdJson {
        SparseSpdJson {
            n: self.dim(),
            triplets: self
                .pattern()
                .pairs()
                .iter()
                .zip(self.values())
                .map(|(&(i, j), &v)| (i, j, v))
                .collect(),
        }
    }

    pub fn from_json(json: &SparseSpdJson) -> Result<Self> {
        let pattern = SupportPattern::from_pairs(json.n, json.triplets.iter().map(|&(i, j, _)| (i, j)))?;
        let mut values = vec![0.0; pattern.len()];
        let mut seen = vec![false; pattern.len()];
        for &(i, j, v) in &json.triplets {
            let s = pattern.slot(i, j).expect("pattern built from triplets");
            if seen[s] {
                return Err(Error::InvalidPattern(format!("pair ({i}, {j}) listed twice")));
            }
            seen[s] = true;
            values[s] = v;
        }
        Self::from_parts(Arc::new(pattern), values)
    }
}

/// JSON form `{"n": .., "triplets": [[i, j, value], ..]}` with `i <= j`,
/// each unordered pair listed once.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct SparseSpdJson {
    pub n: usize,
    pub triplets: Vec<(usize, usize, f64)>,
}

impl Serialize for SparseSpd {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for SparseSpd {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let json = SparseSpdJson::deserialize(deserializer)?;
        SparseSpd::from_json(&json).map_err(serde::de::Error::custom)
    }
}

/// Dense inverse of an SPD precision matrix.
pub fn spd_inverse(q: &SparseSpd) -> SymmetricDense {
    q.inverse()
}
