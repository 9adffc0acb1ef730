use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::dense::SymmetricDense;
use crate::error::{Error, Result};

/// Symmetric set of index pairs allowed to be nonzero.
///
/// Pairs are stored once, as `(i, j)` with `i <= j`, sorted; the diagonal is
/// always present. A CSR view over the full symmetric pattern maps each
/// `(row, col)` back to its pair slot.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "PatternJson", try_from = "PatternJson")]
pub struct SupportPattern {
    n: usize,
    pairs: Vec<(usize, usize)>,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    slots: Vec<usize>,
}

impl SupportPattern {
    /// Builds a pattern from arbitrary (possibly repeated, either-order)
    /// pairs. The diagonal is added.
    pub fn from_pairs(n: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidPattern("dimension must be at least 1".into()));
        }
        let mut all: Vec<(usize, usize)> = (0..n).map(|i| (i, i)).collect();
        for (i, j) in pairs {
            if i >= n || j >= n {
                return Err(Error::InvalidPattern(format!("pair ({i}, {j}) out of range for dimension {n}")));
            }
            all.push((i.min(j), i.max(j)));
        }
        all.sort_unstable();
        all.dedup();
        Ok(Self::from_sorted_pairs(n, all))
    }

    fn from_sorted_pairs(n: usize, pairs: Vec<(usize, usize)>) -> Self {
        let mut counts = vec![0usize; n];
        for &(i, j) in &pairs {
            counts[i] += 1;
            if i != j {
                counts[j] += 1;
            }
        }
        let mut row_ptr = vec![0usize; n + 1];
        for i in 0..n {
            row_ptr[i + 1] = row_ptr[i] + counts[i];
        }
        let mut fill = row_ptr.clone();
        let nnz = row_ptr[n];
        let mut cols = vec![0usize; nnz];
        let mut slots = vec![0usize; nnz];
        // Pairs are sorted by (i, j), so inserting (i, j) into row i and
        // (j, i) into row j in this order leaves every row sorted by column.
        let mut entries: Vec<(usize, usize, usize)> = Vec::with_capacity(nnz);
        for (slot, &(i, j)) in pairs.iter().enumerate() {
            entries.push((i, j, slot));
            if i != j {
                entries.push((j, i, slot));
            }
        }
        entries.sort_unstable();
        for (r, c, slot) in entries {
            let at = fill[r];
            cols[at] = c;
            slots[at] = slot;
            fill[r] += 1;
        }
        Self {
            n,
            pairs,
            row_ptr,
            cols,
            slots,
        }
    }

    pub fn diagonal(n: usize) -> Self {
        Self::from_pairs(n, std::iter::empty()).expect("valid dimension")
    }

    pub fn full(n: usize) -> Self {
        let pairs = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();
        Self::from_sorted_pairs(n, pairs)
    }

    /// Tridiagonal (path-graph) pattern.
    pub fn tridiagonal(n: usize) -> Self {
        Self::from_pairs(n, (1..n).map(|i| (i - 1, i))).expect("valid dimension")
    }

    /// Pattern of entries of `m` with `|m_ij| > eps` (plus the diagonal).
    pub fn from_dense_support(m: &SymmetricDense, eps: f64) -> Self {
        let n = m.dim();
        let pairs = (0..n)
            .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
            .filter(|&(i, j)| m.get(i, j).abs() > eps);
        Self::from_pairs(n, pairs).expect("indices in range")
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    /// Number of unordered pairs (diagonal included).
    #[inline]
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Number of stored entries counting `(i, j)` and `(j, i)` separately.
    pub fn nnz(&self) -> usize {
        self.cols.len()
    }

    pub fn off_diagonal_pairs(&self) -> usize {
        self.pairs.len() - self.n
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    /// Columns present in row `i`, ascending, with their pair slots.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[range.clone()].iter().copied().zip(self.slots[range].iter().copied())
    }

    pub fn row_len(&self, i: usize) -> usize {
        self.row_ptr[i + 1] - self.row_ptr[i]
    }

    /// Slot index of pair `{i, j}`, if present.
    pub fn slot(&self, i: usize, j: usize) -> Option<usize> {
        if i >= self.n || j >= self.n {
            return None;
        }
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[range.clone()].binary_search(&j).ok().map(|k| self.slots[range.start + k])
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.slot(i, j).is_some()
    }

    pub fn is_subset_of(&self, other: &SupportPattern) -> bool {
        self.n == other.n && self.pairs.iter().all(|&(i, j)| other.contains(i, j))
    }

    pub fn union(&self, other: &SupportPattern) -> Result<SupportPattern> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: other.n,
            });
        }
        Self::from_pairs(self.n, self.pairs.iter().chain(other.pairs.iter()).copied())
    }

    /// `2` for off-diagonal slots (each stands for two matrix entries), `1` on
    /// the diagonal.
    #[inline]
    pub fn multiplicity(&self, slot: usize) -> f64 {
        let (i, j) = self.pairs[slot];
        if i == j {
            1.0
        } else {
            2.0
        }
    }
}

/// JSON form of a support pattern: `{"n": .., "pairs": [[i, j], ..]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PatternJson {
    pub n: usize,
    pub pairs: Vec<(usize, usize)>,
}

impl From<&SupportPattern> for PatternJson {
    fn from(p: &SupportPattern) -> Self {
        Self {
            n: p.n,
            pairs: p.pairs.clone(),
        }
    }
}

impl From<SupportPattern> for PatternJson {
    fn from(p: SupportPattern) -> Self {
        Self { n: p.n, pairs: p.pairs }
    }
}

impl TryFrom<PatternJson> for SupportPattern {
    type Error = Error;

    fn try_from(j: PatternJson) -> Result<Self> {
        SupportPattern::from_pairs(j.n, j.pairs)
    }
}

/// Symmetric matrix whose entries live on a [`SupportPattern`]; one value per
/// unordered pair. Entries outside the pattern are zero.
#[derive(Clone, Debug, PartialEq)]
pub struct PatternMatrix {
    pattern: Arc<SupportPattern>,
    values: Vec<f64>,
}

impl PatternMatrix {
    pub fn zeros(pattern: Arc<SupportPattern>) -> Self {
        let values = vec![0.0; pattern.len()];
        Self { pattern, values }
    }

    pub fn new(pattern: Arc<SupportPattern>, values: Vec<f64>) -> Result<Self> {
        if values.len() != pattern.len() {
            return Err(Error::DimensionMismatch {
                expected: pattern.len(),
                found: values.len(),
            });
        }
        Ok(Self { pattern, values })
    }

    /// Identity on the diagonal pattern.
    pub fn identity(n: usize) -> Self {
        Self::from_diagonal(&vec![1.0; n])
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        Self {
            pattern: Arc::new(SupportPattern::diagonal(diag.len())),
            values: diag.to_vec(),
        }
    }

    /// Entries of `m` on `pattern`.
    pub fn restrict(m: &SymmetricDense, pattern: Arc<SupportPattern>) -> Result<Self> {
        m.check_dim(pattern.dim())?;
        let values = pattern.pairs().iter().map(|&(i, j)| m.get(i, j)).collect();
        Ok(Self { pattern, values })
    }

    /// Entries of `m` with `|m_ij| > eps` on the off-diagonal (the diagonal is
    /// always kept).
    pub fn sparsify(m: &SymmetricDense, eps: f64) -> Self {
        let pattern = Arc::new(SupportPattern::from_dense_support(m, eps));
        Self::restrict(m, pattern).expect("pattern built from m")
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.pattern.dim()
    }

    pub fn pattern(&self) -> &Arc<SupportPattern> {
        &self.pattern
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.pattern.slot(i, j).map_or(0.0, |s| self.values[s])
    }

    pub fn to_dense(&self) -> SymmetricDense {
        let mut m = SymmetricDense::zeros(self.dim());
        for (&(i, j), &v) in self.pattern.pairs().iter().zip(&self.values) {
            m.set(i, j, v);
        }
        m
    }

    /// Re-expresses the matrix on a superset pattern.
    pub fn on_pattern(&self, pattern: Arc<SupportPattern>) -> Result<Self> {
        if Arc::ptr_eq(&self.pattern, &pattern) {
            return Ok(self.clone());
        }
        if pattern.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: pattern.dim(),
            });
        }
        let mut values = vec![0.0; pattern.len()];
        for (&(i, j), &v) in self.pattern.pairs().iter().zip(&self.values) {
            match pattern.slot(i, j) {
                Some(s) => values[s] = v,
                None if v == 0.0 => {}
                None => {
                    return Err(Error::InvalidPattern(format!(
                        "nonzero entry ({i}, {j}) lies outside the target pattern"
                    )))
                }
            }
        }
        Ok(Self { pattern, values })
    }

    /// Drops off-diagonal entries with `|v| <= eps` from the pattern.
    pub fn pruned(&self, eps: f64) -> Self {
        let keep: Vec<bool> = self
            .pattern
            .pairs()
            .iter()
            .zip(&self.values)
            .map(|(&(i, j), v)| i == j || v.abs() > eps)
            .collect();
        if keep.iter().all(|&k| k) {
            return self.clone();
        }
        let mut pairs = Vec::new();
        let mut values = Vec::new();
        for ((&p, &v), k) in self.pattern.pairs().iter().zip(&self.values).zip(keep) {
            if k {
                pairs.push(p);
                values.push(v);
            }
        }
        Self {
            pattern: Arc::new(SupportPattern::from_sorted_pairs(self.dim(), pairs)),
            values,
        }
    }

    fn check_same_pattern(&self, other: &PatternMatrix) {
        assert!(
            Arc::ptr_eq(&self.pattern, &other.pattern) || self.pattern == other.pattern,
            "operands live on different patterns"
        );
    }

    /// Frobenius inner product `tr(A·B)` over the pattern (off-diagonals
    /// counted twice).
    pub fn dot(&self, other: &PatternMatrix) -> f64 {
        self.check_same_pattern(other);
        self.values
            .iter()
            .zip(&other.values)
            .enumerate()
            .map(|(s, (a, b))| self.pattern.multiplicity(s) * a * b)
            .sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, x| f64::max(m, x.abs()))
    }

    /// `tr(self · m)` for a dense symmetric `m`, touching only pattern entries.
    pub fn trace_product(&self, m: &SymmetricDense) -> Result<f64> {
        m.check_dim(self.dim())?;
        Ok(self
            .pattern
            .pairs()
            .iter()
            .zip(&self.values)
            .enumerate()
            .map(|(s, (&(i, j), v))| self.pattern.multiplicity(s) * v * m.get(i, j))
            .sum())
    }

    /// `self += alpha * other`.
    pub fn axpy(&mut self, alpha: f64, other: &PatternMatrix) {
        self.check_same_pattern(other);
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += alpha * b;
        }
    }

    /// `self + alpha * other`.
    pub fn plus_scaled(&self, alpha: f64, other: &PatternMatrix) -> PatternMatrix {
        let mut out = self.clone();
        out.axpy(alpha, other);
        out
    }

    pub fn scaled(&self, alpha: f64) -> PatternMatrix {
        Self {
            pattern: self.pattern.clone(),
            values: self.values.iter().map(|v| alpha * v).collect(),
        }
    }

    /// Element-wise `λ Σ |v|`, off-diagonals counted twice; the diagonal only
    /// if `include_diagonal`.
    pub fn l1_norm(&self, include_diagonal: bool) -> f64 {
        self.pattern
            .pairs()
            .iter()
            .zip(&self.values)
            .map(|(&(i, j), v)| {
                if i != j {
                    2.0 * v.abs()
                } else if include_diagonal {
                    v.abs()
                } else {
                    0.0
                }
            })
            .sum()
    }

    /// `xᵀ A x` in `O(|Ω|)`.
    pub fn quad_form(&self, x: &[f64]) -> f64 {
        self.pattern
            .pairs()
            .iter()
            .zip(&self.values)
            .map(|(&(i, j), v)| if i == j { v * x[i] * x[i] } else { 2.0 * v * x[i] * x[j] })
            .sum()
    }

    /// `A x`.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim();
        (0..n)
            .map(|i| self.pattern.row(i).map(|(j, s)| self.values[s] * x[j]).sum())
            .collect()
    }
}

/// Zeroes every entry of `m` outside `pattern`.
pub fn project_to_pattern(m: &SymmetricDense, pattern: &SupportPattern) -> Result<SymmetricDense> {
    m.check_dim(pattern.dim())?;
    let mut out = SymmetricDense::zeros(m.dim());
    for &(i, j) in pattern.pairs() {
        out.set(i, j, m.get(i, j));
    }
    Ok(out)
}
