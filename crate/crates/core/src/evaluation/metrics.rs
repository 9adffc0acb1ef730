use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// Co-occurrence counts of two labelings. Rows follow the distinct labels of
/// `a` in ascending order, columns those of `b`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContingencyTable {
    counts: Vec<Vec<usize>>,
    row_sums: Vec<usize>,
    col_sums: Vec<usize>,
    total: usize,
}

fn dense_ids(labels: &[usize]) -> (Vec<usize>, usize) {
    let mut ids = BTreeMap::new();
    for &l in labels {
        ids.entry(l).or_insert(0);
    }
    for (i, v) in ids.values_mut().enumerate() {
        *v = i;
    }
    (labels.iter().map(|l| ids[l]).collect(), ids.len())
}

impl ContingencyTable {
    pub fn new(a: &[usize], b: &[usize]) -> Result<Self> {
        if a.len() != b.len() {
            return Err(Error::LengthMismatch {
                left: a.len(),
                right: b.len(),
            });
        }
        if a.is_empty() {
            return Err(Error::EmptyInput);
        }
        let (ra, r) = dense_ids(a);
        let (cb, c) = dense_ids(b);
        let mut counts = vec![vec![0; c]; r];
        for (&i, &j) in ra.iter().zip(&cb) {
            counts[i][j] += 1;
        }
        let row_sums = counts.iter().map(|row| row.iter().sum()).collect();
        let col_sums = (0..c).map(|j| counts.iter().map(|row| row[j]).sum()).collect();
        Ok(Self {
            counts,
            row_sums,
            col_sums,
            total: a.len(),
        })
    }

    pub fn counts(&self) -> &[Vec<usize>] {
        &self.counts
    }

    pub fn row_sums(&self) -> &[usize] {
        &self.row_sums
    }

    pub fn col_sums(&self) -> &[usize] {
        &self.col_sums
    }

    pub fn total(&self) -> usize {
        self.total
    }

    fn entropy(marginal: &[usize], total: usize) -> f64 {
        let n = total as f64;
        marginal
            .iter()
            .filter(|&&c| c > 0)
            .map(|&c| {
                let p = c as f64 / n;
                -p * p.ln()
            })
            .sum()
    }

    /// Entropy of the row labeling (natural log).
    pub fn entropy_rows(&self) -> f64 {
        Self::entropy(&self.row_sums, self.total)
    }

    pub fn entropy_cols(&self) -> f64 {
        Self::entropy(&self.col_sums, self.total)
    }

    /// `I(A;B) = Σ p_ij ln(p_ij / (p_i p_j))`.
    pub fn mutual_information(&self) -> f64 {
        let n = self.total as f64;
        let mut mi = 0.0;
        for (i, row) in self.counts.iter().enumerate() {
            for (j, &c) in row.iter().enumerate() {
                if c > 0 {
                    let c = c as f64;
                    mi += c / n * (n * c / (self.row_sums[i] as f64 * self.col_sums[j] as f64)).ln();
                }
            }
        }
        mi.max(0.0)
    }
}

/// Normalized mutual information, `I / ((H(a) + H(b)) / 2)`.
///
/// Two single-cluster labelings score 1; exactly one single-cluster labeling
/// scores 0.
pub fn nmi(a: &[usize], b: &[usize]) -> Result<f64> {
    let t = ContingencyTable::new(a, b)?;
    let (single_a, single_b) = (t.row_sums.len() == 1, t.col_sums.len() == 1);
    if single_a && single_b {
        return Ok(1.0);
    }
    if single_a || single_b {
        return Ok(0.0);
    }
    let denom = 0.5 * (t.entropy_rows() + t.entropy_cols());
    Ok((t.mutual_information() / denom).clamp(0.0, 1.0))
}

/// Variation of information, `H(a) + H(b) − 2 I(a;b)`.
pub fn vi(a: &[usize], b: &[usize]) -> Result<f64> {
    let t = ContingencyTable::new(a, b)?;
    Ok((t.entropy_rows() + t.entropy_cols() - 2.0 * t.mutual_information()).max(0.0))
}
