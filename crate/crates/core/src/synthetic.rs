//! Synthetic precision matrices and exact GMRF sampling.
//!
//! Grid node `(r, c)` has index `r * cols + c`. "x-edges" join horizontal
//! neighbours `(r, c)–(r, c+1)`, "y-edges" vertical ones `(r, c)–(r+1, c)`.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::data::DataMatrix;
use crate::error::{Error, Result};
use crate::linalg::{PatternMatrix, SparseSpd, SupportPattern};
use crate::par;
use crate::rng::{self, StreamRng};

/// Anchor added to the diffusion operator's diagonal, relative to `coeff_low`.
pub const DIFFUSION_ANCHOR: f64 = 1e-2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeSpec {
    pub rows: usize,
    pub cols: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiffusionSpec {
    pub rows: usize,
    pub cols: usize,
    pub coeff_low: f64,
    pub coeff_high: f64,
    pub seed: u64,
}

impl DiffusionSpec {
    /// `rows × cols` grid with coefficients uniform on `[0.1, 1.0]`.
    pub fn new(rows: usize, cols: usize, seed: u64) -> Self {
        Self {
            rows,
            cols,
            coeff_low: 0.1,
            coeff_high: 1.0,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.rows == 0 || self.cols == 0 {
            return Err(Error::InvalidConfig("grid must have at least one row and column".into()));
        }
        if !(self.coeff_low > 0.0 && self.coeff_low <= self.coeff_high && self.coeff_high.is_finite()) {
            return Err(Error::InvalidConfig("need 0 < coeff_low <= coeff_high".into()));
        }
        Ok(())
    }
}

/// The 5-point pattern of a `rows × cols` grid.
pub fn grid_pattern(rows: usize, cols: usize) -> SupportPattern {
    let mut pairs = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            let p = r * cols + c;
            if c + 1 < cols {
                pairs.push((p, p + 1));
            }
            if r + 1 < rows {
                pairs.push((p, p + cols));
            }
        }
    }
    SupportPattern::from_pairs(rows * cols, pairs).expect("grid indices in range")
}

/// Five-point Laplacian stencil `[-1; -1 4 -1; -1]` truncated at the
/// boundary: every diagonal entry is 4 and missing neighbours are dropped.
pub fn laplacian2d_precision(spec: LatticeSpec) -> Result<SparseSpd> {
    if spec.rows == 0 || spec.cols == 0 {
        return Err(Error::InvalidConfig("lattice must have at least one row and column".into()));
    }
    let pattern = Arc::new(grid_pattern(spec.rows, spec.cols));
    let values = pattern.pairs().iter().map(|&(i, j)| if i == j { 4.0 } else { -1.0 }).collect();
    SparseSpd::from_parts(pattern, values)
}

/// `Dₓᵀ diag(a_edge) Dₓ + D_yᵀ diag(b_edge) D_y + anchor·I` for node
/// coefficient fields `a` (x-direction) and `b` (y-direction). Edge
/// coefficients are the arithmetic mean of their two nodes. With
/// `anchor = 0` the operator annihilates constants and is singular.
pub fn diffusion_operator(rows: usize, cols: usize, a: &[f64], b: &[f64], anchor: f64) -> Result<PatternMatrix> {
    let n = rows * cols;
    if n == 0 {
        return Err(Error::InvalidConfig("grid must have at least one row and column".into()));
    }
    for field in [a, b] {
        if field.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: field.len(),
            });
        }
    }
    let pattern = Arc::new(grid_pattern(rows, cols));
    let mut m = PatternMatrix::zeros(pattern.clone());
    let add_edge = |m: &mut PatternMatrix, p: usize, q: usize, coeff: f64| {
        let v = m.values_mut();
        v[pattern.slot(p, p).unwrap()] += coeff;
        v[pattern.slot(q, q).unwrap()] += coeff;
        v[pattern.slot(p, q).unwrap()] -= coeff;
    };
    for r in 0..rows {
        for c in 0..cols {
            let p = r * cols + c;
            if c + 1 < cols {
                add_edge(&mut m, p, p + 1, 0.5 * (a[p] + a[p + 1]));
            }
            if r + 1 < rows {
                add_edge(&mut m, p, p + cols, 0.5 * (b[p] + b[p + cols]));
            }
        }
    }
    for i in 0..n {
        m.values_mut()[pattern.slot(i, i).unwrap()] += anchor;
    }
    Ok(m)
}

/// Random anisotropic-diffusion precision: node coefficients i.i.d.
/// uniform on `[coeff_low, coeff_high]` from stream 0 of `spec.seed`
/// (all of `a`, then all of `b`), anchored by `1e-2 · coeff_low`.
pub fn diffusion_precision(spec: &DiffusionSpec) -> Result<SparseSpd> {
    diffusion_precision_with(spec, &mut rng::stream(spec.seed, 0))
}

fn diffusion_precision_with(spec: &DiffusionSpec, rng: &mut StreamRng) -> Result<SparseSpd> {
    spec.validate()?;
    let n = spec.rows * spec.cols;
    let mut draw = || -> Vec<f64> {
        (0..n)
            .map(|_| {
                if spec.coeff_low == spec.coeff_high {
                    spec.coeff_low
                } else {
                    rng.random_range(spec.coeff_low..spec.coeff_high)
                }
            })
            .collect()
    };
    let a = draw();
    let b = draw();
    let m = diffusion_operator(spec.rows, spec.cols, &a, &b, DIFFUSION_ANCHOR * spec.coeff_low)?;
    SparseSpd::new(m)
}

/// `count` exact draws from `N(mean, Q⁻¹)`: `x = mean + L⁻ᵀ z` with `Q = LLᵀ`
/// and `z` standard normal (stream 0 of `seed`, row by row).
pub fn sample_gmrf(q: &SparseSpd, mean: &[f64], count: usize, seed: u64) -> Result<DataMatrix> {
    sample_with(q, mean, count, &mut rng::stream(seed, 0))
}

fn sample_with(q: &SparseSpd, mean: &[f64], count: usize, rng: &mut StreamRng) -> Result<DataMatrix> {
    let n = q.dim();
    if mean.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: mean.len(),
        });
    }
    let mut values: Vec<f64> = (0..count * n).map(|_| StandardNormal.sample(rng)).collect();
    let chol = q.cholesky();
    par::for_each_row_mut(&mut values, n, |_, row| {
        chol.solve_upper_in_place(row);
        for (x, m) in row.iter_mut().zip(mean) {
            *x += m;
        }
    });
    DataMatrix::new(count, n, values)
}

/// Zero-mean mixture of random diffusion GMRFs.
#[derive(Clone, Debug)]
pub struct ClusteringDataset {
    pub data: DataMatrix,
    pub labels: Vec<usize>,
    pub precisions: Vec<SparseSpd>,
    pub counts: Vec<usize>,
}

/// Builds a `k`-component dataset on the grid of `spec` (its `seed` is not
/// used; all randomness comes from `seed`).
///
/// Stream 0 draws the per-component sample counts (uniform on
/// `[samples_low, samples_high]`) and then the row shuffle. Component `c`
/// draws its coefficient fields from stream `1 + 2c` and its samples from
/// stream `2 + 2c`.
pub fn make_clustering_dataset(
    k: usize,
    spec: &DiffusionSpec,
    samples_low: usize,
    samples_high: usize,
    seed: u64,
) -> Result<ClusteringDataset> {
    spec.validate()?;
    if k == 0 {
        return Err(Error::InvalidConfig("need at least one component".into()));
    }
    if samples_low > samples_high {
        return Err(Error::InvalidConfig("samples_low must not exceed samples_high".into()));
    }
    let mut main = rng::stream(seed, 0);
    let counts: Vec<usize> = (0..k).map(|_| main.random_range(samples_low..=samples_high)).collect();
    let parts = par::map_range(k, |c| -> Result<(SparseSpd, DataMatrix)> {
        let q = diffusion_precision_with(spec, &mut rng::stream(seed, 1 + 2 * c as u64))?;
        let x = sample_with(&q, &vec![0.0; q.dim()], counts[c], &mut rng::stream(seed, 2 + 2 * c as u64))?;
        Ok((q, x))
    });
    let mut precisions = Vec::with_capacity(k);
    let mut blocks = Vec::with_capacity(k);
    for part in parts {
        let (q, x) = part?;
        precisions.push(q);
        blocks.push(x);
    }
    let n = spec.rows * spec.cols;
    let total: usize = counts.iter().sum();
    let mut order: Vec<(usize, usize)> = counts.iter().enumerate().flat_map(|(c, &m)| (0..m).map(move |i| (c, i))).collect();
    order.shuffle(&mut main);
    let mut values = Vec::with_capacity(total * n);
    let mut labels = Vec::with_capacity(total);
    for (c, i) in order {
        values.extend_from_slice(blocks[c].row(i));
        labels.push(c);
    }
    Ok(ClusteringDataset {
        data: DataMatrix::new(total, n, values)?,
        labels,
        precisions,
        counts,
    })
}
