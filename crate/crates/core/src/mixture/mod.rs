//! GMRF mixture models and their EM fit.

mod em;

use std::f64::consts::PI;

use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::data::DataMatrix;
use crate::error::{Error, Result};
use crate::linalg::SparseSpd;
use crate::par;

pub use em::{fit_em, fit_em_from, initial_responsibilities, m_step, weighted_stats, EmConfig, EmFit, Estimator, Init, WeightedStats};

/// Rows handled per GEMM block in [`e_step`].
const E_STEP_BLOCK: usize = 512;

/// One mixture component `(π, μ, Q)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GmrfComponent {
    pub weight: f64,
    pub mean: Vec<f64>,
    pub precision: SparseSpd,
}

impl GmrfComponent {
    pub fn new(weight: f64, mean: Vec<f64>, precision: SparseSpd) -> Result<Self> {
        if !(weight > 0.0 && weight <= 1.0) {
            return Err(Error::InvalidConfig(format!("component weight {weight} not in (0, 1]")));
        }
        if mean.len() != precision.dim() {
            return Err(Error::DimensionMismatch {
                expected: precision.dim(),
                found: mean.len(),
            });
        }
        Ok(Self { weight, mean, precision })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// `½ log det Q − (n/2) log 2π`.
    fn log_norm(&self) -> f64 {
        0.5 * self.precision.log_det() - 0.5 * self.dim() as f64 * (2.0 * PI).ln()
    }

    /// Gaussian log-density at `x`; the quadratic form runs over the pattern.
    pub fn log_pdf(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.len(),
            });
        }
        let centered: Vec<f64> = x.iter().zip(&self.mean).map(|(a, m)| a - m).collect();
        Ok(self.log_norm() - 0.5 * self.precision.quad_form(&centered))
    }
}

/// A mixture of GMRF components whose weights sum to one.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "ModelJson", into = "ModelJson")]
pub struct MixtureModel {
    components: Vec<GmrfComponent>,
}

#[derive(Serialize, Deserialize)]
struct ModelJson {
    #[serde(rename = "K")]
    k: usize,
    n: usize,
    components: Vec<GmrfComponent>,
}

impl From<MixtureModel> for ModelJson {
    fn from(m: MixtureModel) -> Self {
        Self {
            k: m.k(),
            n: m.dim(),
            components: m.components,
        }
    }
}

impl TryFrom<ModelJson> for MixtureModel {
    type Error = Error;

    fn try_from(j: ModelJson) -> Result<Self> {
        if j.components.len() != j.k {
            return Err(Error::DimensionMismatch {
                expected: j.k,
                found: j.components.len(),
            });
        }
        let model = MixtureModel::new(j.components)?;
        if model.dim() != j.n {
            return Err(Error::DimensionMismatch {
                expected: j.n,
                found: model.dim(),
            });
        }
        Ok(model)
    }
}

impl MixtureModel {
    pub fn new(components: Vec<GmrfComponent>) -> Result<Self> {
        let first = components.first().ok_or(Error::EmptyInput)?;
        let n = first.dim();
        for c in &components {
            if c.dim() != n || c.precision.dim() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: c.dim(),
                });
            }
            if !(c.weight > 0.0) {
                return Err(Error::InvalidConfig("component weights must be positive".into()));
            }
        }
        let total: f64 = components.iter().map(|c| c.weight).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidConfig(format!("component weights sum to {total}, not 1")));
        }
        Ok(Self { components })
    }

    pub fn k(&self) -> usize {
        self.components.len()
    }

    pub fn dim(&self) -> usize {
        self.components[0].dim()
    }

    pub fn components(&self) -> &[GmrfComponent] {
        &self.components
    }

    pub fn into_components(self) -> Vec<GmrfComponent> {
        self.components
    }

    /// Mixture log-density `log Σ_k π_k N(x; μ_k, Q_k⁻¹)`.
    pub fn log_pdf(&self, x: &[f64]) -> Result<f64> {
        let terms = self
            .components
            .iter()
            .map(|c| Ok(c.weight.ln() + c.log_pdf(x)?))
            .collect::<Result<Vec<_>>>()?;
        Ok(log_sum_exp(&terms))
    }

    /// Mean negative log-likelihood per sample.
    pub fn mean_nll(&self, data: &DataMatrix) -> Result<f64> {
        let e = e_step(self, data)?;
        Ok(-e.log_likelihood / data.n_samples() as f64)
    }
}

/// `log Σ exp(v)` without overflow; `-inf` for an empty or all `-inf` input.
pub fn log_sum_exp(v: &[f64]) -> f64 {
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Soft assignments, `N × K`, row-major, each row summing to one.
#[derive(Clone, Debug, PartialEq)]
pub struct Responsibilities {
    n_samples: usize,
    k: usize,
    values: Vec<f64>,
}

impl Responsibilities {
    pub fn new(n_samples: usize, k: usize, values: Vec<f64>) -> Result<Self> {
        if k == 0 {
            return Err(Error::EmptyInput);
        }
        if values.len() != n_samples * k {
            return Err(Error::DimensionMismatch {
                expected: n_samples * k,
                found: values.len(),
            });
        }
        for row in values.chunks(k) {
            if row.iter().any(|&w| !(w >= 0.0)) {
                return Err(Error::InvalidConfig("responsibilities must be nonnegative".into()));
            }
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidConfig(format!("responsibility row sums to {s}")));
            }
        }
        Ok(Self { n_samples, k, values })
    }

    /// One-hot rows from hard labels in `0..k`.
    pub fn from_labels(labels: &[usize], k: usize) -> Result<Self> {
        let mut values = vec![0.0; labels.len() * k];
        for (i, &l) in labels.iter().enumerate() {
            if l >= k {
                return Err(Error::InvalidConfig(format!("label {l} out of range for K = {k}")));
            }
            values[i * k + l] = 1.0;
        }
        Self::new(labels.len(), k, values)
    }

    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.k..(i + 1) * self.k]
    }

    pub fn get(&self, i: usize, k: usize) -> f64 {
        self.values[i * self.k + k]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn column(&self, k: usize) -> Vec<f64> {
        (0..self.n_samples).map(|i| self.get(i, k)).collect()
    }

    pub fn column_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.k];
        for row in self.values.chunks(self.k) {
            for (s, w) in sums.iter_mut().zip(row) {
                *s += w;
            }
        }
        sums
    }

    /// Argmax per row, ties going to the smallest index.
    pub fn hard_labels(&self) -> Vec<usize> {
        self.values
            .chunks(self.k)
            .map(|row| {
                let mut best = 0;
                for (k, &w) in row.iter().enumerate().skip(1) {
                    if w > row[best] {
                        best = k;
                    }
                }
                best
            })
            .collect()
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }
}

/// Output of [`e_step`].
#[derive(Clone, Debug)]
pub struct EStep {
    pub responsibilities: Responsibilities,
    /// `Σ_i log Σ_k π_k N(x_i; μ_k, Q_k⁻¹)`.
    pub log_likelihood: f64,
    /// Per-sample mixture log-density.
    pub point_log_likelihood: Vec<f64>,
}

/// Responsibilities and log-likelihood, normalized in log space.
///
/// Quadratic forms are computed in row blocks as `‖(X − μ) L‖²` with
/// `Q = LLᵀ`, one GEMM per block and component.
pub fn e_step(model: &MixtureModel, data: &DataMatrix) -> Result<EStep> {
    let n = model.dim();
    if data.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: data.dim(),
        });
    }
    let k = model.k();
    let rows = data.n_samples();
    let consts: Vec<f64> = model.components.iter().map(|c| c.weight.ln() + c.log_norm()).collect();
    let blocks = par::map_range(rows.div_ceil(E_STEP_BLOCK), |b| {
        let start = b * E_STEP_BLOCK;
        let m = E_STEP_BLOCK.min(rows - start);
        let mut out = vec![0.0; m * k];
        for (c, comp) in model.components.iter().enumerate() {
            let d = Mat::<f64>::from_fn(m, n, |i, j| data.row(start + i)[j] - comp.mean[j]);
            let z = &d * comp.precision.cholesky().lower();
            let mut quad = vec![0.0; m];
            for j in 0..n {
                for (i, q) in quad.iter_mut().enumerate() {
                    let v = z[(i, j)];
                    *q += v * v;
                }
            }
            for (i, q) in quad.into_iter().enumerate() {
                out[i * k + c] = consts[c] - 0.5 * q;
            }
        }
        out
    });
    let mut values = Vec::with_capacity(rows * k);
    let mut point = Vec::with_capacity(rows);
    for block in blocks {
        for row in block.chunks(k) {
            let lse = log_sum_exp(row);
            point.push(lse);
            values.extend(row.iter().map(|v| (v - lse).exp()));
        }
    }
    // exp of normalized logs can drift from a unit row sum by a few ulps
    for row in values.chunks_mut(k) {
        let s: f64 = row.iter().sum();
        row.iter_mut().for_each(|w| *w /= s);
    }
    let log_likelihood = point.iter().sum();
    Ok(EStep {
        responsibilities: Responsibilities::new(rows, k, values)?,
        log_likelihood,
        point_log_likelihood: point,
    })
}

/// Hard labels by maximum responsibility, ties to the smallest component.
pub fn predict(model: &MixtureModel, data: &DataMatrix) -> Result<Vec<usize>> {
    Ok(e_step(model, data)?.responsibilities.hard_labels())
}
