use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{eigenvalues_sym, SparseSpd, SymmetricDense};

/// An estimate to compare against the truth. `lasso` marks graphical-lasso
/// outputs, which additionally get Gershgorin and sign diagnostics.
#[derive(Clone, Copy, Debug)]
pub struct NamedEstimate<'a> {
    pub name: &'a str,
    pub q: &'a SparseSpd,
    pub lasso: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Spectrum {
    pub name: String,
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// `mean_i |λ̂_i − λ_i| / λ_i`, pairing both spectra by rank.
    pub mean_relative_error: f64,
}

/// One row of the Gershgorin picture for `W = Q_λ⁻¹`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct GershgorinRow {
    pub row: usize,
    /// `S_ii`.
    pub s_center: f64,
    /// `W_ii` (equal to `S_ii` at an unpenalized-diagonal optimum).
    pub center: f64,
    /// `Σ_{j≠i} |W_ij|`.
    pub radius: f64,
    /// `Σ_{j≠i} |S_ij|`, the radius the empirical covariance would have.
    pub s_radius: f64,
    /// `Σ (|S_ij| − λ)` over support entries with `|S_ij| > λ`, plus
    /// `|W_ij|` for every other off-diagonal entry.
    pub first_order_bound: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct SignEntry {
    pub i: usize,
    pub j: usize,
    pub sign_s: f64,
    pub sign_q: f64,
    /// `|W_ij − S_ij − λ sign(Q_ij)|`.
    pub residual: f64,
}

/// Sign structure of a lasso estimate on entries with `Q_ij ≠ 0` and
/// `|S_ij| > λ`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct SignCheck {
    pub entries: Vec<SignEntry>,
    /// Share of `entries` where `sign(S_ij) = −sign(Q_ij)`; 1 when empty.
    pub opposite_fraction: f64,
    /// Max of `|W_ij − S_ij − λ sign(Q_ij)|` over all off-diagonal nonzeros.
    pub max_residual: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct LassoDiagnostics {
    pub name: String,
    /// Eigenvalues of `Q_λ⁻¹`, ascending.
    pub covariance_eigenvalues: Vec<f64>,
    pub rows: Vec<GershgorinRow>,
    /// Every eigenvalue of `Q_λ⁻¹` lies in some disc `[center ± radius]`.
    pub discs_cover_spectrum: bool,
    pub signs: SignCheck,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct BiasReport {
    pub n: usize,
    pub lambda: f64,
    pub truth: Vec<f64>,
    pub estimators: Vec<Spectrum>,
    pub lasso: Vec<LassoDiagnostics>,
}

impl BiasReport {
    pub fn spectrum(&self, name: &str) -> Option<&Spectrum> {
        self.estimators.iter().find(|s| s.name == name)
    }

    /// Flat CSV: `rank,truth,<estimator>...`, one row per eigenvalue rank.
    pub fn write_eigenvalue_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["rank".to_string(), "truth".to_string()];
        header.extend(self.estimators.iter().map(|s| s.name.clone()));
        w.write_record(&header)?;
        for r in 0..self.n {
            let mut rec = vec![r.to_string(), self.truth[r].to_string()];
            rec.extend(self.estimators.iter().map(|s| s.eigenvalues[r].to_string()));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Rank-paired mean relative error of `estimate` against `truth` (both
/// ascending).
pub fn mean_relative_error(truth: &[f64], estimate: &[f64]) -> Result<f64> {
    if truth.len() != estimate.len() {
        return Err(Error::DimensionMismatch {
            expected: truth.len(),
            found: estimate.len(),
        });
    }
    if truth.is_empty() {
        return Err(Error::EmptyInput);
    }
    let total: f64 = truth.iter().zip(estimate).map(|(t, e)| (e - t).abs() / t).sum();
    Ok(total / truth.len() as f64)
}

/// Sign opposition and the stationarity residual for a lasso estimate.
pub fn kkt_sign_check(q: &SparseSpd, s: &SymmetricDense, lambda: f64) -> Result<SignCheck> {
    s.check_dim(q.dim())?;
    Ok(sign_check_with(q, &q.inverse(), s, lambda))
}

fn sign_check_with(q: &SparseSpd, w: &SymmetricDense, s: &SymmetricDense, lambda: f64) -> SignCheck {
    let mut entries = Vec::new();
    let mut max_residual: f64 = 0.0;
    for (&(i, j), &v) in q.pattern().pairs().iter().zip(q.values()) {
        if i == j || v == 0.0 {
            continue;
        }
        let residual = (w.get(i, j) - s.get(i, j) - lambda * sign(v)).abs();
        max_residual = max_residual.max(residual);
        if s.get(i, j).abs() > lambda {
            entries.push(SignEntry {
                i,
                j,
                sign_s: sign(s.get(i, j)),
                sign_q: sign(v),
                residual,
            });
        }
    }
    let opposite = entries.iter().filter(|e| e.sign_s == -e.sign_q).count();
    let opposite_fraction = if entries.is_empty() {
        1.0
    } else {
        opposite as f64 / entries.len() as f64
    };
    SignCheck {
        entries,
        opposite_fraction,
        max_residual,
    }
}

fn lasso_diagnostics(name: &str, q: &SparseSpd, s: &SymmetricDense, lambda: f64) -> LassoDiagnostics {
    let n = q.dim();
    let w = q.inverse();
    let rows: Vec<GershgorinRow> = (0..n)
        .map(|i| {
            let mut radius = 0.0;
            let mut s_radius = 0.0;
            let mut bound = 0.0;
            for j in (0..n).filter(|&j| j != i) {
                let (sij, wij) = (s.get(i, j), w.get(i, j));
                radius += wij.abs();
                s_radius += sij.abs();
                bound += if q.get(i, j) != 0.0 && sij.abs() > lambda {
                    sij.abs() - lambda
                } else {
                    wij.abs()
                };
            }
            GershgorinRow {
                row: i,
                s_center: s.get(i, i),
                center: w.get(i, i),
                radius,
                s_radius,
                first_order_bound: bound,
            }
        })
        .collect();
    let mu = eigenvalues_sym(&w);
    let slack = 1e-9 * w.max_abs().max(1.0);
    let discs_cover_spectrum = mu.iter().all(|&m| rows.iter().any(|r| (m - r.center).abs() <= r.radius + slack));
    LassoDiagnostics {
        name: name.to_string(),
        covariance_eigenvalues: mu,
        rows,
        discs_cover_spectrum,
        signs: sign_check_with(q, &w, s, lambda),
    }
}

/// Spectra of every estimate against `q_true`, plus Gershgorin and sign
/// diagnostics for the lasso estimates.
pub fn bias_report(q_true: &SparseSpd, s: &SymmetricDense, estimates: &[NamedEstimate<'_>], lambda: f64) -> Result<BiasReport> {
    let n = q_true.dim();
    s.check_dim(n)?;
    for e in estimates {
        if e.q.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: e.q.dim(),
            });
        }
    }
    let truth = eigenvalues_sym(&q_true.to_dense());
    let mut spectra = Vec::with_capacity(estimates.len());
    let mut lasso = Vec::new();
    for e in estimates {
        let ev = eigenvalues_sym(&e.q.to_dense());
        spectra.push(Spectrum {
            name: e.name.to_string(),
            mean_relative_error: mean_relative_error(&truth, &ev)?,
            eigenvalues: ev,
        });
        if e.lasso {
            lasso.push(lasso_diagnostics(e.name, e.q, s, lambda));
        }
    }
    Ok(BiasReport {
        n,
        lambda,
        truth,
        estimators: spectra,
        lasso,
    })
}
