//! Measured-error routines used both by assertions and by the acceptance
//! report.

use std::sync::Arc;

use gmrf_core::evaluation::{nmi, vi};
use gmrf_core::glasso::{glasso_solve, GlassoConfig};
use gmrf_core::mixture::{fit_em, EmConfig, Estimator};
use gmrf_core::mle::{estimate_known_support, gradient, hessian_apply, MleConfig};
use gmrf_core::synthetic::{make_clustering_dataset, sample_gmrf, DiffusionSpec};
use gmrf_core::{DataMatrix, PatternMatrix, SparseSpd, SupportPattern, SymmetricDense};
use rand::Rng;

use super::*;

/// Max-abs recovery error of the support-constrained MLE fed with the exact
/// covariance, for `count` random sparse SPD matrices.
pub fn lemma1_errors(count: usize, seed: u64) -> Vec<f64> {
    let mut r = rng(seed);
    let cfg = MleConfig {
        outer_tol: 1e-10,
        ..MleConfig::default()
    };
    (0..count)
        .map(|_| {
            let n = r.random_range(4..=12);
            let q = random_sparse_spd(&mut r, n, 0.3);
            let s = SymmetricDense::from_row_major(n, covariance_rows(&q).concat()).unwrap();
            let fit = estimate_known_support(&s, q.pattern().clone(), None, &cfg).unwrap();
            assert!(fit.q.pattern().is_subset_of(q.pattern()));
            max_abs_diff(fit.q.to_dense().as_slice(), q.to_dense().as_slice())
        })
        .collect()
}

/// Max-abs gap between the analytic gradient and central differences of the
/// objective, over every entry.
pub fn gradient_fd_error(seed: u64, n: usize) -> f64 {
    let mut r = rng(seed);
    let q = random_dense_spd(&mut r, n);
    let s = random_dense_spd(&mut r, n);
    let g = gradient(&SparseSpd::from_dense(&q).unwrap(), &s).unwrap();
    let (qr, sr) = (to_rows(&q), to_rows(&s));
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            let shifted = |t: f64| {
                let mut m = qr.clone();
                m[i][j] += t;
                if i != j {
                    m[j][i] += t;
                }
                naive_objective(&m, &sr)
            };
            let fd = (shifted(h) - shifted(-h)) / (2.0 * h);
            let analytic = if i == j { g.get(i, i) } else { 2.0 * g.get(i, j) };
            worst = worst.max((fd - analytic).abs() / if i == j { 1.0 } else { 2.0 });
        }
    }
    worst
}

/// Max-abs gap between `hessian_apply(W, Δ)` and the directional central
/// difference of `S − Q⁻¹` along a random symmetric `Δ`.
pub fn hessian_fd_error(seed: u64, n: usize) -> f64 {
    let mut r = rng(seed);
    let q = random_dense_spd(&mut r, n);
    let delta = random_symmetric(&mut r, n);
    let full = Arc::new(SupportPattern::full(n));
    let w = SymmetricDense::from_row_major(n, naive_inverse(&to_rows(&q)).concat()).unwrap();
    let hd = hessian_apply(&w, &PatternMatrix::restrict(&delta, full.clone()).unwrap()).unwrap();
    let h = 1e-5;
    let inv_at = |t: f64| {
        let m: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| q.get(i, j) + t * delta.get(i, j)).collect())
            .collect();
        naive_inverse(&m)
    };
    let (plus, minus) = (inv_at(h), inv_at(-h));
    full.pairs()
        .iter()
        .enumerate()
        .map(|(slot, &(i, j))| {
            // d/dt (S − (Q + tΔ)⁻¹) = W Δ W
            let fd = -(plus[i][j] - minus[i][j]) / (2.0 * h);
            (fd - hd.values()[slot]).abs()
        })
        .fold(0.0, f64::max)
}

pub struct GlassoKkt {
    pub converged_runs: usize,
    pub runs: usize,
    /// Max of `kkt_residual / newton_tol` over converged runs.
    pub worst_kkt_ratio: f64,
    /// Max-abs error of the λ-large solution against `diag(1/S_ii)`.
    pub worst_diagonal_error: f64,
}

pub fn glasso_kkt(count: usize, seed: u64) -> GlassoKkt {
    let mut r = rng(seed);
    let mut out = GlassoKkt {
        converged_runs: 0,
        runs: 0,
        worst_kkt_ratio: 0.0,
        worst_diagonal_error: 0.0,
    };
    for _ in 0..count {
        let n = r.random_range(3..=10);
        let s = random_dense_spd(&mut r, n);
        let max_off = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| s.get(i, j).abs())
            .fold(0.0, f64::max);
        for frac in [0.05, 0.2, 0.5] {
            let cfg = GlassoConfig::with_lambda(frac * max_off);
            let g = glasso_solve(&s, &cfg, None).unwrap();
            out.runs += 1;
            if g.converged {
                out.converged_runs += 1;
                out.worst_kkt_ratio = out.worst_kkt_ratio.max(g.kkt_residual / cfg.newton_tol);
            }
        }
        let g = glasso_solve(&s, &GlassoConfig::with_lambda(max_off * 1.01 + 1e-3), None).unwrap();
        let expect = SymmetricDense::from_diagonal(&s.diagonal().iter().map(|v| 1.0 / v).collect::<Vec<_>>());
        out.worst_diagonal_error = out
            .worst_diagonal_error
            .max(max_abs_diff(g.q.to_dense().as_slice(), expect.as_slice()));
    }
    out
}

/// Largest entrywise z-score of the zero-mean empirical covariance of
/// `count` samples against `Q⁻¹`, with standard error
/// `sqrt(Σ_ii Σ_jj + Σ_ij²) / sqrt(count)`.
pub fn sampler_max_z(q: &SparseSpd, count: usize, seed: u64) -> f64 {
    let n = q.dim();
    let x = sample_gmrf(q, &vec![0.0; n], count, seed).unwrap();
    let sigma = covariance_rows(q);
    let mut emp = vec![vec![0.0; n]; n];
    for k in 0..count {
        let row = x.row(k);
        for i in 0..n {
            for j in i..n {
                emp[i][j] += row[i] * row[j];
            }
        }
    }
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            let se = ((sigma[i][i] * sigma[j][j] + sigma[i][j].powi(2)) / count as f64).sqrt();
            worst = worst.max((emp[i][j] / count as f64 - sigma[i][j]).abs() / se);
        }
    }
    worst
}

/// Small-profile dataset: 5 diffusion components on a 5×5 grid.
pub fn small_profile_data(seed: u64) -> (DataMatrix, Vec<SparseSpd>) {
    let ds = make_clustering_dataset(5, &DiffusionSpec::new(5, 5, seed), 500, 1000, seed).unwrap();
    (ds.data, ds.precisions)
}

/// Worst relative ll decrease `max(prev − next) / |next|` across the trace
/// (≤ 0 for a monotone trace), and the trace length.
pub fn em_worst_decrease(data: &DataMatrix, est: Estimator, seed: u64) -> (f64, usize) {
    let cfg = EmConfig {
        fix_means_to_zero: true,
        max_em_iters: 100,
        ..EmConfig::new(5, est)
    };
    let fit = fit_em(data, &cfg, seed).unwrap();
    let worst = fit
        .ll_trace
        .windows(2)
        .map(|w| (w[0] - w[1]) / w[1].abs())
        .fold(f64::NEG_INFINITY, f64::max);
    (worst, fit.ll_trace.len())
}

pub fn known_support(truth: &[SparseSpd]) -> Estimator {
    Estimator::KnownSupport {
        patterns: truth.iter().map(|q| q.pattern().as_ref().clone()).collect(),
        mle: MleConfig::default(),
    }
}

/// Max deviation of `nmi`/`vi` from the brute-force frequencies over
/// `count` random label pairs with `N ≤ 12`.
pub fn metric_oracle_error(count: usize, seed: u64) -> f64 {
    let mut r = rng(seed);
    (0..count)
        .map(|_| {
            let n = r.random_range(1..=12);
            let ka = r.random_range(1..=4);
            let kb = r.random_range(1..=4);
            let a = random_labels(&mut r, n, ka);
            let b = random_labels(&mut r, n, kb);
            let (bn, bv) = brute_force_metrics(&a, &b);
            (nmi(&a, &b).unwrap() - bn).abs().max((vi(&a, &b).unwrap() - bv).abs())
        })
        .fold(0.0, f64::max)
}
