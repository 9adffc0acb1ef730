//! Graphical lasso by proximal Newton, and the two-step debiased estimator.
//!
//! Minimizes `F(Q) = −log det Q + tr(S Q) + λ Σ_{i≠j} |Q_ij|` (the diagonal
//! is penalized only on request). Each Newton step restricts the update to
//! the free set, solves the lasso model of `F` there by cyclic coordinate
//! descent, and line-searches `F` with a positive-definiteness guard.
//!
//! [`debias`] keeps only the sparsity pattern of the lasso estimate and
//! re-solves the unpenalized likelihood on it, warm-started at that estimate.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{PatternMatrix, SparseSpd, SupportPattern, SymmetricDense};
use crate::mle::{self, MleConfig, MleResult};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GlassoConfig {
    pub lambda: f64,
    pub penalize_diagonal: bool,
    /// Convergence threshold on the max optimality violation.
    pub newton_tol: f64,
    pub max_newton_iters: usize,
    /// Coordinate-descent sweeps per Newton step.
    pub lasso_inner_iters: usize,
    /// Sweeps stop early once no coordinate moves by more than this.
    pub sub_tol: f64,
    /// Off-diagonal entries with `|q_ij| <= prune_eps` are dropped from the
    /// returned pattern.
    pub prune_eps: f64,
    pub armijo_c: f64,
    pub backtrack_factor: f64,
    pub max_backtracks: usize,
}

impl Default for GlassoConfig {
    fn default() -> Self {
        Self {
            lambda: 0.1,
            penalize_diagonal: false,
            newton_tol: 1e-5,
            max_newton_iters: 100,
            lasso_inner_iters: 20,
            sub_tol: 1e-6,
            prune_eps: 1e-8,
            armijo_c: 1e-4,
            backtrack_factor: 0.5,
            max_backtracks: 40,
        }
    }
}

impl GlassoConfig {
    pub fn with_lambda(lambda: f64) -> Self {
        Self { lambda, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidConfig(what.to_string()));
        if !(self.lambda >= 0.0) || !self.lambda.is_finite() {
            return bad("lambda must be a finite non-negative number");
        }
        if !(self.newton_tol > 0.0) || !(self.sub_tol > 0.0) || !(self.prune_eps >= 0.0) {
            return bad("tolerances must be positive");
        }
        if self.max_newton_iters == 0 || self.lasso_inner_iters == 0 || self.max_backtracks == 0 {
            return bad("iteration budgets must be at least 1");
        }
        if !(self.armijo_c > 0.0 && self.armijo_c < 1.0) {
            return bad("armijo_c must lie in (0, 1)");
        }
        if !(self.backtrack_factor > 0.0 && self.backtrack_factor < 1.0) {
            return bad("backtrack_factor must lie in (0, 1)");
        }
        Ok(())
    }

    #[inline]
    fn weight(&self, i: usize, j: usize) -> f64 {
        if i != j || self.penalize_diagonal {
            self.lambda
        } else {
            0.0
        }
    }
}

#[derive(Clone, Debug)]
pub struct GlassoResult {
    pub q: SparseSpd,
    pub objective_trace: Vec<f64>,
    pub kkt_residual: f64,
    pub converged: bool,
    pub iterations: usize,
}

/// Penalized objective `L(Q) + λ‖Q‖₁` (off-diagonal pairs counted twice).
pub fn glasso_objective(q: &SparseSpd, s: &SymmetricDense, cfg: &GlassoConfig) -> Result<f64> {
    Ok(mle::neg_log_likelihood(q, s)? + penalty(q.matrix(), cfg))
}

fn penalty(q: &PatternMatrix, cfg: &GlassoConfig) -> f64 {
    cfg.lambda * q.l1_norm(cfg.penalize_diagonal)
}

/// Free set: current nonzeros, entries whose gradient exceeds `λ`, and the
/// diagonal.
pub fn free_set(q: &SparseSpd, s: &SymmetricDense, lambda: f64) -> Result<SupportPattern> {
    s.check_dim(q.dim())?;
    Ok(free_set_with_inverse(q.matrix(), &q.inverse(), s, lambda))
}

fn free_set_with_inverse(q: &PatternMatrix, w: &SymmetricDense, s: &SymmetricDense, lambda: f64) -> SupportPattern {
    let n = q.dim();
    let mut pairs = Vec::new();
    for &(i, j) in q.pattern().pairs() {
        if i != j && q.get(i, j) != 0.0 {
            pairs.push((i, j));
        }
    }
    for i in 0..n {
        let (si, wi) = (s.row(i), w.row(i));
        for j in (i + 1)..n {
            if (si[j] - wi[j]).abs() > lambda {
                pairs.push((i, j));
            }
        }
    }
    SupportPattern::from_pairs(n, pairs).expect("indices in range")
}

/// Max violation of the optimality conditions `W − S ∈ λ ∂‖Q‖₁`.
pub fn kkt_residual(q: &SparseSpd, s: &SymmetricDense, cfg: &GlassoConfig) -> Result<f64> {
    s.check_dim(q.dim())?;
    Ok(kkt_with_inverse(q.matrix(), &q.inverse(), s, cfg))
}

fn kkt_with_inverse(q: &PatternMatrix, w: &SymmetricDense, s: &SymmetricDense, cfg: &GlassoConfig) -> f64 {
    let n = q.dim();
    let qd = q.to_dense();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in i..n {
            let r = w.get(i, j) - s.get(i, j);
            let lam = cfg.weight(i, j);
            let qij = qd.get(i, j);
            let v = if lam == 0.0 {
                r.abs()
            } else if qij != 0.0 {
                (r - lam * qij.signum()).abs()
            } else {
                (r.abs() - lam).max(0.0)
            };
            worst = worst.max(v);
        }
    }
    worst
}

#[derive(Clone, Debug)]
pub struct LassoDirection {
    pub delta: PatternMatrix,
    pub sweeps: usize,
    /// Model objective `tr(GΔ) + ½tr(ΔWΔW) + λ‖Q+Δ‖₁`, at `Δ = 0` and after
    /// every sweep.
    pub subproblem_trace: Vec<f64>,
}

/// Approximate minimizer of the lasso model of `F` around `q` with
/// `Supp(Δ) ⊆ free`, by cyclic coordinate descent with exact
/// soft-thresholded coordinate steps.
pub fn lasso_newton_direction(q: &SparseSpd, s: &SymmetricDense, free: Arc<SupportPattern>, cfg: &GlassoConfig) -> Result<LassoDirection> {
    s.check_dim(q.dim())?;
    let qf = q.matrix().on_pattern(free)?;
    Ok(coordinate_descent(&qf, &q.inverse(), s, cfg))
}

#[inline]
fn soft_threshold(x: f64, t: f64) -> f64 {
    if x > t {
        x - t
    } else if x < -t {
        x + t
    } else {
        0.0
    }
}

fn coordinate_descent(q: &PatternMatrix, w: &SymmetricDense, s: &SymmetricDense, cfg: &GlassoConfig) -> LassoDirection {
    let n = q.dim();
    let pattern = q.pattern().clone();
    let qv = q.values();
    let mut d = vec![0.0; pattern.len()];
    // U = ΔW, row-major.
    let mut u = vec![0.0; n * n];
    let mut objective = penalty(q, cfg);
    let mut trace = vec![objective];
    let mut sweeps = 0;
    while sweeps < cfg.lasso_inner_iters {
        let mut max_step = 0.0_f64;
        for (slot, &(i, j)) in pattern.pairs().iter().enumerate() {
            // (WΔW)_ij = W[j, :] · U[:, i]
            let wj = w.row(j);
            let mut wdw = 0.0;
            for (m, wjm) in wj.iter().enumerate() {
                wdw += wjm * u[m * n + i];
            }
            let wij = w.get(i, j);
            let a = if i == j { wij * wij } else { wij * wij + w.get(i, i) * w.get(j, j) };
            let b = s.get(i, j) - wij + wdw;
            let c = qv[slot] + d[slot];
            let lam = cfg.weight(i, j);
            let mu = if lam > 0.0 {
                -c + soft_threshold(c - b / a, lam / a)
            } else {
                -b / a
            };
            if mu == 0.0 {
                continue;
            }
            let h = 0.5 * a * mu * mu + b * mu + lam * ((c + mu).abs() - c.abs());
            objective += pattern.multiplicity(slot) * h;
            d[slot] += mu;
            max_step = max_step.max(mu.abs());
            axpy_row(&mut u, n, i, mu, w.row(j));
            if i != j {
                axpy_row(&mut u, n, j, mu, w.row(i));
            }
        }
        sweeps += 1;
        trace.push(objective);
        if max_step <= cfg.sub_tol {
            break;
        }
    }
    LassoDirection {
        delta: PatternMatrix::new(pattern, d).expect("one value per pair"),
        sweeps,
        subproblem_trace: trace,
    }
}

#[inline]
fn axpy_row(u: &mut [f64], n: usize, row: usize, alpha: f64, x: &[f64]) {
    for (a, b) in u[row * n..(row + 1) * n].iter_mut().zip(x) {
        *a += alpha * b;
    }
}

/// Proximal-Newton graphical lasso. `q0` defaults to
/// `diag(1 / max(S_ii, floor))`.
pub fn glasso_solve(s: &SymmetricDense, cfg: &GlassoConfig, q0: Option<&SparseSpd>) -> Result<GlassoResult> {
    cfg.validate()?;
    let mut q = match q0 {
        Some(q0) => {
            s.check_dim(q0.dim())?;
            q0.clone()
        }
        None => mle::default_start(s)?,
    };
    let mut f = glasso_objective(&q, s, cfg)?;
    let mut trace = vec![f];
    let mut iterations = 0;
    let mut converged = false;
    let mut w = q.inverse();
    let mut kkt;
    loop {
        kkt = kkt_with_inverse(q.matrix(), &w, s, cfg);
        if kkt <= cfg.newton_tol {
            converged = true;
            break;
        }
        if iterations == cfg.max_newton_iters {
            break;
        }
        let free = Arc::new(free_set_with_inverse(q.matrix(), &w, s, cfg.lambda));
        let base = q.matrix().on_pattern(free.clone())?;
        let direction = coordinate_descent(&base, &w, s, cfg).delta;
        let grad = mle::projected_gradient(s, &w, &free);
        let stepped = base.plus_scaled(1.0, &direction);
        let slope = grad.dot(&direction) + penalty(&stepped, cfg) - penalty(&base, cfg);
        if !(slope < 0.0) || -slope <= 64.0 * f64::EPSILON * f.abs().max(1.0) {
            break;
        }
        let step = mle::spd_backtracking(
            &base,
            &direction,
            f,
            slope,
            cfg.armijo_c,
            cfg.backtrack_factor,
            cfg.max_backtracks,
            |q| glasso_objective(q, s, cfg),
        )?;
        // Exact zeros produced by soft-thresholding leave the pattern.
        q = step.q.pruned(0.0)?;
        f = step.objective;
        trace.push(f);
        w = q.inverse();
        iterations += 1;
    }
    let pruned = q.pruned(cfg.prune_eps)?;
    if pruned.pattern().len() != q.pattern().len() {
        q = pruned;
        kkt = kkt_residual(&q, s, cfg)?;
        converged = kkt <= cfg.newton_tol;
    }
    Ok(GlassoResult {
        q,
        objective_trace: trace,
        kkt_residual: kkt,
        converged,
        iterations,
    })
}

/// Output of [`debias`]: the lasso fit that supplied the pattern, and the
/// unpenalized refit on that pattern.
#[derive(Clone, Debug)]
pub struct Debiased {
    pub glasso: GlassoResult,
    pub refit: MleResult,
}

/// Two-step estimator: graphical lasso for the pattern, then the
/// support-constrained MLE on that pattern warm-started at the lasso estimate.
/// `warm` seeds the lasso step.
pub fn debias(s: &SymmetricDense, cfg: &GlassoConfig, mle_cfg: &MleConfig, warm: Option<&SparseSpd>) -> Result<Debiased> {
    let glasso = glasso_solve(s, cfg, warm)?;
    let pattern = glasso.q.pattern().clone();
    let refit = mle::estimate_known_support(s, pattern, Some(&glasso.q), mle_cfg)?;
    Ok(Debiased { glasso, refit })
}
