//! Maximum-likelihood precision estimation under a known sparsity pattern.
//!
//! Minimizes `L(Q) = −log det Q + tr(S Q)` over SPD `Q` with `Supp(Q) ⊆ Ω`.
//! Each outer step takes the projected gradient `P_Ω(S − Q⁻¹)`, solves the
//! projected Newton system `P_Ω(W Δ W) = −G` (with `W = Q⁻¹`) by
//! preconditioned CG on the Ω entries, and backtracks from `α = 1` until
//! `Q + αΔ` is positive-definite and satisfies the Armijo condition.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{PatternMatrix, SparseSpd, SupportPattern, SymmetricDense};
use crate::par;

/// Relative size of the ridge `ε·mean(diag S)·I` added when `S` is singular.
pub const RIDGE_EPS: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MleConfig {
    /// Stop when the projected gradient's max-abs entry is at most this.
    pub outer_tol: f64,
    pub max_outer_iters: usize,
    /// Relative residual target for the inner CG solve.
    pub pcg_tol: f64,
    pub max_pcg_iters: usize,
    pub armijo_c: f64,
    pub backtrack_factor: f64,
    pub max_backtracks: usize,
}

impl Default for MleConfig {
    fn default() -> Self {
        Self {
            outer_tol: 1e-6,
            max_outer_iters: 200,
            pcg_tol: 1e-2,
            max_pcg_iters: 200,
            armijo_c: 1e-4,
            backtrack_factor: 0.5,
            max_backtracks: 40,
        }
    }
}

impl MleConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidConfig(what.to_string()));
        if !(self.outer_tol > 0.0) || !(self.pcg_tol > 0.0) {
            return bad("tolerances must be positive");
        }
        if self.max_outer_iters == 0 || self.max_pcg_iters == 0 || self.max_backtracks == 0 {
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
}

#[derive(Clone, Debug)]
pub struct MleResult {
    pub q: SparseSpd,
    /// Objective at the start and after every accepted step.
    pub objective_trace: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
}

/// `−log det Q + tr(Q S)`, with the trace taken over the pattern of `Q`.
pub fn neg_log_likelihood(q: &SparseSpd, s: &SymmetricDense) -> Result<f64> {
    Ok(-q.log_det() + q.matrix().trace_product(s)?)
}

/// `∇L(Q) = S − Q⁻¹` (dense).
pub fn gradient(q: &SparseSpd, s: &SymmetricDense) -> Result<SymmetricDense> {
    s.check_dim(q.dim())?;
    s.sub(&q.inverse())
}

/// `ε · mean(diag S)`, or `ε` when the diagonal is not positive.
pub fn ridge_floor(s: &SymmetricDense) -> f64 {
    let mean = s.trace() / s.dim() as f64;
    if mean > 0.0 {
        RIDGE_EPS * mean
    } else {
        RIDGE_EPS
    }
}

/// Unconstrained MLE `S⁻¹` on the full pattern. Fails with
/// [`Error::SingularCovariance`] if `S` is not positive-definite.
pub fn dense_mle(s: &SymmetricDense) -> Result<SparseSpd> {
    let chol = crate::linalg::cholesky(s).map_err(|_| Error::SingularCovariance)?;
    SparseSpd::from_dense(&chol.inverse()).map_err(|_| Error::SingularCovariance)
}

/// Result of [`dense_mle_with_ridge`].
#[derive(Clone, Debug)]
pub struct DenseMle {
    pub precision: SparseSpd,
    /// Ridge added to the diagonal of `S`, if one was needed.
    pub ridge: Option<f64>,
}

/// [`dense_mle`], retrying with `S + ridge_floor(S)·I` when `S` is singular.
pub fn dense_mle_with_ridge(s: &SymmetricDense) -> Result<DenseMle> {
    match dense_mle(s) {
        Ok(precision) => Ok(DenseMle { precision, ridge: None }),
        Err(Error::SingularCovariance) => {
            let ridge = ridge_floor(s);
            let precision = dense_mle(&s.shifted(ridge))?;
            Ok(DenseMle {
                precision,
                ridge: Some(ridge),
            })
        }
        Err(e) => Err(e),
    }
}

/// `diag(1 / max(S_ii, floor))`, the default starting point.
pub fn default_start(s: &SymmetricDense) -> Result<SparseSpd> {
    let floor = ridge_floor(s);
    let diag: Vec<f64> = s.diagonal().iter().map(|&d| 1.0 / d.max(floor)).collect();
    SparseSpd::from_diagonal(&diag).map_err(|_| Error::SingularCovariance)
}

/// `P_Ω(W Δ W)` without forming the `n² × n²` Hessian `W ⊗ W`.
///
/// Forms `V = W Δ` row by row in `O(n · nnz(Δ))`, then each Ω entry as
/// `V[i, :] · W[j, :]` in `O(n)`.
pub fn hessian_apply(w: &SymmetricDense, delta: &PatternMatrix) -> Result<PatternMatrix> {
    let n = delta.dim();
    w.check_dim(n)?;
    let pattern = delta.pattern();
    let dvals = delta.values();
    let mut v = vec![0.0; n * n];
    par::for_each_row_mut(&mut v, n, |i, vrow| {
        let wrow = w.row(i);
        for (l, out) in vrow.iter_mut().enumerate() {
            *out = pattern.row(l).map(|(k, s)| wrow[k] * dvals[s]).sum();
        }
    });
    let values = par::map_range(pattern.len(), |s| {
        let (i, j) = pattern.pairs()[s];
        dot(&v[i * n..(i + 1) * n], w.row(j))
    });
    PatternMatrix::new(pattern.clone(), values)
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Diagonal preconditioner: `W_ii W_jj + W_ij²` off the diagonal, `W_ii²` on it.
pub fn precond_weights(w: &SymmetricDense, pattern: &Arc<SupportPattern>) -> Result<PatternMatrix> {
    w.check_dim(pattern.dim())?;
    let values = pattern
        .pairs()
        .iter()
        .map(|&(i, j)| {
            if i == j {
                w.get(i, i) * w.get(i, i)
            } else {
                w.get(i, i) * w.get(j, j) + w.get(i, j) * w.get(i, j)
            }
        })
        .collect();
    PatternMatrix::new(pattern.clone(), values)
}

#[derive(Clone, Debug)]
pub struct PcgOutcome {
    pub direction: PatternMatrix,
    pub iterations: usize,
    pub converged: bool,
    /// `‖P_Ω(WΔW) + G‖ / ‖G‖` at exit.
    pub relative_residual: f64,
}

/// Solves `P_Ω(W Δ W) = −G` for `Δ` on the pattern of `g` by preconditioned
/// conjugate gradients. Every iterate lives on Ω. `w` is `Q⁻¹`.
pub fn proj_pcg(w: &SymmetricDense, g: &PatternMatrix, cfg: &MleConfig) -> Result<PcgOutcome> {
    let pattern = g.pattern().clone();
    let g_norm = g.frobenius_norm();
    let mut x = PatternMatrix::zeros(pattern.clone());
    if g_norm == 0.0 {
        return Ok(PcgOutcome {
            direction: x,
            iterations: 0,
            converged: true,
            relative_residual: 0.0,
        });
    }
    let m = precond_weights(w, &pattern)?;
    let precondition = |r: &PatternMatrix| {
        let vals = r.values().iter().zip(m.values()).map(|(a, b)| a / b).collect();
        PatternMatrix::new(pattern.clone(), vals).expect("same pattern")
    };

    let mut r = g.scaled(-1.0);
    let mut z = precondition(&r);
    let mut p = z.clone();
    let mut rz = r.dot(&z);
    let mut rel = 1.0;
    for it in 1..=cfg.max_pcg_iters {
        let hp = hessian_apply(w, &p)?;
        let curvature = p.dot(&hp);
        if !(curvature > 0.0) {
            // Loss of positive curvature can only come from roundoff; keep
            // the current iterate (a descent direction when nonzero).
            return Ok(PcgOutcome {
                direction: if it == 1 { z } else { x },
                iterations: it,
                converged: false,
                relative_residual: rel,
            });
        }
        let alpha = rz / curvature;
        x.axpy(alpha, &p);
        r.axpy(-alpha, &hp);
        rel = r.frobenius_norm() / g_norm;
        if rel <= cfg.pcg_tol {
            return Ok(PcgOutcome {
                direction: x,
                iterations: it,
                converged: true,
                relative_residual: rel,
            });
        }
        z = precondition(&r);
        let rz_next = r.dot(&z);
        let beta = rz_next / rz;
        rz = rz_next;
        let mut next = z.clone();
        next.axpy(beta, &p);
        p = next;
    }
    Ok(PcgOutcome {
        direction: x,
        iterations: cfg.max_pcg_iters,
        converged: false,
        relative_residual: rel,
    })
}

#[derive(Clone, Debug)]
pub struct LineSearchStep {
    pub alpha: f64,
    pub q: SparseSpd,
    pub objective: f64,
    pub backtracks: usize,
}

/// Backtracks `α ∈ {1, β, β², …}` until `base + αΔ` factorizes and
/// `f(base + αΔ) ≤ f0 + c·α·slope`.
pub(crate) fn spd_backtracking(
    base: &PatternMatrix,
    delta: &PatternMatrix,
    f0: f64,
    slope: f64,
    armijo_c: f64,
    backtrack_factor: f64,
    max_backtracks: usize,
    objective: impl Fn(&SparseSpd) -> Result<f64>,
) -> Result<LineSearchStep> {
    let mut alpha = 1.0;
    for backtracks in 0..=max_backtracks {
        let trial = base.plus_scaled(alpha, delta);
        if let Ok(q) = SparseSpd::new(trial) {
            let f = objective(&q)?;
            if f <= f0 + armijo_c * alpha * slope {
                return Ok(LineSearchStep {
                    alpha,
                    q,
                    objective: f,
                    backtracks,
                });
            }
        }
        alpha *= backtrack_factor;
    }
    Err(Error::LineSearchFailed {
        backtracks: max_backtracks,
    })
}

/// Armijo backtracking with a positive-definiteness guard for the smooth
/// objective. `g` is the projected gradient, `delta` a descent direction on
/// the same pattern as `q`.
pub fn armijo_spd_search(
    q: &SparseSpd,
    s: &SymmetricDense,
    g: &PatternMatrix,
    delta: &PatternMatrix,
    cfg: &MleConfig,
) -> Result<LineSearchStep> {
    let base = q.matrix().on_pattern(delta.pattern().clone())?;
    let slope = g.on_pattern(delta.pattern().clone())?.dot(delta);
    if !(slope < 0.0) {
        return Err(Error::LineSearchFailed { backtracks: 0 });
    }
    let f0 = neg_log_likelihood(q, s)?;
    spd_backtracking(
        &base,
        delta,
        f0,
        slope,
        cfg.armijo_c,
        cfg.backtrack_factor,
        cfg.max_backtracks,
        |q| neg_log_likelihood(q, s),
    )
}

/// Support-constrained MLE by projected Newton.
///
/// `q0` must be SPD with support inside `pattern`; when `None` the start is
/// [`default_start`].
pub fn estimate_known_support(
    s: &SymmetricDense,
    pattern: Arc<SupportPattern>,
    q0: Option<&SparseSpd>,
    cfg: &MleConfig,
) -> Result<MleResult> {
    cfg.validate()?;
    s.check_dim(pattern.dim())?;
    let mut q = match q0 {
        Some(q0) => {
            if q0.dim() != pattern.dim() {
                return Err(Error::DimensionMismatch {
                    expected: pattern.dim(),
                    found: q0.dim(),
                });
            }
            q0.on_pattern(pattern.clone())?
        }
        None => default_start(s)?.on_pattern(pattern.clone())?,
    };
    let mut f = neg_log_likelihood(&q, s)?;
    let mut trace = vec![f];
    let mut converged = false;
    let mut iterations = 0;
    // Gradient size when the last step was taken below Armijo resolution.
    let mut endgame: Option<f64> = None;
    loop {
        let w = q.inverse();
        let g = projected_gradient(s, &w, &pattern);
        let gmax = g.max_abs();
        if gmax <= cfg.outer_tol {
            converged = true;
            break;
        }
        if iterations == cfg.max_outer_iters || endgame.is_some_and(|prev| gmax >= prev) {
            break;
        }
        let direction = proj_pcg(&w, &g, cfg)?.direction;
        let slope = g.dot(&direction);
        if !(slope < 0.0) {
            break;
        }
        if -slope <= 64.0 * f64::EPSILON * f.abs().max(1.0) {
            // The predicted decrease is below the resolution of the objective:
            // take the full step while it does not increase f, and stop once
            // the gradient no longer shrinks.
            let Ok(trial) = SparseSpd::new(q.matrix().plus_scaled(1.0, &direction)) else {
                break;
            };
            let f_new = neg_log_likelihood(&trial, s)?;
            if f_new > f {
                break;
            }
            q = trial;
            f = f_new;
            trace.push(f);
            iterations += 1;
            endgame = Some(gmax);
            continue;
        }
        let step = spd_backtracking(
            q.matrix(),
            &direction,
            f,
            slope,
            cfg.armijo_c,
            cfg.backtrack_factor,
            cfg.max_backtracks,
            |q| neg_log_likelihood(q, s),
        )?;
        q = step.q;
        f = step.objective;
        trace.push(f);
        iterations += 1;
        endgame = None;
    }
    Ok(MleResult {
        q,
        objective_trace: trace,
        converged,
        iterations,
    })
}

/// `P_Ω(S − W)` as a pattern matrix.
pub(crate) fn projected_gradient(s: &SymmetricDense, w: &SymmetricDense, pattern: &Arc<SupportPattern>) -> PatternMatrix {
    let values = pattern.pairs().iter().map(|&(i, j)| s.get(i, j) - w.get(i, j)).collect();
    PatternMatrix::new(pattern.clone(), values).expect("one value per pair")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::spd_inverse;

    fn full(n: usize) -> Arc<SupportPattern> {
        Arc::new(SupportPattern::full(n))
    }

    fn tri3() -> SparseSpd {
        let p = Arc::new(SupportPattern::tridiagonal(3));
        let v = p.pairs().iter().map(|&(i, j)| if i == j { 2.0 } else { -1.0 }).collect();
        SparseSpd::from_parts(p, v).unwrap()
    }

    #[test]
    fn objective_examples() {
        let q = SparseSpd::identity(5);
        let s = SymmetricDense::identity(5);
        assert!((neg_log_likelihood(&q, &s).unwrap() - 5.0).abs() < 1e-14);

        let q = SparseSpd::from_diagonal(&[2.0]).unwrap();
        let s = SymmetricDense::identity(1);
        assert!((neg_log_likelihood(&q, &s).unwrap() - 1.306853).abs() < 1e-6);

        let q = SparseSpd::from_parts(full(2), vec![2.0, -1.0, 2.0]).unwrap();
        let s = SymmetricDense::identity(2);
        assert!((neg_log_likelihood(&q, &s).unwrap() - 2.901388).abs() < 1e-6);

        assert!(neg_log_likelihood(&q, &SymmetricDense::identity(3)).is_err());
    }

    #[test]
    fn gradient_examples() {
        let g = gradient(&SparseSpd::identity(3), &SymmetricDense::identity(3)).unwrap();
        assert_eq!(g.max_abs(), 0.0);
        let g = gradient(&SparseSpd::from_diagonal(&[2.0]).unwrap(), &SymmetricDense::identity(1)).unwrap();
        assert!((g.get(0, 0) - 0.5).abs() < 1e-15);
        let g = gradient(&SparseSpd::from_diagonal(&[1.0, 4.0]).unwrap(), &SymmetricDense::identity(2)).unwrap();
        assert!(g.get(0, 0).abs() < 1e-15 && (g.get(1, 1) - 0.75).abs() < 1e-15);
    }

    #[test]
    fn dense_mle_examples() {
        let q = dense_mle(&SymmetricDense::identity(3)).unwrap();
        assert!(q.to_dense().sub(&SymmetricDense::identity(3)).unwrap().max_abs() < 1e-14);
        let q = dense_mle(&SymmetricDense::from_diagonal(&[2.0, 4.0])).unwrap();
        assert!((q.get(0, 0) - 0.5).abs() < 1e-14 && (q.get(1, 1) - 0.25).abs() < 1e-14);
        let s = SymmetricDense::from_row_major(2, vec![2. / 3., 1. / 3., 1. / 3., 2. / 3.]).unwrap();
        let q = dense_mle(&s).unwrap();
        let expected = [2.0, -1.0, -1.0, 2.0];
        for (a, b) in q.to_dense().as_slice().iter().zip(expected) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(gradient(&q, &s).unwrap().max_abs() < 1e-8);
    }

    #[test]
    fn singular_covariance_needs_ridge() {
        let s = SymmetricDense::from_fn(2, |_, _| 1.0);
        assert!(matches!(dense_mle(&s), Err(Error::SingularCovariance)));
        let r = dense_mle_with_ridge(&s).unwrap();
        assert_eq!(r.ridge, Some(1e-6));
        let zero = SymmetricDense::zeros(2);
        assert!(default_start(&zero).is_ok());
    }

    #[test]
    fn hessian_examples() {
        let p = Arc::new(SupportPattern::tridiagonal(3));
        let d = PatternMatrix::new(p.clone(), vec![0.3, -0.2, 1.0, 0.5, -0.7]).unwrap();
        let h = hessian_apply(&SymmetricDense::identity(3), &d).unwrap();
        assert_eq!(h.values(), d.values());
        let h = hessian_apply(&SymmetricDense::identity(3).scaled(2.0), &d).unwrap();
        for (a, b) in h.values().iter().zip(d.values()) {
            assert!((a - 4.0 * b).abs() < 1e-14);
        }
        // W² for W = [[2/3,1/3],[1/3,2/3]] is [[5/9,4/9],[4/9,5/9]].
        let w = SymmetricDense::from_row_major(2, vec![2. / 3., 1. / 3., 1. / 3., 2. / 3.]).unwrap();
        let id = PatternMatrix::restrict(&SymmetricDense::identity(2), full(2)).unwrap();
        let h = hessian_apply(&w, &id).unwrap();
        for (a, b) in h.values().iter().zip([5. / 9., 4. / 9., 5. / 9.]) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn preconditioner_examples() {
        let m = precond_weights(&SymmetricDense::identity(2), &full(2)).unwrap();
        assert_eq!(m.values(), &[1.0, 1.0, 1.0]);
        let m = precond_weights(&SymmetricDense::from_diagonal(&[2.0, 3.0]), &full(2)).unwrap();
        assert_eq!(m.values(), &[4.0, 6.0, 9.0]);
        let w = SymmetricDense::from_row_major(2, vec![1.0, 0.5, 0.5, 1.0]).unwrap();
        let m = precond_weights(&w, &full(2)).unwrap();
        assert_eq!(m.get(0, 1), 1.25);
    }

    #[test]
    fn pcg_examples() {
        let cfg = MleConfig {
            pcg_tol: 1e-12,
            ..MleConfig::default()
        };
        let g = PatternMatrix::new(full(2), vec![0.3, -0.4, 1.1]).unwrap();
        let d = proj_pcg(&SymmetricDense::identity(2), &g, &cfg).unwrap();
        for (a, b) in d.direction.values().iter().zip(g.values()) {
            assert!((a + b).abs() < 1e-12);
        }
        let w = spd_inverse(&SparseSpd::from_diagonal(&[2.0, 2.0]).unwrap());
        let d = proj_pcg(&w, &g, &cfg).unwrap();
        for (a, b) in d.direction.values().iter().zip(g.values()) {
            assert!((a + 4.0 * b).abs() < 1e-12);
        }
        let w = spd_inverse(&SparseSpd::from_diagonal(&[1.0, 4.0]).unwrap());
        let g = PatternMatrix::from_diagonal(&[0.0, 0.75]);
        let d = proj_pcg(&w, &g, &cfg).unwrap();
        assert!(d.direction.values()[0].abs() < 1e-12);
        assert!((d.direction.values()[1] + 12.0).abs() < 1e-10);
    }

    #[test]
    fn pcg_residual_meets_tolerance_on_sparse_pattern() {
        let q = tri3();
        let w = q.inverse();
        let g = PatternMatrix::new(q.pattern().clone(), vec![0.2, -0.1, 0.05, 0.3, -0.2]).unwrap();
        let cfg = MleConfig::default();
        let out = proj_pcg(&w, &g, &cfg).unwrap();
        assert!(out.converged);
        let mut res = hessian_apply(&w, &out.direction).unwrap();
        res.axpy(1.0, &g);
        assert!(res.frobenius_norm() <= cfg.pcg_tol * g.frobenius_norm());
        assert!(g.dot(&out.direction) < 0.0);
    }

    #[test]
    fn line_search_examples() {
        let cfg = MleConfig::default();
        // 1-d: Newton step overshoots to Q = 0; β = 0.5 lands on the minimizer.
        let q = SparseSpd::from_diagonal(&[2.0]).unwrap();
        let s = SymmetricDense::identity(1);
        let g = PatternMatrix::from_diagonal(&[0.5]);
        let d = PatternMatrix::from_diagonal(&[-2.0]);
        let step = armijo_spd_search(&q, &s, &g, &d, &cfg).unwrap();
        assert_eq!(step.alpha, 0.5);
        assert!((step.q.get(0, 0) - 1.0).abs() < 1e-15);
        assert_eq!(step.backtracks, 1);

        // q = I, s = 2I: α = 1 gives 0, α = 0.5 accepted.
        let n = 3;
        let q = SparseSpd::identity(n);
        let s = SymmetricDense::identity(n).scaled(2.0);
        let g = PatternMatrix::identity(n);
        let d = PatternMatrix::identity(n).scaled(-1.0);
        let step = armijo_spd_search(&q, &s, &g, &d, &cfg).unwrap();
        assert_eq!(step.alpha, 0.5);
        let expected = n as f64 * (2f64.ln() + 1.0);
        assert!((step.objective - expected).abs() < 1e-12);

        // Not a descent direction.
        let err = armijo_spd_search(&q, &s, &g, &g, &cfg).unwrap_err();
        assert!(matches!(err, Error::LineSearchFailed { .. }));
    }

    #[test]
    fn known_support_examples() {
        let cfg = MleConfig::default();
        let r = estimate_known_support(&SymmetricDense::identity(4), Arc::new(SupportPattern::diagonal(4)), None, &cfg).unwrap();
        assert!(r.converged);
        assert_eq!(r.iterations, 0);

        let truth = tri3();
        let s = truth.inverse();
        let r = estimate_known_support(&s, truth.pattern().clone(), None, &cfg).unwrap();
        assert!(r.converged);
        let err = r.q.to_dense().sub(&truth.to_dense()).unwrap().max_abs();
        assert!(err < 1e-6, "max error {err}");
        assert!(r.objective_trace.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn diagonal_support_decouples() {
        // 10 draws of a 3-d standard normal, fixed here so the test needs no RNG.
        let xs: [[f64; 3]; 10] = [
            [0.12, -1.3, 0.44],
            [1.5, 0.2, -0.7],
            [-0.3, 0.9, 1.1],
            [0.8, -0.4, -1.6],
            [-1.2, 1.7, 0.05],
            [0.05, -0.6, 0.3],
            [2.1, 0.1, -0.2],
            [-0.7, -1.1, 0.9],
            [0.4, 0.35, -0.45],
            [-0.9, 0.8, 1.4],
        ];
        let rows: Vec<Vec<f64>> = xs.iter().map(|r| r.to_vec()).collect();
        let data = crate::DataMatrix::from_rows(&rows).unwrap();
        let s = data.covariance(&data.mean()).unwrap();
        let r = estimate_known_support(&s, Arc::new(SupportPattern::diagonal(3)), None, &MleConfig::default()).unwrap();
        for i in 0..3 {
            assert!((r.q.get(i, i) - 1.0 / s.get(i, i)).abs() < 1e-10);
        }
    }

    #[test]
    fn warm_start_outside_pattern_is_rejected() {
        let q0 = SparseSpd::from_parts(full(2), vec![2.0, 0.5, 2.0]).unwrap();
        let r = estimate_known_support(
            &SymmetricDense::identity(2),
            Arc::new(SupportPattern::diagonal(2)),
            Some(&q0),
            &MleConfig::default(),
        );
        assert!(matches!(r, Err(Error::InvalidPattern(_))));
    }

    #[test]
    fn invalid_config_is_rejected() {
        let cfg = MleConfig {
            armijo_c: 1.5,
            ..MleConfig::default()
        };
        assert!(cfg.validate().is_err());
    }
}
