use std::sync::Arc;

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use super::{e_step, GmrfComponent, MixtureModel, Responsibilities};
use crate::data::DataMatrix;
use crate::error::{Error, Result};
use crate::glasso::{self, GlassoConfig};
use crate::linalg::{SparseSpd, SupportPattern, SymmetricDense};
use crate::mle::{self, MleConfig};
use crate::par;
use crate::rng;

/// Per-component precision estimator used in the M-step.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Estimator {
    /// `S⁻¹` (with a ridge floor only if `S` is singular).
    Baseline,
    Glasso {
        #[serde(default)]
        glasso: GlassoConfig,
    },
    Debiased {
        #[serde(default)]
        glasso: GlassoConfig,
        #[serde(default)]
        mle: MleConfig,
    },
    /// One pattern shared by every component, or one per component.
    KnownSupport {
        patterns: Vec<SupportPattern>,
        #[serde(default)]
        mle: MleConfig,
    },
}

impl Estimator {
    pub fn name(&self) -> &'static str {
        match self {
            Estimator::Baseline => "baseline",
            Estimator::Glasso { .. } => "glasso",
            Estimator::Debiased { .. } => "debiased",
            Estimator::KnownSupport { .. } => "known-support",
        }
    }
}

/// How the first responsibilities are drawn. The seed is passed to
/// [`fit_em`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Init {
    /// Every row drawn from a symmetric Dirichlet(1).
    #[default]
    RandomResponsibilities,
    /// k-means++ seeding, then hard nearest-center assignment.
    KMeansPlusPlus,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct EmConfig {
    pub estimator: Estimator,
    pub k: usize,
    pub init: Init,
    /// Relative change in total log-likelihood that ends the loop.
    pub ll_tol: f64,
    pub max_em_iters: usize,
    /// A component whose weight sum falls below this times `N` is empty.
    pub min_component_weight: f64,
    pub fix_means_to_zero: bool,
}

impl Default for EmConfig {
    fn default() -> Self {
        Self {
            estimator: Estimator::Baseline,
            k: 1,
            init: Init::RandomResponsibilities,
            ll_tol: 1e-6,
            max_em_iters: 500,
            min_component_weight: 1e-6,
            fix_means_to_zero: false,
        }
    }
}

impl EmConfig {
    pub fn new(k: usize, estimator: Estimator) -> Self {
        Self {
            k,
            estimator,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::InvalidConfig("K must be at least 1".into()));
        }
        if !(self.ll_tol > 0.0) || !(self.min_component_weight > 0.0 && self.min_component_weight < 1.0) {
            return Err(Error::InvalidConfig("ll_tol and min_component_weight must be positive".into()));
        }
        match &self.estimator {
            Estimator::Baseline => {}
            Estimator::Glasso { glasso } => glasso.validate()?,
            Estimator::Debiased { glasso, mle } => {
                glasso.validate()?;
                mle.validate()?;
            }
            Estimator::KnownSupport { patterns, mle } => {
                mle.validate()?;
                if patterns.len() != 1 && patterns.len() != self.k {
                    return Err(Error::InvalidConfig(format!(
                        "known-support needs 1 or {} patterns, got {}",
                        self.k,
                        patterns.len()
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Weighted mean, covariance and total weight of one component.
#[derive(Clone, Debug)]
pub struct WeightedStats {
    pub mean: Vec<f64>,
    pub cov: SymmetricDense,
    pub weight_sum: f64,
}

/// `μ̂ = Σ w x / Σ w` (or zero) and `S = Σ w (x − μ̂)(x − μ̂)ᵀ / Σ w` for
/// column `k` of `w`.
pub fn weighted_stats(
    data: &DataMatrix,
    w: &Responsibilities,
    k: usize,
    fix_mean_zero: bool,
    min_component_weight: f64,
) -> Result<WeightedStats> {
    if w.n_samples() != data.n_samples() {
        return Err(Error::DimensionMismatch {
            expected: data.n_samples(),
            found: w.n_samples(),
        });
    }
    let weights = w.column(k);
    let weight_sum: f64 = weights.iter().sum();
    if !(weight_sum > 0.0) || weight_sum < min_component_weight * data.n_samples() as f64 {
        return Err(Error::EmptyComponent { component: k, weight_sum });
    }
    let n = data.dim();
    let mut mean = vec![0.0; n];
    if !fix_mean_zero {
        for (i, &wi) in weights.iter().enumerate() {
            for (m, x) in mean.iter_mut().zip(data.row(i)) {
                *m += wi * x;
            }
        }
        mean.iter_mut().for_each(|m| *m /= weight_sum);
    }
    let cov = data.weighted_covariance(Some(&weights), &mean)?;
    Ok(WeightedStats { mean, cov, weight_sum })
}

fn shared_patterns(cfg: &EmConfig) -> Vec<Arc<SupportPattern>> {
    match &cfg.estimator {
        Estimator::KnownSupport { patterns, .. } => patterns.iter().cloned().map(Arc::new).collect(),
        _ => Vec::new(),
    }
}

/// One component's precision. Returns the estimate and the matrix to
/// warm-start the next call with (the lasso estimate for `Debiased`).
fn estimate_precision(
    estimator: &Estimator,
    s: &SymmetricDense,
    pattern: Option<&Arc<SupportPattern>>,
    warm: Option<&SparseSpd>,
) -> Result<(SparseSpd, SparseSpd)> {
    match estimator {
        Estimator::Baseline => {
            let q = mle::dense_mle_with_ridge(s)?.precision;
            Ok((q.clone(), q))
        }
        Estimator::Glasso { glasso } => {
            let q = glasso::glasso_solve(s, glasso, warm)?.q;
            Ok((q.clone(), q))
        }
        Estimator::Debiased { glasso, mle } => {
            let d = glasso::debias(s, glasso, mle, warm)?;
            Ok((d.refit.q, d.glasso.q))
        }
        Estimator::KnownSupport { mle, .. } => {
            let pattern = pattern.expect("known-support patterns resolved").clone();
            let start = warm
                .filter(|q| q.pattern().is_subset_of(&pattern))
                .and_then(|q| q.on_pattern(pattern.clone()).ok());
            let q = mle::estimate_known_support(s, pattern, start.as_ref(), mle)?.q;
            Ok((q.clone(), q))
        }
    }
}

fn m_step_inner(
    data: &DataMatrix,
    w: &Responsibilities,
    cfg: &EmConfig,
    patterns: &[Arc<SupportPattern>],
    warm: &[Option<SparseSpd>],
    iteration: usize,
) -> Result<(MixtureModel, Vec<Option<SparseSpd>>)> {
    let n_total = data.n_samples() as f64;
    let fits = par::map_range(cfg.k, |k| -> Result<(GmrfComponent, SparseSpd)> {
        let wrap = |e: Error| Error::Component {
            component: k,
            iteration,
            source: Box::new(e),
        };
        let stats = weighted_stats(data, w, k, cfg.fix_means_to_zero, cfg.min_component_weight).map_err(wrap)?;
        let pattern = patterns.get(if patterns.len() == 1 { 0 } else { k });
        let (q, next) = estimate_precision(&cfg.estimator, &stats.cov, pattern, warm.get(k).and_then(Option::as_ref)).map_err(wrap)?;
        Ok((GmrfComponent::new(stats.weight_sum / n_total, stats.mean, q)?, next))
    });
    let mut components = Vec::with_capacity(cfg.k);
    let mut next_warm = Vec::with_capacity(cfg.k);
    for fit in fits {
        let (c, next) = fit?;
        components.push(c);
        next_warm.push(Some(next));
    }
    // weights are Σw_k / N; renormalize the last few ulps away
    let total: f64 = components.iter().map(|c| c.weight).sum();
    components.iter_mut().for_each(|c| c.weight /= total);
    Ok((MixtureModel::new(components)?, next_warm))
}

/// Weights `Σ_i w_ik / N`, moments from [`weighted_stats`], and each
/// precision from the configured estimator, warm-started at `prev`.
pub fn m_step(data: &DataMatrix, w: &Responsibilities, cfg: &EmConfig, prev: Option<&MixtureModel>) -> Result<MixtureModel> {
    cfg.validate()?;
    if w.k() != cfg.k {
        return Err(Error::DimensionMismatch {
            expected: cfg.k,
            found: w.k(),
        });
    }
    let warm: Vec<Option<SparseSpd>> = match prev {
        Some(m) if m.k() == cfg.k => m.components().iter().map(|c| Some(c.precision.clone())).collect(),
        _ => vec![None; cfg.k],
    };
    Ok(m_step_inner(data, w, cfg, &shared_patterns(cfg), &warm, 0)?.0)
}

/// Initial responsibilities drawn from stream 0 of `seed`.
pub fn initial_responsibilities(data: &DataMatrix, cfg: &EmConfig, seed: u64) -> Result<Responsibilities> {
    let n_samples = data.n_samples();
    let k = cfg.k;
    let mut rng = rng::stream(seed, 0);
    match cfg.init {
        Init::RandomResponsibilities => {
            let mut values = Vec::with_capacity(n_samples * k);
            for _ in 0..n_samples {
                let row: Vec<f64> = (0..k).map(|_| Exp1.sample(&mut rng)).collect();
                let s: f64 = row.iter().sum();
                values.extend(row.iter().map(|g: &f64| g / s));
            }
            for row in values.chunks_mut(k) {
                let s: f64 = row.iter().sum();
                row.iter_mut().for_each(|w| *w /= s);
            }
            Responsibilities::new(n_samples, k, values)
        }
        Init::KMeansPlusPlus => {
            if n_samples < k {
                return Err(Error::DegenerateInit);
            }
            let dist2 = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>();
            let mut centers = vec![rng.random_range(0..n_samples)];
            let mut nearest: Vec<f64> = (0..n_samples).map(|i| dist2(data.row(i), data.row(centers[0]))).collect();
            while centers.len() < k {
                let total: f64 = nearest.iter().sum();
                if !(total > 0.0) {
                    return Err(Error::DegenerateInit);
                }
                let mut target = rng.random::<f64>() * total;
                let mut pick = n_samples - 1;
                for (i, &d) in nearest.iter().enumerate() {
                    if target < d {
                        pick = i;
                        break;
                    }
                    target -= d;
                }
                centers.push(pick);
                for (i, d) in nearest.iter_mut().enumerate() {
                    *d = d.min(dist2(data.row(i), data.row(pick)));
                }
            }
            let labels: Vec<usize> = (0..n_samples)
                .map(|i| {
                    let mut best = 0;
                    let mut best_d = f64::INFINITY;
                    for (c, &p) in centers.iter().enumerate() {
                        let d = dist2(data.row(i), data.row(p));
                        if d < best_d {
                            best = c;
                            best_d = d;
                        }
                    }
                    best
                })
                .collect();
            Responsibilities::from_labels(&labels, k)
        }
    }
}

/// Result of an EM run.
#[derive(Clone, Debug)]
pub struct EmFit {
    pub model: MixtureModel,
    /// Total log-likelihood after each M-step.
    pub ll_trace: Vec<f64>,
    pub responsibilities: Responsibilities,
    pub converged: bool,
    /// Number of M-steps performed.
    pub iterations: usize,
    /// Components re-seeded after emptying out, as `(iteration, component)`.
    pub reseeded: Vec<(usize, usize)>,
}

/// EM from the configured initialization (stream 0 of `seed`).
pub fn fit_em(data: &DataMatrix, cfg: &EmConfig, seed: u64) -> Result<EmFit> {
    cfg.validate()?;
    if data.n_samples() < cfg.k {
        return Err(Error::InvalidConfig(format!(
            "need at least K = {} samples, got {}",
            cfg.k,
            data.n_samples()
        )));
    }
    let init = initial_responsibilities(data, cfg, seed)?;
    fit_em_from(data, cfg, init)
}

/// EM starting with an M-step on the given responsibilities.
pub fn fit_em_from(data: &DataMatrix, cfg: &EmConfig, init: Responsibilities) -> Result<EmFit> {
    cfg.validate()?;
    if init.k() != cfg.k || init.n_samples() != data.n_samples() {
        return Err(Error::DimensionMismatch {
            expected: data.n_samples() * cfg.k,
            found: init.n_samples() * init.k(),
        });
    }
    let floor = cfg.min_component_weight * data.n_samples() as f64;
    if init.column_sums().iter().any(|&s| !(s >= floor && s > 0.0)) {
        return Err(Error::DegenerateInit);
    }
    let patterns = shared_patterns(cfg);
    let mut warm = vec![None; cfg.k];
    let mut resp = init;
    let mut ll_trace = Vec::new();
    let mut reseeded = Vec::new();
    let mut iterations = 0;
    loop {
        iterations += 1;
        let (model, next_warm) = m_step_inner(data, &resp, cfg, &patterns, &warm, iterations)?;
        warm = next_warm;
        let e = e_step(&model, data)?;
        let ll = e.log_likelihood;
        let done = ll_trace
            .last()
            .is_some_and(|&prev: &f64| (ll - prev).abs() <= cfg.ll_tol * ll.abs());
        ll_trace.push(ll);
        resp = e.responsibilities;
        if done || iterations >= cfg.max_em_iters {
            return Ok(EmFit {
                model,
                ll_trace,
                responsibilities: resp,
                converged: done,
                iterations,
                reseeded,
            });
        }
        for k in reseed_empty(&mut resp, &e.point_log_likelihood, data.dim(), floor) {
            reseeded.push((iterations, k));
            warm[k] = None;
        }
    }
}

/// Hands each empty component the worst-explained points (lowest mixture
/// log-density, earliest index on ties) as hard assignments.
fn reseed_empty(resp: &mut Responsibilities, point_ll: &[f64], dim: usize, floor: f64) -> Vec<usize> {
    let sums = resp.column_sums();
    let empty: Vec<usize> = (0..resp.k()).filter(|&k| !(sums[k] >= floor && sums[k] > 0.0)).collect();
    if empty.is_empty() {
        return empty;
    }
    let n_samples = resp.n_samples();
    let k_total = resp.k();
    let take = (dim + 1).max(n_samples / k_total).min(n_samples / empty.len().max(1));
    let mut order: Vec<usize> = (0..n_samples).collect();
    order.sort_by(|&a, &b| point_ll[a].total_cmp(&point_ll[b]).then(a.cmp(&b)));
    let values = resp.values_mut();
    for (slot, &k) in empty.iter().enumerate() {
        for &i in &order[slot * take..(slot + 1) * take] {
            let row = &mut values[i * k_total..(i + 1) * k_total];
            row.iter_mut().for_each(|w| *w = 0.0);
            row[k] = 1.0;
        }
    }
    empty
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthetic::sample_gmrf;

    fn one_d(values: &[f64]) -> DataMatrix {
        DataMatrix::from_rows(&values.iter().map(|&v| vec![v]).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn weighted_stats_examples() {
        let d = one_d(&[0.0, 2.0]);
        let w = Responsibilities::new(2, 1, vec![1.0, 1.0]).unwrap();
        let st = weighted_stats(&d, &w, 0, false, 1e-6).unwrap();
        assert_eq!(st.mean, vec![1.0]);
        assert_eq!(st.cov.get(0, 0), 1.0);

        let w = Responsibilities::from_labels(&[0, 1], 2).unwrap();
        let st = weighted_stats(&d, &w, 0, false, 1e-6).unwrap();
        assert_eq!((st.mean[0], st.cov.get(0, 0), st.weight_sum), (0.0, 0.0, 1.0));

        let w = Responsibilities::from_labels(&[1, 1], 2).unwrap();
        assert!(matches!(
            weighted_stats(&d, &w, 0, false, 1e-6),
            Err(Error::EmptyComponent { component: 0, .. })
        ));

        let st = weighted_stats(&d, &Responsibilities::from_labels(&[0, 0], 1).unwrap(), 0, true, 1e-6).unwrap();
        assert_eq!(st.mean, vec![0.0]);
        assert_eq!(st.cov.get(0, 0), 2.0);
    }

    #[test]
    fn single_component_m_steps() {
        let q = SparseSpd::from_diagonal(&[1.0, 4.0]).unwrap();
        let data = sample_gmrf(&q, &[1.0, -2.0], 500, 3).unwrap();
        let w = Responsibilities::from_labels(&vec![0; 500], 1).unwrap();
        let model = m_step(&data, &w, &EmConfig::new(1, Estimator::Baseline), None).unwrap();
        let mu = data.mean();
        let s = data.covariance(&mu).unwrap();
        let inv = mle::dense_mle(&s).unwrap();
        let c = &model.components()[0];
        assert_eq!(c.mean, mu);
        assert!(c.precision.to_dense().sub(&inv.to_dense()).unwrap().max_abs() < 1e-10);

        let cfg = EmConfig::new(
            1,
            Estimator::KnownSupport {
                patterns: vec![SupportPattern::diagonal(2)],
                mle: MleConfig::default(),
            },
        );
        let model = m_step(&data, &w, &cfg, None).unwrap();
        for i in 0..2 {
            assert!((model.components()[0].precision.get(i, i) - 1.0 / s.get(i, i)).abs() < 1e-8);
        }
        assert_eq!(model.components()[0].precision.get(0, 1), 0.0);
    }

    #[test]
    fn hard_assignments_fit_clusters_independently() {
        let d = one_d(&[-1.0, 0.0, 1.0, 9.0, 10.0, 12.0]);
        let w = Responsibilities::from_labels(&[0, 0, 0, 1, 1, 1], 2).unwrap();
        let m = m_step(&d, &w, &EmConfig::new(2, Estimator::Baseline), None).unwrap();
        for (k, idx) in [[0, 1, 2], [3, 4, 5]].iter().enumerate() {
            let sub = d.select_rows(idx);
            let mu = sub.mean();
            let s = sub.covariance(&mu).unwrap().get(0, 0);
            let c = &m.components()[k];
            assert!((c.mean[0] - mu[0]).abs() < 1e-12);
            assert!((c.precision.get(0, 0) - 1.0 / s).abs() < 1e-10);
            assert_eq!(c.weight, 0.5);
        }
    }

    #[test]
    fn fit_single_gaussian_converges_immediately() {
        let data = sample_gmrf(&SparseSpd::identity(3), &[0.5, 0.0, -0.5], 400, 8).unwrap();
        let fit = fit_em(&data, &EmConfig::new(1, Estimator::Baseline), 1).unwrap();
        assert!(fit.converged);
        assert!(fit.ll_trace.len() <= 2);
        let mu = data.mean();
        for (a, b) in fit.model.components()[0].mean.iter().zip(&mu) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn two_separated_clusters() {
        let q = SparseSpd::identity(1);
        let a = sample_gmrf(&q, &[-10.0], 200, 1).unwrap();
        let b = sample_gmrf(&q, &[10.0], 200, 2).unwrap();
        let rows: Vec<Vec<f64>> = (0..200).flat_map(|i| [a.row(i).to_vec(), b.row(i).to_vec()]).collect();
        let data = DataMatrix::from_rows(&rows).unwrap();
        // Dirichlet responsibilities start next to the symmetric saddle,
        // where EM stalls for mean-separated clusters
        let cfg = EmConfig {
            init: Init::KMeansPlusPlus,
            ..EmConfig::new(2, Estimator::Baseline)
        };
        for seed in 0..3 {
            let fit = fit_em(&data, &cfg, seed).unwrap();
            let mut means: Vec<f64> = fit.model.components().iter().map(|c| c.mean[0]).collect();
            means.sort_by(f64::total_cmp);
            assert!((means[0] + 10.0).abs() < 0.2 && (means[1] - 10.0).abs() < 0.2, "{means:?}");
            assert!(fit.responsibilities.as_slice().iter().all(|&w| w < 1e-6 || w > 1.0 - 1e-6));
            assert!(fit.ll_trace.windows(2).all(|p| p[1] >= p[0] - 1e-8 * p[0].abs()));
        }
    }

    #[test]
    fn zero_mean_fit_keeps_zero_means() {
        let data = sample_gmrf(&SparseSpd::from_diagonal(&[1.0, 0.2]).unwrap(), &[0.3, 0.0], 300, 5).unwrap();
        let cfg = EmConfig {
            fix_means_to_zero: true,
            max_em_iters: 5,
            ..EmConfig::new(
                2,
                Estimator::Glasso {
                    glasso: GlassoConfig::with_lambda(0.05),
                },
            )
        };
        let fit = fit_em(&data, &cfg, 2).unwrap();
        for c in fit.model.components() {
            assert!(c.mean.iter().all(|&m| m == 0.0));
        }
        let total: f64 = fit.model.components().iter().map(|c| c.weight).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn reseeding_claims_worst_points() {
        let mut r = Responsibilities::from_labels(&[0, 0, 0, 0], 2).unwrap();
        let empty = reseed_empty(&mut r, &[-1.0, -5.0, -3.0, -0.5], 1, 1e-6 * 4.0);
        assert_eq!(empty, vec![1]);
        assert_eq!(r.hard_labels(), vec![0, 1, 1, 0]);
    }

    #[test]
    fn config_validation_and_json() {
        let cfg = EmConfig::new(
            3,
            Estimator::KnownSupport {
                patterns: vec![SupportPattern::diagonal(2); 2],
                mle: MleConfig::default(),
            },
        );
        assert!(cfg.validate().is_err());
        assert!(EmConfig::new(0, Estimator::Baseline).validate().is_err());
        let text = r#"{"k": 4, "estimator": {"kind": "glasso", "glasso": {"lambda": 0.3}}, "fix_means_to_zero": true}"#;
        let cfg: EmConfig = serde_json::from_str(text).unwrap();
        assert_eq!(cfg.k, 4);
        assert!(matches!(cfg.estimator, Estimator::Glasso { ref glasso } if glasso.lambda == 0.3));
        assert_eq!(cfg.init, Init::RandomResponsibilities);
        let back: EmConfig = serde_json::from_str(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(back.max_em_iters, 500);
    }
}
