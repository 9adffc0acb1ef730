//! End-to-end pipelines: the eigenvalue-bias replica on a lattice Laplacian,
//! mixture clustering on random diffusion components, and the λ sweep.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::data::DataMatrix;
use crate::error::{Error, Result};
use crate::evaluation::{bias_report, nmi, vi, BiasReport, NamedEstimate};
use crate::glasso::{self, GlassoConfig};
use crate::linalg::{SparseSpd, SymmetricDense};
use crate::mixture::{e_step, fit_em, EmConfig, Estimator, GmrfComponent, MixtureModel};
use crate::mle::{self, MleConfig};
use crate::par;
use crate::rng;
use crate::synthetic::{laplacian2d_precision, make_clustering_dataset, sample_gmrf, DiffusionSpec, LatticeSpec};

/// Mean and sample standard deviation.
#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

impl MeanStd {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let std = if values.len() > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Self { mean, std }
    }
}

/// Second moment `Σ x xᵀ / N` (the covariance of zero-mean data).
pub fn zero_mean_covariance(data: &DataMatrix) -> Result<SymmetricDense> {
    data.covariance(&vec![0.0; data.dim()])
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct BiasExperiment {
    pub rows: usize,
    pub cols: usize,
    pub samples: usize,
    pub lambda: f64,
    pub seed: u64,
    pub glasso: GlassoConfig,
    pub mle: MleConfig,
}

impl Default for BiasExperiment {
    fn default() -> Self {
        Self {
            rows: 32,
            cols: 32,
            samples: 300,
            lambda: 0.25,
            seed: 1,
            glasso: GlassoConfig::default(),
            mle: MleConfig::default(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct BiasOutcome {
    pub truth: SparseSpd,
    pub data: DataMatrix,
    pub known_support: mle::MleResult,
    pub glasso: glasso::GlassoResult,
    pub debiased: mle::MleResult,
    pub report: BiasReport,
}

/// Samples zero-mean data from the lattice Laplacian and compares the
/// known-support, lasso and debiased estimates on its second moment.
pub fn bias_experiment(cfg: &BiasExperiment) -> Result<BiasOutcome> {
    let truth = laplacian2d_precision(LatticeSpec {
        rows: cfg.rows,
        cols: cfg.cols,
    })?;
    let data = sample_gmrf(&truth, &vec![0.0; truth.dim()], cfg.samples, cfg.seed)?;
    let s = zero_mean_covariance(&data)?;
    let gcfg = GlassoConfig {
        lambda: cfg.lambda,
        ..cfg.glasso.clone()
    };
    let known_support = mle::estimate_known_support(&s, truth.pattern().clone(), None, &cfg.mle)?;
    let d = glasso::debias(&s, &gcfg, &cfg.mle, None)?;
    let report = bias_report(
        &truth,
        &s,
        &[
            NamedEstimate {
                name: "known-support",
                q: &known_support.q,
                lasso: false,
            },
            NamedEstimate {
                name: "glasso",
                q: &d.glasso.q,
                lasso: true,
            },
            NamedEstimate {
                name: "debiased",
                q: &d.refit.q,
                lasso: false,
            },
        ],
        cfg.lambda,
    )?;
    Ok(BiasOutcome {
        truth,
        data,
        known_support,
        glasso: d.glasso,
        debiased: d.refit,
        report,
    })
}

/// Which estimators a clustering benchmark runs. `KnownSupport` uses each
/// generating component's own pattern.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BenchEstimator {
    Baseline,
    Glasso,
    Debiased,
    KnownSupport,
}

impl BenchEstimator {
    pub const ALL: [BenchEstimator; 4] = [
        BenchEstimator::Baseline,
        BenchEstimator::Glasso,
        BenchEstimator::Debiased,
        BenchEstimator::KnownSupport,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BenchEstimator::Baseline => "baseline",
            BenchEstimator::Glasso => "glasso",
            BenchEstimator::Debiased => "debiased",
            BenchEstimator::KnownSupport => "known-support",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown estimator {s:?}")))
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct ClusterBench {
    pub k: usize,
    pub rows: usize,
    pub cols: usize,
    pub samples_low: usize,
    pub samples_high: usize,
    pub coeff_low: f64,
    pub coeff_high: f64,
    pub datasets: usize,
    pub lambda: f64,
    /// Dataset `d` is generated, and its EM runs initialized, from `seed + d`.
    pub seed: u64,
    pub estimators: Vec<BenchEstimator>,
    pub ll_tol: f64,
    pub max_em_iters: usize,
    pub glasso: GlassoConfig,
    pub mle: MleConfig,
}

impl Default for ClusterBench {
    fn default() -> Self {
        Self::full()
    }
}

impl ClusterBench {
    /// 10 datasets of 10 components on a 10×10 grid, 1500–3000 samples each.
    pub fn full() -> Self {
        Self {
            k: 10,
            rows: 10,
            cols: 10,
            samples_low: 1500,
            samples_high: 3000,
            coeff_low: 0.1,
            coeff_high: 1.0,
            datasets: 10,
            lambda: 0.3,
            seed: 0,
            estimators: BenchEstimator::ALL.to_vec(),
            ll_tol: 1e-6,
            max_em_iters: 500,
            glasso: GlassoConfig::default(),
            mle: MleConfig::default(),
        }
    }

    /// 5 components on a 5×5 grid, 500–1000 samples each.
    pub fn small() -> Self {
        Self {
            k: 5,
            rows: 5,
            cols: 5,
            samples_low: 500,
            samples_high: 1000,
            ..Self::full()
        }
    }

    fn spec(&self, seed: u64) -> DiffusionSpec {
        DiffusionSpec {
            coeff_low: self.coeff_low,
            coeff_high: self.coeff_high,
            ..DiffusionSpec::new(self.rows, self.cols, seed)
        }
    }

    fn em_config(&self, which: BenchEstimator, truth: &[SparseSpd]) -> EmConfig {
        let glasso = GlassoConfig {
            lambda: self.lambda,
            ..self.glasso.clone()
        };
        let estimator = match which {
            BenchEstimator::Baseline => Estimator::Baseline,
            BenchEstimator::Glasso => Estimator::Glasso { glasso },
            BenchEstimator::Debiased => Estimator::Debiased {
                glasso,
                mle: self.mle.clone(),
            },
            BenchEstimator::KnownSupport => Estimator::KnownSupport {
                patterns: truth.iter().map(|q| q.pattern().as_ref().clone()).collect(),
                mle: self.mle.clone(),
            },
        };
        EmConfig {
            fix_means_to_zero: true,
            ll_tol: self.ll_tol,
            max_em_iters: self.max_em_iters,
            ..EmConfig::new(self.k, estimator)
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ClusterRun {
    pub dataset: usize,
    pub estimator: String,
    pub nmi: f64,
    pub vi: f64,
    pub em_iterations: usize,
    pub converged: bool,
    pub final_log_likelihood: f64,
    /// Set when the fit failed; the scores are then NaN.
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ClusterSummary {
    pub estimator: String,
    pub nmi: MeanStd,
    pub vi: MeanStd,
    pub failures: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ClusterBenchReport {
    pub config: ClusterBench,
    pub nmi_normalization: String,
    pub runs: Vec<ClusterRun>,
    pub summary: Vec<ClusterSummary>,
}

impl ClusterBenchReport {
    pub fn summary_for(&self, name: &str) -> Option<&ClusterSummary> {
        self.summary.iter().find(|s| s.estimator == name)
    }
}

/// Labels from the generating mixture (true precisions, empirical weights):
/// the Bayes classifier, an upper reference for every estimator.
pub fn oracle_labels(data: &DataMatrix, precisions: &[SparseSpd], counts: &[usize]) -> Result<Vec<usize>> {
    let total: usize = counts.iter().sum();
    let weights: Vec<f64> = counts.iter().map(|&c| c as f64 / total as f64).collect();
    let norm: f64 = weights.iter().sum();
    let components = precisions
        .iter()
        .zip(&weights)
        .map(|(q, w)| GmrfComponent::new(w / norm, vec![0.0; q.dim()], q.clone()))
        .collect::<Result<Vec<_>>>()?;
    Ok(e_step(&MixtureModel::new(components)?, data)?.responsibilities.hard_labels())
}

/// Runs every configured estimator on every dataset. Individual EM failures
/// are recorded in the report rather than aborting the benchmark. An
/// `oracle` row scores the generating model itself.
pub fn cluster_bench(cfg: &ClusterBench) -> Result<ClusterBenchReport> {
    if cfg.datasets == 0 {
        return Err(Error::InvalidConfig("need at least one dataset".into()));
    }
    let per_dataset = par::map_range(cfg.datasets, |d| -> Result<Vec<ClusterRun>> {
        let seed = cfg.seed + d as u64;
        let ds = make_clustering_dataset(cfg.k, &cfg.spec(seed), cfg.samples_low, cfg.samples_high, seed)?;
        let oracle = oracle_labels(&ds.data, &ds.precisions, &ds.counts)?;
        let mut runs = vec![ClusterRun {
            dataset: d,
            estimator: "oracle".into(),
            nmi: nmi(&ds.labels, &oracle)?,
            vi: vi(&ds.labels, &oracle)?,
            em_iterations: 0,
            converged: true,
            final_log_likelihood: f64::NAN,
            error: None,
        }];
        for &which in &cfg.estimators {
            let em = cfg.em_config(which, &ds.precisions);
            let run = match fit_em(&ds.data, &em, seed) {
                Ok(fit) => {
                    let labels = fit.responsibilities.hard_labels();
                    ClusterRun {
                        dataset: d,
                        estimator: which.name().into(),
                        nmi: nmi(&ds.labels, &labels)?,
                        vi: vi(&ds.labels, &labels)?,
                        em_iterations: fit.iterations,
                        converged: fit.converged,
                        final_log_likelihood: *fit.ll_trace.last().unwrap_or(&f64::NAN),
                        error: None,
                    }
                }
                Err(e) if e.is_numerical() => ClusterRun {
                    dataset: d,
                    estimator: which.name().into(),
                    nmi: f64::NAN,
                    vi: f64::NAN,
                    em_iterations: 0,
                    converged: false,
                    final_log_likelihood: f64::NAN,
                    error: Some(e.to_string()),
                },
                Err(e) => return Err(e),
            };
            runs.push(run);
        }
        Ok(runs)
    });
    let mut runs = Vec::new();
    for r in per_dataset {
        runs.extend(r?);
    }
    let names = std::iter::once("oracle").chain(cfg.estimators.iter().map(|e| e.name()));
    let summary = names
        .map(|name| {
            let ok: Vec<&ClusterRun> = runs.iter().filter(|r| r.estimator == name && r.error.is_none()).collect();
            let failures = runs.iter().filter(|r| r.estimator == name && r.error.is_some()).count();
            let nmis: Vec<f64> = ok.iter().map(|r| r.nmi).collect();
            let vis: Vec<f64> = ok.iter().map(|r| r.vi).collect();
            ClusterSummary {
                estimator: name.to_string(),
                nmi: MeanStd::of(&nmis),
                vi: MeanStd::of(&vis),
                failures,
            }
        })
        .collect();
    Ok(ClusterBenchReport {
        config: cfg.clone(),
        nmi_normalization: "arithmetic".into(),
        runs,
        summary,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct LambdaSweep {
    pub lambdas: Vec<f64>,
    /// Share of samples used for training.
    pub split: f64,
    /// Train/test permutation comes from stream 0 of this seed.
    pub seed: u64,
    pub glasso: GlassoConfig,
    pub mle: MleConfig,
}

impl Default for LambdaSweep {
    fn default() -> Self {
        Self {
            lambdas: vec![0.05, 0.1, 0.2, 0.3],
            split: 0.5,
            seed: 0,
            glasso: GlassoConfig::default(),
            mle: MleConfig::default(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct SweepRow {
    pub lambda: f64,
    pub estimator: String,
    /// Stored entries of the symmetric matrix (diagonal included) over `n`.
    pub nnz_per_row: f64,
    pub heldout_nll: f64,
    pub converged: bool,
}

/// Mean negative log-likelihood of `data` under `N(mean, Q⁻¹)`.
pub fn heldout_nll(q: &SparseSpd, mean: &[f64], data: &DataMatrix) -> Result<f64> {
    let model = MixtureModel::new(vec![GmrfComponent::new(1.0, mean.to_vec(), q.clone())?])?;
    model.mean_nll(data)
}

/// Splits `data` into train/test rows.
pub fn train_test_split(data: &DataMatrix, split: f64, seed: u64) -> Result<(DataMatrix, DataMatrix)> {
    if !(split > 0.0 && split < 1.0) {
        return Err(Error::InvalidConfig("split must lie in (0, 1)".into()));
    }
    let n = data.n_samples();
    let n_train = ((n as f64) * split).round() as usize;
    if n_train == 0 || n_train == n {
        return Err(Error::InvalidConfig(format!("split {split} leaves an empty part of {n} samples")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng::stream(seed, 0));
    Ok((data.select_rows(&order[..n_train]), data.select_rows(&order[n_train..])))
}

/// Lasso and debiased fits at each λ on the training part, scored by
/// held-out mean NLL. The mean is the training sample mean.
pub fn lambda_sweep(data: &DataMatrix, cfg: &LambdaSweep) -> Result<Vec<SweepRow>> {
    if cfg.lambdas.is_empty() {
        return Err(Error::InvalidConfig("empty λ grid".into()));
    }
    let (train, test) = train_test_split(data, cfg.split, cfg.seed)?;
    let mean = train.mean();
    let s = train.covariance(&mean)?;
    let n = data.dim() as f64;
    let rows = par::map_range(cfg.lambdas.len(), |i| -> Result<[SweepRow; 2]> {
        let lambda = cfg.lambdas[i];
        let gcfg = GlassoConfig {
            lambda,
            ..cfg.glasso.clone()
        };
        let d = glasso::debias(&s, &gcfg, &cfg.mle, None)?;
        let nnz = d.glasso.q.pattern().nnz() as f64 / n;
        Ok([
            SweepRow {
                lambda,
                estimator: "glasso".into(),
                nnz_per_row: nnz,
                heldout_nll: heldout_nll(&d.glasso.q, &mean, &test)?,
                converged: d.glasso.converged,
            },
            SweepRow {
                lambda,
                estimator: "debiased".into(),
                nnz_per_row: d.refit.q.pattern().nnz() as f64 / n,
                heldout_nll: heldout_nll(&d.refit.q, &mean, &test)?,
                converged: d.refit.converged,
            },
        ])
    });
    let mut out = Vec::with_capacity(2 * cfg.lambdas.len());
    for r in rows {
        out.extend(r?);
    }
    Ok(out)
}
