use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use gmrf_core::experiments::BenchEstimator;
use gmrf_core::glasso::GlassoConfig;
use gmrf_core::io;
use gmrf_core::linalg::{PatternJson, SparseSpdJson};
use gmrf_core::mixture::{fit_em, EmConfig, Estimator, Init};
use gmrf_core::mle::MleConfig;
use gmrf_core::SupportPattern;
use serde::{Deserialize, Serialize};

use crate::run::{load_config, require, usage, CliError, CliResult, Run};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum EstimatorArg {
    Baseline,
    Glasso,
    Debiased,
    KnownSupport,
}

impl From<EstimatorArg> for BenchEstimator {
    fn from(e: EstimatorArg) -> Self {
        match e {
            EstimatorArg::Baseline => BenchEstimator::Baseline,
            EstimatorArg::Glasso => BenchEstimator::Glasso,
            EstimatorArg::Debiased => BenchEstimator::Debiased,
            EstimatorArg::KnownSupport => BenchEstimator::KnownSupport,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum InitArg {
    /// Dirichlet(1) responsibilities.
    Random,
    /// k-means++ centers, hard assignment.
    Kmeans,
}

/// Support file contents: a pattern, a sparse matrix whose pattern is used,
/// or a list of either (one per component).
#[derive(Deserialize)]
#[serde(untagged)]
enum SupportSource {
    Pattern(PatternJson),
    Matrix(SparseSpdJson),
    Many(Vec<SupportSource>),
}

impl SupportSource {
    fn collect(self, out: &mut Vec<SupportSource>) {
        match self {
            SupportSource::Many(v) => v.into_iter().for_each(|s| s.collect(out)),
            one => out.push(one),
        }
    }

    fn pattern(self) -> gmrf_core::Result<SupportPattern> {
        match self {
            SupportSource::Pattern(p) => SupportPattern::try_from(p),
            SupportSource::Matrix(m) => SupportPattern::from_pairs(m.n, m.triplets.into_iter().map(|(i, j, _)| (i, j))),
            SupportSource::Many(_) => unreachable!("flattened"),
        }
    }
}

pub fn read_patterns(path: &Path) -> CliResult<Vec<SupportPattern>> {
    let text = std::fs::read(path)?;
    let src: SupportSource = serde_json::from_slice(&text)
        .map_err(|e| CliError::Usage(format!("{}: not a pattern or sparse matrix JSON ({e})", path.display())))?;
    let mut flat = Vec::new();
    src.collect(&mut flat);
    Ok(flat.into_iter().map(SupportSource::pattern).collect::<gmrf_core::Result<_>>()?)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitConfig {
    pub data: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub k: usize,
    pub estimator: BenchEstimator,
    pub lambda: Option<f64>,
    pub support: Option<PathBuf>,
    pub zero_means: bool,
    pub seed: u64,
    pub init: Init,
    pub ll_tol: f64,
    pub max_em_iters: usize,
    pub glasso: GlassoConfig,
    pub mle: MleConfig,
}

impl Default for FitConfig {
    fn default() -> Self {
        let em = EmConfig::default();
        Self {
            data: None,
            out: None,
            k: 1,
            estimator: BenchEstimator::Baseline,
            lambda: None,
            support: None,
            zero_means: false,
            seed: 0,
            init: em.init,
            ll_tol: em.ll_tol,
            max_em_iters: em.max_em_iters,
            glasso: GlassoConfig::default(),
            mle: MleConfig::default(),
        }
    }
}

#[derive(Args, Debug)]
pub struct FitArgs {
    /// JSON config or a previous run manifest; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Sample CSV, one row per sample.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, value_enum)]
    estimator: Option<EstimatorArg>,
    /// Penalty for glasso and debiased.
    #[arg(long)]
    lambda: Option<f64>,
    /// Pattern JSON for known-support: one pattern, a sparse matrix, or a
    /// list of either with one entry per component.
    #[arg(long)]
    support: Option<PathBuf>,
    /// Keep every component mean at zero.
    #[arg(long)]
    zero_means: bool,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    init: Option<InitArg>,
    #[arg(long)]
    ll_tol: Option<f64>,
    #[arg(long)]
    max_iters: Option<usize>,
}

impl FitArgs {
    pub fn resolve(self) -> CliResult<FitConfig> {
        let mut c: FitConfig = load_config(self.config.as_deref(), "fit")?;
        c.data = self.data.or(c.data);
        c.out = self.out.or(c.out);
        c.k = self.k.unwrap_or(c.k);
        c.estimator = self.estimator.map(Into::into).unwrap_or(c.estimator);
        c.lambda = self.lambda.or(c.lambda);
        c.support = self.support.or(c.support);
        c.zero_means |= self.zero_means;
        c.seed = self.seed.unwrap_or(c.seed);
        if let Some(i) = self.init {
            c.init = match i {
                InitArg::Random => Init::RandomResponsibilities,
                InitArg::Kmeans => Init::KMeansPlusPlus,
            };
        }
        c.ll_tol = self.ll_tol.unwrap_or(c.ll_tol);
        c.max_em_iters = self.max_iters.unwrap_or(c.max_em_iters);
        Ok(c)
    }
}

/// Builds the per-component estimator, checking that `--lambda` and
/// `--support` are given exactly where they apply.
pub fn estimator(
    which: BenchEstimator,
    lambda: Option<f64>,
    support: Option<&Path>,
    glasso: &GlassoConfig,
    mle: &MleConfig,
) -> CliResult<Estimator> {
    let penalized = matches!(which, BenchEstimator::Glasso | BenchEstimator::Debiased);
    if lambda.is_some() && !penalized {
        return usage(format!("--lambda does not apply to {}", which.name()));
    }
    if support.is_some() && which != BenchEstimator::KnownSupport {
        return usage(format!("--support does not apply to {}", which.name()));
    }
    let glasso = || -> CliResult<GlassoConfig> {
        let lambda = require(lambda, &format!("--lambda for {}", which.name()))?;
        Ok(GlassoConfig { lambda, ..glasso.clone() })
    };
    Ok(match which {
        BenchEstimator::Baseline => Estimator::Baseline,
        BenchEstimator::Glasso => Estimator::Glasso { glasso: glasso()? },
        BenchEstimator::Debiased => Estimator::Debiased {
            glasso: glasso()?,
            mle: mle.clone(),
        },
        BenchEstimator::KnownSupport => Estimator::KnownSupport {
            patterns: read_patterns(require(support, "--support for known-support")?)?,
            mle: mle.clone(),
        },
    })
}

#[derive(Serialize)]
struct FitSummary {
    estimator: &'static str,
    iterations: usize,
    converged: bool,
    final_log_likelihood: f64,
    /// `[iteration, component]` pairs of empty components that were reseeded.
    reseeded: Vec<(usize, usize)>,
}

pub fn run(c: FitConfig) -> CliResult<()> {
    let data_path = require(c.data.clone(), "--data")?;
    let out = require(c.out.clone(), "--out")?;
    let est = estimator(c.estimator, c.lambda, c.support.as_deref(), &c.glasso, &c.mle)?;
    let cfg = EmConfig {
        estimator: est,
        k: c.k,
        init: c.init,
        ll_tol: c.ll_tol,
        max_em_iters: c.max_em_iters,
        fix_means_to_zero: c.zero_means,
        ..EmConfig::default()
    };
    cfg.validate()?;
    let data = io::read_data_csv(&data_path)?;
    if let Estimator::KnownSupport { patterns, .. } = &cfg.estimator {
        if let Some(p) = patterns.iter().find(|p| p.dim() != data.dim()) {
            return usage(format!("support has dimension {} but the data has {} columns", p.dim(), data.dim()));
        }
    }
    let fit = fit_em(&data, &cfg, c.seed)?;
    let mut run = Run::start(&out)?;
    io::write_json(&run.output("model.json"), &fit.model)?;
    let trace: Vec<Vec<String>> = fit
        .ll_trace
        .iter()
        .enumerate()
        .map(|(i, ll)| vec![(i + 1).to_string(), ll.to_string()])
        .collect();
    io::write_table_csv(&run.output("ll_trace.csv"), &["iteration", "log_likelihood"], &trace)?;
    io::write_labels_csv(&run.output("assignments.csv"), &fit.responsibilities.hard_labels())?;
    io::write_json(
        &run.output("fit.json"),
        &FitSummary {
            estimator: c.estimator.name(),
            iterations: fit.iterations,
            converged: fit.converged,
            final_log_likelihood: *fit.ll_trace.last().unwrap_or(&f64::NAN),
            reseeded: fit.reseeded,
        },
    )?;
    let mut inputs = vec![data_path];
    inputs.extend(c.support.clone());
    run.finish("fit", &c, vec![c.seed], inputs)
}
