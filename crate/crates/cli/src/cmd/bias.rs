use std::path::PathBuf;

use clap::Args;
use gmrf_core::evaluation::{bias_report, NamedEstimate};
use gmrf_core::experiments::{zero_mean_covariance, BenchEstimator};
use gmrf_core::glasso::{debias, glasso_solve, GlassoConfig};
use gmrf_core::io;
use gmrf_core::mle::{dense_mle_with_ridge, estimate_known_support, MleConfig};
use gmrf_core::SparseSpd;
use serde::{Deserialize, Serialize};

use crate::cmd::fit::read_patterns;
use crate::run::{load_config, require, split_list, usage, CliResult, Run};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BiasConfig {
    pub truth: Option<PathBuf>,
    pub data: Option<PathBuf>,
    /// Pattern for known-support; defaults to the truth's pattern.
    pub support: Option<PathBuf>,
    pub lambda: Option<f64>,
    pub estimators: Vec<BenchEstimator>,
    /// Use `Σ x xᵀ / N` instead of centering on the sample mean.
    pub zero_mean: bool,
    pub out: Option<PathBuf>,
    pub glasso: GlassoConfig,
    pub mle: MleConfig,
}

impl Default for BiasConfig {
    fn default() -> Self {
        Self {
            truth: None,
            data: None,
            support: None,
            lambda: None,
            estimators: vec![BenchEstimator::KnownSupport, BenchEstimator::Glasso, BenchEstimator::Debiased],
            zero_mean: false,
            out: None,
            glasso: GlassoConfig::default(),
            mle: MleConfig::default(),
        }
    }
}

#[derive(Args, Debug)]
pub struct BiasArgs {
    /// JSON config or a previous run manifest; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Generating precision (sparse matrix JSON).
    #[arg(long)]
    truth: Option<PathBuf>,
    #[arg(long)]
    data: Option<PathBuf>,
    /// Pattern JSON for known-support instead of the truth's pattern.
    #[arg(long)]
    support: Option<PathBuf>,
    #[arg(long)]
    lambda: Option<f64>,
    /// Comma-separated: baseline, known-support, glasso, debiased.
    #[arg(long)]
    estimators: Option<String>,
    #[arg(long)]
    zero_mean: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl BiasArgs {
    pub fn resolve(self) -> CliResult<BiasConfig> {
        let mut c: BiasConfig = load_config(self.config.as_deref(), "bias-report")?;
        c.truth = self.truth.or(c.truth);
        c.data = self.data.or(c.data);
        c.support = self.support.or(c.support);
        c.lambda = self.lambda.or(c.lambda);
        if let Some(list) = self.estimators {
            c.estimators = split_list(&list)
                .iter()
                .map(|s| BenchEstimator::parse(s))
                .collect::<gmrf_core::Result<_>>()?;
        }
        c.zero_mean |= self.zero_mean;
        c.out = self.out.or(c.out);
        Ok(c)
    }
}

pub fn run(c: BiasConfig) -> CliResult<()> {
    let wants_support = c.estimators.contains(&BenchEstimator::KnownSupport);
    let truth_path = match c.truth.clone() {
        Some(p) => p,
        None if wants_support => return usage("known-support needs a pattern source: pass --truth"),
        None => return usage("missing required --truth"),
    };
    let data_path = require(c.data.clone(), "--data")?;
    let out = require(c.out.clone(), "--out")?;
    let lambda = require(c.lambda, "--lambda")?;
    if c.estimators.is_empty() {
        return usage("--estimators is empty");
    }
    let truth: SparseSpd = io::read_json(&truth_path)?;
    let data = io::read_data_csv(&data_path)?;
    if data.dim() != truth.dim() {
        return usage(format!(
            "truth has dimension {} but the data has {} columns",
            truth.dim(),
            data.dim()
        ));
    }
    let s = if c.zero_mean {
        zero_mean_covariance(&data)?
    } else {
        data.covariance(&data.mean())?
    };
    let gcfg = GlassoConfig {
        lambda,
        ..c.glasso.clone()
    };
    let mut fits: Vec<(BenchEstimator, SparseSpd)> = Vec::new();
    for &e in &c.estimators {
        let q = match e {
            BenchEstimator::Baseline => dense_mle_with_ridge(&s)?.precision,
            BenchEstimator::Glasso => glasso_solve(&s, &gcfg, None)?.q,
            BenchEstimator::Debiased => debias(&s, &gcfg, &c.mle, None)?.refit.q,
            BenchEstimator::KnownSupport => {
                let pattern = match &c.support {
                    Some(p) => {
                        let mut v = read_patterns(p)?;
                        if v.len() != 1 {
                            return usage("--support must hold exactly one pattern here");
                        }
                        v.remove(0)
                    }
                    None => truth.pattern().as_ref().clone(),
                };
                estimate_known_support(&s, pattern.into(), None, &c.mle)?.q
            }
        };
        fits.push((e, q));
    }
    let named: Vec<NamedEstimate> = fits
        .iter()
        .map(|(e, q)| NamedEstimate {
            name: e.name(),
            q,
            lasso: *e == BenchEstimator::Glasso,
        })
        .collect();
    let report = bias_report(&truth, &s, &named, lambda)?;
    let mut run = Run::start(&out)?;
    io::write_json(&run.output("bias_report.json"), &report)?;
    let mut csv = Vec::new();
    report.write_eigenvalue_csv(&mut csv)?;
    io::atomic_write(&run.output("eigenvalues.csv"), &csv)?;
    let mut inputs = vec![truth_path, data_path];
    inputs.extend(c.support.clone());
    run.finish("bias-report", &c, Vec::new(), inputs)
}
