use std::path::PathBuf;

use clap::Args;
use gmrf_core::experiments::{heldout_nll, lambda_sweep, train_test_split, LambdaSweep};
use gmrf_core::io;
use gmrf_core::mle::dense_mle_with_ridge;
use serde::{Deserialize, Serialize};

use crate::run::{load_config, require, split_list, usage, CliError, CliResult, Run};

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub data: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub sweep: LambdaSweep,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    /// JSON config or a previous run manifest; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    data: Option<PathBuf>,
    /// Comma-separated penalties, e.g. 0.05,0.1,0.2.
    #[arg(long)]
    lambda_grid: Option<String>,
    /// Share of samples used for fitting; the rest are held out.
    #[arg(long)]
    split: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl SweepArgs {
    pub fn resolve(self) -> CliResult<SweepConfig> {
        let mut c: SweepConfig = load_config(self.config.as_deref(), "lambda-sweep")?;
        c.data = self.data.or(c.data);
        c.out = self.out.or(c.out);
        if let Some(grid) = self.lambda_grid {
            c.sweep.lambdas = split_list(&grid)
                .iter()
                .map(|s| {
                    s.parse::<f64>()
                        .map_err(|e| CliError::Usage(format!("--lambda-grid entry {s:?}: {e}")))
                })
                .collect::<CliResult<_>>()?;
        }
        c.sweep.split = self.split.unwrap_or(c.sweep.split);
        c.sweep.seed = self.seed.unwrap_or(c.sweep.seed);
        Ok(c)
    }
}

pub fn run(c: SweepConfig) -> CliResult<()> {
    let data_path = require(c.data.clone(), "--data")?;
    let out = require(c.out.clone(), "--out")?;
    if c.sweep.lambdas.iter().any(|l| !(l.is_finite() && *l >= 0.0)) {
        return usage("λ values must be finite and non-negative");
    }
    let data = io::read_data_csv(&data_path)?;
    let rows = lambda_sweep(&data, &c.sweep)?;
    // Unpenalized reference on the same split.
    let (train, test) = train_test_split(&data, c.sweep.split, c.sweep.seed)?;
    let mean = train.mean();
    let dense = dense_mle_with_ridge(&train.covariance(&mean)?)?;
    let mut table: Vec<Vec<String>> = vec![vec![
        String::new(),
        "dense-mle".into(),
        (dense.precision.pattern().nnz() as f64 / data.dim() as f64).to_string(),
        heldout_nll(&dense.precision, &mean, &test)?.to_string(),
        "true".into(),
    ]];
    table.extend(rows.iter().map(|r| {
        vec![
            r.lambda.to_string(),
            r.estimator.clone(),
            r.nnz_per_row.to_string(),
            r.heldout_nll.to_string(),
            r.converged.to_string(),
        ]
    }));
    let mut run = Run::start(&out)?;
    io::write_table_csv(
        &run.output("sweep.csv"),
        &["lambda", "estimator", "nnz_per_row", "heldout_nll", "converged"],
        &table,
    )?;
    run.finish("lambda-sweep", &c, vec![c.sweep.seed], vec![data_path])
}
