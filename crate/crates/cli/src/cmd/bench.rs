use std::path::PathBuf;

use clap::Args;
use gmrf_core::experiments::{cluster_bench, BenchEstimator, ClusterBench};
use gmrf_core::io;
use serde::{Deserialize, Serialize};

use crate::run::{load_config, require, split_list, CliResult, Run};

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchConfig {
    pub out: Option<PathBuf>,
    pub bench: ClusterBench,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    /// JSON config or a previous run manifest; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// 5 components on a 5×5 grid with 500–1000 samples each.
    #[arg(long)]
    small: bool,
    #[arg(long)]
    datasets: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    lambda: Option<f64>,
    /// Comma-separated: baseline, glasso, debiased, known-support.
    #[arg(long)]
    estimators: Option<String>,
    #[arg(long)]
    max_iters: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl BenchArgs {
    pub fn resolve(self) -> CliResult<BenchConfig> {
        let mut c: BenchConfig = load_config(self.config.as_deref(), "cluster-bench")?;
        if self.small {
            let keep = c.bench.clone();
            c.bench = ClusterBench {
                datasets: keep.datasets,
                seed: keep.seed,
                lambda: keep.lambda,
                estimators: keep.estimators,
                ..ClusterBench::small()
            };
        }
        let b = &mut c.bench;
        b.datasets = self.datasets.unwrap_or(b.datasets);
        b.seed = self.seed.unwrap_or(b.seed);
        b.lambda = self.lambda.unwrap_or(b.lambda);
        b.max_em_iters = self.max_iters.unwrap_or(b.max_em_iters);
        if let Some(list) = self.estimators {
            b.estimators = split_list(&list)
                .iter()
                .map(|s| BenchEstimator::parse(s))
                .collect::<gmrf_core::Result<_>>()?;
        }
        c.out = self.out.or(c.out);
        Ok(c)
    }
}

pub fn run(c: BenchConfig) -> CliResult<()> {
    let out = require(c.out.clone(), "--out")?;
    let report = cluster_bench(&c.bench)?;
    let mut run = Run::start(&out)?;
    io::write_json(&run.output("report.json"), &report)?;
    let rows: Vec<Vec<String>> = report
        .summary
        .iter()
        .map(|s| {
            vec![
                s.estimator.clone(),
                s.nmi.mean.to_string(),
                s.nmi.std.to_string(),
                s.vi.mean.to_string(),
                s.vi.std.to_string(),
                s.failures.to_string(),
            ]
        })
        .collect();
    io::write_table_csv(
        &run.output("summary.csv"),
        &["estimator", "nmi_mean", "nmi_std", "vi_mean", "vi_std", "failures"],
        &rows,
    )?;
    let seeds = (0..c.bench.datasets as u64).map(|d| c.bench.seed + d).collect();
    run.finish("cluster-bench", &c, seeds, Vec::new())
}
