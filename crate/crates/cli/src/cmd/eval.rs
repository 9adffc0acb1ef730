use std::path::PathBuf;

use clap::Args;
use gmrf_core::evaluation::{nmi, vi};
use gmrf_core::io;
use gmrf_core::mixture::{predict, MixtureModel};
use serde::{Deserialize, Serialize};

use crate::run::{load_config, require, usage, CliResult, Run};

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    pub model: Option<PathBuf>,
    pub data: Option<PathBuf>,
    pub labels: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    /// JSON config or a previous run manifest; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Fitted model JSON.
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long)]
    data: Option<PathBuf>,
    /// Reference labels, one per data row.
    #[arg(long)]
    labels: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl EvalArgs {
    pub fn resolve(self) -> CliResult<EvalConfig> {
        let c: EvalConfig = load_config(self.config.as_deref(), "eval")?;
        Ok(EvalConfig {
            model: self.model.or(c.model),
            data: self.data.or(c.data),
            labels: self.labels.or(c.labels),
            out: self.out.or(c.out),
        })
    }
}

#[derive(Serialize)]
struct Metrics {
    n_samples: usize,
    k: usize,
    /// Arithmetic-mean normalization.
    nmi: Option<f64>,
    vi: Option<f64>,
    /// Samples assigned to each component.
    predicted_counts: Vec<usize>,
    mean_negative_log_likelihood: f64,
}

pub fn run(c: EvalConfig) -> CliResult<()> {
    let model_path = require(c.model.clone(), "--model")?;
    let data_path = require(c.data.clone(), "--data")?;
    let out = require(c.out.clone(), "--out")?;
    let model: MixtureModel = io::read_json(&model_path)?;
    let data = io::read_data_csv(&data_path)?;
    if data.dim() != model.dim() {
        return usage(format!(
            "model has dimension {} but the data has {} columns",
            model.dim(),
            data.dim()
        ));
    }
    let truth = match &c.labels {
        Some(p) => {
            let l = io::read_labels_csv(p)?;
            if l.len() != data.n_samples() {
                return usage(format!(
                    "labels file {} has {} entries but the data has {} samples",
                    p.display(),
                    l.len(),
                    data.n_samples()
                ));
            }
            Some(l)
        }
        None => None,
    };
    let pred = predict(&model, &data)?;
    let mut counts = vec![0; model.k()];
    for &l in &pred {
        counts[l] += 1;
    }
    let metrics = Metrics {
        n_samples: data.n_samples(),
        k: model.k(),
        nmi: truth.as_ref().map(|t| nmi(t, &pred)).transpose()?,
        vi: truth.as_ref().map(|t| vi(t, &pred)).transpose()?,
        predicted_counts: counts,
        mean_negative_log_likelihood: model.mean_nll(&data)?,
    };
    let mut run = Run::start(&out)?;
    io::write_json(&run.output("metrics.json"), &metrics)?;
    let mut inputs = vec![model_path, data_path];
    inputs.extend(c.labels.clone());
    run.finish("eval", &c, Vec::new(), inputs)
}
