use std::path::PathBuf;

use clap::{Args, ValueEnum};
use gmrf_core::io;
use gmrf_core::synthetic::{laplacian2d_precision, make_clustering_dataset, sample_gmrf, DiffusionSpec, LatticeSpec};
use serde::{Deserialize, Serialize};

use crate::run::{load_config, require, usage, CliResult, Run};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    /// Zero-mean samples from the lattice Laplacian.
    #[default]
    Laplacian2d,
    /// Labeled mixture of random diffusion GMRFs.
    DiffusionMixture,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenerateConfig {
    pub kind: Kind,
    pub rows: usize,
    pub cols: usize,
    pub k: usize,
    /// Per-component sample-count range for mixtures; the exact count for
    /// a single field.
    pub samples: (usize, usize),
    pub coeff_low: f64,
    pub coeff_high: f64,
    pub seed: u64,
    pub out_dir: Option<PathBuf>,
}

impl Default for GenerateConfig {
    fn default() -> Self {
        Self {
            kind: Kind::Laplacian2d,
            rows: 32,
            cols: 32,
            k: 10,
            samples: (300, 300),
            coeff_low: 0.1,
            coeff_high: 1.0,
            seed: 0,
            out_dir: None,
        }
    }
}

#[derive(Args, Debug)]
pub struct GenerateArgs {
    /// JSON config or a previous run manifest; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    kind: Option<Kind>,
    #[arg(long)]
    rows: Option<usize>,
    #[arg(long)]
    cols: Option<usize>,
    /// Number of mixture components.
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, conflicts_with = "samples_range")]
    samples: Option<usize>,
    /// Per-component sample counts are drawn uniformly from LOW..=HIGH.
    #[arg(long, num_args = 2, value_names = ["LOW", "HIGH"])]
    samples_range: Option<Vec<usize>>,
    #[arg(long)]
    coeff_low: Option<f64>,
    #[arg(long)]
    coeff_high: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

impl GenerateArgs {
    pub fn resolve(self) -> CliResult<GenerateConfig> {
        let mut c: GenerateConfig = load_config(self.config.as_deref(), "generate")?;
        c.kind = self.kind.unwrap_or(c.kind);
        c.rows = self.rows.unwrap_or(c.rows);
        c.cols = self.cols.unwrap_or(c.cols);
        c.k = self.k.unwrap_or(c.k);
        if let Some(n) = self.samples {
            c.samples = (n, n);
        }
        if let Some(r) = self.samples_range {
            c.samples = (r[0], r[1]);
        }
        c.coeff_low = self.coeff_low.unwrap_or(c.coeff_low);
        c.coeff_high = self.coeff_high.unwrap_or(c.coeff_high);
        c.seed = self.seed.unwrap_or(c.seed);
        c.out_dir = self.out_dir.or(c.out_dir);
        Ok(c)
    }
}

#[derive(Serialize)]
struct Metadata {
    kind: Kind,
    rows: usize,
    cols: usize,
    dim: usize,
    n_samples: usize,
    /// Samples per component (mixtures only).
    counts: Option<Vec<usize>>,
    seed: u64,
}

pub fn run(c: GenerateConfig) -> CliResult<()> {
    let out = require(c.out_dir.clone(), "--out-dir")?;
    if c.rows == 0 || c.cols == 0 {
        return usage("--rows and --cols must be at least 1");
    }
    let (lo, hi) = c.samples;
    if lo == 0 || lo > hi {
        return usage(format!("invalid sample count range {lo}..={hi}"));
    }
    let mut run = Run::start(&out)?;
    let dim = c.rows * c.cols;
    let meta = match c.kind {
        Kind::Laplacian2d => {
            if lo != hi {
                return usage("--samples-range only applies to --kind diffusion-mixture");
            }
            let q = laplacian2d_precision(LatticeSpec {
                rows: c.rows,
                cols: c.cols,
            })?;
            let data = sample_gmrf(&q, &vec![0.0; dim], lo, c.seed)?;
            io::write_data_csv(&run.output("data.csv"), &data)?;
            io::write_json(&run.output("truth.json"), &q)?;
            Metadata {
                kind: c.kind,
                rows: c.rows,
                cols: c.cols,
                dim,
                n_samples: lo,
                counts: None,
                seed: c.seed,
            }
        }
        Kind::DiffusionMixture => {
            if c.k == 0 {
                return usage("--k must be at least 1");
            }
            let spec = DiffusionSpec {
                coeff_low: c.coeff_low,
                coeff_high: c.coeff_high,
                ..DiffusionSpec::new(c.rows, c.cols, c.seed)
            };
            let ds = make_clustering_dataset(c.k, &spec, lo, hi, c.seed)?;
            io::write_data_csv(&run.output("data.csv"), &ds.data)?;
            io::write_labels_csv(&run.output("labels.csv"), &ds.labels)?;
            io::write_json(&run.output("truth.json"), &ds.precisions)?;
            Metadata {
                kind: c.kind,
                rows: c.rows,
                cols: c.cols,
                dim,
                n_samples: ds.data.n_samples(),
                counts: Some(ds.counts),
                seed: c.seed,
            }
        }
    };
    io::write_json(&run.output("metadata.json"), &meta)?;
    run.finish("generate", &c, vec![c.seed], Vec::new())
}
