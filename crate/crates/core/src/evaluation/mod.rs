//! Clustering metrics and eigenvalue-bias diagnostics.

mod bias;
mod metrics;

pub use bias::{
    bias_report, kkt_sign_check, mean_relative_error, BiasReport, GershgorinRow, LassoDiagnostics, NamedEstimate, SignCheck, SignEntry,
    Spectrum,
};
pub use metrics::{nmi, vi, ContingencyTable};
