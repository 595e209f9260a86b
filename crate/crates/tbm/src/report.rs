//! CSV reports (header row, RFC-4180 quoting).

use std::io::Write;

use serde::Serialize;
use tbm_core::experiment::BiasVarianceReport;

use crate::pipeline::CompareRow;

#[derive(Serialize)]
struct TrialRow {
    trial: usize,
    kl_true_to_fit: f64,
    kl_proj_to_fit: f64,
    bound: f64,
}

pub fn write_bias_variance_csv<W: Write>(report: &BiasVarianceReport, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for t in &report.trials {
        w.serialize(TrialRow {
            trial: t.trial,
            kl_true_to_fit: t.kl_true_to_fit,
            kl_proj_to_fit: t.kl_proj_to_fit,
            bound: report.lower_bound,
        })?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_compare_csv<W: Write>(rows: &[CompareRow], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
pub struct BiasVarianceSummary {
    pub bias: f64,
    pub variance_mean: f64,
    pub variance_std: f64,
    pub variance_stderr: f64,
    pub total_mean: f64,
    pub total_stderr: f64,
    pub bound: f64,
    pub n_samples: u64,
    pub sample_space_size: usize,
    pub domain_size: usize,
    pub trials: usize,
}

impl From<&BiasVarianceReport> for BiasVarianceSummary {
    fn from(r: &BiasVarianceReport) -> Self {
        BiasVarianceSummary {
            bias: r.bias,
            variance_mean: r.variance_mean,
            variance_std: r.variance_std,
            variance_stderr: r.variance_stderr,
            total_mean: r.total_mean,
            total_stderr: r.total_stderr,
            bound: r.lower_bound,
            n_samples: r.n_samples,
            sample_space_size: r.sample_space_size,
            domain_size: r.domain_size,
            trials: r.trials.len(),
        }
    }
}
