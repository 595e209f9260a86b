//! Experiment pipelines: evaluation of saved models, the learner comparison
//! table and the parallel bias-variance run.

use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use tbm_core::baselines::{fit_full_bm, fit_rbm_pcd1, matched_hidden_units, FullBmModel, RbmConfig, RbmModel, FULL_BM_MAX_VARIABLES};
use tbm_core::experiment::{BiasVarianceConfig, BiasVarianceReport, BiasVarianceSetup};
use tbm_core::metrics::{entropy, evaluate, reconstruction_error_proxy};
use tbm_core::{fit, mine_parameter_domain, Error, FitConfig, Pattern, Result, TransactionDataset};

use crate::model_file::LoadedModel;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EvalSummary {
    /// Absent for models whose partition function is not computed.
    pub kl: Option<f64>,
    pub loglik: Option<f64>,
    pub entropy: f64,
    pub proxy_error: f64,
}

fn check_items(d: &TransactionDataset, n: usize) -> Result<()> {
    for x in d.unique_patterns() {
        if let Some(item) = x.max_item().filter(|&m| m as usize >= n) {
            return Err(Error::VariableOutOfRange { pattern: x.clone(), item, n_variables: n });
        }
    }
    Ok(())
}

fn full_bm_summary(m: &FullBmModel, d: &TransactionDataset) -> EvalSummary {
    let n = d.total() as f64;
    let loglik: f64 = d.entries().map(|(x, c)| c as f64 * m.log_prob(x)).sum();
    let h = entropy(d.empirical_distribution().iter().map(|(_, q)| q));
    EvalSummary {
        kl: Some(-loglik / n - h),
        loglik: Some(loglik),
        entropy: h,
        proxy_error: reconstruction_error_proxy(|x| m.energy(x), d),
    }
}

fn rbm_summary(m: &RbmModel, d: &TransactionDataset) -> EvalSummary {
    EvalSummary {
        kl: None,
        loglik: None,
        entropy: entropy(d.empirical_distribution().iter().map(|(_, q)| q)),
        proxy_error: reconstruction_error_proxy(|x| m.free_energy(x), d),
    }
}

pub fn evaluate_model(model: &LoadedModel, d: &TransactionDataset) -> Result<EvalSummary> {
    match model {
        LoadedModel::Tbm(m) => {
            let e = evaluate(m, d)?;
            Ok(EvalSummary { kl: Some(e.kl), loglik: Some(e.log_likelihood), entropy: e.entropy, proxy_error: e.proxy_error })
        }
        LoadedModel::Bm(m) => {
            check_items(d, m.n_variables())?;
            Ok(full_bm_summary(m, d))
        }
        LoadedModel::Rbm(m) => {
            check_items(d, m.n_visible())?;
            Ok(rbm_summary(m, d))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Tbm,
    Bm,
    Rbm,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CompareConfig {
    pub sigma: f64,
    pub k: usize,
    pub fit: FitConfig,
    pub rbm: RbmConfig,
    /// Hidden units; matched to |B| when absent.
    pub hidden: Option<usize>,
    pub methods: Vec<Method>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CompareRow {
    pub method: Method,
    pub param_count: usize,
    pub proxy_error: Option<f64>,
    /// Seconds; for the TBM this includes mining.
    pub wall_time: Option<f64>,
    pub note: String,
}

/// Runs each requested learner on `d`. The BM and RBM reuse the TBM's mined
/// domain size; the BM row is marked infeasible past the enumeration limit.
pub fn compare(d: &TransactionDataset, cfg: &CompareConfig) -> Result<Vec<CompareRow>> {
    let n = d.n_variables();
    let start = Instant::now();
    let b = mine_parameter_domain(d, cfg.sigma, cfg.k)?;
    let mut rows = Vec::new();
    if cfg.methods.contains(&Method::Tbm) {
        let (m, report) = fit(d, &b, &cfg.fit)?;
        let elapsed = start.elapsed().as_secs_f64();
        let energies: Vec<f64> = d.unique_patterns().map(|x| m.energy(x)).collect::<Result<_>>()?;
        let mut it = energies.into_iter();
        let err = reconstruction_error_proxy(|_| it.next().expect("one energy per pattern"), d);
        let note = match report.removed_parameters.len() {
            0 => String::new(),
            r => format!("{r} parameters removed by the divergence guard"),
        };
        rows.push(CompareRow { method: Method::Tbm, param_count: b.len(), proxy_error: Some(err), wall_time: Some(elapsed), note });
    }
    if cfg.methods.contains(&Method::Bm) {
        if n > FULL_BM_MAX_VARIABLES {
            rows.push(CompareRow {
                method: Method::Bm,
                param_count: b.len(),
                proxy_error: None,
                wall_time: None,
                note: format!("infeasible: exact normalization over 2^{n} states"),
            });
        } else {
            let start = Instant::now();
            let (m, _) = fit_full_bm(d, &b, &cfg.fit)?;
            let elapsed = start.elapsed().as_secs_f64();
            let err = reconstruction_error_proxy(|x| m.energy(x), d);
            rows.push(CompareRow { method: Method::Bm, param_count: b.len(), proxy_error: Some(err), wall_time: Some(elapsed), note: String::new() });
        }
    }
    if cfg.methods.contains(&Method::Rbm) {
        let h = cfg.hidden.unwrap_or_else(|| matched_hidden_units(b.len(), n));
        let start = Instant::now();
        let m = fit_rbm_pcd1(d, h, &cfg.rbm)?;
        let elapsed = start.elapsed().as_secs_f64();
        let err = reconstruction_error_proxy(|x| m.free_energy(x), d);
        rows.push(CompareRow {
            method: Method::Rbm,
            param_count: m.parameter_count(),
            proxy_error: Some(err),
            wall_time: Some(elapsed),
            note: format!("{h} hidden units"),
        });
    }
    Ok(rows)
}

/// The bias-variance experiment with trials spread over the rayon pool.
/// Output does not depend on the number of threads.
pub fn bias_variance_parallel(cfg: &BiasVarianceConfig) -> Result<BiasVarianceReport> {
    let setup = BiasVarianceSetup::prepare(cfg)?;
    let trials = (0..cfg.trials).into_par_iter().map(|t| setup.run_trial(t)).collect::<Result<Vec<_>>>()?;
    Ok(setup.report(trials))
}

/// Patterns in lexicographic order, as emitted by `mine`.
pub fn lexicographic_lines(b: &tbm_core::ParameterDomain) -> Vec<String> {
    b.lexicographic().into_iter().map(|x: &Pattern| crate::fimi::format_items(x)).collect()
}
