//! Transductive Boltzmann machines.
//!
//! A transductive Boltzmann machine (TBM) learns a Gibbs distribution over a
//! sample space built from the data itself, `S = B ∪ unique(D) ∪ {⊥}`, rather
//! than over the full power set `2^V`. Because `S` is small, the partition
//! function, the expectation parameters `η` and the log-likelihood gradient are
//! all computed exactly, and fitting converges to the global optimum.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the CLI and the
//! experiment pipelines live in the `tbm` companion crate.
//!
//! Module map:
//!
//! * [`pattern`]: canonical itemsets, transaction datasets and empirical
//!   statistics.
//! * [`miner`]: the parameter domain `B` via frequent itemset mining.
//! * [`space`], [`model`], [`fit`]: the sample space, the fitted Gibbs model and
//!   the gradient-ascent learner with its divergence guard.
//! * [`baselines`]: exact fully visible Boltzmann machine over `2^V` and an RBM
//!   trained by persistent CD-1.
//! * [`metrics`]: KL divergence, entropy, log-likelihood and the proxy
//!   normalized reconstruction error.
//! * [`geometry`], [`experiment`]: Fisher information, m-projection, the
//!   Pythagorean identity and the bias-variance harness.
#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod baselines;
mod error;
pub mod experiment;
pub mod fit;
pub mod geometry;
mod lattice;
mod math;
pub mod metrics;
pub mod miner;
pub mod model;
pub mod pattern;
pub mod space;

pub use error::{Error, Result};
pub use fit::{fit, fit_to_moments, FitConfig, FitReport, StepRule};
pub use miner::{brute_force_domain, mine_parameter_domain, MiningParams, ParameterDomain};
pub use model::{GibbsModel, ThetaVector};
pub use pattern::{zeta, EmpiricalDistribution, Item, Pattern, TransactionDataset};
pub use space::{build_sample_space, SampleSpace};
