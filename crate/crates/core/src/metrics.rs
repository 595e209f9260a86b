//! KL divergence, entropy, log-likelihood and the proxy-normalized
//! reconstruction error. Natural logarithms throughout.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;
use crate::model::{GibbsModel, ProbabilityMap};
use crate::pattern::{EmpiricalDistribution, Pattern, TransactionDataset};

/// D_KL(P̂, P) = Σ_{x ∈ supp(P̂)} p̂(x) log(p̂(x) / p(x)).
pub fn kl_divergence<P: ProbabilityMap + ?Sized>(p_hat: &EmpiricalDistribution, p: &P) -> Result<f64> {
    let mut kl = 0.0;
    for (x, q) in p_hat.iter() {
        let px = p.probability(x).ok_or_else(|| Error::NotInSampleSpace(x.clone()))?;
        if px <= 0.0 {
            return Err(Error::ZeroProbability(x.clone()));
        }
        kl += q * (math::ln(q) - math::ln(px));
    }
    Ok(kl)
}

/// KL between two probability vectors on the same outcomes. Terms with
/// `p = 0` contribute nothing.
pub fn kl_vectors(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::LengthMismatch { expected: p.len(), got: q.len() });
    }
    let mut kl = 0.0;
    for (&a, &b) in p.iter().zip(q) {
        if a > 0.0 {
            if b <= 0.0 {
                return Err(Error::InvalidDistribution("second distribution vanishes on the support of the first"));
            }
            kl += a * (math::ln(a) - math::ln(b));
        }
    }
    Ok(kl)
}

/// D_KL(P, Q) for two models on the same sample space, computed from
/// log-probabilities.
pub fn kl_models(p: &GibbsModel, q: &GibbsModel) -> Result<f64> {
    if p.space() != q.space() {
        return Err(Error::SupportMismatch);
    }
    Ok(p.log_probs().iter().zip(q.log_probs()).map(|(&a, b)| math::exp(a) * (a - b)).sum())
}

/// H = −Σ p log p with 0 log 0 = 0.
pub fn entropy<I: IntoIterator<Item = f64>>(probs: I) -> f64 {
    -probs.into_iter().filter(|&p| p > 0.0).map(|p| p * math::ln(p)).sum::<f64>()
}

/// L_D(P) = Σ_{x∈D} log p(x), counting multiplicity.
pub fn log_likelihood(model: &GibbsModel, d: &TransactionDataset) -> Result<f64> {
    d.entries().map(|(x, c)| model.log_prob(x).map(|lp| c as f64 * lp)).sum()
}

/// KL from p̂ to `exp(−E(x)) / Z′`, with `Z′ = Σ_{x ∈ unique(D)} exp(−E(x))`.
///
/// The same normalization is applied to every learner, so the error never
/// depends on a partition function over the learner's own sample space.
pub fn reconstruction_error_proxy<F: FnMut(&Pattern) -> f64>(mut energy: F, d: &TransactionDataset) -> f64 {
    let neg: Vec<f64> = d.unique_patterns().map(|x| -energy(x)).collect();
    let log_z = math::log_sum_exp(&neg);
    let n = d.total() as f64;
    d.entries()
        .zip(neg)
        .map(|((_, c), ne)| {
            let q = c as f64 / n;
            q * (math::ln(q) - (ne - log_z))
        })
        .sum()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Evaluation {
    pub kl: f64,
    pub log_likelihood: f64,
    pub entropy: f64,
    pub proxy_error: f64,
    pub n_eval_patterns: usize,
}

/// All metrics of a transductive model against a dataset whose patterns lie
/// in the model's sample space.
pub fn evaluate(model: &GibbsModel, d: &TransactionDataset) -> Result<Evaluation> {
    let p_hat = d.empirical_distribution();
    let kl = kl_divergence(&p_hat, model)?;
    let log_likelihood = log_likelihood(model, d)?;
    let entropy = entropy(p_hat.iter().map(|(_, q)| q));
    let energies: Vec<f64> = d.unique_patterns().map(|x| model.energy(x)).collect::<Result<_>>()?;
    let mut it = energies.into_iter();
    let proxy_error = reconstruction_error_proxy(|_| it.next().expect("one energy per pattern"), d);
    Ok(Evaluation { kl, log_likelihood, entropy, proxy_error, n_eval_patterns: d.n_unique() })
}
