//! Information geometry of the model family on a fixed sample space: Fisher
//! information, m-projection onto the e-flat submanifold `S(B)`, and the
//! Pythagorean decomposition of the KL divergence.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::fit::{fit_to_moments, FitConfig, FitReport};
use crate::lattice::{Lattice, SparseLattice};
use crate::metrics::{kl_divergence, kl_models};
use crate::miner::ParameterDomain;
use crate::model::GibbsModel;
use crate::pattern::{EmpiricalDistribution, Pattern};
use crate::space::SampleSpace;

/// `g_{su} = ∂η(s)/∂θ(u) = η(s ∪ u) − η(s)η(u)` over a basis of `B`.
#[derive(Clone, Debug, PartialEq)]
pub struct FisherMatrix {
    basis: Vec<Pattern>,
    entries: DMatrix<f64>,
}

impl FisherMatrix {
    pub fn basis(&self) -> &[Pattern] {
        &self.basis
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[(i, j)]
    }

    pub fn entry(&self, s: &Pattern, u: &Pattern) -> Option<f64> {
        let i = self.basis.iter().position(|p| p == s)?;
        let j = self.basis.iter().position(|p| p == u)?;
        Some(self.entries[(i, j)])
    }

    pub fn max_asymmetry(&self) -> f64 {
        (&self.entries - self.entries.transpose()).abs().max()
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        if self.basis.is_empty() {
            return Vec::new();
        }
        let mut ev: Vec<f64> = self.entries.clone().symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }
}

pub fn fisher_information(m: &GibbsModel) -> FisherMatrix {
    let basis = m.domain().patterns().to_vec();
    let active: Vec<usize> = (0..basis.len()).collect();
    let mut eta = vec![0.0; basis.len()];
    let mut entries = DMatrix::zeros(0, 0);
    SparseLattice::new(m.space(), m.incidence()).moments(&m.probs(), &active, &mut eta, Some(&mut entries));
    FisherMatrix { basis, entries }
}

/// η(s) = Σ_{x ⊇ s} p(x) for every member of `b`, from a probability vector
/// aligned with `space`.
pub fn expectations(space: &SampleSpace, probs: &[f64], b: &ParameterDomain) -> Result<Vec<f64>> {
    if probs.len() != space.len() {
        return Err(Error::LengthMismatch { expected: space.len(), got: probs.len() });
    }
    let inc = space.incidence(b.patterns());
    Ok(inc.supersets.iter().map(|sup| sup.iter().map(|&x| probs[x as usize]).sum()).collect())
}

fn check_distribution(probs: &[f64], strictly_positive: bool) -> Result<()> {
    if probs.iter().any(|p| !p.is_finite() || *p < 0.0 || (strictly_positive && *p == 0.0)) {
        return Err(Error::InvalidDistribution("probabilities must be finite and positive"));
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidDistribution("probabilities must sum to one"));
    }
    Ok(())
}

/// P*_B: the member of `S(B)` whose η matches the true distribution on `B`.
/// `true_probs` is aligned with `space.outcomes()` and strictly positive.
pub fn m_projection(
    space: SampleSpace,
    true_probs: &[f64],
    b: &ParameterDomain,
    cfg: &FitConfig,
) -> Result<(GibbsModel, FitReport)> {
    if true_probs.len() != space.len() {
        return Err(Error::LengthMismatch { expected: space.len(), got: true_probs.len() });
    }
    check_distribution(true_probs, true)?;
    let targets = expectations(&space, true_probs, b)?;
    fit_to_moments(space, b, &targets, cfg)
}

/// `|D(P̂, Q) − D(P̂, P̂_B) − D(P̂_B, Q)|` for `Q ∈ S(B)`.
pub fn pythagorean_check(p_hat: &EmpiricalDistribution, p_mle: &GibbsModel, q: &GibbsModel) -> Result<f64> {
    if p_mle.space() != q.space() {
        return Err(Error::SupportMismatch);
    }
    if q.domain().patterns().iter().any(|s| !p_mle.domain().contains(s)) {
        return Err(Error::SupportMismatch);
    }
    let direct = kl_divergence(p_hat, q)?;
    let to_mle = kl_divergence(p_hat, p_mle)?;
    let between = kl_models(p_mle, q)?;
    Ok((direct - to_mle - between).abs())
}

/// Asymptotic lower bound `|B| / 2N` on the variance term.
pub fn variance_lower_bound(b_size: usize, n_samples: u64) -> f64 {
    b_size as f64 / (2.0 * n_samples as f64)
}
