//! A Gibbs distribution over a sample space, parameterized by θ on `B`.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::lattice::{Lattice, SparseLattice};
use crate::math;
use crate::miner::ParameterDomain;
use crate::pattern::Pattern;
use crate::space::{Incidence, SampleSpace};

/// θ: B → ℝ, stored in the domain's graded order.
#[derive(Clone, Debug, PartialEq)]
pub struct ThetaVector {
    domain: ParameterDomain,
    values: Vec<f64>,
}

impl ThetaVector {
    pub fn new(domain: ParameterDomain, values: Vec<f64>) -> Result<Self> {
        if values.len() != domain.len() {
            return Err(Error::LengthMismatch { expected: domain.len(), got: values.len() });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidConfig("θ values must be finite"));
        }
        Ok(ThetaVector { domain, values })
    }

    pub fn zeros(domain: ParameterDomain) -> Self {
        let values = vec![0.0; domain.len()];
        ThetaVector { domain, values }
    }

    pub fn domain(&self) -> &ParameterDomain {
        &self.domain
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, x: &Pattern) -> Option<f64> {
        self.domain.index_of(x).map(|i| self.values[i])
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = (&Pattern, f64)> + '_ {
        self.domain.patterns().iter().zip(self.values.iter().copied())
    }
}

/// Lookup of model probabilities by pattern.
pub trait ProbabilityMap {
    /// `None` when `x` is outside the distribution's sample space.
    fn probability(&self, x: &Pattern) -> Option<f64>;
}

impl ProbabilityMap for BTreeMap<Pattern, f64> {
    fn probability(&self, x: &Pattern) -> Option<f64> {
        self.get(x).copied()
    }
}

/// A fitted or hand-built transductive Gibbs distribution.
///
/// `log p(x) = Σ_{s∈B, s⊆x} θ(s) − ψ(θ)` for every `x ∈ S`. Log-weights are
/// recomputed from θ at construction, so the identity holds to rounding.
#[derive(Clone, Debug)]
pub struct GibbsModel {
    space: SampleSpace,
    theta: ThetaVector,
    log_weights: Vec<f64>,
    log_partition: f64,
    incidence: Incidence,
}

impl GibbsModel {
    /// Builds the distribution for explicit θ values. Every member of `B`
    /// must be an outcome of `S`.
    pub fn new(space: SampleSpace, theta: ThetaVector) -> Result<Self> {
        if let Some(s) = theta.domain().patterns().iter().find(|s| !space.contains(s)) {
            return Err(Error::NotInSampleSpace(s.clone()));
        }
        let incidence = space.incidence(theta.domain().patterns());
        let lattice = SparseLattice::new(&space, &incidence);
        let mut log_weights = vec![0.0; space.len()];
        for (a, &t) in theta.values().iter().enumerate() {
            lattice.shift(a, t, &mut log_weights);
        }
        let log_partition = math::log_sum_exp(&log_weights);
        Ok(GibbsModel { space, theta, log_weights, log_partition, incidence })
    }

    /// θ ≡ 0: uniform over `S`.
    pub fn uniform(space: SampleSpace, domain: ParameterDomain) -> Result<Self> {
        Self::new(space, ThetaVector::zeros(domain))
    }

    pub fn space(&self) -> &SampleSpace {
        &self.space
    }

    pub fn domain(&self) -> &ParameterDomain {
        self.theta.domain()
    }

    pub fn theta(&self) -> &ThetaVector {
        &self.theta
    }

    /// ψ(θ) = log Σ_{x∈S} exp(−E(x; θ)).
    pub fn log_partition(&self) -> f64 {
        self.log_partition
    }

    /// E(x; θ) = −Σ_{s∈B, s⊆x} θ(s).
    pub fn energy(&self, x: &Pattern) -> Result<f64> {
        let i = self.index(x)?;
        let values = self.theta.values();
        Ok(-self.incidence.contained[i].iter().map(|&a| values[a as usize]).sum::<f64>())
    }

    fn index(&self, x: &Pattern) -> Result<usize> {
        self.space.index_of(x).ok_or_else(|| Error::NotInSampleSpace(x.clone()))
    }

    pub fn log_prob(&self, x: &Pattern) -> Result<f64> {
        Ok(self.log_weights[self.index(x)?] - self.log_partition)
    }

    pub fn prob(&self, x: &Pattern) -> Result<f64> {
        self.log_prob(x).map(math::exp)
    }

    /// Probabilities aligned with [`SampleSpace::outcomes`].
    pub fn probs(&self) -> Vec<f64> {
        self.log_weights.iter().map(|w| math::exp(w - self.log_partition)).collect()
    }

    pub fn log_probs(&self) -> Vec<f64> {
        self.log_weights.iter().map(|w| w - self.log_partition).collect()
    }

    pub fn distribution(&self) -> BTreeMap<Pattern, f64> {
        self.space.outcomes().iter().cloned().zip(self.probs()).collect()
    }

    /// η(x) = Σ_{s∈S, s⊇x} p(s). Uses incidence lists for members of `B`
    /// and a subset scan otherwise.
    pub fn eta(&self, x: &Pattern) -> f64 {
        let lp = self.log_partition;
        match self.domain().index_of(x) {
            Some(a) => self.incidence.supersets[a]
                .iter()
                .map(|&s| math::exp(self.log_weights[s as usize] - lp))
                .sum(),
            None => self
                .space
                .outcomes()
                .iter()
                .zip(&self.log_weights)
                .filter(|(s, _)| x.is_subset_of(s))
                .map(|(_, w)| math::exp(w - lp))
                .sum(),
        }
    }

    /// η on `B`, in domain order.
    pub fn eta_domain(&self) -> Vec<f64> {
        let probs = self.probs();
        let mut eta = vec![0.0; self.domain().len()];
        SparseLattice::new(&self.space, &self.incidence).moments(&probs, &[], &mut eta, None);
        eta
    }

    /// φ(η) = Σ_{x∈S} p(x) log p(x), the negative entropy.
    pub fn phi(&self) -> f64 {
        self.log_probs().into_iter().map(|lp| math::exp(lp) * lp).sum()
    }

    pub(crate) fn incidence(&self) -> &Incidence {
        &self.incidence
    }
}

impl ProbabilityMap for GibbsModel {
    fn probability(&self, x: &Pattern) -> Option<f64> {
        self.prob(x).ok()
    }
}
