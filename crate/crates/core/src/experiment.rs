//! Synthetic data and the Monte-Carlo bias-variance harness.
//!
//! The harness fixes a true distribution `P*` on a random sample space `S`
//! and a parameter domain `B`, computes `P*_B` by m-projection, then for each
//! trial draws `N` samples from `P*`, fits `P̂_B` on the same `S` and `B`, and
//! records `D(P*, P̂_B)` and `D(P*_B, P̂_B)`. The variance term
//! `E[D(P*_B, P̂_B)]` is compared against `|B| / 2N`.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fit::{fit_to_moments, FitConfig};
use crate::geometry::{m_projection, variance_lower_bound};
use crate::math;
use crate::metrics::{kl_models, kl_vectors};
use crate::miner::{mine_parameter_domain, ParameterDomain};
use crate::model::GibbsModel;
use crate::pattern::{Item, Pattern, TransactionDataset};
use crate::space::SampleSpace;

/// Deterministic per-stream seed.
pub fn derive_seed(master: u64, stream: u64) -> u64 {
    let mut z = master ^ stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn random_pattern<R: Rng>(rng: &mut R, n: usize) -> Pattern {
    let mut items = Vec::new();
    let mut base = 0usize;
    while base < n {
        let word: u64 = rng.random();
        let width = (n - base).min(64);
        for b in 0..width {
            if word & (1u64 << b) != 0 {
                items.push((base + b) as Item);
            }
        }
        base += 64;
    }
    Pattern::from_sorted(items).expect("bits ascend")
}

/// `count` distinct patterns drawn uniformly from `2^V`, optionally without
/// ⊥. Returned in draw order.
pub fn distinct_patterns<R: Rng>(rng: &mut R, n: usize, count: usize, exclude_bottom: bool) -> Result<Vec<Pattern>> {
    let universe: u128 = if n >= 127 { u128::MAX } else { 1u128 << n };
    let available = universe - u128::from(exclude_bottom);
    if count as u128 > available {
        return Err(Error::InfeasibleSupport { requested: count as u128, available });
    }
    // Dense request on a small universe: shuffle the whole thing.
    if n <= 20 && count as u128 * 2 > available {
        let start = u64::from(exclude_bottom);
        let mut all: Vec<u64> = (start..(1u64 << n)).collect();
        let (picked, _) = all.partial_shuffle(rng, count);
        return Ok(picked.iter().map(|&m| Pattern::from_mask(m)).collect());
    }
    let mut seen = BTreeSet::new();
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let p = random_pattern(rng, n);
        if exclude_bottom && p.is_empty() {
            continue;
        }
        if seen.insert(p.clone()) {
            out.push(p);
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SynthConfig {
    pub n_vars: usize,
    pub support_size: usize,
    pub n_samples: u64,
    pub seed: u64,
}

/// Random dataset: a support `D′` of distinct patterns drawn uniformly from
/// `2^V`, then `N` draws from `D′` with replacement. Returns the dataset and
/// `D′` in lexicographic order.
pub fn synth_dataset(cfg: &SynthConfig) -> Result<(TransactionDataset, Vec<Pattern>)> {
    if cfg.n_samples == 0 {
        return Err(Error::EmptyDataset);
    }
    if cfg.support_size == 0 {
        return Err(Error::InfeasibleSupport { requested: 0, available: 0 });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let support = distinct_patterns(&mut rng, cfg.n_vars, cfg.support_size, false)?;
    let mut counts = vec![0u64; support.len()];
    for _ in 0..cfg.n_samples {
        counts[rng.random_range(0..support.len())] += 1;
    }
    let d = TransactionDataset::from_counts(support.iter().cloned().zip(counts))?.with_n_variables(cfg.n_vars)?;
    let mut truth = support;
    truth.sort();
    Ok((d, truth))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BiasVarianceConfig {
    /// Number of random non-empty patterns in `S` (⊥ is added on top).
    pub space_size: usize,
    pub n_vars: usize,
    pub sigma: f64,
    pub k: usize,
    /// Sample size `N` of the pilot and of every trial.
    pub n_samples: u64,
    pub trials: usize,
    pub seed: u64,
    pub fit: FitConfig,
}

impl Default for BiasVarianceConfig {
    fn default() -> Self {
        BiasVarianceConfig {
            space_size: 1000,
            n_vars: 50,
            sigma: 0.37,
            k: 2,
            n_samples: 10_000,
            trials: 100,
            seed: 0,
            fit: FitConfig::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrialResult {
    pub trial: usize,
    /// D(P*, P̂_B)
    pub kl_true_to_fit: f64,
    /// D(P*_B, P̂_B)
    pub kl_proj_to_fit: f64,
    /// Parameters the guard removed in this trial's fit.
    pub removed: usize,
}

/// Everything that stays fixed across trials.
#[derive(Clone, Debug)]
pub struct BiasVarianceSetup {
    pub config: BiasVarianceConfig,
    pub space: SampleSpace,
    /// P*, aligned with `space.outcomes()`.
    pub truth: Vec<f64>,
    pub domain: ParameterDomain,
    /// P*_B
    pub projection: GibbsModel,
    /// D(P*, P*_B)
    pub bias: f64,
}

fn uniform_weight<R: Rng>(rng: &mut R) -> f64 {
    loop {
        let w: f64 = rng.random();
        if w > 0.0 {
            return w;
        }
    }
}

fn sample_counts<R: Rng>(rng: &mut R, dist: &WeightedIndex<f64>, len: usize, n: u64) -> Vec<u64> {
    let mut counts = vec![0u64; len];
    for _ in 0..n {
        counts[dist.sample(rng)] += 1;
    }
    counts
}

impl BiasVarianceSetup {
    /// 1. draws `space_size` distinct non-empty patterns plus ⊥;
    /// 2. draws i.i.d. uniform(0,1) weights on them;
    /// 3. mines `B` with `(σ, k)` from one pilot sample of size `N`;
    /// 4. extends the space to `S ∪ B` (members of `B` that were not drawn
    ///    get their own uniform weight) and normalizes to `P*`;
    /// 5. projects `P*` onto `S(B)`.
    pub fn prepare(cfg: &BiasVarianceConfig) -> Result<Self> {
        if cfg.space_size < 2 {
            return Err(Error::InvalidConfig("space_size must be at least 2"));
        }
        if cfg.trials < 2 {
            return Err(Error::InvalidConfig("at least two trials are needed"));
        }
        if cfg.n_samples == 0 {
            return Err(Error::EmptyDataset);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut drawn = distinct_patterns(&mut rng, cfg.n_vars, cfg.space_size, true)?;
        drawn.push(Pattern::empty());
        let weights: Vec<f64> = drawn.iter().map(|_| uniform_weight(&mut rng)).collect();

        let pilot_dist = WeightedIndex::new(&weights).map_err(|_| Error::InvalidDistribution("degenerate P*"))?;
        let pilot = sample_counts(&mut rng, &pilot_dist, drawn.len(), cfg.n_samples);
        let pilot = TransactionDataset::from_counts(drawn.iter().cloned().zip(pilot))?.with_n_variables(cfg.n_vars)?;
        let domain = mine_parameter_domain(&pilot, cfg.sigma, cfg.k)?;
        if domain.is_empty() {
            return Err(Error::EmptyDomain);
        }

        let space = SampleSpace::from_outcomes(drawn.iter().cloned().chain(domain.patterns().iter().cloned()));
        let mut truth = vec![0.0; space.len()];
        for (p, w) in drawn.iter().zip(&weights) {
            truth[space.index_of(p).expect("drawn outcome")] = *w;
        }
        for t in truth.iter_mut().filter(|t| **t == 0.0) {
            *t = uniform_weight(&mut rng);
        }
        let z: f64 = truth.iter().sum();
        truth.iter_mut().for_each(|t| *t /= z);

        // The decomposition is exact only up to the projection's moment gap.
        let proj_cfg = FitConfig { tol: cfg.fit.tol.min(1e-10), ..cfg.fit };
        let (projection, _) = m_projection(space.clone(), &truth, &domain, &proj_cfg)?;
        let bias = kl_vectors(&truth, &projection.probs())?;
        Ok(BiasVarianceSetup { config: *cfg, space, truth, domain, projection, bias })
    }

    pub fn lower_bound(&self) -> f64 {
        variance_lower_bound(self.domain.len(), self.config.n_samples)
    }

    /// One trial with its own deterministic RNG stream.
    pub fn run_trial(&self, trial: usize) -> Result<TrialResult> {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(self.config.seed, trial as u64));
        let dist = WeightedIndex::new(&self.truth).map_err(|_| Error::InvalidDistribution("degenerate P*"))?;
        let counts = sample_counts(&mut rng, &dist, self.truth.len(), self.config.n_samples);
        let n = self.config.n_samples as f64;
        let inc = self.space.incidence(self.domain.patterns());
        let targets: Vec<f64> = inc
            .supersets
            .iter()
            .map(|sup| sup.iter().map(|&x| counts[x as usize]).sum::<u64>() as f64 / n)
            .collect();
        let (fitted, report) = fit_to_moments(self.space.clone(), &self.domain, &targets, &self.config.fit)?;
        Ok(TrialResult {
            trial,
            kl_true_to_fit: kl_vectors(&self.truth, &fitted.probs())?,
            kl_proj_to_fit: kl_models(&self.projection, &fitted)?,
            removed: report.removed_parameters.len(),
        })
    }

    pub fn report(&self, mut trials: Vec<TrialResult>) -> BiasVarianceReport {
        trials.sort_by_key(|t| t.trial);
        let (var_mean, var_std) = mean_std(trials.iter().map(|t| t.kl_proj_to_fit));
        let (total_mean, total_std) = mean_std(trials.iter().map(|t| t.kl_true_to_fit));
        let root = math::sqrt(trials.len() as f64);
        BiasVarianceReport {
            bias: self.bias,
            variance_mean: var_mean,
            variance_std: var_std,
            variance_stderr: var_std / root,
            total_mean,
            total_stderr: total_std / root,
            lower_bound: self.lower_bound(),
            n_samples: self.config.n_samples,
            sample_space_size: self.space.len(),
            domain_size: self.domain.len(),
            trials,
        }
    }
}

fn mean_std<I: ExactSizeIterator<Item = f64>>(values: I) -> (f64, f64) {
    let v: Vec<f64> = values.collect();
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0).max(1.0);
    (mean, math::sqrt(var))
}

#[derive(Clone, Debug, PartialEq)]
pub struct BiasVarianceReport {
    /// D(P*, P*_B)
    pub bias: f64,
    /// Mean of D(P*_B, P̂_B) over trials: the variance estimate.
    pub variance_mean: f64,
    /// Sample standard deviation of D(P*_B, P̂_B).
    pub variance_std: f64,
    pub variance_stderr: f64,
    /// Mean of D(P*, P̂_B).
    pub total_mean: f64,
    pub total_stderr: f64,
    /// |B| / 2N
    pub lower_bound: f64,
    pub n_samples: u64,
    pub sample_space_size: usize,
    pub domain_size: usize,
    pub trials: Vec<TrialResult>,
}

/// Sequential driver; trials can also be run independently through
/// [`BiasVarianceSetup::run_trial`].
pub fn bias_variance_experiment(cfg: &BiasVarianceConfig) -> Result<BiasVarianceReport> {
    let setup = BiasVarianceSetup::prepare(cfg)?;
    let trials = (0..cfg.trials).map(|t| setup.run_trial(t)).collect::<Result<Vec<_>>>()?;
    Ok(setup.report(trials))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn synth_support_of_one() {
        let cfg = SynthConfig { n_vars: 8, support_size: 1, n_samples: 50, seed: 3 };
        let (d, truth) = synth_dataset(&cfg).unwrap();
        assert_eq!(d.n_unique(), 1);
        assert_eq!(d.total(), 50);
        assert_eq!(d.n_variables(), 8);
        assert_eq!(truth.len(), 1);
    }

    #[test]
    fn synth_is_deterministic_and_checks_feasibility() {
        let cfg = SynthConfig { n_vars: 6, support_size: 40, n_samples: 500, seed: 11 };
        assert_eq!(synth_dataset(&cfg).unwrap(), synth_dataset(&cfg).unwrap());
        let (d, truth) = synth_dataset(&cfg).unwrap();
        assert_eq!(truth.len(), 40);
        assert!(d.unique_patterns().all(|p| truth.binary_search(p).is_ok()));
        let bad = SynthConfig { support_size: 65, ..cfg };
        assert!(matches!(synth_dataset(&bad), Err(Error::InfeasibleSupport { requested: 65, available: 64 })));
    }

    #[test]
    fn wide_patterns() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = distinct_patterns(&mut rng, 150, 5, true).unwrap();
        assert_eq!(p.len(), 5);
        assert!(p.iter().all(|x| x.max_item().unwrap() < 150));
    }

    #[test]
    fn seeds_differ_per_stream() {
        assert_ne!(derive_seed(0, 0), derive_seed(0, 1));
        assert_eq!(derive_seed(5, 9), derive_seed(5, 9));
    }

    #[test]
    fn small_harness_runs() {
        let cfg = BiasVarianceConfig {
            space_size: 30,
            n_vars: 6,
            sigma: 0.3,
            k: 2,
            n_samples: 2000,
            trials: 4,
            seed: 1,
            fit: FitConfig::default(),
        };
        let report = bias_variance_experiment(&cfg).unwrap();
        assert_eq!(report.trials.len(), 4);
        assert!(report.bias >= 0.0);
        assert!(report.variance_mean > 0.0);
        for t in &report.trials {
            // Pythagorean identity per trial, up to the trial fit's moment gap.
            assert!((t.kl_true_to_fit - report.bias - t.kl_proj_to_fit).abs() < 1e-6);
        }
    }
}
