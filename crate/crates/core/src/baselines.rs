//! Inductive baselines over the full space `2^V`: the exact fully visible
//! Boltzmann machine on the same parameter domain, and a restricted Boltzmann
//! machine trained by persistent contrastive divergence (PCD-1).

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fit::{ascend, empirical_targets, FitConfig, FitReport};
use crate::lattice::{DenseLattice, Lattice};
use crate::math;
use crate::miner::ParameterDomain;
use crate::model::ThetaVector;
use crate::pattern::{Pattern, TransactionDataset};

/// Exact enumeration of `2^n` is refused above this many variables.
pub const FULL_BM_MAX_VARIABLES: usize = 25;

/// Fully visible Boltzmann machine with parameters on `B` and sample space
/// `2^V`.
#[derive(Clone, Debug)]
pub struct FullBmModel {
    theta: ThetaVector,
    n_variables: usize,
    log_partition: f64,
}

impl FullBmModel {
    pub fn new(n_variables: usize, theta: ThetaVector) -> Result<Self> {
        check_universe(n_variables, theta.domain())?;
        let lattice = DenseLattice::new(n_variables, theta.domain().patterns());
        let mut log_w = vec![0.0; lattice.n_outcomes()];
        for (a, &t) in theta.values().iter().enumerate() {
            lattice.shift(a, t, &mut log_w);
        }
        let log_partition = math::log_sum_exp(&log_w);
        Ok(FullBmModel { theta, n_variables, log_partition })
    }

    pub fn theta(&self) -> &ThetaVector {
        &self.theta
    }

    pub fn domain(&self) -> &ParameterDomain {
        self.theta.domain()
    }

    pub fn n_variables(&self) -> usize {
        self.n_variables
    }

    pub fn log_partition(&self) -> f64 {
        self.log_partition
    }

    pub fn parameter_count(&self) -> usize {
        self.theta.values().len()
    }

    /// E(x; θ) for any configuration over `V`.
    pub fn energy(&self, x: &Pattern) -> f64 {
        -self.theta.iter().filter(|(s, _)| s.is_subset_of(x)).map(|(_, t)| t).sum::<f64>()
    }

    pub fn log_prob(&self, x: &Pattern) -> f64 {
        -self.energy(x) - self.log_partition
    }

    /// Probabilities of all `2^n` outcomes, indexed by bitmask.
    pub fn probs(&self) -> Vec<f64> {
        let lattice = DenseLattice::new(self.n_variables, self.domain().patterns());
        let mut log_w = vec![0.0; lattice.n_outcomes()];
        for (a, &t) in self.theta.values().iter().enumerate() {
            lattice.shift(a, t, &mut log_w);
        }
        log_w.iter().map(|w| math::exp(w - self.log_partition)).collect()
    }
}

fn check_universe(n: usize, b: &ParameterDomain) -> Result<()> {
    if n > FULL_BM_MAX_VARIABLES {
        return Err(Error::TooManyVariables {
            n,
            max: FULL_BM_MAX_VARIABLES,
            what: "the exact Boltzmann machine (use the transductive learner)",
        });
    }
    for s in b.patterns() {
        if let Some(item) = s.max_item().filter(|&m| m as usize >= n) {
            return Err(Error::VariableOutOfRange { pattern: s.clone(), item, n_variables: n });
        }
    }
    Ok(())
}

/// Fits the fully visible BM by the same moment-matching ascent as the
/// transductive learner, with expectations taken over all of `2^V`.
pub fn fit_full_bm(d: &TransactionDataset, b: &ParameterDomain, cfg: &FitConfig) -> Result<(FullBmModel, FitReport)> {
    let n = d.n_variables();
    check_universe(n, b)?;
    let lattice = DenseLattice::new(n, b.patterns());
    let targets = empirical_targets(d, b);
    let ascent = ascend(&lattice, b.patterns(), &targets, cfg)?;
    let kept = b.retain_mask(&ascent.active);
    let values = ascent.theta.iter().zip(&ascent.active).filter(|(_, &k)| k).map(|(&t, _)| t).collect();
    let model = FullBmModel::new(n, ThetaVector::new(kept, values)?)?;
    Ok((model, ascent.report))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RbmConfig {
    pub learning_rate: f64,
    /// Parameter updates; each advances every persistent chain by one
    /// alternating Gibbs sweep.
    pub updates: usize,
    pub chains: usize,
    pub seed: u64,
}

impl Default for RbmConfig {
    fn default() -> Self {
        RbmConfig { learning_rate: 0.01, updates: 1_000_000, chains: 100, seed: 0 }
    }
}

/// Binary RBM. Visible unit `i` is variable `i`.
#[derive(Clone, Debug, PartialEq)]
pub struct RbmModel {
    pub visible_bias: Vec<f64>,
    pub hidden_bias: Vec<f64>,
    /// Row-major `n_visible × n_hidden`.
    pub weights: Vec<f64>,
}

impl RbmModel {
    pub fn zeros(n_visible: usize, n_hidden: usize) -> Self {
        RbmModel {
            visible_bias: vec![0.0; n_visible],
            hidden_bias: vec![0.0; n_hidden],
            weights: vec![0.0; n_visible * n_hidden],
        }
    }

    pub fn n_visible(&self) -> usize {
        self.visible_bias.len()
    }

    pub fn n_hidden(&self) -> usize {
        self.hidden_bias.len()
    }

    /// `n + n_H + n·n_H`.
    pub fn parameter_count(&self) -> usize {
        self.n_visible() + self.n_hidden() + self.weights.len()
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.weights[i * self.n_hidden() + j]
    }

    fn hidden_input(&self, x: &Pattern) -> Vec<f64> {
        let h = self.n_hidden();
        let mut act = self.hidden_bias.clone();
        for &i in x.items() {
            let row = &self.weights[i as usize * h..(i as usize + 1) * h];
            act.iter_mut().zip(row).for_each(|(a, w)| *a += w);
        }
        act
    }

    /// `P(h_j = 1 | x)` for every hidden unit.
    pub fn hidden_probabilities(&self, x: &Pattern) -> Vec<f64> {
        self.hidden_input(x).into_iter().map(math::sigmoid).collect()
    }

    /// F(x) = −Σ_{i∈x} b_i − Σ_j log(1 + exp(c_j + Σ_{i∈x} w_ij)).
    pub fn free_energy(&self, x: &Pattern) -> f64 {
        let visible: f64 = x.items().iter().map(|&i| self.visible_bias[i as usize]).sum();
        -visible - self.hidden_input(x).into_iter().map(math::softplus).sum::<f64>()
    }
}

pub fn rbm_free_energy(m: &RbmModel, x: &Pattern) -> f64 {
    m.free_energy(x)
}

/// `⌈(|B| − n)/(n + 1)⌉`, at least one: the hidden layer size whose
/// parameter count `n + n_H + n·n_H` is closest to `|B|` from above.
pub fn matched_hidden_units(b_size: usize, n: usize) -> usize {
    if b_size <= n {
        return 1;
    }
    (b_size - n).div_ceil(n + 1).max(1)
}

/// Trains an RBM with persistent CD-1 and full-batch positive statistics.
pub fn fit_rbm_pcd1(d: &TransactionDataset, n_hidden: usize, cfg: &RbmConfig) -> Result<RbmModel> {
    if n_hidden == 0 {
        return Err(Error::InvalidConfig("the RBM needs at least one hidden unit"));
    }
    if cfg.chains == 0 {
        return Err(Error::InvalidConfig("PCD needs at least one chain"));
    }
    if !(cfg.learning_rate > 0.0 && cfg.learning_rate.is_finite()) {
        return Err(Error::InvalidConfig("learning rate must be positive"));
    }
    let n = d.n_variables();
    let h = n_hidden;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut m = RbmModel::zeros(n, h);
    for w in m.weights.iter_mut() {
        *w = 0.02 * (rng.random::<f64>() - 0.5);
    }
    let total = d.total() as f64;
    let data: Vec<(&Pattern, f64)> = d.entries().map(|(x, c)| (x, c as f64 / total)).collect();
    for i in 0..n {
        let mean = d.empirical_eta(&Pattern::from([i as u32])).clamp(1e-3, 1.0 - 1e-3);
        m.visible_bias[i] = math::ln(mean / (1.0 - mean));
    }

    // Persistent chains start at random training patterns.
    let mut chains: Vec<Vec<u8>> = (0..cfg.chains)
        .map(|_| {
            let (x, _) = data[rng.random_range(0..data.len())];
            let mut v = vec![0u8; n];
            x.items().iter().for_each(|&i| v[i as usize] = 1);
            v
        })
        .collect();

    let mut grad_w = vec![0.0; n * h];
    let mut grad_b = vec![0.0; n];
    let mut grad_c = vec![0.0; h];
    let mut hidden = vec![0u8; h];
    let mut act = vec![0.0; h];
    let inv_chains = 1.0 / cfg.chains as f64;

    for _ in 0..cfg.updates {
        grad_w.iter_mut().for_each(|g| *g = 0.0);
        grad_b.iter_mut().for_each(|g| *g = 0.0);
        grad_c.iter_mut().for_each(|g| *g = 0.0);

        for &(x, q) in &data {
            let probs = m.hidden_probabilities(x);
            for &i in x.items() {
                grad_b[i as usize] += q;
                let row = &mut grad_w[i as usize * h..(i as usize + 1) * h];
                row.iter_mut().zip(&probs).for_each(|(g, p)| *g += q * p);
            }
            grad_c.iter_mut().zip(&probs).for_each(|(g, p)| *g += q * p);
        }

        for v in chains.iter_mut() {
            hidden_activation(&m, v, &mut act);
            for (hj, &a) in hidden.iter_mut().zip(&act) {
                *hj = u8::from(rng.random::<f64>() < math::sigmoid(a));
            }
            for i in 0..n {
                let row = &m.weights[i * h..(i + 1) * h];
                let input = m.visible_bias[i]
                    + row.iter().zip(&hidden).filter(|(_, &hj)| hj == 1).map(|(w, _)| w).sum::<f64>();
                v[i] = u8::from(rng.random::<f64>() < math::sigmoid(input));
            }
            hidden_activation(&m, v, &mut act);
            for (j, &a) in act.iter().enumerate() {
                let p = math::sigmoid(a);
                grad_c[j] -= inv_chains * p;
                for i in (0..n).filter(|&i| v[i] == 1) {
                    grad_w[i * h + j] -= inv_chains * p;
                }
            }
            for i in (0..n).filter(|&i| v[i] == 1) {
                grad_b[i] -= inv_chains;
            }
        }

        let lr = cfg.learning_rate;
        m.weights.iter_mut().zip(&grad_w).for_each(|(w, g)| *w += lr * g);
        m.visible_bias.iter_mut().zip(&grad_b).for_each(|(b, g)| *b += lr * g);
        m.hidden_bias.iter_mut().zip(&grad_c).for_each(|(c, g)| *c += lr * g);
    }
    Ok(m)
}

fn hidden_activation(m: &RbmModel, v: &[u8], out: &mut [f64]) {
    let h = m.n_hidden();
    out.copy_from_slice(&m.hidden_bias);
    for (i, _) in v.iter().enumerate().filter(|(_, &vi)| vi == 1) {
        let row = &m.weights[i * h..(i + 1) * h];
        out.iter_mut().zip(row).for_each(|(a, w)| *a += w);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fit::{fit, StepRule};

    fn worked_example() -> TransactionDataset {
        TransactionDataset::from_counts(vec![
            (Pattern::empty(), 2),
            (Pattern::from([0]), 3),
            (Pattern::from([1]), 1),
            (Pattern::from([0, 1]), 4),
        ])
        .unwrap()
    }

    #[test]
    fn zero_theta_is_uniform_over_power_set() {
        let b = ParameterDomain::from_patterns([Pattern::from([0]), Pattern::from([1, 2])]).unwrap();
        let m = FullBmModel::new(3, ThetaVector::zeros(b)).unwrap();
        assert!((m.log_partition() - 3.0 * math::ln(2.0)).abs() < 1e-14);
        let s: f64 = m.probs().iter().sum();
        assert!((s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn independence_mle_on_two_variables() {
        let d = worked_example();
        let b = ParameterDomain::from_patterns([Pattern::from([0]), Pattern::from([1])]).unwrap();
        for step in [StepRule::Natural, StepRule::Gradient] {
            let cfg = FitConfig { step, tol: 1e-10, ..FitConfig::default() };
            let (m, report) = fit_full_bm(&d, &b, &cfg).unwrap();
            assert!(report.converged);
            let p = m.probs();
            for (mask, want) in [(0b00, 0.15), (0b01, 0.35), (0b10, 0.15), (0b11, 0.35)] {
                assert!((p[mask] - want).abs() < 1e-9);
            }
            let (tbm, _) = fit(&d, &b, &cfg).unwrap();
            for (x, t) in tbm.theta().iter() {
                assert!((m.theta().get(x).unwrap() - t).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn refuses_large_universe() {
        let d = TransactionDataset::from_transactions([Pattern::from([30])]).unwrap();
        let b = ParameterDomain::from_patterns([Pattern::from([30])]).unwrap();
        assert!(matches!(fit_full_bm(&d, &b, &FitConfig::default()), Err(Error::TooManyVariables { n: 31, .. })));
    }

    #[test]
    fn degenerate_pair_guard_on_full_space() {
        let d = TransactionDataset::from_counts(vec![
            (Pattern::empty(), 3),
            (Pattern::from([1]), 3),
            (Pattern::from([0, 1]), 4),
        ])
        .unwrap();
        let b = ParameterDomain::from_patterns([Pattern::from([0]), Pattern::from([0, 1])]).unwrap();
        let (m, report) = fit_full_bm(&d, &b, &FitConfig::default()).unwrap();
        assert_eq!(report.removed_parameters.len(), 1);
        assert!(report.converged);
        assert!(m.probs().iter().all(|p| *p > 0.0 && p.is_finite()));
    }

    #[test]
    fn free_energy_closed_forms() {
        let m = RbmModel::zeros(3, 4);
        assert!((m.free_energy(&Pattern::from([0, 2])) + 4.0 * math::ln(2.0)).abs() < 1e-14);
        assert!(m.hidden_probabilities(&Pattern::from([1])).iter().all(|&p| p == 0.5));

        let mut m = RbmModel::zeros(3, 2);
        m.visible_bias = vec![0.5, -1.0, 2.0];
        let f = m.free_energy(&Pattern::from([0, 2]));
        assert!((f - (-(0.5 + 2.0) - 2.0 * math::ln(2.0))).abs() < 1e-14);

        let mut m = RbmModel::zeros(1, 1);
        m.weights[0] = 1.0;
        let f = rbm_free_energy(&m, &Pattern::from([0]));
        assert!((f + math::ln(1.0 + core::f64::consts::E)).abs() < 1e-14);
    }

    #[test]
    fn hidden_size_formula() {
        assert_eq!(matched_hidden_units(23, 119), 1);
        assert_eq!(matched_hidden_units(305, 41), 7);
        assert_eq!(matched_hidden_units(45, 15), 2);
        let m = RbmModel::zeros(41, matched_hidden_units(305, 41));
        assert_eq!(m.parameter_count(), 335);
    }

    #[test]
    fn pcd_is_reproducible() {
        let d = worked_example();
        let cfg = RbmConfig { updates: 50, chains: 10, seed: 7, ..RbmConfig::default() };
        let a = fit_rbm_pcd1(&d, 2, &cfg).unwrap();
        let b = fit_rbm_pcd1(&d, 2, &cfg).unwrap();
        assert_eq!(a, b);
        assert!(a.weights.iter().all(|w| w.is_finite()));
        assert!(fit_rbm_pcd1(&d, 0, &cfg).is_err());
    }
}
