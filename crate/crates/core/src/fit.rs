//! Maximum-likelihood fitting by gradient ascent on θ.
//!
//! Each sweep runs the loop body of the TBM learner: for every parameter
//! `x ∈ B` in graded order compute a step `μ`, set `θ(x) += μ`, multiply
//! `p(s)` by `e^μ` for every `s ⊇ x` (an addition, since weights are kept in
//! log space), then renormalize through ψ and refresh η. The log-likelihood
//! gradient is `N(η̂(x) − η(x))` and the optimum is exactly `η = η̂` on `B`.
//!
//! Two step rules are available. [`StepRule::Gradient`] uses
//! `μ = ε(η̂(x) − η(x))`. [`StepRule::Natural`] preconditions the same
//! gradient by the Fisher information (`μ = ε G⁻¹(η̂ − η)`), which is the
//! Newton step of this concave problem. Both halve ε whenever a sweep would
//! lower the log-likelihood.
//!
//! Divergence guard: when the targets force some probability in `S` to zero
//! no finite θ attains them and some θ(x) runs off to ±∞. Parameters whose
//! target is exactly 0 or 1 are dropped up front; afterwards, whenever a
//! sweep leaves some `|θ(x)| > θ_max`, the largest such parameter is removed
//! from `B` (its contribution is taken out of the weights, `S` stays fixed)
//! and fitting continues from the current state. Under the natural rule a
//! small moment gap alone does not end the fit: the Newton step must also
//! have shrunk (or the gap must have stopped shrinking at round-off level),
//! otherwise θ is still walking towards a boundary optimum.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::lattice::{Lattice, SparseLattice};
use crate::math;
use crate::miner::ParameterDomain;
use crate::model::{GibbsModel, ThetaVector};
use crate::pattern::{Pattern, TransactionDataset};
use crate::space::{build_sample_space, SampleSpace};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepRule {
    /// Plain gradient step `ε(η̂ − η)`.
    Gradient,
    /// Fisher-preconditioned (Newton) step, capped at `max_step` per
    /// coordinate.
    Natural,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FitConfig {
    /// Initial learning rate ε.
    pub epsilon: f64,
    /// Stop when `max_{x∈B} |η̂(x) − η(x)| ≤ tol`.
    pub tol: f64,
    /// Maximum number of accepted sweeps.
    pub max_iters: usize,
    /// Divergence threshold on `|θ(x)|`.
    pub theta_max: f64,
    pub step: StepRule,
    /// Largest single-sweep change of any θ under [`StepRule::Natural`].
    pub max_step: f64,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            epsilon: 1.0,
            tol: 1e-6,
            max_iters: 10_000,
            theta_max: 30.0,
            step: StepRule::Natural,
            max_step: 4.0,
        }
    }
}

impl FitConfig {
    fn validate(&self) -> Result<()> {
        let positive = |v: f64| v > 0.0 && v.is_finite();
        if !positive(self.epsilon) {
            return Err(Error::InvalidConfig("epsilon must be positive"));
        }
        if !positive(self.tol) {
            return Err(Error::InvalidConfig("tol must be positive"));
        }
        if !positive(self.theta_max) {
            return Err(Error::InvalidConfig("theta_max must be positive"));
        }
        if !positive(self.max_step) {
            return Err(Error::InvalidConfig("max_step must be positive"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct FitReport {
    /// Accepted sweeps.
    pub iterations: usize,
    /// `max_{x∈B} |η̂(x) − η(x)|` over the final domain.
    pub final_gap: f64,
    /// Parameters dropped by the divergence guard, in removal order.
    pub removed_parameters: Vec<Pattern>,
    pub converged: bool,
    /// Every parameter was removed; the result is uniform over `S`.
    pub all_removed: bool,
    /// Outcome probabilities touched over the whole fit.
    pub evaluations: u64,
    /// Largest number touched by a single sweep attempt.
    pub max_sweep_evaluations: u64,
    /// Mean log-likelihood `θ·η̂ − ψ(θ)` after initialization and after
    /// every accepted sweep.
    pub objective_trace: Vec<f64>,
    /// Sweep indices right after which the guard removed a parameter.
    pub removal_sweeps: Vec<usize>,
}

/// Raw optimizer output over a lattice.
pub(crate) struct Ascent {
    pub theta: Vec<f64>,
    pub active: Vec<bool>,
    pub report: FitReport,
}

struct State {
    theta: Vec<f64>,
    log_w: Vec<f64>,
    psi: f64,
    probs: Vec<f64>,
    eta: Vec<f64>,
    fisher: DMatrix<f64>,
}

fn objective(theta: &[f64], targets: &[f64], active: &[usize], psi: f64) -> f64 {
    active.iter().map(|&a| theta[a] * targets[a]).sum::<f64>() - psi
}

/// Runs the learner on `lattice` until `η` matches `targets` on the
/// surviving parameters.
/// Largest raw Newton step still treated as stationary. Near an interior
/// optimum the step shrinks quadratically; when the optimum sits on the
/// boundary the step stays of order one while θ walks off towards θ_max.
const STATIONARY_STEP: f64 = 1e-3;

/// Once the gap is within tolerance, a sweep that shrinks it by less than
/// this factor means the step is round-off noise in an ill-conditioned
/// Fisher matrix. A boundary optimum keeps shrinking it by about e⁻¹.
const STALL_RATIO: f64 = 0.9;

/// Runs the learner on `lattice` until `η` matches `targets` on the
/// surviving parameters.
pub(crate) fn ascend<L: Lattice>(
    lattice: &L,
    patterns: &[Pattern],
    targets: &[f64],
    cfg: &FitConfig,
) -> Result<Ascent> {
    cfg.validate()?;
    let n_params = lattice.n_params();
    if targets.len() != n_params {
        return Err(Error::LengthMismatch { expected: n_params, got: targets.len() });
    }
    if targets.iter().any(|t| !(0.0..=1.0).contains(t)) {
        return Err(Error::InvalidConfig("targets must lie in [0, 1]"));
    }
    let natural = cfg.step == StepRule::Natural;
    let n_out = lattice.n_outcomes();
    let mut report = FitReport::default();

    // A target of 0 needs p(s) = 0 for every s ⊇ x; a target of 1 needs
    // p(⊥) = 0. Neither is reachable with finite θ.
    let mut active_mask: Vec<bool> = targets.iter().map(|&t| t > 0.0 && t < 1.0).collect();
    for (a, keep) in active_mask.iter().enumerate() {
        if !keep {
            report.removed_parameters.push(patterns[a].clone());
        }
    }
    let mut active: Vec<usize> = (0..n_params).filter(|&a| active_mask[a]).collect();

    let mut st = State {
        theta: vec![0.0; n_params],
        log_w: vec![0.0; n_out],
        psi: math::ln(n_out as f64),
        probs: vec![1.0 / n_out as f64; n_out],
        eta: vec![0.0; n_params],
        fisher: DMatrix::zeros(0, 0),
    };
    report.evaluations += refresh(lattice, &mut st, &active, natural);
    let mut obj = objective(&st.theta, targets, &active, st.psi);
    report.objective_trace.push(obj);

    let mut epsilon = cfg.epsilon;
    let mut prev_gap = f64::INFINITY;
    let mut trial_w = vec![0.0; n_out];
    let mut trial_theta = vec![0.0; n_params];

    loop {
        let gap = active.iter().map(|&a| (targets[a] - st.eta[a]).abs()).fold(0.0, f64::max);
        report.final_gap = gap;
        let gradient: Vec<f64> = active.iter().map(|&a| targets[a] - st.eta[a]).collect();
        let (direction, raw_step) = if natural {
            let mut d = solve_spd(&st.fisher, &gradient).unwrap_or_else(|| gradient.clone());
            let largest = d.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if largest > cfg.max_step {
                let scale = cfg.max_step / largest;
                d.iter_mut().for_each(|v| *v *= scale);
            }
            epsilon = cfg.epsilon;
            (d, largest)
        } else {
            (gradient, 0.0)
        };
        let stalled = gap > STALL_RATIO * prev_gap;
        prev_gap = gap;
        if gap <= cfg.tol && (raw_step <= STATIONARY_STEP || stalled) {
            report.converged = true;
            break;
        }
        if report.iterations >= cfg.max_iters {
            break;
        }

        // Backtrack on ε until the sweep does not lower the objective.
        let slack = 1e-12 * (1.0 + obj.abs());
        let accepted = loop {
            trial_w.copy_from_slice(&st.log_w);
            trial_theta.copy_from_slice(&st.theta);
            let mut touched = 0u64;
            for (i, &a) in active.iter().enumerate() {
                let mu = epsilon * direction[i];
                trial_theta[a] += mu;
                touched += lattice.shift(a, mu, &mut trial_w);
            }
            let psi = math::log_sum_exp(&trial_w);
            touched += n_out as u64;
            let trial_obj = objective(&trial_theta, targets, &active, psi);
            report.evaluations += touched;
            if trial_obj >= obj - slack && psi.is_finite() {
                core::mem::swap(&mut st.log_w, &mut trial_w);
                core::mem::swap(&mut st.theta, &mut trial_theta);
                st.psi = psi;
                obj = trial_obj;
                let moments = refresh(lattice, &mut st, &active, natural);
                report.evaluations += moments;
                report.max_sweep_evaluations = report.max_sweep_evaluations.max(touched + moments);
                break true;
            }
            report.max_sweep_evaluations = report.max_sweep_evaluations.max(touched);
            epsilon *= 0.5;
            if epsilon < 1e-30 || (natural && epsilon < 1e-12) {
                break false;
            }
        };
        if !accepted {
            // No ascent direction left at this precision.
            report.converged = gap <= cfg.tol;
            break;
        }
        report.iterations += 1;
        report.objective_trace.push(obj);

        let diverging = active
            .iter()
            .copied()
            .filter(|&a| st.theta[a].abs() > cfg.theta_max)
            .max_by(|&a, &b| st.theta[a].abs().total_cmp(&st.theta[b].abs()));
        if let Some(a) = diverging {
            report.evaluations += lattice.shift(a, -st.theta[a], &mut st.log_w);
            st.theta[a] = 0.0;
            active_mask[a] = false;
            active.retain(|&b| b != a);
            report.removed_parameters.push(patterns[a].clone());
            report.removal_sweeps.push(report.iterations);
            st.psi = math::log_sum_exp(&st.log_w);
            report.evaluations += n_out as u64;
            report.evaluations += refresh(lattice, &mut st, &active, natural);
            obj = objective(&st.theta, targets, &active, st.psi);
            epsilon = cfg.epsilon;
            prev_gap = f64::INFINITY;
        }
    }
    report.all_removed = active.is_empty() && n_params > 0;
    Ok(Ascent { theta: st.theta, active: active_mask, report })
}

/// Normalizes probabilities from the current log-weights and recomputes η
/// (and the Fisher matrix when needed). Returns outcomes touched.
fn refresh<L: Lattice>(lattice: &L, st: &mut State, active: &[usize], natural: bool) -> u64 {
    for (p, &w) in st.probs.iter_mut().zip(&st.log_w) {
        *p = math::exp(w - st.psi);
    }
    let fisher = natural.then_some(&mut st.fisher);
    lattice.moments(&st.probs, active, &mut st.eta, fisher)
}

/// Solves `G d = g` by Cholesky, adding a growing ridge when `G` is
/// numerically singular.
fn solve_spd(g: &DMatrix<f64>, rhs: &[f64]) -> Option<Vec<f64>> {
    let n = rhs.len();
    if n == 0 {
        return Some(Vec::new());
    }
    let b = DVector::from_column_slice(rhs);
    let scale = (0..n).map(|i| g[(i, i)].abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let mut ridge = 0.0;
    for _ in 0..12 {
        let mut m = g.clone();
        for i in 0..n {
            m[(i, i)] += ridge;
        }
        if let Some(ch) = m.cholesky() {
            let d = ch.solve(&b);
            if d.iter().all(|v| v.is_finite()) {
                return Some(d.iter().copied().collect());
            }
        }
        ridge = if ridge == 0.0 { 1e-14 * scale } else { ridge * 100.0 };
    }
    None
}

/// Fits θ on `domain` over a fixed sample space so that `η = targets` on
/// the surviving parameters.
///
/// `targets[i]` is the desired expectation of `domain.patterns()[i]`. Every
/// member of the domain must be an outcome of `space`.
pub fn fit_to_moments(
    space: SampleSpace,
    domain: &ParameterDomain,
    targets: &[f64],
    cfg: &FitConfig,
) -> Result<(GibbsModel, FitReport)> {
    if let Some(s) = domain.patterns().iter().find(|s| !space.contains(s)) {
        return Err(Error::NotInSampleSpace(s.clone()));
    }
    let incidence = space.incidence(domain.patterns());
    let lattice = SparseLattice::new(&space, &incidence);
    let ascent = ascend(&lattice, domain.patterns(), targets, cfg)?;
    let kept = domain.retain_mask(&ascent.active);
    let values = ascent.theta.iter().zip(&ascent.active).filter(|(_, &k)| k).map(|(&t, _)| t).collect();
    let model = GibbsModel::new(space, ThetaVector::new(kept, values)?)?;
    Ok((model, ascent.report))
}

/// The transductive learner: builds `S = B ∪ unique(D) ∪ {⊥}`, computes η̂
/// on `B` and fits θ.
pub fn fit(d: &TransactionDataset, b: &ParameterDomain, cfg: &FitConfig) -> Result<(GibbsModel, FitReport)> {
    let space = build_sample_space(b, d);
    let targets = empirical_targets(d, b);
    fit_to_moments(space, b, &targets, cfg)
}

/// η̂ on every member of `b`, from exact support counts.
pub fn empirical_targets(d: &TransactionDataset, b: &ParameterDomain) -> Vec<f64> {
    b.patterns().iter().map(|x| d.empirical_eta(x)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::miner::mine_parameter_domain;

    fn worked_example() -> TransactionDataset {
        TransactionDataset::from_counts(vec![
            (Pattern::empty(), 2),
            (Pattern::from([1]), 3),
            (Pattern::from([2]), 1),
            (Pattern::from([1, 2]), 4),
        ])
        .unwrap()
    }

    fn check_worked_mle(step: StepRule) {
        let d = worked_example();
        let b = mine_parameter_domain(&d, 0.45, 2).unwrap();
        let cfg = FitConfig { step, tol: 1e-10, ..FitConfig::default() };
        let (m, report) = fit(&d, &b, &cfg).unwrap();
        assert!(report.converged, "{report:?}");
        assert!(report.removed_parameters.is_empty());
        for (got, want) in m.probs().iter().zip([0.15, 0.35, 0.15, 0.35]) {
            assert!((got - want).abs() < 1e-9, "{got} vs {want}");
        }
        assert!((m.theta().get(&Pattern::from([1])).unwrap() - math::ln(7.0 / 3.0)).abs() < 1e-8);
        assert!(m.theta().get(&Pattern::from([2])).unwrap().abs() < 1e-8);
        assert!((m.log_partition() + math::ln(0.15)).abs() < 1e-8);
    }

    #[test]
    fn worked_example_natural() {
        check_worked_mle(StepRule::Natural);
    }

    #[test]
    fn worked_example_gradient() {
        check_worked_mle(StepRule::Gradient);
    }

    #[test]
    fn empty_domain_is_uniform() {
        let d = worked_example();
        let (m, report) = fit(&d, &ParameterDomain::empty(), &FitConfig::default()).unwrap();
        assert_eq!(report.iterations, 0);
        assert!(report.converged);
        assert!(!report.all_removed);
        assert!((m.log_partition() - math::ln(4.0)).abs() < 1e-15);
    }

    #[test]
    fn degenerate_pair_loses_one_parameter() {
        // η̂({1}) = η̂({1,2}) = 0.4 forces p({1}) = 0 on S = 2^{1,2}.
        let d = TransactionDataset::from_counts(vec![
            (Pattern::empty(), 3),
            (Pattern::from([2]), 3),
            (Pattern::from([1, 2]), 4),
        ])
        .unwrap();
        let b = ParameterDomain::from_patterns([Pattern::from([1]), Pattern::from([1, 2])]).unwrap();
        let space = SampleSpace::power_set(3).unwrap();
        let space = SampleSpace::from_outcomes(space.outcomes().iter().filter(|x| !x.contains(0)).cloned());
        assert_eq!(space.len(), 4);
        let targets = empirical_targets(&d, &b);
        assert_eq!(targets, vec![0.4, 0.4]);
        let (m, report) = fit_to_moments(space, &b, &targets, &FitConfig::default()).unwrap();
        assert_eq!(report.removed_parameters.len(), 1, "{report:?}");
        assert!(report.converged);
        assert_eq!(m.domain().len(), 1);
        assert!(m.probs().iter().all(|p| p.is_finite() && *p > 0.0));
        let kept = &m.domain().patterns()[0];
        assert!((m.eta(kept) - 0.4).abs() < 1e-6);
    }

    #[test]
    fn zero_support_parameter_is_dropped() {
        let d = TransactionDataset::from_transactions([Pattern::from([0]), Pattern::from([1])]).unwrap();
        let b = mine_parameter_domain(&d, 0.0, 2).unwrap();
        assert_eq!(b.len(), 3);
        let (m, report) = fit(&d, &b, &FitConfig::default()).unwrap();
        assert_eq!(report.removed_parameters, vec![Pattern::from([0, 1])]);
        assert!(report.converged);
        assert!(!m.domain().contains(&Pattern::from([0, 1])));
    }

    #[test]
    fn universal_item_is_dropped_and_flagged() {
        let d = TransactionDataset::from_transactions([Pattern::from([0]), Pattern::from([0])]).unwrap();
        let b = mine_parameter_domain(&d, 1.0, 1).unwrap();
        let (m, report) = fit(&d, &b, &FitConfig::default()).unwrap();
        assert!(report.all_removed);
        assert!(m.domain().is_empty());
        assert!((m.log_partition() - math::ln(2.0)).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_config() {
        let d = worked_example();
        let cfg = FitConfig { epsilon: 0.0, ..FitConfig::default() };
        assert!(matches!(fit(&d, &ParameterDomain::empty(), &cfg), Err(Error::InvalidConfig(_))));
    }
}
