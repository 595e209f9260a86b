//! Parameter domain selection: `B = {x ≠ ∅ : η̂(x) ≥ σ, |x| ≤ k}`.
//!
//! Frequent itemsets are enumerated depth first over vertical tid-lists
//! (Eclat). Supports are exact integer counts and the threshold is applied as
//! `count ≥ ⌈σN⌉`.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::pattern::{Item, Pattern, TransactionDataset};

/// Upper bound on `|B|` unless a caller asks for another one.
pub const DEFAULT_DOMAIN_LIMIT: usize = 10_000_000;

/// Largest universe [`brute_force_domain`] will enumerate.
pub const BRUTE_FORCE_MAX_VARIABLES: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MiningParams {
    pub sigma: f64,
    pub k: usize,
}

/// The set `B` of patterns that carry a parameter θ.
///
/// Members are non-empty and kept in graded order (cardinality, then
/// lexicographic), which is also the sweep order of the learner.
#[derive(Clone, Debug, PartialEq)]
pub struct ParameterDomain {
    patterns: Vec<Pattern>,
    mining: Option<MiningParams>,
}

impl ParameterDomain {
    /// A user-specified domain. Duplicates are collapsed.
    pub fn from_patterns<I: IntoIterator<Item = Pattern>>(patterns: I) -> Result<Self> {
        let mut patterns: Vec<Pattern> = patterns.into_iter().collect();
        if patterns.iter().any(Pattern::is_empty) {
            return Err(Error::EmptyPatternInDomain);
        }
        patterns.sort_by(Pattern::graded_cmp);
        patterns.dedup();
        Ok(ParameterDomain { patterns, mining: None })
    }

    pub fn empty() -> Self {
        ParameterDomain { patterns: Vec::new(), mining: None }
    }

    fn mined(mut patterns: Vec<Pattern>, params: MiningParams) -> Self {
        patterns.sort_by(Pattern::graded_cmp);
        ParameterDomain { patterns, mining: Some(params) }
    }

    /// Members in graded order.
    pub fn patterns(&self) -> &[Pattern] {
        &self.patterns
    }

    /// Members in plain lexicographic order.
    pub fn lexicographic(&self) -> Vec<&Pattern> {
        let mut v: Vec<&Pattern> = self.patterns.iter().collect();
        v.sort();
        v
    }

    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }

    pub fn index_of(&self, x: &Pattern) -> Option<usize> {
        self.patterns.binary_search_by(|p| p.graded_cmp(x)).ok()
    }

    pub fn contains(&self, x: &Pattern) -> bool {
        self.index_of(x).is_some()
    }

    /// `(σ, k)` when the domain came from mining.
    pub fn mining(&self) -> Option<MiningParams> {
        self.mining
    }

    /// Keeps the members whose flag is set.
    pub fn retain_mask(&self, keep: &[bool]) -> ParameterDomain {
        let patterns = self
            .patterns
            .iter()
            .zip(keep)
            .filter(|(_, &k)| k)
            .map(|(p, _)| p.clone())
            .collect();
        ParameterDomain { patterns, mining: self.mining }
    }
}

/// `⌈σN⌉`, snapping products that are integral up to rounding (σ = 0.3,
/// N = 10 gives 3, not 4). At least 1 for σ > 0.
pub fn support_threshold(sigma: f64, total: u64) -> u64 {
    let v = sigma * total as f64;
    let r = libm::round(v);
    let c = if (v - r).abs() <= 1e-9 * r.max(1.0) { r } else { libm::ceil(v) };
    (c as u64).max(1)
}

fn check_params(sigma: f64, k: usize) -> Result<()> {
    if !(0.0..=1.0).contains(&sigma) || sigma.is_nan() {
        return Err(Error::InvalidSigma(sigma));
    }
    if k == 0 {
        return Err(Error::InvalidOrder);
    }
    Ok(())
}

/// `Σ_{i=1..k} C(n, i)`, saturating.
pub fn max_domain_size(n: usize, k: usize) -> u128 {
    let mut total: u128 = 0;
    let mut c: u128 = 1;
    for i in 1..=k.min(n) {
        c = c.saturating_mul((n - i + 1) as u128) / i as u128;
        total = total.saturating_add(c);
    }
    total
}

/// Mines `B` with the default size cap.
pub fn mine_parameter_domain(d: &TransactionDataset, sigma: f64, k: usize) -> Result<ParameterDomain> {
    mine_parameter_domain_with_limit(d, sigma, k, DEFAULT_DOMAIN_LIMIT)
}

pub fn mine_parameter_domain_with_limit(
    d: &TransactionDataset,
    sigma: f64,
    k: usize,
    limit: usize,
) -> Result<ParameterDomain> {
    check_params(sigma, k)?;
    let params = MiningParams { sigma, k };
    if sigma == 0.0 {
        return all_patterns_up_to(d.n_variables(), k, limit).map(|p| ParameterDomain::mined(p, params));
    }
    let min_count = support_threshold(sigma, d.total());

    let weights: Vec<u64> = d.entries().map(|(_, c)| c).collect();
    let mut tidlists: BTreeMap<Item, Vec<u32>> = BTreeMap::new();
    for (tid, (t, _)) in d.entries().enumerate() {
        for &item in t.items() {
            tidlists.entry(item).or_default().push(tid as u32);
        }
    }
    let class: Vec<(Item, Vec<u32>)> = tidlists
        .into_iter()
        .filter(|(_, tids)| weight(tids, &weights) >= min_count)
        .collect();

    let mut miner = Eclat { weights: &weights, min_count, k, limit, out: Vec::new(), prefix: Vec::new() };
    miner.expand(&class)?;
    Ok(ParameterDomain::mined(miner.out, params))
}

fn weight(tids: &[u32], weights: &[u64]) -> u64 {
    tids.iter().map(|&t| weights[t as usize]).sum()
}

fn intersect(a: &[u32], b: &[u32]) -> Vec<u32> {
    let mut out = Vec::with_capacity(a.len().min(b.len()));
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            core::cmp::Ordering::Less => i += 1,
            core::cmp::Ordering::Greater => j += 1,
            core::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

struct Eclat<'a> {
    weights: &'a [u64],
    min_count: u64,
    k: usize,
    limit: usize,
    out: Vec<Pattern>,
    prefix: Vec<Item>,
}

impl Eclat<'_> {
    /// `class` holds the frequent one-item extensions of the current prefix,
    /// each with the tid-list of `prefix ∪ {item}`.
    fn expand(&mut self, class: &[(Item, Vec<u32>)]) -> Result<()> {
        for (i, (item, tids)) in class.iter().enumerate() {
            self.prefix.push(*item);
            self.out.push(Pattern::from_sorted(self.prefix.clone()).expect("items ascend"));
            if self.out.len() > self.limit {
                return Err(Error::DomainTooLarge { size: self.out.len() as u128, limit: self.limit });
            }
            if self.prefix.len() < self.k {
                let next: Vec<(Item, Vec<u32>)> = class[i + 1..]
                    .iter()
                    .filter_map(|(other, other_tids)| {
                        let joined = intersect(tids, other_tids);
                        (weight(&joined, self.weights) >= self.min_count).then_some((*other, joined))
                    })
                    .collect();
                if !next.is_empty() {
                    self.expand(&next)?;
                }
            }
            self.prefix.pop();
        }
        Ok(())
    }
}

fn all_patterns_up_to(n: usize, k: usize, limit: usize) -> Result<Vec<Pattern>> {
    let size = max_domain_size(n, k);
    if size > limit as u128 {
        return Err(Error::DomainTooLarge { size, limit });
    }
    let mut out = Vec::with_capacity(size as usize);
    let mut prefix = Vec::new();
    fn rec(start: usize, n: usize, k: usize, prefix: &mut Vec<Item>, out: &mut Vec<Pattern>) {
        for i in start..n {
            prefix.push(i as Item);
            out.push(Pattern::from_sorted(prefix.clone()).expect("items ascend"));
            if prefix.len() < k {
                rec(i + 1, n, k, prefix, out);
            }
            prefix.pop();
        }
    }
    rec(0, n, k, &mut prefix, &mut out);
    Ok(out)
}

/// Exhaustive reference: enumerates every non-empty `x ∈ 2^V` with `|x| ≤ k`
/// and filters on support. Only for `n ≤ 20`.
pub fn brute_force_domain(d: &TransactionDataset, sigma: f64, k: usize) -> Result<ParameterDomain> {
    check_params(sigma, k)?;
    let n = d.n_variables();
    if n > BRUTE_FORCE_MAX_VARIABLES {
        return Err(Error::TooManyVariables { n, max: BRUTE_FORCE_MAX_VARIABLES, what: "brute-force mining" });
    }
    let min_count = if sigma == 0.0 { 0 } else { support_threshold(sigma, d.total()) };
    let rows: Vec<(u64, u64)> = d.entries().map(|(t, c)| (t.to_mask(), c)).collect();
    let mut out = Vec::new();
    for mask in 1u64..(1u64 << n) {
        if mask.count_ones() as usize > k {
            continue;
        }
        let count: u64 = rows.iter().filter(|(t, _)| t & mask == mask).map(|(_, c)| c).sum();
        if count >= min_count {
            out.push(Pattern::from_mask(mask));
        }
    }
    Ok(ParameterDomain::mined(out, MiningParams { sigma, k }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn worked_example() -> TransactionDataset {
        TransactionDataset::from_counts(vec![
            (Pattern::empty(), 2),
            (Pattern::from([1]), 3),
            (Pattern::from([2]), 1),
            (Pattern::from([1, 2]), 4),
        ])
        .unwrap()
    }

    #[test]
    fn worked_example_domain() {
        let b = mine_parameter_domain(&worked_example(), 0.45, 2).unwrap();
        assert_eq!(b.patterns(), &[Pattern::from([1]), Pattern::from([2])]);
        assert_eq!(b, brute_force_domain(&worked_example(), 0.45, 2).unwrap());
        let b = mine_parameter_domain(&worked_example(), 0.4, 2).unwrap();
        assert_eq!(b.len(), 3);
    }

    #[test]
    fn unattainable_threshold_gives_empty_domain() {
        let b = mine_parameter_domain(&worked_example(), 1.0, 2).unwrap();
        assert!(b.is_empty());
        let b = brute_force_domain(&worked_example(), 0.71, 2).unwrap();
        assert!(b.is_empty());
    }

    #[test]
    fn sigma_zero_takes_every_small_pattern() {
        let d = TransactionDataset::from_transactions([Pattern::from([2])]).unwrap();
        let b = brute_force_domain(&d, 0.0, 1).unwrap();
        assert_eq!(b.patterns(), &[Pattern::from([0]), Pattern::from([1]), Pattern::from([2])]);
        assert_eq!(mine_parameter_domain(&d, 0.0, 1).unwrap(), b);
        assert_eq!(mine_parameter_domain(&d, 0.0, 3).unwrap().len(), 7);
    }

    #[test]
    fn threshold_snaps_integral_products() {
        assert_eq!(support_threshold(0.3, 10), 3);
        assert_eq!(support_threshold(0.45, 10), 5);
        assert_eq!(support_threshold(0.01, 8124), 82);
        assert_eq!(support_threshold(1e-12, 10), 1);
    }

    #[test]
    fn invalid_parameters() {
        let d = worked_example();
        assert_eq!(mine_parameter_domain(&d, 1.5, 2), Err(Error::InvalidSigma(1.5)));
        assert_eq!(mine_parameter_domain(&d, 0.5, 0), Err(Error::InvalidOrder));
    }

    #[test]
    fn size_cap_is_enforced() {
        let d = TransactionDataset::from_transactions([Pattern::from([99])]).unwrap();
        assert!(matches!(
            mine_parameter_domain_with_limit(&d, 0.0, 2, 1000),
            Err(Error::DomainTooLarge { size: 5050, limit: 1000 })
        ));
        let d = TransactionDataset::from_transactions([Pattern::new(0..30)]).unwrap();
        assert!(matches!(mine_parameter_domain_with_limit(&d, 0.5, 3, 100), Err(Error::DomainTooLarge { .. })));
    }

    #[test]
    fn domain_size_bound() {
        assert_eq!(max_domain_size(3, 1), 3);
        assert_eq!(max_domain_size(3, 3), 7);
        assert_eq!(max_domain_size(100, 2), 5050);
    }

    #[test]
    fn user_domain_rejects_bottom() {
        assert_eq!(ParameterDomain::from_patterns([Pattern::empty()]), Err(Error::EmptyPatternInDomain));
        let b = ParameterDomain::from_patterns([Pattern::from([1, 2]), Pattern::from([1]), Pattern::from([1])]).unwrap();
        assert_eq!(b.patterns(), &[Pattern::from([1]), Pattern::from([1, 2])]);
        assert_eq!(b.index_of(&Pattern::from([1, 2])), Some(1));
    }
}
