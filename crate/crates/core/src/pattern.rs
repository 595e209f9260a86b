//! Patterns (itemsets), transaction datasets and empirical statistics.
//!
//! A binary configuration over the variables `V` is represented by the set of
//! variables that are on. The empty pattern is the all-zeros configuration ⊥.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use crate::error::{Error, Result};

/// Variable identifier.
pub type Item = u32;

/// A canonical itemset: strictly increasing variable identifiers.
///
/// `Ord` is lexicographic on the identifier sequence. Use
/// [`Pattern::graded_cmp`] for the cardinality-first order used by sample
/// spaces and parameter sweeps.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Pattern(Vec<Item>);

impl Pattern {
    /// The empty pattern ⊥.
    pub const fn empty() -> Self {
        Pattern(Vec::new())
    }

    /// Builds a pattern from arbitrary identifiers, sorting and collapsing
    /// duplicates.
    pub fn new<I: IntoIterator<Item = Item>>(items: I) -> Self {
        let mut v: Vec<Item> = items.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        Pattern(v)
    }

    /// Wraps an already canonical sequence. Returns `None` when the sequence
    /// is not strictly increasing.
    pub fn from_sorted(items: Vec<Item>) -> Option<Self> {
        items.windows(2).all(|w| w[0] < w[1]).then_some(Pattern(items))
    }

    pub fn items(&self) -> &[Item] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, item: Item) -> bool {
        self.0.binary_search(&item).is_ok()
    }

    pub fn max_item(&self) -> Option<Item> {
        self.0.last().copied()
    }

    /// `self ⊆ other`, by a merge over both sorted sequences.
    pub fn is_subset_of(&self, other: &Pattern) -> bool {
        if self.0.len() > other.0.len() {
            return false;
        }
        let mut rest = other.0.iter();
        'outer: for a in &self.0 {
            for b in rest.by_ref() {
                match b.cmp(a) {
                    Ordering::Less => continue,
                    Ordering::Equal => continue 'outer,
                    Ordering::Greater => return false,
                }
            }
            return false;
        }
        true
    }

    pub fn union(&self, other: &Pattern) -> Pattern {
        let mut out = Vec::with_capacity(self.0.len() + other.0.len());
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.0.len() {
            match self.0[i].cmp(&other.0[j]) {
                Ordering::Less => {
                    out.push(self.0[i]);
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(other.0[j]);
                    j += 1;
                }
                Ordering::Equal => {
                    out.push(self.0[i]);
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.0[i..]);
        out.extend_from_slice(&other.0[j..]);
        Pattern(out)
    }

    /// Cardinality first, then lexicographic.
    pub fn graded_cmp(&self, other: &Pattern) -> Ordering {
        self.0.len().cmp(&other.0.len()).then_with(|| self.0.cmp(&other.0))
    }

    /// Bitmask with bit `i` set for every variable `i`. Requires all
    /// identifiers below 64.
    pub(crate) fn to_mask(&self) -> u64 {
        self.0.iter().fold(0u64, |m, &i| m | (1u64 << i))
    }

    pub(crate) fn from_mask(mask: u64) -> Pattern {
        Pattern((0..64).filter(|i| mask & (1u64 << i) != 0).collect())
    }
}

impl fmt::Debug for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, item) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{item}")?;
        }
        f.write_str("}")
    }
}

impl FromIterator<Item> for Pattern {
    fn from_iter<I: IntoIterator<Item = Item>>(iter: I) -> Self {
        Pattern::new(iter)
    }
}

impl<const N: usize> From<[Item; N]> for Pattern {
    fn from(items: [Item; N]) -> Self {
        Pattern::new(items)
    }
}

/// ζ(s, x): 1 iff `s ⊆ x`.
pub fn zeta(s: &Pattern, x: &Pattern) -> u8 {
    u8::from(s.is_subset_of(x))
}

/// A multiset of transactions over the variables `0..n_variables`.
///
/// Always holds at least one transaction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransactionDataset {
    entries: BTreeMap<Pattern, u64>,
    n_variables: usize,
    total: u64,
}

impl TransactionDataset {
    /// One entry per occurrence. The universe is `0..=max identifier`.
    pub fn from_transactions<I: IntoIterator<Item = Pattern>>(transactions: I) -> Result<Self> {
        Self::from_counts(transactions.into_iter().map(|t| (t, 1)))
    }

    /// Aggregates `(pattern, multiplicity)` pairs; zero multiplicities are
    /// dropped.
    pub fn from_counts<I: IntoIterator<Item = (Pattern, u64)>>(counts: I) -> Result<Self> {
        let mut entries = BTreeMap::new();
        let mut total = 0u64;
        let mut n_variables = 0usize;
        for (pattern, count) in counts {
            if count == 0 {
                continue;
            }
            if let Some(max) = pattern.max_item() {
                n_variables = n_variables.max(max as usize + 1);
            }
            total += count;
            *entries.entry(pattern).or_insert(0) += count;
        }
        if total == 0 {
            return Err(Error::EmptyDataset);
        }
        Ok(TransactionDataset { entries, n_variables, total })
    }

    /// Widens the variable universe. Added variables never occur in the data.
    pub fn with_n_variables(mut self, n_variables: usize) -> Result<Self> {
        if n_variables < self.n_variables {
            let (pattern, item) = self
                .entries
                .keys()
                .find_map(|p| p.max_item().filter(|&m| m as usize >= n_variables).map(|m| (p.clone(), m)))
                .expect("some pattern uses a variable above the requested universe");
            return Err(Error::VariableOutOfRange { pattern, item, n_variables });
        }
        self.n_variables = n_variables;
        Ok(self)
    }

    /// `n = |V|`.
    pub fn n_variables(&self) -> usize {
        self.n_variables
    }

    /// `N = |D|`, counting multiplicity.
    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn n_unique(&self) -> usize {
        self.entries.len()
    }

    /// Unique patterns with their multiplicities, in lexicographic order.
    pub fn entries(&self) -> impl ExactSizeIterator<Item = (&Pattern, u64)> + '_ {
        self.entries.iter().map(|(p, &c)| (p, c))
    }

    pub fn unique_patterns(&self) -> impl ExactSizeIterator<Item = &Pattern> + '_ {
        self.entries.keys()
    }

    pub fn multiplicity(&self, x: &Pattern) -> u64 {
        self.entries.get(x).copied().unwrap_or(0)
    }

    /// Number of transactions (with multiplicity) containing `x`.
    pub fn support_count(&self, x: &Pattern) -> u64 {
        if x.is_empty() {
            return self.total;
        }
        self.entries
            .iter()
            .filter(|(t, _)| x.is_subset_of(t))
            .map(|(_, &c)| c)
            .sum()
    }

    /// η̂(x): the fraction of transactions that contain `x`.
    pub fn empirical_eta(&self, x: &Pattern) -> f64 {
        self.support_count(x) as f64 / self.total as f64
    }

    pub fn empirical_distribution(&self) -> EmpiricalDistribution {
        EmpiricalDistribution { counts: self.entries.clone(), total: self.total }
    }
}

/// p̂(x) = multiplicity(x) / N over the unique patterns of a dataset.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EmpiricalDistribution {
    counts: BTreeMap<Pattern, u64>,
    total: u64,
}

impl EmpiricalDistribution {
    pub fn prob(&self, x: &Pattern) -> f64 {
        self.counts.get(x).map_or(0.0, |&c| c as f64 / self.total as f64)
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn support(&self) -> impl ExactSizeIterator<Item = &Pattern> + '_ {
        self.counts.keys()
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = (&Pattern, f64)> + '_ {
        let n = self.total as f64;
        self.counts.iter().map(move |(p, &c)| (p, c as f64 / n))
    }
}
