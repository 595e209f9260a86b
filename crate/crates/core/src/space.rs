//! The reduced sample space `S = B ∪ unique(D) ∪ {⊥}` and its incidence
//! structure.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::miner::ParameterDomain;
use crate::pattern::{Item, Pattern, TransactionDataset};

/// Ordered set of outcomes. ⊥ is always present and always at index 0
/// (outcomes are kept in graded order).
#[derive(Clone, Debug, PartialEq)]
pub struct SampleSpace {
    outcomes: Vec<Pattern>,
    index: BTreeMap<Pattern, usize>,
}

impl SampleSpace {
    /// Any collection of outcomes; ⊥ is added and duplicates collapse.
    pub fn from_outcomes<I: IntoIterator<Item = Pattern>>(outcomes: I) -> Self {
        let mut outcomes: Vec<Pattern> = outcomes.into_iter().collect();
        outcomes.push(Pattern::empty());
        outcomes.sort_by(Pattern::graded_cmp);
        outcomes.dedup();
        let index = outcomes.iter().enumerate().map(|(i, p)| (p.clone(), i)).collect();
        SampleSpace { outcomes, index }
    }

    /// All of `2^V` for `V = {0, .., n-1}`.
    pub fn power_set(n: usize) -> Result<Self> {
        const MAX: usize = 20;
        if n > MAX {
            return Err(Error::TooManyVariables { n, max: MAX, what: "an enumerated power set" });
        }
        Ok(Self::from_outcomes((0u64..1 << n).map(Pattern::from_mask)))
    }

    pub fn outcomes(&self) -> &[Pattern] {
        &self.outcomes
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    /// Never true: ⊥ is always an outcome.
    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    pub fn index_of(&self, x: &Pattern) -> Option<usize> {
        self.index.get(x).copied()
    }

    pub fn contains(&self, x: &Pattern) -> bool {
        self.index.contains_key(x)
    }

    /// Per-variable sorted lists of the outcomes that contain it.
    fn tidlists(&self) -> BTreeMap<Item, Vec<u32>> {
        let mut lists: BTreeMap<Item, Vec<u32>> = BTreeMap::new();
        for (i, x) in self.outcomes.iter().enumerate() {
            for &item in x.items() {
                lists.entry(item).or_default().push(i as u32);
            }
        }
        lists
    }

    /// Outcome indices `{x ∈ S : x ⊇ s}` for every `s` in `patterns`, and the
    /// reverse map.
    pub(crate) fn incidence(&self, patterns: &[Pattern]) -> Incidence {
        let lists = self.tidlists();
        let supersets: Vec<Vec<u32>> = patterns
            .iter()
            .map(|s| {
                let mut parts: Vec<&Vec<u32>> = Vec::with_capacity(s.len());
                for item in s.items() {
                    match lists.get(item) {
                        Some(l) => parts.push(l),
                        None => return Vec::new(),
                    }
                }
                parts.sort_by_key(|l| l.len());
                let mut acc = match parts.first() {
                    Some(first) => (*first).clone(),
                    None => (0..self.len() as u32).collect(),
                };
                for l in &parts[1..] {
                    acc.retain(|t| l.binary_search(t).is_ok());
                }
                acc
            })
            .collect();
        let mut contained = alloc::vec![Vec::new(); self.len()];
        for (a, sup) in supersets.iter().enumerate() {
            for &x in sup {
                contained[x as usize].push(a as u32);
            }
        }
        Incidence { supersets, contained }
    }
}

/// Incidence between parameters and outcomes.
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct Incidence {
    /// For parameter `a`, outcomes containing it (ascending).
    pub supersets: Vec<Vec<u32>>,
    /// For outcome `x`, parameters it contains (ascending).
    pub contained: Vec<Vec<u32>>,
}

/// `S = B ∪ unique(D) ∪ {⊥}`.
pub fn build_sample_space(b: &ParameterDomain, d: &TransactionDataset) -> SampleSpace {
    SampleSpace::from_outcomes(b.patterns().iter().cloned().chain(d.unique_patterns().cloned()))
}
