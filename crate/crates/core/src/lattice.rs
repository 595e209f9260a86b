//! Outcome lattices the learner can run on: a sparse sample space with
//! precomputed incidence lists, or the dense power set `2^V` indexed by
//! bitmask.
//!
//! Every method reports how many outcome probabilities (or log-weights) it
//! touched, which is what the fit report counts as evaluations.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::pattern::Pattern;
use crate::space::{Incidence, SampleSpace};

pub(crate) trait Lattice {
    fn n_outcomes(&self) -> usize;

    fn n_params(&self) -> usize;

    /// `w(x) += mu` for every outcome `x ⊇ param`.
    fn shift(&self, param: usize, mu: f64, log_w: &mut [f64]) -> u64;

    /// Fills `eta[a]` for every parameter and, when asked, the covariance
    /// `η(s ∪ u) − η(s)η(u)` over the `active` parameters in that order.
    fn moments(&self, probs: &[f64], active: &[usize], eta: &mut [f64], fisher: Option<&mut DMatrix<f64>>) -> u64;
}

pub(crate) struct SparseLattice<'a> {
    n_outcomes: usize,
    incidence: &'a Incidence,
}

impl<'a> SparseLattice<'a> {
    pub fn new(space: &SampleSpace, incidence: &'a Incidence) -> Self {
        SparseLattice { n_outcomes: space.len(), incidence }
    }
}

impl Lattice for SparseLattice<'_> {
    fn n_outcomes(&self) -> usize {
        self.n_outcomes
    }

    fn n_params(&self) -> usize {
        self.incidence.supersets.len()
    }

    fn shift(&self, param: usize, mu: f64, log_w: &mut [f64]) -> u64 {
        let sup = &self.incidence.supersets[param];
        for &x in sup {
            log_w[x as usize] += mu;
        }
        sup.len() as u64
    }

    fn moments(&self, probs: &[f64], active: &[usize], eta: &mut [f64], fisher: Option<&mut DMatrix<f64>>) -> u64 {
        eta.iter_mut().for_each(|e| *e = 0.0);
        let contained = &self.incidence.contained;
        match fisher {
            None => {
                for (x, &p) in probs.iter().enumerate() {
                    for &a in &contained[x] {
                        eta[a as usize] += p;
                    }
                }
            }
            Some(g) => {
                let m = active.len();
                let mut position = vec![usize::MAX; self.n_params()];
                for (i, &a) in active.iter().enumerate() {
                    position[a] = i;
                }
                let mut second = DMatrix::<f64>::zeros(m, m);
                let mut here: Vec<usize> = Vec::new();
                for (x, &p) in probs.iter().enumerate() {
                    here.clear();
                    for &a in &contained[x] {
                        eta[a as usize] += p;
                        let i = position[a as usize];
                        if i != usize::MAX {
                            here.push(i);
                        }
                    }
                    for (k, &i) in here.iter().enumerate() {
                        for &j in &here[k..] {
                            second[(i, j)] += p;
                        }
                    }
                }
                *g = DMatrix::from_fn(m, m, |i, j| {
                    let joint = if i <= j { second[(i, j)] } else { second[(j, i)] };
                    joint - eta[active[i]] * eta[active[j]]
                });
            }
        }
        probs.len() as u64
    }
}

/// The power set over `n ≤ 25` variables; outcome `x` is the bitmask index.
pub(crate) struct DenseLattice {
    n: usize,
    masks: Vec<u32>,
}

impl DenseLattice {
    pub fn new(n: usize, params: &[Pattern]) -> Self {
        let masks = params.iter().map(|p| p.to_mask() as u32).collect();
        DenseLattice { n, masks }
    }

    fn full(&self) -> u32 {
        ((1u64 << self.n) - 1) as u32
    }

    /// Superset sums: `out[s] = Σ_{x ⊇ s} values[x]`.
    pub fn superset_sums(&self, values: &[f64]) -> Vec<f64> {
        let mut out = values.to_vec();
        for bit in 0..self.n {
            let b = 1usize << bit;
            for x in 0..out.len() {
                if x & b == 0 {
                    out[x] += out[x | b];
                }
            }
        }
        out
    }
}

impl Lattice for DenseLattice {
    fn n_outcomes(&self) -> usize {
        1usize << self.n
    }

    fn n_params(&self) -> usize {
        self.masks.len()
    }

    fn shift(&self, param: usize, mu: f64, log_w: &mut [f64]) -> u64 {
        let s = self.masks[param];
        let free = self.full() & !s;
        let mut m = free;
        let mut touched = 0;
        loop {
            log_w[(s | m) as usize] += mu;
            touched += 1;
            if m == 0 {
                break;
            }
            m = (m - 1) & free;
        }
        touched
    }

    fn moments(&self, probs: &[f64], active: &[usize], eta: &mut [f64], fisher: Option<&mut DMatrix<f64>>) -> u64 {
        let sums = self.superset_sums(probs);
        for (e, &s) in eta.iter_mut().zip(&self.masks) {
            *e = sums[s as usize];
        }
        if let Some(g) = fisher {
            let m = active.len();
            *g = DMatrix::from_fn(m, m, |i, j| {
                let (s, u) = (self.masks[active[i]], self.masks[active[j]]);
                sums[(s | u) as usize] - eta[active[i]] * eta[active[j]]
            });
        }
        probs.len() as u64
    }
}
