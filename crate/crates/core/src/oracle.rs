//! Brute-force evaluators used as ground truth.
//!
//! Nothing here reuses the backward recursions of the production modules:
//! stopping times are enumerated by explicit stop/continue choices, measures
//! by explicit kernel selections, and conditional expectations are formed
//! from top-down path probabilities.

use crate::error::{Error, Result};
use crate::measure::{Family, Measure};
use crate::scalar::Scalar;
use crate::tree::{AdaptedProcess, EventTree, NodeId, RandomVariable, StoppingTime};

/// Default cap on the size of any single enumeration.
pub const DEFAULT_BUDGET: u128 = 1_000_000;

/// Budget from `SNELL_BUDGET`, falling back to [`DEFAULT_BUDGET`].
pub fn budget_from_env() -> u128 {
    std::env::var("SNELL_BUDGET")
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_BUDGET)
}

/// Number of stopping times `>= rho`, from the recursion
/// `count(leaf) = 1`, `count(n) = 1 + prod count(child)`.
pub fn count_stopping_times<S: Scalar>(tree: &EventTree<S>, rho: &StoppingTime) -> Result<u128> {
    tree.check_same(rho.fingerprint())?;
    let mut count = vec![1u128; tree.len()];
    for n in tree.nodes().rev() {
        if !tree.is_leaf(n) {
            let prod = tree
                .children(n)
                .iter()
                .fold(1u128, |acc, c| acc.saturating_mul(count[c.index()]));
            count[n.index()] = prod.saturating_add(1);
        }
    }
    Ok(rho
        .region()
        .iter()
        .fold(1u128, |acc, n| acc.saturating_mul(count[n.index()])))
}

/// Every stopping time `>= rho`, each exactly once, in canonical order.
pub fn enumerate_stopping_times<S: Scalar>(
    tree: &EventTree<S>,
    rho: &StoppingTime,
    budget: u128,
) -> Result<Vec<StoppingTime>> {
    let count = count_stopping_times(tree, rho)?;
    if count > budget {
        return Err(Error::EnumerationTooLarge { count, budget });
    }
    let mut regions: Vec<Vec<NodeId>> = vec![Vec::new()];
    for &n in rho.region() {
        let below = subtree_regions(tree, n);
        regions = cartesian(&regions, &below);
    }
    Ok(regions
        .into_iter()
        .map(|r| StoppingTime::from_region_unchecked(tree.fingerprint(), r))
        .collect())
}

/// Stopping regions of the subtree rooted at `n`: stop at `n`, or continue
/// and stop independently inside every child's subtree.
fn subtree_regions<S: Scalar>(tree: &EventTree<S>, n: NodeId) -> Vec<Vec<NodeId>> {
    let mut out = vec![vec![n]];
    if tree.is_leaf(n) {
        return out;
    }
    let mut product: Vec<Vec<NodeId>> = vec![Vec::new()];
    for &c in tree.children(n) {
        product = cartesian(&product, &subtree_regions(tree, c));
    }
    out.extend(product);
    out
}

fn cartesian(left: &[Vec<NodeId>], right: &[Vec<NodeId>]) -> Vec<Vec<NodeId>> {
    let mut out = Vec::with_capacity(left.len() * right.len());
    for a in left {
        for b in right {
            let mut v = a.clone();
            v.extend_from_slice(b);
            out.push(v);
        }
    }
    out
}

/// Probability under `q` of reaching each node of the subtree rooted at `from`,
/// given that `from` has been reached. Zero outside the subtree.
pub fn path_probabilities<S: Scalar>(tree: &EventTree<S>, q: &Measure<S>, from: NodeId) -> Vec<S> {
    let mut prob = vec![S::zero(); tree.len()];
    prob[from.index()] = S::one();
    let mut stack = vec![from];
    while let Some(n) = stack.pop() {
        for (slot, &c) in tree.children(n).iter().enumerate() {
            prob[c.index()] = prob[n.index()].clone() * q.kernel(n)[slot].clone();
            stack.push(c);
        }
    }
    prob
}

/// `E_Q[X | F_tau]` by summing path probabilities inside each region subtree.
pub fn direct_conditional_expectation<S: Scalar>(
    tree: &EventTree<S>,
    q: &Measure<S>,
    x: &RandomVariable<S>,
    tau: &StoppingTime,
) -> Result<RandomVariable<S>> {
    let x = x.on_leaves(tree)?;
    let mut values = Vec::with_capacity(tau.region().len());
    for &n in tau.region() {
        let prob = path_probabilities(tree, q, n);
        let v = x
            .iter()
            .fold(S::zero(), |acc, (leaf, v)| acc + prob[leaf.index()].clone() * v.clone());
        values.push(v);
    }
    RandomVariable::new(tau.clone(), values)
}

/// Node-wise minimum over members of `E_Q[X | F_tau]`.
pub fn direct_conditional_inf<S: Scalar, F: Family<S>>(
    tree: &EventTree<S>,
    family: &F,
    x: &RandomVariable<S>,
    tau: &StoppingTime,
    budget: u128,
) -> Result<RandomVariable<S>> {
    tree.check_same(family.fingerprint())?;
    let mut best: Option<Vec<S>> = None;
    for q in family.members(budget)? {
        let v = direct_conditional_expectation(tree, &q, x, tau)?;
        best = Some(match best {
            None => v.values().to_vec(),
            Some(b) => b
                .into_iter()
                .zip(v.values())
                .map(|(a, c)| a.min_of(c.clone()))
                .collect(),
        });
    }
    RandomVariable::new(tau.clone(), best.expect("families are nonempty"))
}

/// Row and column extremes of the table `E_Q[H_sigma | reached n]` over the
/// members `Q` seen from `n` and the stopping times `sigma` of the subtree
/// rooted at `n`. The table is streamed one member at a time and never stored.
#[derive(Clone, Debug)]
pub struct LocalTable<S> {
    pub node: NodeId,
    pub stopping_regions: Vec<Vec<NodeId>>,
    /// For each member, its best value and the maximizing region.
    pub row_max: Vec<(S, usize)>,
    /// For each region, its worst value and the minimizing member.
    pub col_min: Vec<(S, usize)>,
}

impl<S: Scalar> LocalTable<S> {
    pub fn build<F: Family<S>>(
        tree: &EventTree<S>,
        family: &F,
        h: &AdaptedProcess<S>,
        n: NodeId,
        budget: u128,
    ) -> Result<Self> {
        tree.check_same(family.fingerprint())?;
        tree.check_same(h.fingerprint())?;
        let count = count_stopping_times(tree, &subtree_probe(tree, n))?;
        if count > budget {
            return Err(Error::EnumerationTooLarge { count, budget });
        }
        let stopping_regions = subtree_regions(tree, n);
        let mut row_max = Vec::new();
        let mut col_min: Vec<Option<(S, usize)>> = vec![None; stopping_regions.len()];
        for (m, q) in family.local_members(tree, n, budget)?.iter().enumerate() {
            let prob = path_probabilities(tree, q, n);
            let mut best: Option<(S, usize)> = None;
            for (s, region) in stopping_regions.iter().enumerate() {
                let v = region
                    .iter()
                    .fold(S::zero(), |acc, k| acc + prob[k.index()].clone() * h.value(*k).clone());
                if best.as_ref().is_none_or(|(b, _)| v > *b) {
                    best = Some((v.clone(), s));
                }
                if col_min[s].as_ref().is_none_or(|(b, _)| v < *b) {
                    col_min[s] = Some((v, m));
                }
            }
            row_max.push(best.expect("every subtree has a stopping region"));
        }
        Ok(LocalTable {
            node: n,
            stopping_regions,
            row_max,
            col_min: col_min.into_iter().map(|c| c.expect("nonempty family")).collect(),
        })
    }

    /// `min_Q max_sigma`, with the minimizing member and its maximizing region.
    pub fn min_max(&self) -> (S, usize, usize) {
        let (m, (v, s)) = self
            .row_max
            .iter()
            .enumerate()
            .reduce(|a, b| if b.1 .0 < a.1 .0 { b } else { a })
            .expect("nonempty family");
        (v.clone(), m, *s)
    }

    /// `max_sigma min_Q`, with the maximizing region and its minimizing member.
    pub fn max_min(&self) -> (S, usize, usize) {
        let (s, (v, m)) = self
            .col_min
            .iter()
            .enumerate()
            .reduce(|a, b| if b.1 .0 > a.1 .0 { b } else { a })
            .expect("nonempty table");
        (v.clone(), s, *m)
    }
}


/// Single-node region, only meaningful to [`count_stopping_times`], which
/// then counts the stopping times of `n`'s subtree.
fn subtree_probe<S: Scalar>(tree: &EventTree<S>, n: NodeId) -> StoppingTime {
    StoppingTime::from_region_unchecked(tree.fingerprint(), vec![n])
}

/// `ess inf_Q ess sup_{sigma >= tau} E_Q[H_sigma | F_tau]`, node-wise on
/// `tau`'s region.
pub fn direct_lower_snell<S: Scalar, F: Family<S>>(
    tree: &EventTree<S>,
    family: &F,
    h: &AdaptedProcess<S>,
    tau: &StoppingTime,
    budget: u128,
) -> Result<RandomVariable<S>> {
    tree.check_same(tau.fingerprint())?;
    let mut values = Vec::with_capacity(tau.region().len());
    for &n in tau.region() {
        values.push(LocalTable::build(tree, family, h, n, budget)?.min_max().0);
    }
    RandomVariable::new(tau.clone(), values)
}

/// `ess sup_{sigma >= tau} ess inf_Q E_Q[H_sigma | F_tau]`, node-wise.
pub fn direct_maximin<S: Scalar, F: Family<S>>(
    tree: &EventTree<S>,
    family: &F,
    h: &AdaptedProcess<S>,
    tau: &StoppingTime,
    budget: u128,
) -> Result<RandomVariable<S>> {
    tree.check_same(tau.fingerprint())?;
    let mut values = Vec::with_capacity(tau.region().len());
    for &n in tau.region() {
        values.push(LocalTable::build(tree, family, h, n, budget)?.max_min().0);
    }
    RandomVariable::new(tau.clone(), values)
}

/// `ess sup_{sigma >= tau} E_Q[H_sigma | F_tau]` for a single measure.
pub fn direct_snell<S: Scalar>(
    tree: &EventTree<S>,
    q: &Measure<S>,
    h: &AdaptedProcess<S>,
    tau: &StoppingTime,
    budget: u128,
) -> Result<RandomVariable<S>> {
    let single = crate::measure::ExplicitFamily::new(vec![q.clone()])?;
    direct_lower_snell(tree, &single, h, tau, budget)
}

/// The full table `E_Q[H_tau]` over all stopping times and all members,
/// tau-major, both in canonical order.
#[derive(Clone, Debug)]
pub struct ValueTable<S> {
    pub stopping_times: Vec<StoppingTime>,
    pub members: Vec<Measure<S>>,
    /// `values[t][m]`.
    pub values: Vec<Vec<S>>,
}

impl<S: Scalar> ValueTable<S> {
    pub fn build<F: Family<S>>(
        tree: &EventTree<S>,
        family: &F,
        h: &AdaptedProcess<S>,
        budget: u128,
    ) -> Result<Self> {
        tree.check_same(h.fingerprint())?;
        let root = StoppingTime::at_root(tree);
        let stopping_times = enumerate_stopping_times(tree, &root, budget)?;
        let members = family.members(budget)?;
        let probs: Vec<Vec<S>> = members
            .iter()
            .map(|q| path_probabilities(tree, q, tree.root()))
            .collect();
        let values = stopping_times
            .iter()
            .map(|t| {
                probs
                    .iter()
                    .map(|p| {
                        t.region().iter().fold(S::zero(), |acc, m| {
                            acc + p[m.index()].clone() * h.value(*m).clone()
                        })
                    })
                    .collect()
            })
            .collect();
        Ok(ValueTable {
            stopping_times,
            members,
            values,
        })
    }

    /// `sup_tau inf_Q E_Q[H_tau]` with the optimizing stopping-time index.
    pub fn sup_inf(&self) -> (S, usize) {
        let mut best: Option<(S, usize)> = None;
        for (t, row) in self.values.iter().enumerate() {
            let m = row.iter().cloned().reduce(S::min_of).expect("nonempty");
            if best.as_ref().is_none_or(|(b, _)| m > *b) {
                best = Some((m, t));
            }
        }
        best.expect("nonempty")
    }

    /// `inf_Q sup_tau E_Q[H_tau]` with the optimizing member index.
    pub fn inf_sup(&self) -> (S, usize) {
        let mut best: Option<(S, usize)> = None;
        for m in 0..self.members.len() {
            let s = self
                .values
                .iter()
                .map(|row| row[m].clone())
                .reduce(S::max_of)
                .expect("nonempty");
            if best.as_ref().is_none_or(|(b, _)| s < *b) {
                best = Some((s, m));
            }
        }
        best.expect("nonempty")
    }
}
