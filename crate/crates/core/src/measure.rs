//! Equivalent measures as transition-kernel assignments, pasting, stable
//! (rectangular) families, and robust conditional expectations.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::oracle;
use crate::scalar::{dot, Scalar, TOLERANCE};
use crate::tree::{normalize_kernel, EventTree, NodeId, RandomVariable, StoppingTime};

/// A probability measure equivalent to the reference measure, given by one
/// strictly positive transition kernel per internal node.
#[derive(Clone, Debug, PartialEq)]
pub struct Measure<S> {
    fingerprint: u64,
    kernels: Vec<Vec<S>>,
}

impl<S: Scalar> Measure<S> {
    /// `kernels[n]` is the kernel over `tree.children(n)`; entries for leaves
    /// must be empty.
    pub fn new(tree: &EventTree<S>, kernels: Vec<Vec<S>>) -> Result<Self> {
        if kernels.len() != tree.len() {
            return Err(Error::InvalidParameter(format!(
                "measure has {} kernels for a tree of {} nodes",
                kernels.len(),
                tree.len()
            )));
        }
        let mut out = Vec::with_capacity(kernels.len());
        for (n, k) in tree.nodes().zip(kernels) {
            out.push(check_kernel(tree, n, k)?);
        }
        Ok(Measure {
            fingerprint: tree.fingerprint(),
            kernels: out,
        })
    }

    pub fn reference(tree: &EventTree<S>) -> Self {
        Measure {
            fingerprint: tree.fingerprint(),
            kernels: tree.nodes().map(|n| tree.reference_kernel(n).to_vec()).collect(),
        }
    }

    pub fn kernel(&self, n: NodeId) -> &[S] {
        &self.kernels[n.index()]
    }

    pub fn kernels(&self) -> &[Vec<S>] {
        &self.kernels
    }

    pub fn fingerprint(&self) -> u64 {
        self.fingerprint
    }

    /// Entry-wise kernel comparison.
    pub fn same_as(&self, other: &Self, tol: f64) -> bool {
        self.fingerprint == other.fingerprint
            && self
                .kernels
                .iter()
                .zip(&other.kernels)
                .all(|(a, b)| kernels_equal(a, b, tol))
    }
}

fn check_kernel<S: Scalar>(tree: &EventTree<S>, n: NodeId, k: Vec<S>) -> Result<Vec<S>> {
    let expected = tree.children(n).len();
    if k.len() != expected {
        return Err(Error::InvalidKernel {
            node: tree.label(n),
            reason: format!("expected {expected} entries, found {}", k.len()),
        });
    }
    if expected == 0 {
        return Ok(k);
    }
    normalize_kernel(tree.label(n), k)
}

pub(crate) fn kernels_equal<S: Scalar>(a: &[S], b: &[S], tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.close_to(y, tol))
}

fn one_step<S: Scalar>(tree: &EventTree<S>, kernel: &[S], n: NodeId, values: &[S]) -> S {
    let child_values: Vec<S> = tree.children(n).iter().map(|c| values[c.index()].clone()).collect();
    dot(kernel, &child_values)
}

/// `E_Q[X]` as the sum over leaves of path probability times value.
pub fn expectation<S: Scalar>(
    tree: &EventTree<S>,
    q: &Measure<S>,
    x: &RandomVariable<S>,
) -> Result<S> {
    tree.check_same(q.fingerprint)?;
    let x = x.on_leaves(tree)?;
    let mut total = S::zero();
    for (&leaf, value) in tree.leaves().iter().zip(x.values()) {
        let mut prob = S::one();
        let mut cur = leaf;
        while let Some(p) = tree.parent(cur) {
            let slot = tree.children(p).iter().position(|c| *c == cur).expect("child");
            prob = prob * q.kernel(p)[slot].clone();
            cur = p;
        }
        total = total + prob * value.clone();
    }
    Ok(total)
}

/// `E_Q[X | F_tau]` by one-step averaging from the leaves back to `tau`.
pub fn conditional_expectation<S: Scalar>(
    tree: &EventTree<S>,
    q: &Measure<S>,
    x: &RandomVariable<S>,
    tau: &StoppingTime,
) -> Result<RandomVariable<S>> {
    tree.check_same(q.fingerprint)?;
    tree.check_same(tau.fingerprint())?;
    let x = x.on_leaves(tree)?;
    let mut g = vec![S::zero(); tree.len()];
    for (leaf, v) in x.iter() {
        g[leaf.index()] = v.clone();
    }
    for n in tree.nodes().rev() {
        if !tree.is_leaf(n) {
            g[n.index()] = one_step(tree, q.kernel(n), n, &g);
        }
    }
    RandomVariable::new(
        tau.clone(),
        tau.region().iter().map(|n| g[n.index()].clone()).collect(),
    )
}

/// Pasting of `q1` and `q2` in `sigma`: `q1`'s kernels strictly before
/// `sigma`, `q2`'s kernels from `sigma` on.
pub fn pasting<S: Scalar>(
    tree: &EventTree<S>,
    q1: &Measure<S>,
    q2: &Measure<S>,
    sigma: &StoppingTime,
) -> Result<Measure<S>> {
    tree.check_same(q1.fingerprint)?;
    tree.check_same(q2.fingerprint)?;
    tree.check_same(sigma.fingerprint())?;
    let mut kernels = q2.kernels.clone();
    for n in sigma.nodes_before(tree) {
        kernels[n.index()] = q1.kernels[n.index()].clone();
    }
    Ok(Measure {
        fingerprint: tree.fingerprint(),
        kernels,
    })
}

/// Outcome of checking `Q3(A) = E_Q1[ Q2[A | F_sigma] ]` over events `A`.
#[derive(Clone, Debug, PartialEq)]
pub struct PastingFormulaCheck {
    pub events_checked: usize,
    /// Every subset of leaves when true; otherwise singletons only (the
    /// formula is linear in the indicator).
    pub exhaustive: bool,
    pub max_abs_diff: f64,
    pub passed: bool,
}

pub fn verify_pasting_formula<S: Scalar>(
    tree: &EventTree<S>,
    q1: &Measure<S>,
    q2: &Measure<S>,
    sigma: &StoppingTime,
    pasted: &Measure<S>,
) -> Result<PastingFormulaCheck> {
    const EXHAUSTIVE_LEAVES: usize = 12;
    let leaves = tree.leaves();
    let exhaustive = leaves.len() <= EXHAUSTIVE_LEAVES;
    let events: Vec<Vec<NodeId>> = if exhaustive {
        (0u32..(1u32 << leaves.len()))
            .map(|mask| {
                leaves
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask & (1 << i) != 0)
                    .map(|(_, l)| *l)
                    .collect()
            })
            .collect()
    } else {
        leaves.iter().map(|l| vec![*l]).collect()
    };
    let mut max_abs_diff = 0.0f64;
    let mut passed = true;
    for event in &events {
        let indicator = RandomVariable::indicator(tree, event);
        let direct = expectation(tree, pasted, &indicator)?;
        let inner = conditional_expectation(tree, q2, &indicator, sigma)?;
        let formula = expectation(tree, q1, &inner)?;
        let diff = (direct.clone() - formula.clone()).abs_value().to_f64();
        max_abs_diff = max_abs_diff.max(diff);
        passed &= direct.close_to(&formula, TOLERANCE);
    }
    Ok(PastingFormulaCheck {
        events_checked: events.len(),
        exhaustive,
        max_abs_diff,
        passed,
    })
}

/// Common interface of measure families used by the oracles and checks.
pub trait Family<S: Scalar> {
    fn fingerprint(&self) -> u64;

    fn member_count(&self) -> u128;

    /// Every member, in canonical order.
    fn members(&self, budget: u128) -> Result<Vec<Measure<S>>>;

    /// Members as seen from node `n`: one measure per distinct combination
    /// of kernels inside the subtree rooted at `n`. Kernels outside that
    /// subtree are arbitrary.
    fn local_members(&self, tree: &EventTree<S>, n: NodeId, budget: u128) -> Result<Vec<Measure<S>>>;

    /// `ess inf_Q E_Q[X | F_tau]`, node-wise.
    fn conditional_inf(
        &self,
        tree: &EventTree<S>,
        x: &RandomVariable<S>,
        tau: &StoppingTime,
        budget: u128,
    ) -> Result<RandomVariable<S>>;

    fn as_rectangular(&self) -> Option<&RectangularFamily<S>> {
        None
    }
}

fn check_budget(count: u128, budget: u128) -> Result<()> {
    if count > budget {
        Err(Error::EnumerationTooLarge { count, budget })
    } else {
        Ok(())
    }
}

/// A stable family given by a finite set of admissible kernels at every
/// internal node; its members are all per-node selections.
#[derive(Clone, Debug, PartialEq)]
pub struct RectangularFamily<S> {
    fingerprint: u64,
    kernel_sets: Vec<Vec<Vec<S>>>,
}

impl<S: Scalar> RectangularFamily<S> {
    /// `kernel_sets[n]` lists the admissible kernels at node `n` (empty for
    /// leaves). Duplicate kernels are removed.
    pub fn new(tree: &EventTree<S>, kernel_sets: Vec<Vec<Vec<S>>>) -> Result<Self> {
        if kernel_sets.len() != tree.len() {
            return Err(Error::InvalidParameter(format!(
                "family has {} kernel sets for a tree of {} nodes",
                kernel_sets.len(),
                tree.len()
            )));
        }
        let mut out = Vec::with_capacity(tree.len());
        for (n, set) in tree.nodes().zip(kernel_sets) {
            if tree.is_leaf(n) {
                if !set.is_empty() {
                    return Err(Error::InvalidKernel {
                        node: tree.label(n),
                        reason: "leaves carry no kernels".into(),
                    });
                }
                out.push(Vec::new());
                continue;
            }
            if set.is_empty() {
                return Err(Error::InvalidKernel {
                    node: tree.label(n),
                    reason: "empty kernel set".into(),
                });
            }
            let mut unique: Vec<Vec<S>> = Vec::with_capacity(set.len());
            for k in set {
                let k = check_kernel(tree, n, k)?;
                if !unique.iter().any(|u| kernels_equal(u, &k, TOLERANCE)) {
                    unique.push(k);
                }
            }
            out.push(unique);
        }
        Ok(RectangularFamily {
            fingerprint: tree.fingerprint(),
            kernel_sets: out,
        })
    }

    /// The family whose only member is `q`.
    pub fn singleton(q: &Measure<S>) -> Self {
        RectangularFamily {
            fingerprint: q.fingerprint,
            kernel_sets: q
                .kernels
                .iter()
                .map(|k| if k.is_empty() { Vec::new() } else { vec![k.clone()] })
                .collect(),
        }
    }

    pub fn kernel_set(&self, n: NodeId) -> &[Vec<S>] {
        &self.kernel_sets[n.index()]
    }

    pub fn kernel_sets(&self) -> &[Vec<Vec<S>>] {
        &self.kernel_sets
    }

    /// Lazily enumerates all selections; the root's choice is the most
    /// significant digit.
    pub fn iter_members(&self, budget: u128) -> Result<Members<'_, S>> {
        check_budget(self.member_count(), budget)?;
        let slots: Vec<usize> = (0..self.kernel_sets.len())
            .filter(|&i| !self.kernel_sets[i].is_empty())
            .collect();
        Ok(Members {
            family: self,
            digits: vec![0; slots.len()],
            slots,
            done: false,
        })
    }

    /// Member with the given canonical index.
    pub fn member(&self, index: u128) -> Option<Measure<S>> {
        if index >= self.member_count() {
            return None;
        }
        let mut rest = index;
        let mut choice = vec![0usize; self.kernel_sets.len()];
        for i in (0..self.kernel_sets.len()).rev() {
            let size = self.kernel_sets[i].len();
            if size > 0 {
                choice[i] = (rest % size as u128) as usize;
                rest /= size as u128;
            }
        }
        Some(self.selection(&choice))
    }

    fn selection(&self, choice: &[usize]) -> Measure<S> {
        Measure {
            fingerprint: self.fingerprint,
            kernels: self
                .kernel_sets
                .iter()
                .zip(choice)
                .map(|(set, &c)| if set.is_empty() { Vec::new() } else { set[c].clone() })
                .collect(),
        }
    }

    /// Per-node index of `q`'s kernel in this family, or the first node where
    /// `q` is not admissible.
    pub fn selection_of(&self, tree: &EventTree<S>, q: &Measure<S>) -> Result<Vec<usize>> {
        tree.check_same(q.fingerprint)?;
        tree.check_same(self.fingerprint)?;
        let mut out = vec![0usize; tree.len()];
        for n in tree.internal_nodes() {
            match self.kernel_set(n).iter().position(|k| kernels_equal(k, q.kernel(n), TOLERANCE)) {
                Some(i) => out[n.index()] = i,
                None => return Err(Error::NotAMember { node: tree.label(n) }),
            }
        }
        Ok(out)
    }

    pub fn contains(&self, tree: &EventTree<S>, q: &Measure<S>) -> bool {
        self.selection_of(tree, q).is_ok()
    }

    /// The sub-family of members agreeing with `q0` before `tau`.
    pub fn restrict(&self, tree: &EventTree<S>, q0: &Measure<S>, tau: &StoppingTime) -> Result<Self> {
        tree.check_same(tau.fingerprint())?;
        let choice = self.selection_of(tree, q0)?;
        let mut kernel_sets = self.kernel_sets.clone();
        for n in tau.nodes_before(tree) {
            kernel_sets[n.index()] = vec![self.kernel_sets[n.index()][choice[n.index()]].clone()];
        }
        Ok(RectangularFamily {
            fingerprint: self.fingerprint,
            kernel_sets,
        })
    }

    /// The family with every node outside `keep` pinned to its first kernel.
    /// Its members are the distinct behaviours of this family on `keep`.
    pub(crate) fn pinned_outside(&self, keep: &[NodeId]) -> Self {
        let kernel_sets = self
            .kernel_sets
            .iter()
            .enumerate()
            .map(|(i, set)| {
                if set.is_empty() || keep.iter().any(|n| n.index() == i) {
                    set.clone()
                } else {
                    vec![set[0].clone()]
                }
            })
            .collect();
        RectangularFamily {
            fingerprint: self.fingerprint,
            kernel_sets,
        }
    }

    /// Adds kernels at one node (used to test monotonicity in the family).
    pub fn enlarge(&self, tree: &EventTree<S>, n: NodeId, extra: Vec<Vec<S>>) -> Result<Self> {
        let mut sets = self.kernel_sets.clone();
        sets[n.index()].extend(extra);
        Self::new(tree, sets)
    }

    /// Every member as an explicit list.
    pub fn to_explicit(&self, budget: u128) -> Result<ExplicitFamily<S>> {
        ExplicitFamily::new(self.iter_members(budget)?.collect())
    }
}

impl<S: Scalar> Family<S> for RectangularFamily<S> {
    fn fingerprint(&self) -> u64 {
        self.fingerprint
    }

    fn member_count(&self) -> u128 {
        self.kernel_sets
            .iter()
            .filter(|s| !s.is_empty())
            .fold(1u128, |acc, s| acc.saturating_mul(s.len() as u128))
    }

    fn members(&self, budget: u128) -> Result<Vec<Measure<S>>> {
        Ok(self.iter_members(budget)?.collect())
    }

    fn local_members(&self, tree: &EventTree<S>, n: NodeId, budget: u128) -> Result<Vec<Measure<S>>> {
        tree.check_same(self.fingerprint)?;
        let inside: HashSet<NodeId> = tree.subtree(n).into_iter().collect();
        let sets: Vec<Vec<Vec<S>>> = tree
            .nodes()
            .map(|m| {
                let set = &self.kernel_sets[m.index()];
                if inside.contains(&m) || set.is_empty() {
                    set.clone()
                } else {
                    vec![set[0].clone()]
                }
            })
            .collect();
        RectangularFamily {
            fingerprint: self.fingerprint,
            kernel_sets: sets,
        }
        .members(budget)
    }

    fn conditional_inf(
        &self,
        tree: &EventTree<S>,
        x: &RandomVariable<S>,
        tau: &StoppingTime,
        _budget: u128,
    ) -> Result<RandomVariable<S>> {
        robust_conditional_inf(tree, self, x, tau)
    }

    fn as_rectangular(&self) -> Option<&RectangularFamily<S>> {
        Some(self)
    }
}

/// Odometer over the selections of a [`RectangularFamily`].
pub struct Members<'a, S> {
    family: &'a RectangularFamily<S>,
    slots: Vec<usize>,
    digits: Vec<usize>,
    done: bool,
}

impl<S: Scalar> Iterator for Members<'_, S> {
    type Item = Measure<S>;

    fn next(&mut self) -> Option<Measure<S>> {
        if self.done {
            return None;
        }
        let mut choice = vec![0usize; self.family.kernel_sets.len()];
        for (slot, d) in self.slots.iter().zip(&self.digits) {
            choice[*slot] = *d;
        }
        let out = self.family.selection(&choice);
        // Advance, least significant digit last.
        let mut i = self.digits.len();
        loop {
            if i == 0 {
                self.done = true;
                break;
            }
            i -= 1;
            self.digits[i] += 1;
            if self.digits[i] < self.family.kernel_sets[self.slots[i]].len() {
                break;
            }
            self.digits[i] = 0;
        }
        Some(out)
    }
}

/// `ess inf_Q E_Q[X | F_tau]` over a rectangular family, by backward
/// recursion with a node-wise minimum over admissible kernels.
pub fn robust_conditional_inf<S: Scalar>(
    tree: &EventTree<S>,
    family: &RectangularFamily<S>,
    x: &RandomVariable<S>,
    tau: &StoppingTime,
) -> Result<RandomVariable<S>> {
    robust_conditional(tree, family, x, tau, S::min_of)
}

/// `ess sup_Q E_Q[X | F_tau]`, the mirror image of [`robust_conditional_inf`].
pub fn robust_conditional_sup<S: Scalar>(
    tree: &EventTree<S>,
    family: &RectangularFamily<S>,
    x: &RandomVariable<S>,
    tau: &StoppingTime,
) -> Result<RandomVariable<S>> {
    robust_conditional(tree, family, x, tau, S::max_of)
}

fn robust_conditional<S: Scalar>(
    tree: &EventTree<S>,
    family: &RectangularFamily<S>,
    x: &RandomVariable<S>,
    tau: &StoppingTime,
    pick: fn(S, S) -> S,
) -> Result<RandomVariable<S>> {
    tree.check_same(family.fingerprint)?;
    tree.check_same(tau.fingerprint())?;
    let x = x.on_leaves(tree)?;
    let mut g = vec![S::zero(); tree.len()];
    for (leaf, v) in x.iter() {
        g[leaf.index()] = v.clone();
    }
    for n in tree.nodes().rev() {
        if tree.is_leaf(n) {
            continue;
        }
        let mut values = family.kernel_set(n).iter().map(|k| one_step(tree, k, n, &g));
        let first = values.next().expect("nonempty kernel set");
        g[n.index()] = values.fold(first, pick);
    }
    RandomVariable::new(
        tau.clone(),
        tau.region().iter().map(|n| g[n.index()].clone()).collect(),
    )
}

/// A family given as an explicit list of measures. Not necessarily stable.
#[derive(Clone, Debug, PartialEq)]
pub struct ExplicitFamily<S> {
    fingerprint: u64,
    members: Vec<Measure<S>>,
}

impl<S: Scalar> ExplicitFamily<S> {
    pub fn new(members: Vec<Measure<S>>) -> Result<Self> {
        let first = members
            .first()
            .ok_or_else(|| Error::InvalidParameter("explicit family is empty".into()))?;
        let fingerprint = first.fingerprint;
        if members.iter().any(|m| m.fingerprint != fingerprint) {
            return Err(Error::MismatchedTrees);
        }
        Ok(ExplicitFamily { fingerprint, members })
    }

    pub fn as_slice(&self) -> &[Measure<S>] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

impl<S: Scalar> Family<S> for ExplicitFamily<S> {
    fn fingerprint(&self) -> u64 {
        self.fingerprint
    }

    fn member_count(&self) -> u128 {
        self.members.len() as u128
    }

    fn members(&self, budget: u128) -> Result<Vec<Measure<S>>> {
        check_budget(self.member_count(), budget)?;
        Ok(self.members.clone())
    }

    fn local_members(&self, tree: &EventTree<S>, _n: NodeId, budget: u128) -> Result<Vec<Measure<S>>> {
        tree.check_same(self.fingerprint)?;
        self.members(budget)
    }

    fn conditional_inf(
        &self,
        tree: &EventTree<S>,
        x: &RandomVariable<S>,
        tau: &StoppingTime,
        _budget: u128,
    ) -> Result<RandomVariable<S>> {
        tree.check_same(self.fingerprint)?;
        let mut best: Option<Vec<S>> = None;
        for q in &self.members {
            let v = conditional_expectation(tree, q, x, tau)?;
            best = Some(match best {
                None => v.values().to_vec(),
                Some(b) => b.into_iter().zip(v.values()).map(|(a, c)| a.min_of(c.clone())).collect(),
            });
        }
        RandomVariable::new(tau.clone(), best.expect("nonempty family"))
    }
}

/// Result of [`is_stable`].
#[derive(Clone, Debug, PartialEq)]
pub enum Stability {
    Stable,
    /// Pasting member `q1` with member `q2` in `sigma` leaves the family.
    Counterexample {
        q1: usize,
        q2: usize,
        sigma: StoppingTime,
    },
}

impl Stability {
    pub fn is_stable(&self) -> bool {
        matches!(self, Stability::Stable)
    }
}

/// Exhaustive stability check over every pair of members and every stopping
/// time. `budget` bounds `members^2 * stopping_times`.
pub fn is_stable<S: Scalar>(
    tree: &EventTree<S>,
    family: &ExplicitFamily<S>,
    budget: u128,
) -> Result<Stability> {
    tree.check_same(family.fingerprint)?;
    let root = StoppingTime::at_root(tree);
    let st_count = oracle::count_stopping_times(tree, &root)?;
    let m = family.len() as u128;
    check_budget(m.saturating_mul(m).saturating_mul(st_count), budget)?;

    // Pasting copies kernels verbatim, so members can be compared through
    // per-node kernel classes.
    let internal: Vec<NodeId> = tree.internal_nodes().collect();
    let mut classes: Vec<Vec<Vec<S>>> = vec![Vec::new(); internal.len()];
    let mut codes: Vec<Vec<u16>> = Vec::with_capacity(family.len());
    for q in &family.members {
        let mut code = Vec::with_capacity(internal.len());
        for (slot, n) in internal.iter().enumerate() {
            let k = q.kernel(*n);
            let c = match classes[slot].iter().position(|x| kernels_equal(x, k, TOLERANCE)) {
                Some(c) => c,
                None => {
                    classes[slot].push(k.to_vec());
                    classes[slot].len() - 1
                }
            };
            code.push(c as u16);
        }
        codes.push(code);
    }
    let known: HashSet<&[u16]> = codes.iter().map(|c| c.as_slice()).collect();

    for sigma in oracle::enumerate_stopping_times(tree, &root, budget)? {
        let before: HashSet<NodeId> = sigma.nodes_before(tree).into_iter().collect();
        let from_q1: Vec<bool> = internal.iter().map(|n| before.contains(n)).collect();
        let mut pasted = vec![0u16; internal.len()];
        for (i, c1) in codes.iter().enumerate() {
            for (j, c2) in codes.iter().enumerate() {
                for s in 0..internal.len() {
                    pasted[s] = if from_q1[s] { c1[s] } else { c2[s] };
                }
                if !known.contains(pasted.as_slice()) {
                    return Ok(Stability::Counterexample { q1: i, q2: j, sigma });
                }
            }
        }
    }
    Ok(Stability::Stable)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Exact;

    fn one_period() -> EventTree<f64> {
        EventTree::complete(1, 2).unwrap()
    }

    fn measure(t: &EventTree<f64>, k: &[f64]) -> Measure<f64> {
        let mut kernels = vec![Vec::new(); t.len()];
        kernels[0] = k.to_vec();
        Measure::new(t, kernels).unwrap()
    }

    #[test]
    fn expectation_examples() {
        let t = one_period();
        let q = measure(&t, &[0.3, 0.7]);
        let x = RandomVariable::on_leaves_from(&t, vec![10.0, 0.0]).unwrap();
        assert!((expectation(&t, &q, &x).unwrap() - 3.0).abs() < 1e-12);
        let c = RandomVariable::constant(StoppingTime::at_leaves(&t), 4.5);
        assert!((expectation(&t, &q, &c).unwrap() - 4.5).abs() < 1e-12);
        let all = RandomVariable::indicator(&t, t.leaves());
        assert!((expectation(&t, &q, &all).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn conditional_expectation_examples() {
        let t: EventTree<f64> = EventTree::complete(2, 2).unwrap();
        let q = Measure::reference(&t);
        let x = RandomVariable::on_leaves_from(&t, vec![4.0, 0.0, 2.0, 6.0]).unwrap();
        let at_root = conditional_expectation(&t, &q, &x, &StoppingTime::at_root(&t)).unwrap();
        assert_eq!(at_root.values(), &[3.0]);
        let at_leaves = conditional_expectation(&t, &q, &x, &StoppingTime::at_leaves(&t)).unwrap();
        assert_eq!(at_leaves.values(), x.values());
        let mid = conditional_expectation(&t, &q, &x, &StoppingTime::at_depth(&t, 1).unwrap()).unwrap();
        assert_eq!(mid.values(), &[2.0, 4.0]);
    }

    #[test]
    fn measure_validation() {
        let t = one_period();
        let mut kernels = vec![Vec::new(); t.len()];
        kernels[0] = vec![1.0, 0.0];
        assert!(Measure::new(&t, kernels.clone()).is_err());
        kernels[0] = vec![0.5, 0.2, 0.3];
        assert!(Measure::new(&t, kernels).is_err());
    }

    #[test]
    fn pasting_examples() {
        let t: EventTree<f64> = EventTree::complete(2, 2).unwrap();
        let q1 = Measure::reference(&t);
        let mut k = q1.kernels().to_vec();
        for n in t.internal_nodes() {
            k[n.index()] = vec![0.2, 0.8];
        }
        let q2 = Measure::new(&t, k).unwrap();
        let mid = StoppingTime::at_depth(&t, 1).unwrap();
        assert_eq!(pasting(&t, &q1, &q1, &mid).unwrap(), q1);
        assert_eq!(pasting(&t, &q1, &q2, &StoppingTime::at_root(&t)).unwrap(), q2);
        assert_eq!(pasting(&t, &q1, &q2, &StoppingTime::at_leaves(&t)).unwrap(), q1);
        let p = pasting(&t, &q1, &q2, &mid).unwrap();
        assert_eq!(p.kernel(t.root()), q1.kernel(t.root()));
        assert_eq!(p.kernel(NodeId(1)), q2.kernel(NodeId(1)));
        let check = verify_pasting_formula(&t, &q1, &q2, &mid, &p).unwrap();
        assert!(check.passed && check.exhaustive);
        assert_eq!(check.events_checked, 16);
        // The wrong measure fails the event-wise formula.
        let check = verify_pasting_formula(&t, &q1, &q2, &mid, &q1).unwrap();
        assert!(!check.passed);
    }

    #[test]
    fn members_counts() {
        let t: EventTree<f64> = EventTree::complete(2, 2).unwrap();
        let q = Measure::reference(&t);
        let single = RectangularFamily::singleton(&q);
        assert_eq!(single.member_count(), 1);
        assert_eq!(single.members(10).unwrap().len(), 1);

        let sets: Vec<Vec<Vec<f64>>> = t
            .nodes()
            .map(|n| if t.is_leaf(n) { vec![] } else { vec![vec![0.3, 0.7], vec![0.7, 0.3]] })
            .collect();
        let f = RectangularFamily::new(&t, sets).unwrap();
        let all = f.members(1_000).unwrap();
        assert_eq!(all.len(), 8);
        for (i, m) in all.iter().enumerate() {
            assert_eq!(&f.member(i as u128).unwrap(), m);
            for other in &all[i + 1..] {
                assert!(!m.same_as(other, TOLERANCE));
            }
        }
        assert!(matches!(
            f.members(7),
            Err(Error::EnumerationTooLarge { count: 8, budget: 7 })
        ));
    }

    #[test]
    fn duplicate_kernels_are_removed() {
        let t = one_period();
        let mut sets = vec![Vec::new(); t.len()];
        sets[0] = vec![vec![0.3, 0.7], vec![0.3, 0.7 + 1e-12], vec![0.6, 0.4]];
        let f = RectangularFamily::new(&t, sets).unwrap();
        assert_eq!(f.kernel_set(t.root()).len(), 2);
        let mut sets = vec![Vec::new(); t.len()];
        sets[0] = vec![];
        assert!(RectangularFamily::new(&t, sets).is_err());
    }

    #[test]
    fn robust_conditional_inf_examples() {
        let t = one_period();
        let mut sets = vec![Vec::new(); t.len()];
        sets[0] = vec![vec![0.3, 0.7], vec![0.7, 0.3]];
        let f = RectangularFamily::new(&t, sets).unwrap();
        let x = RandomVariable::on_leaves_from(&t, vec![10.0, 0.0]).unwrap();
        let root = StoppingTime::at_root(&t);
        let v = robust_conditional_inf(&t, &f, &x, &root).unwrap();
        assert!((v.values()[0] - 3.0).abs() < 1e-12);
        let v = robust_conditional_sup(&t, &f, &x, &root).unwrap();
        assert!((v.values()[0] - 7.0).abs() < 1e-12);
        let c = RandomVariable::constant(StoppingTime::at_leaves(&t), 2.0);
        let v = robust_conditional_inf(&t, &f, &c, &root).unwrap();
        assert!((v.values()[0] - 2.0).abs() < 1e-12);
        let q = measure(&t, &[0.3, 0.7]);
        let s = RectangularFamily::singleton(&q);
        assert_eq!(
            robust_conditional_inf(&t, &s, &x, &root).unwrap(),
            conditional_expectation(&t, &q, &x, &root).unwrap()
        );
    }

    #[test]
    fn restrict_examples() {
        let t: EventTree<f64> = EventTree::complete(2, 2).unwrap();
        let sets: Vec<Vec<Vec<f64>>> = t
            .nodes()
            .map(|n| if t.is_leaf(n) { vec![] } else { vec![vec![0.3, 0.7], vec![0.7, 0.3]] })
            .collect();
        let f = RectangularFamily::new(&t, sets).unwrap();
        let q0 = f.member(5).unwrap();
        assert_eq!(f.restrict(&t, &q0, &StoppingTime::at_root(&t)).unwrap(), f);
        let pinned = f.restrict(&t, &q0, &StoppingTime::at_leaves(&t)).unwrap();
        assert_eq!(pinned.member_count(), 1);
        assert!(pinned.member(0).unwrap().same_as(&q0, 0.0));
        let mid = f.restrict(&t, &q0, &StoppingTime::at_depth(&t, 1).unwrap()).unwrap();
        assert_eq!(mid.members(100).unwrap().len(), 4);

        let mut outsider = q0.kernels().to_vec();
        outsider[0] = vec![0.5, 0.5];
        let outsider = Measure::new(&t, outsider).unwrap();
        assert!(matches!(
            f.restrict(&t, &outsider, &StoppingTime::at_root(&t)),
            Err(Error::NotAMember { node: 0 })
        ));
    }

    #[test]
    fn stability_examples() {
        let t: EventTree<f64> = EventTree::complete(2, 2).unwrap();
        let sets: Vec<Vec<Vec<f64>>> = t
            .nodes()
            .map(|n| if t.is_leaf(n) { vec![] } else { vec![vec![0.3, 0.7], vec![0.7, 0.3]] })
            .collect();
        let f = RectangularFamily::new(&t, sets).unwrap();
        let all = f.to_explicit(100).unwrap();
        assert!(is_stable(&t, &all, 1_000_000).unwrap().is_stable());

        let q = Measure::reference(&t);
        let single = ExplicitFamily::new(vec![q.clone()]).unwrap();
        assert!(is_stable(&t, &single, 100).unwrap().is_stable());

        // Two members that differ at both depth-1 nodes.
        let mut k1 = q.kernels().to_vec();
        k1[1] = vec![0.9, 0.1];
        k1[2] = vec![0.1, 0.9];
        let mut k2 = q.kernels().to_vec();
        k2[1] = vec![0.1, 0.9];
        k2[2] = vec![0.9, 0.1];
        let q1 = Measure::new(&t, k1).unwrap();
        let q2 = Measure::new(&t, k2).unwrap();
        let pair = ExplicitFamily::new(vec![q1, q2]).unwrap();
        match is_stable(&t, &pair, 1_000).unwrap() {
            Stability::Counterexample { q1, q2, sigma } => {
                let a = &pair.as_slice()[q1];
                let b = &pair.as_slice()[q2];
                let pasted = pasting(&t, a, b, &sigma).unwrap();
                assert!(!pair.as_slice().iter().any(|m| m.same_as(&pasted, TOLERANCE)));
            }
            Stability::Stable => panic!("expected a counterexample"),
        }
    }

    #[test]
    fn exact_mode_pasting_formula() {
        let t: EventTree<Exact> = EventTree::complete(2, 3).unwrap();
        let q1 = Measure::reference(&t);
        let mut k = q1.kernels().to_vec();
        for n in t.internal_nodes() {
            k[n.index()] = vec![
                Exact::from_ratio(1, 7),
                Exact::from_ratio(2, 7),
                Exact::from_ratio(4, 7),
            ];
        }
        let q2 = Measure::new(&t, k).unwrap();
        let sigma = StoppingTime::at_depth(&t, 1).unwrap();
        let p = pasting(&t, &q1, &q2, &sigma).unwrap();
        let check = verify_pasting_formula(&t, &q1, &q2, &sigma, &p).unwrap();
        assert!(check.passed);
        assert_eq!(check.max_abs_diff, 0.0);
    }
}
