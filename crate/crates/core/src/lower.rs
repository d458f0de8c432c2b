//! Lower Snell envelope of a payoff under a stable family, the robust
//! optimal stopping time, and the checks tying them to their definitions.
//!
//! The envelope is computed by robust backward induction
//! `U(n) = max(H(n), min_k sum_c k(c) U(c))`; the robust stopping time is the
//! first contact of the payoff with it. Every identity below compares these
//! production values against either a second production route or the
//! brute-force evaluators in [`crate::oracle`].

use serde::Serialize;

use crate::error::{Error, Result};
use crate::measure::{conditional_expectation, robust_conditional_inf, Family, RectangularFamily};
use crate::oracle;
use crate::scalar::{Scalar, TOLERANCE};
use crate::snell::{continuation, first_contact, min_optimal_time, snell_envelope};
use crate::tree::{AdaptedProcess, EventTree, NodeId, RandomVariable, StoppingTime};

#[derive(Clone, Debug, PartialEq)]
pub struct LowerSnellResult<S> {
    pub envelope: AdaptedProcess<S>,
    /// First contact of the payoff with the envelope, from time zero.
    pub tau_down: StoppingTime,
    pub root_value: S,
}

impl<S: Scalar> LowerSnellResult<S> {
    /// Robust optimal stopping time after `rho`: first contact at or after `rho`.
    pub fn tau_down_from(
        &self,
        tree: &EventTree<S>,
        h: &AdaptedProcess<S>,
        rho: &StoppingTime,
    ) -> Result<StoppingTime> {
        first_contact(tree, h, &self.envelope, rho)
    }
}

fn robust_envelope<S: Scalar>(
    tree: &EventTree<S>,
    family: &RectangularFamily<S>,
    h: &AdaptedProcess<S>,
    pick: fn(S, S) -> S,
) -> Result<AdaptedProcess<S>> {
    h.check_payoff(tree)?;
    tree.check_same(Family::fingerprint(family))?;
    let mut u: Vec<S> = h.values().to_vec();
    for n in tree.nodes().rev() {
        if tree.is_leaf(n) {
            continue;
        }
        let mut conts = family.kernel_set(n).iter().map(|k| continuation(tree, k, n, &u));
        let first = conts.next().expect("nonempty kernel set");
        let cont = conts.fold(first, pick);
        u[n.index()] = h.value(n).clone().max_of(cont);
    }
    AdaptedProcess::new(tree, u)
}

pub fn lower_snell<S: Scalar>(
    tree: &EventTree<S>,
    family: &RectangularFamily<S>,
    h: &AdaptedProcess<S>,
) -> Result<LowerSnellResult<S>> {
    let envelope = robust_envelope(tree, family, h, S::min_of)?;
    let tau_down = first_contact(tree, h, &envelope, &StoppingTime::at_root(tree))?;
    let root_value = envelope.value(tree.root()).clone();
    Ok(LowerSnellResult {
        envelope,
        tau_down,
        root_value,
    })
}

/// Same recursion with the maximum over admissible kernels.
pub fn upper_snell<S: Scalar>(
    tree: &EventTree<S>,
    family: &RectangularFamily<S>,
    h: &AdaptedProcess<S>,
) -> Result<AdaptedProcess<S>> {
    robust_envelope(tree, family, h, S::max_of)
}

/// Pathwise minimum over all members of their minimal optimal times after `rho`.
pub fn tau_down_via_essinf<S: Scalar, F: Family<S>>(
    tree: &EventTree<S>,
    family: &F,
    h: &AdaptedProcess<S>,
    rho: &StoppingTime,
    budget: u128,
) -> Result<StoppingTime> {
    tree.check_same(family.fingerprint())?;
    let mut best: Option<StoppingTime> = None;
    for q in family.members(budget)? {
        let t = min_optimal_time(tree, &q, h, rho)?;
        best = Some(match best {
            None => t,
            Some(b) => b.meet(&t, tree)?,
        });
    }
    let best = best.expect("nonempty family");
    // Re-validate through the checked constructor.
    StoppingTime::new(tree, best.region().iter().copied())
}

/// Per-node comparison of two sides of an identity.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NodeComparison {
    pub node: u64,
    pub lhs: f64,
    pub rhs: f64,
}

fn compare<S: Scalar>(
    tree: &EventTree<S>,
    lhs: &RandomVariable<S>,
    rhs: &RandomVariable<S>,
) -> (Vec<NodeComparison>, f64, bool) {
    let rows = lhs
        .iter()
        .zip(rhs.values())
        .map(|((n, a), b)| NodeComparison {
            node: tree.label(n),
            lhs: a.to_f64(),
            rhs: b.to_f64(),
        })
        .collect();
    (rows, lhs.max_abs_diff(rhs), lhs.close_to(rhs, TOLERANCE))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RootIdentity {
    /// `inf_Q E_Q[H at the robust stopping time]`.
    pub inf_at_tau_down: f64,
    /// `sup_tau inf_Q E_Q[H_tau]` by enumeration.
    pub sup_inf: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RobustOptimalityReport {
    pub rho: Vec<u64>,
    pub tau_down: Vec<u64>,
    /// `lhs` is the envelope at `rho`; `rhs` is `min_Q E_Q[H_{tau_down} | F_rho]`.
    pub nodes: Vec<NodeComparison>,
    pub max_abs_diff: f64,
    pub root_identity: Option<RootIdentity>,
    pub passed: bool,
}

/// Checks that the robust stopping time after `rho` attains the envelope
/// against every member, and at the root that it solves the maximin problem.
pub fn check_robust_optimality<S: Scalar>(
    tree: &EventTree<S>,
    family: &RectangularFamily<S>,
    h: &AdaptedProcess<S>,
    rho: &StoppingTime,
    budget: u128,
) -> Result<RobustOptimalityReport> {
    let result = lower_snell(tree, family, h)?;
    let tau = result.tau_down_from(tree, h, rho)?;
    let h_tau = h.stopped_at(&tau, tree)?;
    let members = family.members(budget)?;
    let mut rhs: Option<Vec<S>> = None;
    for q in &members {
        let v = conditional_expectation(tree, q, &h_tau, rho)?;
        rhs = Some(match rhs {
            None => v.values().to_vec(),
            Some(r) => r.into_iter().zip(v.values()).map(|(a, b)| a.min_of(b.clone())).collect(),
        });
    }
    let rhs = RandomVariable::new(rho.clone(), rhs.expect("nonempty family"))?;
    let lhs = result.envelope.sample(rho)?;
    let (nodes, max_abs_diff, mut passed) = compare(tree, &lhs, &rhs);

    let root_identity = if rho.region() == [tree.root()] {
        let inf_at = rhs.values()[0].clone();
        let sup_inf = oracle::direct_maximin(tree, family, h, rho, budget)?.values()[0].clone();
        let ok = inf_at.close_to(&sup_inf, TOLERANCE);
        passed &= ok;
        Some(RootIdentity {
            inf_at_tau_down: inf_at.to_f64(),
            sup_inf: sup_inf.to_f64(),
            passed: ok,
        })
    } else {
        None
    };
    Ok(RobustOptimalityReport {
        rho: rho.labels(tree),
        tau_down: tau.labels(tree),
        nodes,
        max_abs_diff,
        root_identity,
        passed,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MinimaxNode {
    pub node: u64,
    /// `max_tau min_Q E_Q[H_tau | F_rho]`.
    pub sup_inf: f64,
    /// `min_Q U^Q`.
    pub inf_sup: f64,
    /// The recursion value, for rectangular families.
    pub lower_snell: Option<f64>,
    /// Region of a maximizing stopping time.
    pub best_tau: Vec<u64>,
    /// Canonical index of a minimizing member.
    pub best_member: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MinimaxReport {
    pub rho: Vec<u64>,
    pub nodes: Vec<MinimaxNode>,
    /// Largest `inf_sup - sup_inf` over the region (nonnegative up to rounding).
    pub max_gap: f64,
    pub passed: bool,
}

/// Both sides of the minimax identity at `rho`, node-wise.
pub fn minimax_check<S: Scalar, F: Family<S>>(
    tree: &EventTree<S>,
    family: &F,
    h: &AdaptedProcess<S>,
    rho: &StoppingTime,
    budget: u128,
) -> Result<MinimaxReport> {
    h.check_payoff(tree)?;
    let k = rho.region().len();

    let mut sup_inf: Vec<Option<(S, usize)>> = vec![None; k];
    let taus = oracle::enumerate_stopping_times(tree, rho, budget)?;
    for (t, tau) in taus.iter().enumerate() {
        let v = family.conditional_inf(tree, &h.stopped_at(tau, tree)?, rho, budget)?;
        for (slot, val) in v.values().iter().enumerate() {
            if sup_inf[slot].as_ref().is_none_or(|(b, _)| *val > *b) {
                sup_inf[slot] = Some((val.clone(), t));
            }
        }
    }

    let mut inf_sup: Vec<Option<(S, usize)>> = vec![None; k];
    for (m, q) in family.members(budget)?.iter().enumerate() {
        let u = snell_envelope(tree, q, h)?.sample(rho)?;
        for (slot, val) in u.values().iter().enumerate() {
            if inf_sup[slot].as_ref().is_none_or(|(b, _)| *val < *b) {
                inf_sup[slot] = Some((val.clone(), m));
            }
        }
    }

    let recursion = match family.as_rectangular() {
        Some(rect) => Some(lower_snell(tree, rect, h)?.envelope.sample(rho)?),
        None => None,
    };

    let mut nodes = Vec::with_capacity(k);
    let mut max_gap = f64::NEG_INFINITY;
    let mut passed = true;
    for (slot, &n) in rho.region().iter().enumerate() {
        let (lo, t) = sup_inf[slot].clone().expect("enumeration is nonempty");
        let (hi, m) = inf_sup[slot].clone().expect("family is nonempty");
        max_gap = max_gap.max((hi.clone() - lo.clone()).to_f64());
        passed &= lo.close_to(&hi, TOLERANCE);
        let rec = recursion.as_ref().map(|r| r.values()[slot].clone());
        if let Some(r) = &rec {
            passed &= r.close_to(&hi, TOLERANCE);
        }
        nodes.push(MinimaxNode {
            node: tree.label(n),
            sup_inf: lo.to_f64(),
            inf_sup: hi.to_f64(),
            lower_snell: rec.map(|r| r.to_f64()),
            best_tau: restrict_labels(tree, &taus[t], n),
            best_member: m,
        });
    }
    Ok(MinimaxReport {
        rho: rho.labels(tree),
        nodes,
        max_gap,
        passed,
    })
}

fn restrict_labels<S: Scalar>(tree: &EventTree<S>, tau: &StoppingTime, n: NodeId) -> Vec<u64> {
    tau.region()
        .iter()
        .filter(|m| tree.is_ancestor_or_equal(n, **m))
        .map(|m| tree.label(*m))
        .collect()
}

/// The direct-definition lower Snell values `U(tau)` for every stopping time,
/// each computed independently by the oracle.
#[derive(Clone, Debug)]
pub struct TSystem<S> {
    pub entries: Vec<RandomVariable<S>>,
}

impl<S: Scalar> TSystem<S> {
    pub fn build<F: Family<S>>(
        tree: &EventTree<S>,
        family: &F,
        h: &AdaptedProcess<S>,
        budget: u128,
    ) -> Result<Self> {
        let root = StoppingTime::at_root(tree);
        let mut entries = Vec::new();
        for tau in oracle::enumerate_stopping_times(tree, &root, budget)? {
            entries.push(oracle::direct_lower_snell(tree, family, h, &tau, budget)?);
        }
        Ok(TSystem { entries })
    }

    /// Values of different stopping times must agree where the stopping
    /// times coincide.
    pub fn compatibility(&self, tree: &EventTree<S>) -> TSystemReport {
        let mut lo: Vec<Option<S>> = vec![None; tree.len()];
        let mut hi: Vec<Option<S>> = vec![None; tree.len()];
        for entry in &self.entries {
            for (n, v) in entry.iter() {
                let i = n.index();
                lo[i] = Some(lo[i].take().map_or(v.clone(), |x| x.min_of(v.clone())));
                hi[i] = Some(hi[i].take().map_or(v.clone(), |x| x.max_of(v.clone())));
            }
        }
        let mut max_diff = 0.0f64;
        let mut passed = true;
        let mut nodes_checked = 0;
        for (a, b) in lo.iter().zip(&hi) {
            if let (Some(a), Some(b)) = (a, b) {
                nodes_checked += 1;
                max_diff = max_diff.max((b.clone() - a.clone()).to_f64());
                passed &= b.close_to(a, TOLERANCE);
            }
        }
        TSystemReport {
            stopping_times: self.entries.len(),
            nodes_checked,
            max_abs_diff: max_diff,
            passed,
            note: None,
        }
    }

    /// The envelope sampled at every stopping time reproduces the system.
    pub fn pasting(&self, envelope: &AdaptedProcess<S>) -> Result<TSystemReport> {
        let mut max_diff = 0.0f64;
        let mut passed = true;
        let mut nodes_checked = 0;
        for entry in &self.entries {
            let sampled = envelope.sample(entry.time())?;
            nodes_checked += sampled.values().len();
            max_diff = max_diff.max(sampled.max_abs_diff(entry));
            passed &= sampled.close_to(entry, TOLERANCE);
        }
        Ok(TSystemReport {
            stopping_times: self.entries.len(),
            nodes_checked,
            max_abs_diff: max_diff,
            passed,
            note: Some(RIGHT_CONTINUITY_NOTE.into()),
        })
    }
}

const RIGHT_CONTINUITY_NOTE: &str = "right upper semicontinuity holds vacuously: on a finite tree \
every decreasing sequence of stopping times is eventually constant";

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TSystemReport {
    pub stopping_times: usize,
    pub nodes_checked: usize,
    pub max_abs_diff: f64,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// Agreement of the direct-definition values on coincidence events.
pub fn tsystem_compatibility_check<S: Scalar>(
    tree: &EventTree<S>,
    family: &RectangularFamily<S>,
    h: &AdaptedProcess<S>,
    budget: u128,
) -> Result<TSystemReport> {
    Ok(TSystem::build(tree, family, h, budget)?.compatibility(tree))
}

/// The recursion's envelope, sampled at each stopping time, against the
/// direct definition at that stopping time.
pub fn tsystem_pasting_check<S: Scalar>(
    tree: &EventTree<S>,
    family: &RectangularFamily<S>,
    h: &AdaptedProcess<S>,
    budget: u128,
) -> Result<TSystemReport> {
    let system = TSystem::build(tree, family, h, budget)?;
    let result = lower_snell(tree, family, h)?;
    system.pasting(&result.envelope)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SubmartingaleReport {
    pub chain_length: usize,
    pub members: u128,
    /// Smallest `E_Q[Y_i | F_{rho_{i+1}}] - Y_{i+1}` seen.
    pub min_slack: f64,
    pub strict_somewhere: bool,
    /// Equal consecutive stopping times carry equal values.
    pub stabilized: bool,
    /// Values of the last element of the chain.
    pub limit: Vec<f64>,
    pub passed: bool,
}

/// For a decreasing chain `rho_0 >= rho_1 >= ...`, the values
/// `Y_i = ess inf_Q E_Q[Y | F_{rho_i}]` satisfy
/// `E_Q[Y_i | F_{rho_{i+1}}] >= Y_{i+1}` for every member `Q`.
pub fn backward_submartingale_check<S: Scalar>(
    tree: &EventTree<S>,
    family: &RectangularFamily<S>,
    y: &RandomVariable<S>,
    chain: &[StoppingTime],
    budget: u128,
) -> Result<SubmartingaleReport> {
    if chain.is_empty() {
        return Err(Error::InvalidParameter("empty chain".into()));
    }
    if y.values().iter().any(|v| *v < S::zero()) {
        return Err(Error::InvalidParameter("terminal variable must be nonnegative".into()));
    }
    for w in chain.windows(2) {
        if !w[1].leq(&w[0], tree)? {
            return Err(Error::NotOrdered("chain must be decreasing".into()));
        }
    }
    let values: Vec<RandomVariable<S>> = chain
        .iter()
        .map(|rho| robust_conditional_inf(tree, family, y, rho))
        .collect::<Result<_>>()?;
    let members = family.member_count();
    if members > budget {
        return Err(Error::EnumerationTooLarge { count: members, budget });
    }
    let mut min_slack = f64::INFINITY;
    let mut strict = false;
    let mut passed = true;
    for i in 0..chain.len().saturating_sub(1) {
        // E_Q[Y_i | F_{rho_{i+1}}] only sees Q's kernels between the two
        // stopping times, so one member per choice of those kernels covers
        // the whole family.
        let between = chain[i + 1].nodes_between(&chain[i], tree);
        for q in family.pinned_outside(&between).iter_members(budget)? {
            let lhs = conditional_expectation(tree, &q, &values[i], &chain[i + 1])?;
            for (a, b) in lhs.values().iter().zip(values[i + 1].values()) {
                let slack = (a.clone() - b.clone()).to_f64();
                min_slack = min_slack.min(slack);
                passed &= a.at_least(b, TOLERANCE);
                strict |= slack > TOLERANCE;
            }
        }
    }
    let stabilized = (0..chain.len().saturating_sub(1))
        .filter(|&i| chain[i] == chain[i + 1])
        .all(|i| values[i].close_to(&values[i + 1], TOLERANCE));
    if chain.len() == 1 {
        min_slack = 0.0;
    }
    Ok(SubmartingaleReport {
        chain_length: chain.len(),
        members,
        min_slack,
        strict_somewhere: strict,
        stabilized,
        limit: values.last().expect("nonempty").values().iter().map(|v| v.to_f64()).collect(),
        passed: passed && stabilized,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{ExplicitFamily, Measure};

    fn one_period(h_root: f64) -> (EventTree<f64>, RectangularFamily<f64>, AdaptedProcess<f64>) {
        let t: EventTree<f64> = EventTree::complete(1, 2).unwrap();
        let mut sets = vec![Vec::new(); t.len()];
        sets[0] = vec![vec![0.3, 0.7], vec![0.7, 0.3]];
        let f = RectangularFamily::new(&t, sets).unwrap();
        let h = AdaptedProcess::new(&t, vec![h_root, 10.0, 0.0]).unwrap();
        (t, f, h)
    }

    #[test]
    fn lower_snell_examples() {
        let (t, f, h) = one_period(2.0);
        let r = lower_snell(&t, &f, &h).unwrap();
        assert!((r.root_value - 3.0).abs() < 1e-12);
        assert_eq!(r.tau_down, StoppingTime::at_leaves(&t));
        let (t, f, h) = one_period(5.0);
        let r = lower_snell(&t, &f, &h).unwrap();
        assert_eq!(r.root_value, 5.0);
        assert_eq!(r.tau_down, StoppingTime::at_root(&t));
    }

    #[test]
    fn upper_snell_example() {
        let (t, f, h) = one_period(2.0);
        let u = upper_snell(&t, &f, &h).unwrap();
        assert!((u.value(t.root()) - 7.0).abs() < 1e-12);
    }

    #[test]
    fn singleton_family_reduces_to_classical() {
        let (t, _, h) = one_period(2.0);
        let mut k = vec![Vec::new(); t.len()];
        k[0] = vec![0.3, 0.7];
        let q = Measure::new(&t, k).unwrap();
        let f = RectangularFamily::singleton(&q);
        let r = lower_snell(&t, &f, &h).unwrap();
        assert_eq!(r.envelope, snell_envelope(&t, &q, &h).unwrap());
        let root = StoppingTime::at_root(&t);
        assert_eq!(r.tau_down, min_optimal_time(&t, &q, &h, &root).unwrap());
        assert_eq!(upper_snell(&t, &f, &h).unwrap(), r.envelope);
        assert_eq!(
            tau_down_via_essinf(&t, &f, &h, &root, 10).unwrap(),
            min_optimal_time(&t, &q, &h, &root).unwrap()
        );
    }

    #[test]
    fn robust_optimality_one_period() {
        let (t, f, h) = one_period(2.0);
        let report = check_robust_optimality(&t, &f, &h, &StoppingTime::at_root(&t), 100).unwrap();
        assert!(report.passed);
        let root = report.root_identity.unwrap();
        assert!((root.inf_at_tau_down - 3.0).abs() < 1e-12);
        assert!((root.sup_inf - 3.0).abs() < 1e-12);

        let c = AdaptedProcess::constant(&t, 4.0);
        let report = check_robust_optimality(&t, &f, &c, &StoppingTime::at_root(&t), 100).unwrap();
        assert!(report.passed);
        assert_eq!(report.nodes[0].lhs, 4.0);
        assert_eq!(report.nodes[0].rhs, 4.0);
    }

    #[test]
    fn minimax_one_period() {
        let (t, f, h) = one_period(2.0);
        let report = minimax_check(&t, &f, &h, &StoppingTime::at_root(&t), 100).unwrap();
        assert!(report.passed);
        let node = &report.nodes[0];
        assert!((node.sup_inf - 3.0).abs() < 1e-12);
        assert!((node.inf_sup - 3.0).abs() < 1e-12);
        assert_eq!(node.best_tau, vec![1, 2]);
    }

    #[test]
    fn minimax_gap_for_unstable_family() {
        let t: EventTree<f64> = EventTree::complete(2, 2).unwrap();
        let q = Measure::reference(&t);
        let mut k1 = q.kernels().to_vec();
        k1[1] = vec![0.9, 0.1];
        k1[2] = vec![0.1, 0.9];
        let mut k2 = q.kernels().to_vec();
        k2[1] = vec![0.1, 0.9];
        k2[2] = vec![0.9, 0.1];
        let pair = ExplicitFamily::new(vec![Measure::new(&t, k1).unwrap(), Measure::new(&t, k2).unwrap()])
            .unwrap();
        let h = AdaptedProcess::new(&t, vec![0.0, 5.0, 5.0, 10.0, 0.0, 10.0, 0.0]).unwrap();
        let report = minimax_check(&t, &pair, &h, &StoppingTime::at_root(&t), 100).unwrap();
        assert!(!report.passed);
        // Hand enumeration: inf-sup is 7 under either member, sup-inf is 5.
        assert!((report.nodes[0].inf_sup - 7.0).abs() < 1e-12);
        assert!((report.nodes[0].sup_inf - 5.0).abs() < 1e-12);
        assert!(report.max_gap > 1e-6);
    }

    #[test]
    fn tsystem_on_small_tree() {
        let t: EventTree<f64> = EventTree::complete(2, 2).unwrap();
        let sets: Vec<Vec<Vec<f64>>> = t
            .nodes()
            .map(|n| if t.is_leaf(n) { vec![] } else { vec![vec![0.3, 0.7], vec![0.6, 0.4]] })
            .collect();
        let f = RectangularFamily::new(&t, sets).unwrap();
        let h = AdaptedProcess::new(&t, vec![1.0, 4.0, 2.0, 9.0, 0.0, 3.0, 5.0]).unwrap();
        let compat = tsystem_compatibility_check(&t, &f, &h, 1000).unwrap();
        assert!(compat.passed);
        assert_eq!(compat.stopping_times, 5);
        assert_eq!(compat.nodes_checked, 7);
        let paste = tsystem_pasting_check(&t, &f, &h, 1000).unwrap();
        assert!(paste.passed);
        assert!(paste.note.is_some());
    }

    #[test]
    fn submartingale_chain() {
        let t: EventTree<f64> = EventTree::complete(3, 2).unwrap();
        let sets: Vec<Vec<Vec<f64>>> = t
            .nodes()
            .map(|n| if t.is_leaf(n) { vec![] } else { vec![vec![0.3, 0.7], vec![0.6, 0.4]] })
            .collect();
        let f = RectangularFamily::new(&t, sets).unwrap();
        let y = RandomVariable::on_leaves_from(&t, vec![8.0, 0.0, 3.0, 6.0, 1.0, 9.0, 4.0, 2.0]).unwrap();
        let chain: Vec<StoppingTime> = (0..=3).rev().map(|d| StoppingTime::at_depth(&t, d).unwrap()).collect();
        let report = backward_submartingale_check(&t, &f, &y, &chain, 1000).unwrap();
        assert!(report.passed);
        assert!(report.strict_somewhere);
        assert_eq!(report.members, 128);

        let c = RandomVariable::constant(StoppingTime::at_leaves(&t), 2.0);
        let report = backward_submartingale_check(&t, &f, &c, &chain, 1000).unwrap();
        assert!(report.passed && !report.strict_somewhere);
        assert_eq!(report.limit, vec![2.0]);

        let increasing: Vec<StoppingTime> = chain.iter().rev().cloned().collect();
        assert!(matches!(
            backward_submartingale_check(&t, &f, &y, &increasing, 1000),
            Err(Error::NotOrdered(_))
        ));
    }
}
