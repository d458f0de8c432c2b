//! Classical Snell envelope under a single measure.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::measure::Measure;
use crate::scalar::{dot, Scalar, TOLERANCE};
use crate::tree::{AdaptedProcess, EventTree, NodeId, StoppingTime};

/// Smallest `Q`-supermartingale dominating `h`:
/// `U(leaf) = H(leaf)`, `U(n) = max(H(n), sum_c Q(n,c) U(c))`.
pub fn snell_envelope<S: Scalar>(
    tree: &EventTree<S>,
    q: &Measure<S>,
    h: &AdaptedProcess<S>,
) -> Result<AdaptedProcess<S>> {
    h.check_payoff(tree)?;
    tree.check_same(q.fingerprint())?;
    let mut u: Vec<S> = h.values().to_vec();
    for n in tree.nodes().rev() {
        if tree.is_leaf(n) {
            continue;
        }
        let cont = continuation(tree, q.kernel(n), n, &u);
        u[n.index()] = h.value(n).clone().max_of(cont);
    }
    AdaptedProcess::new(tree, u)
}

pub(crate) fn continuation<S: Scalar>(tree: &EventTree<S>, kernel: &[S], n: NodeId, u: &[S]) -> S {
    let values: Vec<S> = tree.children(n).iter().map(|c| u[c.index()].clone()).collect();
    dot(kernel, &values)
}

/// First node at or after `rho` on each path where `h >= u`. Leaves always
/// qualify when `u` equals `h` there.
pub(crate) fn first_contact<S: Scalar>(
    tree: &EventTree<S>,
    h: &AdaptedProcess<S>,
    u: &AdaptedProcess<S>,
    rho: &StoppingTime,
) -> Result<StoppingTime> {
    tree.check_same(rho.fingerprint())?;
    let mut region = Vec::new();
    let mut stack: Vec<NodeId> = rho.region().to_vec();
    while let Some(n) = stack.pop() {
        if h.value(n) >= u.value(n) || tree.is_leaf(n) {
            region.push(n);
        } else {
            stack.extend(tree.children(n).iter().copied());
        }
    }
    Ok(StoppingTime::from_region_unchecked(tree.fingerprint(), region))
}

/// Minimal optimal stopping time after `rho`: `inf { s >= rho : H_s >= U_s }`.
pub fn min_optimal_time<S: Scalar>(
    tree: &EventTree<S>,
    q: &Measure<S>,
    h: &AdaptedProcess<S>,
    rho: &StoppingTime,
) -> Result<StoppingTime> {
    let u = snell_envelope(tree, q, h)?;
    first_contact(tree, h, &u, rho)
}

/// Which optimality condition holds for a candidate stopping time.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Optimality {
    Optimal,
    /// The stopped envelope has nonzero drift at this node.
    NotMartingale { node: u64 },
    /// The payoff is below the envelope at this node of the candidate's region.
    NoContact { node: u64 },
}

impl Optimality {
    pub fn is_optimal(&self) -> bool {
        matches!(self, Optimality::Optimal)
    }
}

/// `tau_star` is optimal after `rho` iff the envelope stopped at `tau_star`
/// is a martingale from `rho` on and the payoff touches the envelope at
/// `tau_star`.
pub fn check_optimality<S: Scalar>(
    tree: &EventTree<S>,
    q: &Measure<S>,
    h: &AdaptedProcess<S>,
    rho: &StoppingTime,
    tau_star: &StoppingTime,
) -> Result<Optimality> {
    if !rho.leq(tau_star, tree)? {
        return Err(Error::NotOrdered("candidate stops before rho".into()));
    }
    let u = snell_envelope(tree, q, h)?;
    for n in rho.nodes_between(tau_star, tree) {
        let cont = continuation(tree, q.kernel(n), n, u.values());
        if !u.value(n).close_to(&cont, TOLERANCE) {
            return Ok(Optimality::NotMartingale { node: tree.label(n) });
        }
    }
    for &n in tau_star.region() {
        if !h.value(n).close_to(u.value(n), TOLERANCE) {
            return Ok(Optimality::NoContact { node: tree.label(n) });
        }
    }
    Ok(Optimality::Optimal)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::conditional_expectation;

    fn one_period(h_root: f64) -> (EventTree<f64>, Measure<f64>, AdaptedProcess<f64>) {
        let t: EventTree<f64> = EventTree::complete(1, 2).unwrap();
        let mut k = vec![Vec::new(); t.len()];
        k[0] = vec![0.3, 0.7];
        let q = Measure::new(&t, k).unwrap();
        let h = AdaptedProcess::new(&t, vec![h_root, 10.0, 0.0]).unwrap();
        (t, q, h)
    }

    #[test]
    fn envelope_examples() {
        let (t, q, h) = one_period(2.0);
        let u = snell_envelope(&t, &q, &h).unwrap();
        assert!((u.value(t.root()) - 3.0).abs() < 1e-12);

        let c = AdaptedProcess::constant(&t, 4.0);
        assert_eq!(snell_envelope(&t, &q, &c).unwrap(), c);

        // A Q-supermartingale is its own envelope.
        let sup = AdaptedProcess::new(&t, vec![5.0, 10.0, 0.0]).unwrap();
        assert_eq!(snell_envelope(&t, &q, &sup).unwrap(), sup);

        let neg = AdaptedProcess::new(&t, vec![-1.0, 0.0, 0.0]).unwrap();
        assert!(matches!(snell_envelope(&t, &q, &neg), Err(Error::NegativePayoff { node: 0 })));
    }

    #[test]
    fn min_optimal_time_examples() {
        let (t, q, h) = one_period(2.0);
        let root = StoppingTime::at_root(&t);
        let leaves = StoppingTime::at_leaves(&t);
        assert_eq!(min_optimal_time(&t, &q, &h, &root).unwrap(), leaves);
        assert_eq!(min_optimal_time(&t, &q, &h, &leaves).unwrap(), leaves);
        let c = AdaptedProcess::constant(&t, 1.0);
        assert_eq!(min_optimal_time(&t, &q, &c, &root).unwrap(), root);
        // Tie at the root stops immediately.
        let (t, q, h) = one_period(3.0);
        assert_eq!(min_optimal_time(&t, &q, &h, &root).unwrap(), StoppingTime::at_root(&t));
    }

    #[test]
    fn optimality_examples() {
        let (t, q, h) = one_period(2.0);
        let root = StoppingTime::at_root(&t);
        let star = min_optimal_time(&t, &q, &h, &root).unwrap();
        assert_eq!(check_optimality(&t, &q, &h, &root, &star).unwrap(), Optimality::Optimal);
        let u = snell_envelope(&t, &q, &h).unwrap();
        let attained = conditional_expectation(&t, &q, &h.stopped_at(&star, &t).unwrap(), &root).unwrap();
        assert!((attained.values()[0] - u.value(t.root())).abs() < 1e-12);

        assert_eq!(
            check_optimality(&t, &q, &h, &root, &root).unwrap(),
            Optimality::NoContact { node: 0 }
        );
        let c = AdaptedProcess::constant(&t, 1.0);
        let leaves = StoppingTime::at_leaves(&t);
        assert!(check_optimality(&t, &q, &c, &root, &leaves).unwrap().is_optimal());
        assert!(check_optimality(&t, &q, &c, &leaves, &root).is_err());
    }

    #[test]
    fn strict_supermartingale_is_not_a_martingale() {
        // H_root = 5 beats the continuation 3, so waiting loses value.
        let (t, q, _) = one_period(0.0);
        let h = AdaptedProcess::new(&t, vec![5.0, 10.0, 0.0]).unwrap();
        let root = StoppingTime::at_root(&t);
        let leaves = StoppingTime::at_leaves(&t);
        assert_eq!(
            check_optimality(&t, &q, &h, &root, &leaves).unwrap(),
            Optimality::NotMartingale { node: 0 }
        );
    }
}
