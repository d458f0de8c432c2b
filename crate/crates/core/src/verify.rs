//! The invariant suite run by `snell verify`.
//!
//! Each check compares a production computation against a second route
//! (usually an oracle from [`crate::oracle`]) on one model and summarizes the
//! outcome in a [`CheckReport`]. Randomized checks draw members, stopping
//! times and leaf variables from a seeded generator, so a report is a pure
//! function of the model and the options.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Result;
use crate::lower::{
    backward_submartingale_check, check_robust_optimality, lower_snell, tau_down_via_essinf, upper_snell,
    TSystem,
};
use crate::measure::{
    conditional_expectation, is_stable, pasting, robust_conditional_inf, Family, Measure, RectangularFamily,
};
use crate::models::Model;
use crate::oracle::{self, direct_conditional_inf, direct_lower_snell, direct_maximin, direct_snell};
use crate::scalar::{Scalar, TOLERANCE};
use crate::snell::{check_optimality, continuation, min_optimal_time, snell_envelope};
use crate::tree::{AdaptedProcess, EventTree, NodeId, RandomVariable, StoppingTime};

/// Knobs of [`verify_model`]. The defaults match the acceptance suite.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerifyOptions {
    pub budget: u128,
    pub seed: u64,
    /// Random draws for the pasting, restriction and conditional-inf checks.
    pub draws: usize,
    /// Random decreasing chains for the backward submartingale check.
    pub chains: usize,
    /// Every `rho` is checked when the tree has at most this many stopping
    /// times; otherwise the root and each fixed-depth time.
    pub all_rho_limit: u128,
    pub tsystem_limit: u128,
    pub stability_member_limit: u128,
    /// Members checked by the classical layer (all of them when fewer).
    pub classical_members: u128,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            budget: oracle::DEFAULT_BUDGET,
            seed: 0,
            draws: 100,
            chains: 50,
            all_rho_limit: 15,
            tsystem_limit: 10_000,
            stability_member_limit: 64,
            classical_members: 64,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Passed,
    Failed,
    Skipped,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckReport {
    pub name: &'static str,
    pub status: Status,
    /// Number of individual comparisons made.
    pub cases: usize,
    pub max_abs_diff: f64,
    /// First failures, or the reason for skipping.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.status != Status::Failed
    }

    fn skipped(name: &'static str, reason: String) -> Self {
        CheckReport {
            name,
            status: Status::Skipped,
            cases: 0,
            max_abs_diff: 0.0,
            notes: vec![reason],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyReport {
    pub tool: &'static str,
    pub version: &'static str,
    pub model_hash: String,
    pub exact: bool,
    pub seed: u64,
    pub checks: Vec<CheckReport>,
    pub passed: bool,
}

/// Accumulates comparisons for one check.
struct Tally {
    name: &'static str,
    cases: usize,
    max_abs_diff: f64,
    failures: Vec<String>,
}

const MAX_NOTES: usize = 5;

impl Tally {
    fn new(name: &'static str) -> Self {
        Tally {
            name,
            cases: 0,
            max_abs_diff: 0.0,
            failures: Vec::new(),
        }
    }

    fn fail(&mut self, note: impl FnOnce() -> String) {
        if self.failures.len() < MAX_NOTES {
            self.failures.push(note());
        } else if self.failures.len() == MAX_NOTES {
            self.failures.push("further failures omitted".into());
        }
    }

    fn holds(&mut self, ok: bool, note: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok {
            self.fail(note);
        }
    }

    fn equal<S: Scalar>(&mut self, a: &S, b: &S, note: impl FnOnce() -> String) {
        let diff = (a.clone() - b.clone()).abs_value().to_f64();
        self.max_abs_diff = self.max_abs_diff.max(diff);
        self.holds(a.close_to(b, TOLERANCE), || format!("{}: {} vs {}", note(), a.to_f64(), b.to_f64()));
    }

    fn equal_rv<S: Scalar>(&mut self, tree: &EventTree<S>, a: &RandomVariable<S>, b: &RandomVariable<S>, what: &str) {
        for ((n, x), y) in a.iter().zip(b.values()) {
            self.equal(x, y, || format!("{what} at node {}", tree.label(n)));
        }
    }

    fn finish(self) -> CheckReport {
        CheckReport {
            name: self.name,
            status: if self.failures.is_empty() { Status::Passed } else { Status::Failed },
            cases: self.cases,
            max_abs_diff: self.max_abs_diff,
            notes: self.failures,
        }
    }
}

// Random draws ----------------------------------------------------------------

/// Random stopping time `>= rho`: below each region node, stop with
/// probability `stop` at every node reached (always at leaves).
pub fn random_stopping_time_after<S: Scalar>(
    tree: &EventTree<S>,
    rho: &StoppingTime,
    rng: &mut impl Rng,
    stop: f64,
) -> Result<StoppingTime> {
    let mut region = Vec::new();
    let mut stack: Vec<NodeId> = rho.region().iter().rev().copied().collect();
    while let Some(n) = stack.pop() {
        if tree.is_leaf(n) || rng.gen_bool(stop) {
            region.push(n);
        } else {
            stack.extend(tree.children(n).iter().rev().copied());
        }
    }
    StoppingTime::new(tree, region)
}

/// Random stopping time `<= tau`.
pub fn random_stopping_time_before<S: Scalar>(
    tree: &EventTree<S>,
    tau: &StoppingTime,
    rng: &mut impl Rng,
    stop: f64,
) -> Result<StoppingTime> {
    let mut region = Vec::new();
    let mut stack = vec![tree.root()];
    while let Some(n) = stack.pop() {
        if tau.contains(n) || rng.gen_bool(stop) {
            region.push(n);
        } else {
            stack.extend(tree.children(n).iter().rev().copied());
        }
    }
    StoppingTime::new(tree, region)
}

/// Nonnegative leaf variable with values that are multiples of 0.01 in [0, 100].
pub fn random_leaf_variable<S: Scalar>(tree: &EventTree<S>, rng: &mut impl Rng) -> RandomVariable<S> {
    let values = tree
        .leaves()
        .iter()
        .map(|_| S::from_ratio(rng.gen_range(0..=10_000), 100))
        .collect();
    RandomVariable::on_leaves_from(tree, values).expect("one value per leaf")
}

pub fn random_member<S: Scalar>(family: &RectangularFamily<S>, rng: &mut impl Rng) -> Measure<S> {
    let index = rng.gen_range(0..family.member_count());
    family.member(index).expect("index in range")
}

/// Kernel with entries that are positive multiples of 1/100.
fn random_kernel<S: Scalar>(width: usize, rng: &mut impl Rng) -> Vec<S> {
    let weights: Vec<i64> = (0..width).map(|_| rng.gen_range(1..=20)).collect();
    let total: i64 = weights.iter().sum();
    let mut scaled: Vec<i64> = weights.iter().map(|w| (w * 100 / total).max(1)).collect();
    let excess: i64 = scaled.iter().sum::<i64>() - 100;
    let biggest = (0..width).max_by_key(|i| scaled[*i]).expect("nonempty");
    scaled[biggest] -= excess;
    scaled.into_iter().map(|w| S::from_ratio(w, 100)).collect()
}

/// Members examined by per-member checks: all of them, or a seeded sample.
fn sample_members<S: Scalar>(
    family: &RectangularFamily<S>,
    limit: u128,
    budget: u128,
    rng: &mut impl Rng,
) -> Result<Vec<Measure<S>>> {
    if family.member_count() <= limit {
        family.members(budget)
    } else {
        Ok((0..limit).map(|_| random_member(family, rng)).collect())
    }
}

/// Stopping times used as `rho`: all of them on small trees, otherwise the
/// root and every fixed-depth time.
fn rho_suite<S: Scalar>(tree: &EventTree<S>, limit: u128, budget: u128) -> Result<Vec<StoppingTime>> {
    let root = StoppingTime::at_root(tree);
    if oracle::count_stopping_times(tree, &root)? <= limit {
        oracle::enumerate_stopping_times(tree, &root, budget)
    } else {
        (0..=tree.horizon()).map(|d| StoppingTime::at_depth(tree, d)).collect()
    }
}

// Checks ----------------------------------------------------------------------

/// Minimax at the root: maximin by enumeration, minimax by enumeration and
/// the recursion all agree.
pub fn check_minimax<S: Scalar>(model: &Model<S>, budget: u128) -> Result<CheckReport> {
    let Model { tree, family, payoff } = model;
    let mut tally = Tally::new("minimax");
    let root = StoppingTime::at_root(tree);
    let recursion = lower_snell(tree, family, payoff)?.root_value;
    let maximin = direct_maximin(tree, family, payoff, &root, budget)?.values()[0].clone();
    let minimax = direct_lower_snell(tree, family, payoff, &root, budget)?.values()[0].clone();
    tally.equal(&maximin, &minimax, || "sup-inf vs inf-sup".into());
    tally.equal(&minimax, &recursion, || "inf-sup vs recursion".into());
    Ok(tally.finish())
}

/// The robust stopping time attains the envelope against every member, solves
/// the maximin problem at the root, and coincides with the pathwise minimum of
/// the members' optimal times.
pub fn check_robust_optimality_suite<S: Scalar>(
    model: &Model<S>,
    opts: &VerifyOptions,
) -> Result<CheckReport> {
    let Model { tree, family, payoff } = model;
    let mut tally = Tally::new("robust_optimality");
    let result = lower_snell(tree, family, payoff)?;
    for rho in rho_suite(tree, opts.all_rho_limit, opts.budget)? {
        let report = check_robust_optimality(tree, family, payoff, &rho, opts.budget)?;
        tally.max_abs_diff = tally.max_abs_diff.max(report.max_abs_diff);
        tally.holds(report.passed, || format!("attainment fails after rho = {:?}", report.rho));
        let hitting = result.tau_down_from(tree, payoff, &rho)?;
        let essinf = tau_down_via_essinf(tree, family, payoff, &rho, opts.budget)?;
        tally.holds(hitting == essinf, || {
            format!(
                "after rho = {:?}: first contact {:?}, essinf {:?}",
                rho.labels(tree),
                hitting.labels(tree),
                essinf.labels(tree)
            )
        });
    }
    Ok(tally.finish())
}

/// Every pasting of two members at every stopping time is again a member.
pub fn check_stability<S: Scalar>(model: &Model<S>, opts: &VerifyOptions) -> Result<CheckReport> {
    let Model { tree, family, .. } = model;
    let count = family.member_count();
    if count > opts.stability_member_limit {
        return Ok(CheckReport::skipped(
            "stability",
            format!("{count} members exceed the limit of {}", opts.stability_member_limit),
        ));
    }
    let mut tally = Tally::new("stability");
    let explicit = family.to_explicit(opts.budget)?;
    let outcome = is_stable(tree, &explicit, u128::MAX)?;
    tally.holds(outcome.is_stable(), || format!("{outcome:?}"));
    Ok(tally.finish())
}

/// Tower identity for pasted measures and the restriction identity for the
/// robust conditional infimum, on random draws.
pub fn check_pasting_lemmas<S: Scalar>(
    model: &Model<S>,
    opts: &VerifyOptions,
    rng: &mut impl Rng,
) -> Result<CheckReport> {
    let Model { tree, family, payoff } = model;
    let mut tally = Tally::new("pasting_and_restriction");
    let root = StoppingTime::at_root(tree);
    for _ in 0..opts.draws {
        let q1 = random_member(family, rng);
        let q2 = random_member(family, rng);
        let sigma = random_stopping_time_after(tree, &root, rng, 0.4)?;
        let tau = random_stopping_time_after(tree, &root, rng, 0.4)?;
        let y = random_leaf_variable(tree, rng);

        // E_{Q3}[Y | F_tau] = E_{Q1}[ E_{Q2}[Y | F_{sigma v tau}] | F_tau ].
        let q3 = pasting(tree, &q1, &q2, &sigma)?;
        let lhs = conditional_expectation(tree, &q3, &y, &tau)?;
        let inner = conditional_expectation(tree, &q2, &y, &sigma.join(&tau, tree)?)?;
        let rhs = conditional_expectation(tree, &q1, &inner, &tau)?;
        tally.equal_rv(tree, &lhs, &rhs, "tower identity");

        // For sigma <= tau <= tau2:
        // E_{Q0}[ ess inf_Q E_Q[H_{tau2} | F_tau] | F_sigma ]
        //   = min over Q agreeing with Q0 before tau of E_Q[H_{tau2} | F_sigma].
        let sigma = random_stopping_time_before(tree, &tau, rng, 0.4)?;
        let tau2 = random_stopping_time_after(tree, &tau, rng, 0.4)?;
        let h_tau2 = payoff.stopped_at(&tau2, tree)?;
        let inner = robust_conditional_inf(tree, family, &h_tau2, &tau)?;
        let lhs = conditional_expectation(tree, &q1, &inner, &sigma)?;
        let restricted = family.restrict(tree, &q1, &tau)?;
        let rhs = direct_conditional_inf(tree, &restricted, &h_tau2, &sigma, opts.budget)?;
        tally.equal_rv(tree, &lhs, &rhs, "restriction identity");
    }
    Ok(tally.finish())
}

/// The robust conditional infimum by recursion against the minimum over
/// enumerated members.
pub fn check_conditional_inf_oracle<S: Scalar>(
    model: &Model<S>,
    opts: &VerifyOptions,
    rng: &mut impl Rng,
) -> Result<CheckReport> {
    let Model { tree, family, .. } = model;
    let mut tally = Tally::new("conditional_inf_oracle");
    let root = StoppingTime::at_root(tree);
    let draws = opts.draws.min(20);
    for _ in 0..draws {
        let tau = random_stopping_time_after(tree, &root, rng, 0.3)?;
        let x = random_leaf_variable(tree, rng);
        let fast = robust_conditional_inf(tree, family, &x, &tau)?;
        let slow = direct_conditional_inf(tree, family, &x, &tau, opts.budget)?;
        tally.equal_rv(tree, &fast, &slow, "conditional inf");
    }
    Ok(tally.finish())
}

/// Random decreasing chains ending in a repeated element.
pub fn random_decreasing_chain<S: Scalar>(tree: &EventTree<S>, rng: &mut impl Rng) -> Result<Vec<StoppingTime>> {
    let root = StoppingTime::at_root(tree);
    let mut chain = vec![if rng.gen_bool(0.3) {
        StoppingTime::at_leaves(tree)
    } else {
        random_stopping_time_after(tree, &root, rng, 0.3)?
    }];
    loop {
        let last = chain.last().expect("nonempty");
        if *last == root {
            break;
        }
        let next = random_stopping_time_before(tree, last, rng, 0.3)?;
        chain.push(next);
    }
    let tail = chain.last().expect("nonempty").clone();
    chain.push(tail);
    Ok(chain)
}

pub fn check_backward_submartingale<S: Scalar>(
    model: &Model<S>,
    opts: &VerifyOptions,
    rng: &mut impl Rng,
) -> Result<CheckReport> {
    let Model { tree, family, .. } = model;
    let mut tally = Tally::new("backward_submartingale");
    for _ in 0..opts.chains {
        let chain = random_decreasing_chain(tree, rng)?;
        let y = random_leaf_variable(tree, rng);
        let report = backward_submartingale_check(tree, family, &y, &chain, opts.budget)?;
        tally.max_abs_diff = tally.max_abs_diff.max((-report.min_slack).max(0.0));
        tally.holds(report.passed, || {
            format!(
                "chain of length {}: min slack {}, stabilized {}",
                report.chain_length, report.min_slack, report.stabilized
            )
        });
    }
    Ok(tally.finish())
}

/// Direct-definition values at every stopping time agree on coincidence
/// events, and the recursion's envelope reproduces them.
pub fn check_tsystem<S: Scalar>(model: &Model<S>, opts: &VerifyOptions) -> Result<CheckReport> {
    let Model { tree, family, payoff } = model;
    let count = oracle::count_stopping_times(tree, &StoppingTime::at_root(tree))?;
    if count > opts.tsystem_limit {
        return Ok(CheckReport::skipped(
            "tsystem",
            format!("{count} stopping times exceed the limit of {}", opts.tsystem_limit),
        ));
    }
    let mut tally = Tally::new("tsystem");
    let system = TSystem::build(tree, family, payoff, opts.budget)?;
    let envelope = lower_snell(tree, family, payoff)?.envelope;
    let compat = system.compatibility(tree);
    let pasted = system.pasting(&envelope)?;
    for r in [&compat, &pasted] {
        tally.cases += r.nodes_checked;
        tally.max_abs_diff = tally.max_abs_diff.max(r.max_abs_diff);
    }
    if !compat.passed {
        tally.fail(|| format!("compatibility off by {}", compat.max_abs_diff));
    }
    if !pasted.passed {
        tally.fail(|| format!("pasting off by {}", pasted.max_abs_diff));
    }
    Ok(tally.finish())
}

/// `w` is a `q`-supermartingale dominating `h`, up to the tolerance.
pub fn is_dominating_supermartingale<S: Scalar>(
    tree: &EventTree<S>,
    q: &Measure<S>,
    h: &AdaptedProcess<S>,
    w: &[S],
) -> bool {
    tree.nodes().all(|n| {
        let dominates = w[n.index()].at_least(h.value(n), TOLERANCE);
        dominates
            && (tree.is_leaf(n) || w[n.index()].at_least(&continuation(tree, q.kernel(n), n, w), TOLERANCE))
    })
}

/// Outcome of [`exhaustive_minimality`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MinimalityCount {
    pub candidates: u64,
    pub admissible: u64,
    /// Admissible candidates that dip below the envelope somewhere.
    pub violations: u64,
}

/// Every integer-valued process with values in `0..=max` that is a dominating
/// supermartingale lies above the Snell envelope.
pub fn exhaustive_minimality<S: Scalar>(
    tree: &EventTree<S>,
    q: &Measure<S>,
    h: &AdaptedProcess<S>,
    max: i64,
) -> Result<MinimalityCount> {
    let u = snell_envelope(tree, q, h)?;
    let len = tree.len();
    let mut digits = vec![0i64; len];
    let mut w: Vec<S> = vec![S::zero(); len];
    let mut out = MinimalityCount { candidates: 0, admissible: 0, violations: 0 };
    loop {
        out.candidates += 1;
        if is_dominating_supermartingale(tree, q, h, &w) {
            out.admissible += 1;
            if w.iter().zip(u.values()).any(|(a, b)| !a.at_least(b, TOLERANCE)) {
                out.violations += 1;
            }
        }
        let mut i = 0;
        loop {
            if i == len {
                return Ok(out);
            }
            if digits[i] < max {
                digits[i] += 1;
                w[i] = S::from_ratio(digits[i], 1);
                break;
            }
            digits[i] = 0;
            w[i] = S::zero();
            i += 1;
        }
    }
}

/// Classical Snell layer for each examined member: domination, the
/// supermartingale property, minimality under perturbation, agreement with
/// enumeration, and optimality of the minimal optimal time.
pub fn check_classical<S: Scalar>(
    model: &Model<S>,
    opts: &VerifyOptions,
    rng: &mut impl Rng,
) -> Result<CheckReport> {
    let Model { tree, family, payoff } = model;
    let mut tally = Tally::new("classical_snell");
    let root = StoppingTime::at_root(tree);
    let step = S::from_ratio(1, 1000);
    for q in sample_members(family, opts.classical_members, opts.budget, rng)? {
        let u = snell_envelope(tree, &q, payoff)?;
        tally.holds(is_dominating_supermartingale(tree, &q, payoff, u.values()), || {
            "envelope is not a dominating supermartingale".into()
        });

        // Lowering the envelope at any single node breaks one of the two properties.
        for n in tree.nodes() {
            let mut w = u.values().to_vec();
            w[n.index()] = w[n.index()].clone() - step.clone();
            tally.holds(!is_dominating_supermartingale(tree, &q, payoff, &w), || {
                format!("envelope lowered at node {} still dominates", tree.label(n))
            });
        }

        // Adding a nonnegative supermartingale keeps both properties.
        let mut bump = vec![S::zero(); tree.len()];
        for n in tree.nodes().rev() {
            let extra = S::from_ratio(rng.gen_range(0..=100), 10);
            bump[n.index()] = if tree.is_leaf(n) {
                extra
            } else {
                continuation(tree, q.kernel(n), n, &bump) + extra
            };
        }
        let w: Vec<S> = u.values().iter().zip(&bump).map(|(a, b)| a.clone() + b.clone()).collect();
        tally.holds(is_dominating_supermartingale(tree, &q, payoff, &w), || {
            "envelope plus a supermartingale is rejected".into()
        });

        let direct = direct_snell(tree, &q, payoff, &root, opts.budget)?;
        tally.equal(u.value(tree.root()), &direct.values()[0], || "root value vs enumeration".into());

        for rho in [root.clone(), StoppingTime::at_depth(tree, 1)?] {
            let star = min_optimal_time(tree, &q, payoff, &rho)?;
            let verdict = check_optimality(tree, &q, payoff, &rho, &star)?;
            tally.holds(verdict.is_optimal(), || format!("minimal optimal time rejected: {verdict:?}"));
            let attained = conditional_expectation(tree, &q, &payoff.stopped_at(&star, tree)?, &rho)?;
            tally.equal_rv(tree, &attained, &u.sample(&rho)?, "attainment");
        }
    }
    Ok(tally.finish())
}

/// `H <= lower <= U^Q <= upper` node-wise for every examined member.
pub fn check_sandwich<S: Scalar>(model: &Model<S>, opts: &VerifyOptions, rng: &mut impl Rng) -> Result<CheckReport> {
    let Model { tree, family, payoff } = model;
    let mut tally = Tally::new("sandwich");
    let lower = lower_snell(tree, family, payoff)?.envelope;
    let upper = upper_snell(tree, family, payoff)?;
    for q in sample_members(family, opts.classical_members, opts.budget, rng)? {
        let u = snell_envelope(tree, &q, payoff)?;
        for n in tree.nodes() {
            let chain = [payoff.value(n), lower.value(n), u.value(n), upper.value(n)];
            tally.holds(chain.windows(2).all(|w| w[1].at_least(w[0], TOLERANCE)), || {
                format!("order broken at node {}", tree.label(n))
            });
        }
    }
    Ok(tally.finish())
}

/// Adding kernels at a node never raises the lower envelope.
pub fn check_monotonicity<S: Scalar>(model: &Model<S>, opts: &VerifyOptions, rng: &mut impl Rng) -> Result<CheckReport> {
    let Model { tree, family, payoff } = model;
    let mut tally = Tally::new("monotonicity");
    let base = lower_snell(tree, family, payoff)?.envelope;
    let internal: Vec<NodeId> = tree.internal_nodes().collect();
    for _ in 0..opts.draws.min(10) {
        let n = internal[rng.gen_range(0..internal.len())];
        let kernel = random_kernel(tree.children(n).len(), rng);
        let larger = family.enlarge(tree, n, vec![kernel])?;
        let wider = lower_snell(tree, &larger, payoff)?.envelope;
        for m in tree.nodes() {
            tally.holds(base.value(m).at_least(wider.value(m), TOLERANCE), || {
                format!("enlarging node {} raised node {}", tree.label(n), tree.label(m))
            });
        }
    }
    Ok(tally.finish())
}

/// Runs every check on `model`.
pub fn verify_model<S: Scalar>(model: &Model<S>, opts: &VerifyOptions) -> Result<VerifyReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let checks = vec![
        check_minimax(model, opts.budget)?,
        check_robust_optimality_suite(model, opts)?,
        check_stability(model, opts)?,
        check_pasting_lemmas(model, opts, &mut rng)?,
        check_conditional_inf_oracle(model, opts, &mut rng)?,
        check_backward_submartingale(model, opts, &mut rng)?,
        check_tsystem(model, opts)?,
        check_classical(model, opts, &mut rng)?,
        check_sandwich(model, opts, &mut rng)?,
        check_monotonicity(model, opts, &mut rng)?,
    ];
    let passed = checks.iter().all(CheckReport::passed);
    Ok(VerifyReport {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        model_hash: model.hash(),
        exact: S::EXACT,
        seed: opts.seed,
        checks,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{random_instance, InstanceBounds};
    use crate::scalar::Exact;

    #[test]
    fn random_times_respect_order() {
        let t: EventTree<f64> = EventTree::complete(3, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let root = StoppingTime::at_root(&t);
            let a = random_stopping_time_after(&t, &root, &mut rng, 0.4).unwrap();
            let b = random_stopping_time_after(&t, &a, &mut rng, 0.4).unwrap();
            let c = random_stopping_time_before(&t, &a, &mut rng, 0.4).unwrap();
            assert!(a.leq(&b, &t).unwrap());
            assert!(c.leq(&a, &t).unwrap());
        }
        let chain = random_decreasing_chain(&t, &mut rng).unwrap();
        assert!(chain.windows(2).all(|w| w[1].leq(&w[0], &t).unwrap()));
        assert_eq!(chain[chain.len() - 1], chain[chain.len() - 2]);
    }

    #[test]
    fn suite_passes_on_random_instance() {
        let model: Model<f64> = random_instance(2, &InstanceBounds::default()).unwrap();
        let opts = VerifyOptions { draws: 10, chains: 5, ..VerifyOptions::default() };
        let report = verify_model(&model, &opts).unwrap();
        assert!(report.passed, "{report:#?}");
    }

    #[test]
    fn suite_passes_in_exact_mode() {
        let bounds = InstanceBounds { max_depth: 2, ..InstanceBounds::default() };
        let model: Model<Exact> = random_instance(4, &bounds).unwrap();
        let opts = VerifyOptions { draws: 5, chains: 3, ..VerifyOptions::default() };
        let report = verify_model(&model, &opts).unwrap();
        assert!(report.passed, "{report:#?}");
        assert!(report.exact);
    }

    #[test]
    fn exhaustive_minimality_on_one_period_tree() {
        let t: EventTree<Exact> = EventTree::complete(1, 2).unwrap();
        let mut k = vec![Vec::new(); t.len()];
        k[0] = vec![Exact::from_ratio(1, 3), Exact::from_ratio(2, 3)];
        let q = Measure::new(&t, k).unwrap();
        let h = AdaptedProcess::new(&t, vec![Exact::from_ratio(1, 1), Exact::from_ratio(3, 1), Exact::from_ratio(0, 1)])
            .unwrap();
        let count = exhaustive_minimality(&t, &q, &h, 4).unwrap();
        assert_eq!(count.candidates, 125);
        // Leaf pairs (a, b) with a >= 3, and roots r >= max(1, a/3 + 2b/3).
        assert_eq!(count.admissible, 22);
        assert_eq!(count.violations, 0);
    }
}
