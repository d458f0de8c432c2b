//! Model generators and JSON ingestion.
//!
//! A model bundles an event tree (with its reference kernels), a rectangular
//! family, and a payoff process. On disk it is a single JSON document:
//!
//! ```json
//! {"horizon": 1,
//!  "nodes": [{"id": 0, "parent": null, "r_prob": null, "payoff": 2.0},
//!            {"id": 1, "parent": 0, "r_prob": 0.5, "payoff": 10.0},
//!            {"id": 2, "parent": 0, "r_prob": 0.5, "payoff": 0.0}],
//!  "kernel_sets": {"0": [[0.3, 0.7], [0.7, 0.3]]}}
//! ```
//!
//! Kernel entries follow the children of a node in increasing id order. An
//! explicit (possibly unstable) family is stored under `"members"` instead,
//! each member as `{"kernels": {"<id>": [...]}}`.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::Number;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::measure::{ExplicitFamily, Measure, RectangularFamily};
use crate::oracle::{self, ValueTable};
use crate::scalar::Scalar;
use crate::tree::{AdaptedProcess, EventTree, NodeId, NodeSpec, StoppingTime};

#[derive(Clone, Debug, PartialEq)]
pub struct Model<S> {
    pub tree: EventTree<S>,
    pub family: RectangularFamily<S>,
    pub payoff: AdaptedProcess<S>,
}

/// A model whose family is an explicit list of measures.
#[derive(Clone, Debug, PartialEq)]
pub struct ExplicitModel<S> {
    pub tree: EventTree<S>,
    pub family: ExplicitFamily<S>,
    pub payoff: AdaptedProcess<S>,
    /// Seed of the search that produced the model, when it came from one.
    pub seed: Option<u64>,
}

#[derive(Clone)]
pub enum Payoff<S> {
    Put,
    Call,
    Custom(Arc<dyn Fn(&S) -> S + Send + Sync>),
}

impl<S: Scalar> Payoff<S> {
    fn apply(&self, price: &S, strike: &S) -> S {
        match self {
            Payoff::Put => (strike.clone() - price.clone()).max_of(S::zero()),
            Payoff::Call => (price.clone() - strike.clone()).max_of(S::zero()),
            Payoff::Custom(f) => f(price),
        }
    }
}

impl<S> std::fmt::Debug for Payoff<S> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Payoff::Put => f.write_str("Put"),
            Payoff::Call => f.write_str("Call"),
            Payoff::Custom(_) => f.write_str("Custom"),
        }
    }
}

/// Binomial market with drift ambiguity: the up-probability ranges over
/// `[p_lo, p_hi]`, represented by its two endpoint kernels.
#[derive(Clone, Debug)]
pub struct BinomialParams<S> {
    pub steps: usize,
    pub s0: S,
    pub up: S,
    pub down: S,
    pub p_lo: S,
    pub p_hi: S,
    pub payoff: Payoff<S>,
    pub strike: S,
}

impl<S: Scalar> BinomialParams<S> {
    fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.into()));
        if self.steps == 0 {
            return bad("steps must be at least 1");
        }
        if self.steps > 20 {
            return bad("steps above 20 produce more than two million nodes");
        }
        if !(S::zero() < self.p_lo && self.p_lo <= self.p_hi && self.p_hi < S::one()) {
            return bad("need 0 < p_lo <= p_hi < 1");
        }
        if !(S::zero() < self.down && self.down < self.up) {
            return bad("need 0 < d < u");
        }
        if self.s0 <= S::zero() {
            return bad("s0 must be positive");
        }
        if self.strike < S::zero() {
            return bad("strike must be nonnegative");
        }
        Ok(())
    }
}

/// Non-recombining binary tree over recombining prices. Node 0 is the root;
/// each node's first child is the up move.
pub fn binomial_kappa<S: Scalar>(params: &BinomialParams<S>) -> Result<Model<S>> {
    params.validate()?;
    let two = S::one() + S::one();
    let p_mid = (params.p_lo.clone() + params.p_hi.clone()) / two;
    let mut specs = vec![NodeSpec { id: 0, parent: None, r_prob: None }];
    let mut prices = vec![params.s0.clone()];
    let mut level = vec![0u64];
    let mut next = 1u64;
    for _ in 0..params.steps {
        let mut next_level = Vec::with_capacity(level.len() * 2);
        for &p in &level {
            let base = prices[p as usize].clone();
            for (factor, prob) in [
                (params.up.clone(), p_mid.clone()),
                (params.down.clone(), S::one() - p_mid.clone()),
            ] {
                specs.push(NodeSpec { id: next, parent: Some(p), r_prob: Some(prob) });
                prices.push(base.clone() * factor);
                next_level.push(next);
                next += 1;
            }
        }
        level = next_level;
    }
    let tree = EventTree::new(specs)?;
    // Ids were assigned breadth-first, so they coincide with node indices.
    let payoff = AdaptedProcess::from_fn(&tree, |n| {
        params.payoff.apply(&prices[tree.label(n) as usize], &params.strike)
    });
    payoff.check_payoff(&tree)?;
    let endpoints = vec![
        vec![params.p_lo.clone(), S::one() - params.p_lo.clone()],
        vec![params.p_hi.clone(), S::one() - params.p_hi.clone()],
    ];
    let sets = tree
        .nodes()
        .map(|n| if tree.is_leaf(n) { Vec::new() } else { endpoints.clone() })
        .collect();
    let family = RectangularFamily::new(&tree, sets)?;
    Ok(Model { tree, family, payoff })
}

/// Size limits for [`random_instance`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct InstanceBounds {
    pub max_depth: usize,
    pub max_branching: usize,
    pub max_kernels: usize,
    /// Upper bound on the number of stopping times from the root.
    pub max_stopping_times: u128,
    /// Upper bound on members times stopping times.
    pub max_work: u128,
}

impl Default for InstanceBounds {
    fn default() -> Self {
        InstanceBounds {
            max_depth: 4,
            max_branching: 3,
            max_kernels: 3,
            max_stopping_times: 5_000,
            max_work: 200_000,
        }
    }
}

impl InstanceBounds {
    fn validate(&self) -> Result<()> {
        if self.max_depth == 0 || self.max_branching < 2 || self.max_kernels == 0 {
            return Err(Error::InvalidParameter(
                "need max_depth >= 1, max_branching >= 2, max_kernels >= 1".into(),
            ));
        }
        Ok(())
    }
}

/// Kernel over `b` children with entries that are multiples of 1/100 and at
/// least 0.05.
fn random_kernel<S: Scalar>(rng: &mut ChaCha8Rng, b: usize) -> (Vec<i64>, Vec<S>) {
    let spare = 100 - 5 * b as i64;
    let mut cuts: Vec<i64> = (0..b - 1).map(|_| rng.gen_range(0..=spare)).collect();
    cuts.sort_unstable();
    let mut weights = Vec::with_capacity(b);
    let mut prev = 0;
    for c in cuts.iter().chain(std::iter::once(&spare)) {
        weights.push(5 + c - prev);
        prev = *c;
    }
    let kernel = weights.iter().map(|w| S::from_ratio(*w, 100)).collect();
    (weights, kernel)
}

/// Deterministic random model: shape, reference kernels, kernel sets and
/// payoffs all derive from `seed`. Payoffs are multiples of 0.01 in [0, 100].
pub fn random_instance<S: Scalar>(seed: u64, bounds: &InstanceBounds) -> Result<Model<S>> {
    bounds.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (parents, branching) = loop {
        let depth = rng.gen_range(1..=bounds.max_depth);
        let mut parents: Vec<Option<usize>> = vec![None];
        let mut branching: Vec<usize> = Vec::new();
        let mut level = vec![0usize];
        for _ in 0..depth {
            let mut next = Vec::new();
            for &p in &level {
                let b = rng.gen_range(2..=bounds.max_branching);
                while branching.len() <= p {
                    branching.push(0);
                }
                branching[p] = b;
                for _ in 0..b {
                    next.push(parents.len());
                    parents.push(Some(p));
                }
            }
            level = next;
        }
        branching.resize(parents.len(), 0);
        if stopping_time_count(&branching, &parents) <= bounds.max_stopping_times {
            break (parents, branching);
        }
    };

    let mut ref_kernels: Vec<Vec<S>> = vec![Vec::new(); parents.len()];
    for (n, &b) in branching.iter().enumerate() {
        if b > 0 {
            ref_kernels[n] = random_kernel(&mut rng, b).1;
        }
    }
    let mut slot = vec![0usize; parents.len()];
    let mut seen = vec![0usize; parents.len()];
    for (i, p) in parents.iter().enumerate() {
        if let Some(p) = p {
            slot[i] = seen[*p];
            seen[*p] += 1;
        }
    }
    let specs = parents
        .iter()
        .enumerate()
        .map(|(i, p)| NodeSpec {
            id: i as u64,
            parent: p.map(|p| p as u64),
            r_prob: p.map(|p| ref_kernels[p][slot[i]].clone()),
        })
        .collect();
    let tree: EventTree<S> = EventTree::new(specs)?;

    let st = oracle::count_stopping_times(&tree, &StoppingTime::at_root(&tree))?;
    let member_cap = (bounds.max_work / st).max(1);
    let mut internal: Vec<NodeId> = tree.internal_nodes().collect();
    internal.shuffle(&mut rng);
    let mut sets: Vec<Vec<Vec<S>>> = vec![Vec::new(); tree.len()];
    let mut members = 1u128;
    for n in internal {
        let mut k = rng.gen_range(1..=bounds.max_kernels) as u128;
        while k > 1 && members * k > member_cap {
            k -= 1;
        }
        members *= k;
        let b = tree.children(n).len();
        let mut drawn: Vec<Vec<i64>> = Vec::new();
        while (drawn.len() as u128) < k {
            let (w, kernel) = random_kernel::<S>(&mut rng, b);
            if !drawn.contains(&w) {
                drawn.push(w);
                sets[n.index()].push(kernel);
            }
        }
    }
    let family = RectangularFamily::new(&tree, sets)?;
    let payoff = AdaptedProcess::from_fn(&tree, |_| S::from_ratio(rng.gen_range(0..=10_000), 100));
    Ok(Model { tree, family, payoff })
}

fn stopping_time_count(branching: &[usize], parents: &[Option<usize>]) -> u128 {
    let mut count = vec![1u128; parents.len()];
    let mut prod = vec![1u128; parents.len()];
    for i in (0..parents.len()).rev() {
        if branching[i] > 0 {
            count[i] = prod[i].saturating_add(1);
        }
        if let Some(p) = parents[i] {
            prod[p] = prod[p].saturating_mul(count[i]);
        }
    }
    count[0]
}

/// Searches for a two-member explicit family on a two-period binary tree
/// whose members differ at both intermediate nodes and whose maximin value
/// at the root falls strictly below its minimax value. Returns the first hit
/// and the number of attempts it took.
pub fn search_unstable_gap<S: Scalar>(seed: u64, max_attempts: usize) -> Result<(ExplicitModel<S>, usize)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tree: EventTree<S> = EventTree::complete(2, 2)?;
    for attempt in 1..=max_attempts {
        let root_kernel = random_kernel::<S>(&mut rng, 2).1;
        let mut members = Vec::with_capacity(2);
        let mut raw: Vec<Vec<Vec<i64>>> = Vec::new();
        for _ in 0..2 {
            let mut kernels = vec![Vec::new(); tree.len()];
            let mut w = Vec::new();
            kernels[0] = root_kernel.clone();
            for n in [1usize, 2] {
                let (weights, k) = random_kernel::<S>(&mut rng, 2);
                w.push(weights);
                kernels[n] = k;
            }
            raw.push(w);
            members.push(Measure::new(&tree, kernels)?);
        }
        let payoff = AdaptedProcess::from_fn(&tree, |_| S::from_ratio(rng.gen_range(0..=100), 1));
        if raw[0][0] == raw[1][0] || raw[0][1] == raw[1][1] {
            continue;
        }
        let family = ExplicitFamily::new(members)?;
        let table = ValueTable::build(&tree, &family, &payoff, oracle::DEFAULT_BUDGET)?;
        let gap = table.inf_sup().0 - table.sup_inf().0;
        if gap.to_f64() > 1e-6 {
            let model = ExplicitModel { tree, family, payoff, seed: Some(seed) };
            return Ok((model, attempt));
        }
    }
    Err(Error::InvalidParameter(format!(
        "no gap instance within {max_attempts} attempts for seed {seed}"
    )))
}

// JSON ----------------------------------------------------------------------

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NodeJson {
    id: u64,
    parent: Option<u64>,
    r_prob: Option<Number>,
    payoff: Number,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MemberJson {
    kernels: BTreeMap<u64, Vec<Number>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelJson {
    horizon: usize,
    nodes: Vec<NodeJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    kernel_sets: Option<BTreeMap<u64, Vec<Vec<Number>>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    members: Option<Vec<MemberJson>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
}

fn number<S: Scalar>(n: &Number, location: impl Fn() -> String) -> Result<S> {
    S::parse_decimal(&n.to_string()).ok_or_else(|| Error::Schema {
        location: location(),
        reason: format!("not a finite number: {n}"),
    })
}

pub(crate) fn to_number<S: Scalar>(x: &S) -> Number {
    Number::from_str(&x.to_decimal_string()).expect("decimal rendering is valid JSON")
}

fn parse_tree<S: Scalar>(doc: &ModelJson) -> Result<(EventTree<S>, AdaptedProcess<S>)> {
    let mut specs = Vec::with_capacity(doc.nodes.len());
    let mut payoffs = BTreeMap::new();
    for (i, node) in doc.nodes.iter().enumerate() {
        let r_prob = match (&node.parent, &node.r_prob) {
            (Some(_), None) => {
                return Err(Error::Schema {
                    location: format!("nodes[{i}].r_prob"),
                    reason: format!("node {} has a parent but no r_prob", node.id),
                })
            }
            (_, Some(p)) => Some(number::<S>(p, || format!("nodes[{i}].r_prob"))?),
            (None, None) => None,
        };
        specs.push(NodeSpec { id: node.id, parent: node.parent, r_prob });
        payoffs.insert(node.id, number::<S>(&node.payoff, || format!("nodes[{i}].payoff"))?);
    }
    let tree = EventTree::new(specs)?;
    if tree.horizon() != doc.horizon {
        return Err(Error::Schema {
            location: "horizon".into(),
            reason: format!("declared {} but leaves sit at depth {}", doc.horizon, tree.horizon()),
        });
    }
    let payoff = AdaptedProcess::from_fn(&tree, |n| payoffs[&tree.label(n)].clone());
    payoff.check_payoff(&tree)?;
    Ok((tree, payoff))
}

fn parse_kernel<S: Scalar>(entries: &[Number], location: &str) -> Result<Vec<S>> {
    entries
        .iter()
        .enumerate()
        .map(|(j, p)| number::<S>(p, || format!("{location}[{j}]")))
        .collect()
}

fn model_from_doc<S: Scalar>(doc: &ModelJson) -> Result<Model<S>> {
    let (tree, payoff) = parse_tree::<S>(doc)?;
    let raw = doc.kernel_sets.as_ref().ok_or_else(|| Error::Schema {
        location: "kernel_sets".into(),
        reason: "missing field".into(),
    })?;
    for id in raw.keys() {
        let n = tree.node(*id).map_err(|_| Error::Schema {
            location: format!("kernel_sets.{id}"),
            reason: "no such node".into(),
        })?;
        if tree.is_leaf(n) {
            return Err(Error::Schema {
                location: format!("kernel_sets.{id}"),
                reason: "leaves carry no kernel set".into(),
            });
        }
    }
    let mut sets = vec![Vec::new(); tree.len()];
    for n in tree.internal_nodes() {
        let id = tree.label(n);
        let set = raw.get(&id).ok_or_else(|| Error::Schema {
            location: format!("kernel_sets.{id}"),
            reason: format!("missing kernel set for internal node {id}"),
        })?;
        for (k, kernel) in set.iter().enumerate() {
            sets[n.index()].push(parse_kernel(kernel, &format!("kernel_sets.{id}[{k}]"))?);
        }
    }
    let family = RectangularFamily::new(&tree, sets)?;
    Ok(Model { tree, family, payoff })
}

fn explicit_from_doc<S: Scalar>(doc: &ModelJson) -> Result<ExplicitModel<S>> {
    let (tree, payoff) = parse_tree::<S>(doc)?;
    let raw = doc.members.as_ref().ok_or_else(|| Error::Schema {
        location: "members".into(),
        reason: "missing field".into(),
    })?;
    let mut members = Vec::with_capacity(raw.len());
    for (m, member) in raw.iter().enumerate() {
        let mut kernels = vec![Vec::new(); tree.len()];
        for n in tree.internal_nodes() {
            let id = tree.label(n);
            let k = member.kernels.get(&id).ok_or_else(|| Error::Schema {
                location: format!("members[{m}].kernels.{id}"),
                reason: format!("missing kernel for internal node {id}"),
            })?;
            kernels[n.index()] = parse_kernel(k, &format!("members[{m}].kernels.{id}"))?;
        }
        members.push(Measure::new(&tree, kernels)?);
    }
    let family = ExplicitFamily::new(members)?;
    Ok(ExplicitModel { tree, family, payoff, seed: doc.seed })
}

fn tree_doc<S: Scalar>(tree: &EventTree<S>, payoff: &AdaptedProcess<S>) -> ModelJson {
    let nodes = tree
        .nodes()
        .map(|n| {
            let r_prob = tree.parent(n).map(|p| {
                let slot = tree.children(p).iter().position(|c| *c == n).expect("child");
                to_number(&tree.reference_kernel(p)[slot])
            });
            NodeJson {
                id: tree.label(n),
                parent: tree.parent(n).map(|p| tree.label(p)),
                r_prob,
                payoff: to_number(payoff.value(n)),
            }
        })
        .collect();
    ModelJson {
        horizon: tree.horizon(),
        nodes,
        kernel_sets: None,
        members: None,
        seed: None,
    }
}

impl<S: Scalar> Model<S> {
    pub fn from_json(text: &str) -> Result<Self> {
        model_from_doc(&serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        let mut doc = tree_doc(&self.tree, &self.payoff);
        let sets = self
            .tree
            .internal_nodes()
            .map(|n| {
                let set = self
                    .family
                    .kernel_set(n)
                    .iter()
                    .map(|k| k.iter().map(to_number).collect())
                    .collect();
                (self.tree.label(n), set)
            })
            .collect();
        doc.kernel_sets = Some(sets);
        serde_json::to_string_pretty(&doc).expect("serializable") + "\n"
    }

    /// SHA-256 of the canonical JSON rendering, hex encoded.
    pub fn hash(&self) -> String {
        hex_digest(self.to_json().as_bytes())
    }
}

impl<S: Scalar> ExplicitModel<S> {
    pub fn from_json(text: &str) -> Result<Self> {
        explicit_from_doc(&serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        let mut doc = tree_doc(&self.tree, &self.payoff);
        doc.members = Some(
            self.family
                .as_slice()
                .iter()
                .map(|q| MemberJson {
                    kernels: self
                        .tree
                        .internal_nodes()
                        .map(|n| (self.tree.label(n), q.kernel(n).iter().map(to_number).collect()))
                        .collect(),
                })
                .collect(),
        );
        doc.seed = self.seed;
        serde_json::to_string_pretty(&doc).expect("serializable") + "\n"
    }

    pub fn hash(&self) -> String {
        hex_digest(self.to_json().as_bytes())
    }
}

/// SHA-256 of raw bytes, hex encoded.
pub fn content_hash(bytes: &[u8]) -> String {
    hex_digest(bytes)
}

fn hex_digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn load_model<S: Scalar>(path: impl AsRef<Path>) -> Result<Model<S>> {
    Model::from_json(&std::fs::read_to_string(path)?)
}

pub fn save_model<S: Scalar>(model: &Model<S>, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, model.to_json())?;
    Ok(())
}

pub fn load_explicit_model<S: Scalar>(path: impl AsRef<Path>) -> Result<ExplicitModel<S>> {
    ExplicitModel::from_json(&std::fs::read_to_string(path)?)
}
