//! Finite filtered probability spaces realized as event trees.
//!
//! A node at depth `t` is an atom of the sigma-algebra at time `t`; a leaf is
//! an atom of the terminal sigma-algebra. Stopping times are antichains of
//! nodes meeting every root-to-leaf path exactly once, and adapted processes
//! carry one value per node.

use std::fmt;

use crate::error::{Error, Result};
use crate::scalar::{Scalar, TOLERANCE};

/// Index of a node inside its [`EventTree`].
///
/// Nodes are numbered breadth-first with siblings ordered by external label,
/// so a parent always has a smaller index than its children.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub(crate) u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// Ingestion record for one node: its external id, its parent's external id,
/// and the reference probability of the transition parent -> node.
#[derive(Clone, Debug)]
pub struct NodeSpec<S> {
    pub id: u64,
    pub parent: Option<u64>,
    pub r_prob: Option<S>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EventTree<S> {
    labels: Vec<u64>,
    parent: Vec<Option<NodeId>>,
    children: Vec<Vec<NodeId>>,
    depth: Vec<usize>,
    horizon: usize,
    reference: Vec<Vec<S>>,
    leaves: Vec<NodeId>,
    leaf_position: Vec<Option<usize>>,
    fingerprint: u64,
}

impl<S: Scalar> EventTree<S> {
    /// Builds a tree from per-node records. Node ids may be arbitrary but
    /// must be unique; `r_prob` is required on every non-root node.
    pub fn new(specs: Vec<NodeSpec<S>>) -> Result<Self> {
        use std::collections::BTreeMap;

        if specs.is_empty() {
            return Err(Error::InvalidTree("tree has no nodes".into()));
        }
        let mut by_label: BTreeMap<u64, &NodeSpec<S>> = BTreeMap::new();
        for spec in &specs {
            if by_label.insert(spec.id, spec).is_some() {
                return Err(Error::InvalidTree(format!("duplicate node id {}", spec.id)));
            }
        }
        let roots: Vec<u64> = specs.iter().filter(|s| s.parent.is_none()).map(|s| s.id).collect();
        let root = match roots.as_slice() {
            [r] => *r,
            [] => return Err(Error::InvalidTree("no root node".into())),
            _ => return Err(Error::InvalidTree(format!("multiple roots: {roots:?}"))),
        };
        let mut kids: BTreeMap<u64, Vec<u64>> = BTreeMap::new();
        for spec in &specs {
            if let Some(p) = spec.parent {
                if !by_label.contains_key(&p) {
                    return Err(Error::InvalidTree(format!(
                        "node {} has unknown parent {p}",
                        spec.id
                    )));
                }
                kids.entry(p).or_default().push(spec.id);
            }
        }

        for ch in kids.values_mut() {
            ch.sort_unstable();
        }

        // Breadth-first renumbering with siblings in label order.
        let mut order = vec![root];
        let mut head = 0;
        while head < order.len() {
            let label = order[head];
            if let Some(ch) = kids.get(&label) {
                order.extend(ch.iter().copied());
            }
            head += 1;
        }
        if order.len() != specs.len() {
            return Err(Error::InvalidTree(
                "some nodes are not reachable from the root".into(),
            ));
        }
        let index_of: BTreeMap<u64, usize> =
            order.iter().enumerate().map(|(i, &l)| (l, i)).collect();

        let n = order.len();
        let mut parent = vec![None; n];
        let mut children = vec![Vec::new(); n];
        let mut depth = vec![0usize; n];
        for (i, &label) in order.iter().enumerate() {
            if let Some(p) = by_label[&label].parent {
                let pi = index_of[&p];
                parent[i] = Some(NodeId(pi as u32));
                children[pi].push(NodeId(i as u32));
                depth[i] = depth[pi] + 1;
            }
        }

        let mut reference = vec![Vec::new(); n];
        for i in 0..n {
            if children[i].is_empty() {
                continue;
            }
            if children[i].len() < 2 {
                return Err(Error::InvalidTree(format!(
                    "internal node {} has a single child",
                    order[i]
                )));
            }
            let mut kernel = Vec::with_capacity(children[i].len());
            for c in &children[i] {
                let spec = by_label[&order[c.index()]];
                match &spec.r_prob {
                    Some(p) => kernel.push(p.clone()),
                    None => {
                        return Err(Error::Schema {
                            location: format!("node {}", spec.id),
                            reason: "missing r_prob".into(),
                        })
                    }
                }
            }
            reference[i] = normalize_kernel(order[i], kernel)?;
        }

        let leaves: Vec<NodeId> = (0..n)
            .filter(|&i| children[i].is_empty())
            .map(|i| NodeId(i as u32))
            .collect();
        let horizon = depth[leaves[0].index()];
        if horizon == 0 {
            return Err(Error::InvalidTree("horizon must be positive".into()));
        }
        if let Some(bad) = leaves.iter().find(|l| depth[l.index()] != horizon) {
            return Err(Error::InvalidTree(format!(
                "leaf {} has depth {} but horizon is {horizon}",
                order[bad.index()],
                depth[bad.index()]
            )));
        }
        let mut leaf_position = vec![None; n];
        for (k, l) in leaves.iter().enumerate() {
            leaf_position[l.index()] = Some(k);
        }

        let fingerprint = fingerprint(&order, &parent);
        Ok(EventTree {
            labels: order,
            parent,
            children,
            depth,
            horizon,
            reference,
            leaves,
            leaf_position,
            fingerprint,
        })
    }

    /// Complete tree where every internal node has `branching` children and
    /// the reference kernel is uniform. Node ids follow breadth-first order.
    pub fn complete(horizon: usize, branching: usize) -> Result<Self> {
        if horizon == 0 || branching < 2 {
            return Err(Error::InvalidParameter(
                "complete tree needs horizon >= 1 and branching >= 2".into(),
            ));
        }
        let mut specs = vec![NodeSpec { id: 0, parent: None, r_prob: None }];
        let mut level = vec![0u64];
        let mut next_id = 1u64;
        for _ in 0..horizon {
            let mut next_level = Vec::new();
            for &p in &level {
                for _ in 0..branching {
                    specs.push(NodeSpec {
                        id: next_id,
                        parent: Some(p),
                        r_prob: Some(S::from_ratio(1, branching as i64)),
                    });
                    next_level.push(next_id);
                    next_id += 1;
                }
            }
            level = next_level;
        }
        Self::new(specs)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn root(&self) -> NodeId {
        NodeId(0)
    }

    pub fn nodes(&self) -> impl DoubleEndedIterator<Item = NodeId> + ExactSizeIterator {
        (0..self.len() as u32).map(NodeId)
    }

    pub fn internal_nodes(&self) -> impl DoubleEndedIterator<Item = NodeId> + '_ {
        self.nodes().filter(move |n| !self.is_leaf(*n))
    }

    pub fn leaves(&self) -> &[NodeId] {
        &self.leaves
    }

    /// Position of a leaf within [`Self::leaves`].
    pub fn leaf_position(&self, n: NodeId) -> Option<usize> {
        self.leaf_position.get(n.index()).copied().flatten()
    }

    pub fn depth(&self, n: NodeId) -> usize {
        self.depth[n.index()]
    }

    pub fn parent(&self, n: NodeId) -> Option<NodeId> {
        self.parent[n.index()]
    }

    pub fn children(&self, n: NodeId) -> &[NodeId] {
        &self.children[n.index()]
    }

    pub fn is_leaf(&self, n: NodeId) -> bool {
        self.children[n.index()].is_empty()
    }

    /// External id of a node.
    pub fn label(&self, n: NodeId) -> u64 {
        self.labels[n.index()]
    }

    pub fn node(&self, label: u64) -> Result<NodeId> {
        // Labels are not sorted by index, so a linear scan is needed.
        self.labels
            .iter()
            .position(|&l| l == label)
            .map(|i| NodeId(i as u32))
            .ok_or(Error::UnknownNode(label))
    }

    pub fn contains(&self, n: NodeId) -> bool {
        n.index() < self.len()
    }

    pub fn reference_kernel(&self, n: NodeId) -> &[S] {
        &self.reference[n.index()]
    }

    /// Structural identity shared by every object built on this tree.
    pub fn fingerprint(&self) -> u64 {
        self.fingerprint
    }

    pub fn internal_count(&self) -> usize {
        self.len() - self.leaves.len()
    }

    /// True when `a` lies on the path from the root to `b` (or `a == b`).
    pub fn is_ancestor_or_equal(&self, a: NodeId, b: NodeId) -> bool {
        let mut cur = b;
        while self.depth(cur) > self.depth(a) {
            cur = self.parent(cur).expect("non-root node has a parent");
        }
        cur == a
    }

    /// Ancestor of `n` at depth `d` (`d <= depth(n)`).
    pub fn ancestor_at_depth(&self, n: NodeId, d: usize) -> NodeId {
        let mut cur = n;
        while self.depth(cur) > d {
            cur = self.parent(cur).expect("non-root node has a parent");
        }
        cur
    }

    /// All leaves descending from `n`, in index order.
    pub fn paths_through(&self, n: NodeId) -> Result<Vec<NodeId>> {
        if !self.contains(n) {
            return Err(Error::UnknownNode(n.0 as u64));
        }
        let mut out = Vec::new();
        let mut stack = vec![n];
        while let Some(m) = stack.pop() {
            if self.is_leaf(m) {
                out.push(m);
            } else {
                stack.extend(self.children(m).iter().rev().copied());
            }
        }
        out.sort();
        Ok(out)
    }

    /// Nodes of the subtree rooted at `n` (including `n`), in index order.
    pub fn subtree(&self, n: NodeId) -> Vec<NodeId> {
        let mut out = vec![n];
        let mut head = 0;
        while head < out.len() {
            let m = out[head];
            out.extend(self.children(m).iter().copied());
            head += 1;
        }
        out.sort();
        out
    }

    pub(crate) fn check_same(&self, fingerprint: u64) -> Result<()> {
        if fingerprint == self.fingerprint {
            Ok(())
        } else {
            Err(Error::MismatchedTrees)
        }
    }
}

/// Accepts a probability vector whose entries are strictly positive and
/// whose sum is within [`TOLERANCE`] of one, then rescales it to sum to one.
pub fn normalize_kernel<S: Scalar>(node_label: u64, kernel: Vec<S>) -> Result<Vec<S>> {
    if kernel.iter().any(|p| *p <= S::zero()) {
        return Err(Error::InvalidKernel {
            node: node_label,
            reason: "entries must be strictly positive".into(),
        });
    }
    let sum = kernel.iter().cloned().fold(S::zero(), |a, b| a + b);
    if (sum.clone() - S::one()).abs_value().to_f64() > TOLERANCE {
        return Err(Error::InvalidKernel {
            node: node_label,
            reason: format!("entries sum to {} instead of 1", sum.to_f64()),
        });
    }
    if sum == S::one() {
        return Ok(kernel);
    }
    Ok(kernel.into_iter().map(|p| p / sum.clone()).collect())
}

fn fingerprint(labels: &[u64], parent: &[Option<NodeId>]) -> u64 {
    // FNV-1a over the label/parent structure.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    let mut eat = |x: u64| {
        for b in x.to_le_bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    };
    for (l, p) in labels.iter().zip(parent) {
        eat(*l);
        eat(p.map_or(u64::MAX, |p| p.0 as u64));
    }
    h
}

/// A stopping time, stored canonically as a sorted antichain of nodes that
/// meets every root-to-leaf path exactly once.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct StoppingTime {
    fingerprint: u64,
    region: Vec<NodeId>,
}

impl StoppingTime {
    pub fn new<S: Scalar>(tree: &EventTree<S>, nodes: impl IntoIterator<Item = NodeId>) -> Result<Self> {
        let mut region: Vec<NodeId> = nodes.into_iter().collect();
        region.sort();
        region.dedup();
        if let Some(bad) = region.iter().find(|n| !tree.contains(**n)) {
            return Err(Error::UnknownNode(bad.0 as u64));
        }
        let mut in_region = vec![false; tree.len()];
        for n in &region {
            in_region[n.index()] = true;
        }
        for &leaf in tree.leaves() {
            let mut hits = 0;
            let mut cur = Some(leaf);
            while let Some(m) = cur {
                if in_region[m.index()] {
                    hits += 1;
                }
                cur = tree.parent(m);
            }
            if hits != 1 {
                let what = if hits == 0 { "misses" } else { "meets the region more than once on" };
                return Err(Error::InvalidStoppingTime(format!(
                    "region {what} the path to leaf {}",
                    tree.label(leaf)
                )));
            }
        }
        Ok(StoppingTime {
            fingerprint: tree.fingerprint(),
            region,
        })
    }

    /// Trusted constructor for regions produced by enumeration.
    pub(crate) fn from_region_unchecked(fingerprint: u64, mut region: Vec<NodeId>) -> Self {
        region.sort();
        StoppingTime { fingerprint, region }
    }

    pub fn from_labels<S: Scalar>(tree: &EventTree<S>, labels: &[u64]) -> Result<Self> {
        let nodes = labels.iter().map(|&l| tree.node(l)).collect::<Result<Vec<_>>>()?;
        Self::new(tree, nodes)
    }

    /// Converts a path-function representation (leaf -> stopping node) into
    /// the canonical antichain, checking that the map is adapted.
    pub fn from_leaf_map<S: Scalar>(
        tree: &EventTree<S>,
        stop: impl Fn(NodeId) -> NodeId,
    ) -> Result<Self> {
        let mut nodes = Vec::with_capacity(tree.leaves().len());
        for &leaf in tree.leaves() {
            let n = stop(leaf);
            if !tree.contains(n) || !tree.is_ancestor_or_equal(n, leaf) {
                return Err(Error::InvalidStoppingTime(format!(
                    "node {n} is not on the path to leaf {}",
                    tree.label(leaf)
                )));
            }
            nodes.push(n);
        }
        // Adaptedness: every leaf below a stopping node must stop there too.
        for (k, &leaf) in tree.leaves().iter().enumerate() {
            for below in tree.paths_through(nodes[k])? {
                let pos = tree.leaf_position(below).expect("leaf");
                if nodes[pos] != nodes[k] {
                    return Err(Error::InvalidStoppingTime(format!(
                        "leaves {} and {} share an atom but stop at different nodes",
                        tree.label(leaf),
                        tree.label(below)
                    )));
                }
            }
        }
        Self::new(tree, nodes)
    }

    /// The stopping time identically zero.
    pub fn at_root<S: Scalar>(tree: &EventTree<S>) -> Self {
        StoppingTime {
            fingerprint: tree.fingerprint(),
            region: vec![tree.root()],
        }
    }

    /// The stopping time identically equal to the horizon.
    pub fn at_leaves<S: Scalar>(tree: &EventTree<S>) -> Self {
        StoppingTime {
            fingerprint: tree.fingerprint(),
            region: tree.leaves().to_vec(),
        }
    }

    /// The deterministic time `d`.
    pub fn at_depth<S: Scalar>(tree: &EventTree<S>, d: usize) -> Result<Self> {
        if d > tree.horizon() {
            return Err(Error::InvalidStoppingTime(format!(
                "depth {d} exceeds horizon {}",
                tree.horizon()
            )));
        }
        Ok(StoppingTime {
            fingerprint: tree.fingerprint(),
            region: tree.nodes().filter(|n| tree.depth(*n) == d).collect(),
        })
    }

    pub fn region(&self) -> &[NodeId] {
        &self.region
    }

    pub fn fingerprint(&self) -> u64 {
        self.fingerprint
    }

    pub fn contains(&self, n: NodeId) -> bool {
        self.region.binary_search(&n).is_ok()
    }

    pub fn position(&self, n: NodeId) -> Option<usize> {
        self.region.binary_search(&n).ok()
    }

    /// External labels of the region, in canonical order.
    pub fn labels<S: Scalar>(&self, tree: &EventTree<S>) -> Vec<u64> {
        self.region.iter().map(|n| tree.label(*n)).collect()
    }

    /// Stopping node on the path to each leaf, aligned with `tree.leaves()`.
    pub fn stop_nodes<S: Scalar>(&self, tree: &EventTree<S>) -> Result<Vec<NodeId>> {
        tree.check_same(self.fingerprint)?;
        let mut out = vec![tree.root(); tree.leaves().len()];
        for &n in &self.region {
            for leaf in tree.paths_through(n)? {
                out[tree.leaf_position(leaf).expect("leaf")] = n;
            }
        }
        Ok(out)
    }

    /// Pathwise `self <= other`.
    pub fn leq<S: Scalar>(&self, other: &StoppingTime, tree: &EventTree<S>) -> Result<bool> {
        tree.check_same(other.fingerprint)?;
        let a = self.stop_nodes(tree)?;
        let b = other.stop_nodes(tree)?;
        Ok(a.iter().zip(&b).all(|(x, y)| tree.depth(*x) <= tree.depth(*y)))
    }

    /// Pathwise maximum.
    pub fn join<S: Scalar>(&self, other: &StoppingTime, tree: &EventTree<S>) -> Result<Self> {
        self.combine(other, tree, |x, y| if tree.depth(x) >= tree.depth(y) { x } else { y })
    }

    /// Pathwise minimum.
    pub fn meet<S: Scalar>(&self, other: &StoppingTime, tree: &EventTree<S>) -> Result<Self> {
        self.combine(other, tree, |x, y| if tree.depth(x) <= tree.depth(y) { x } else { y })
    }

    fn combine<S: Scalar>(
        &self,
        other: &StoppingTime,
        tree: &EventTree<S>,
        pick: impl Fn(NodeId, NodeId) -> NodeId,
    ) -> Result<Self> {
        tree.check_same(other.fingerprint)?;
        let a = self.stop_nodes(tree)?;
        let b = other.stop_nodes(tree)?;
        let nodes: Vec<NodeId> = a.iter().zip(&b).map(|(x, y)| pick(*x, *y)).collect();
        Self::new(tree, nodes)
    }

    /// Nodes at or after this stopping time and strictly before `later`.
    pub(crate) fn nodes_between<S: Scalar>(
        &self,
        later: &StoppingTime,
        tree: &EventTree<S>,
    ) -> Vec<NodeId> {
        let mut out = Vec::new();
        let mut stack: Vec<NodeId> = self.region.clone();
        while let Some(n) = stack.pop() {
            if later.contains(n) {
                continue;
            }
            out.push(n);
            stack.extend(tree.children(n).iter().copied());
        }
        out.sort();
        out
    }

    /// Nodes strictly before this stopping time (strict ancestors of the region).
    pub fn nodes_before<S: Scalar>(&self, tree: &EventTree<S>) -> Vec<NodeId> {
        StoppingTime::at_root(tree).nodes_between(self, tree)
    }
}

/// One value per node of a tree.
#[derive(Clone, Debug, PartialEq)]
pub struct AdaptedProcess<S> {
    fingerprint: u64,
    values: Vec<S>,
}

impl<S: Scalar> AdaptedProcess<S> {
    pub fn new(tree: &EventTree<S>, values: Vec<S>) -> Result<Self> {
        if values.len() != tree.len() {
            return Err(Error::InvalidParameter(format!(
                "process has {} values for a tree of {} nodes",
                values.len(),
                tree.len()
            )));
        }
        Ok(AdaptedProcess {
            fingerprint: tree.fingerprint(),
            values,
        })
    }

    pub fn from_fn(tree: &EventTree<S>, f: impl FnMut(NodeId) -> S) -> Self {
        AdaptedProcess {
            fingerprint: tree.fingerprint(),
            values: tree.nodes().map(f).collect(),
        }
    }

    pub fn constant(tree: &EventTree<S>, c: S) -> Self {
        Self::from_fn(tree, |_| c.clone())
    }

    pub fn value(&self, n: NodeId) -> &S {
        &self.values[n.index()]
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    pub fn fingerprint(&self) -> u64 {
        self.fingerprint
    }

    /// Checks the payoff requirements: same tree and nonnegative everywhere.
    pub fn check_payoff(&self, tree: &EventTree<S>) -> Result<()> {
        tree.check_same(self.fingerprint)?;
        match tree.nodes().find(|n| *self.value(*n) < S::zero()) {
            Some(n) => Err(Error::NegativePayoff { node: tree.label(n) }),
            None => Ok(()),
        }
    }

    /// The process sampled at a stopping time.
    pub fn sample(&self, tau: &StoppingTime) -> Result<RandomVariable<S>> {
        if tau.fingerprint() != self.fingerprint {
            return Err(Error::MismatchedTrees);
        }
        Ok(RandomVariable {
            time: tau.clone(),
            values: tau.region().iter().map(|n| self.value(*n).clone()).collect(),
        })
    }

    /// `H_tau` as a terminal random variable.
    pub fn stopped_at(&self, tau: &StoppingTime, tree: &EventTree<S>) -> Result<RandomVariable<S>> {
        self.sample(tau)?.on_leaves(tree)
    }
}

/// A random variable measurable with respect to the sigma-algebra at a
/// stopping time: one value per region node, aligned with the region order.
#[derive(Clone, Debug, PartialEq)]
pub struct RandomVariable<S> {
    time: StoppingTime,
    values: Vec<S>,
}

impl<S: Scalar> RandomVariable<S> {
    pub fn new(time: StoppingTime, values: Vec<S>) -> Result<Self> {
        if values.len() != time.region().len() {
            return Err(Error::InvalidParameter(format!(
                "{} values for a region of {} nodes",
                values.len(),
                time.region().len()
            )));
        }
        Ok(RandomVariable { time, values })
    }

    /// Terminal random variable from values aligned with `tree.leaves()`.
    pub fn on_leaves_from(tree: &EventTree<S>, values: Vec<S>) -> Result<Self> {
        Self::new(StoppingTime::at_leaves(tree), values)
    }

    pub fn constant(time: StoppingTime, c: S) -> Self {
        let values = vec![c; time.region().len()];
        RandomVariable { time, values }
    }

    /// Indicator of a set of leaves.
    pub fn indicator(tree: &EventTree<S>, event: &[NodeId]) -> Self {
        let values = tree
            .leaves()
            .iter()
            .map(|l| if event.contains(l) { S::one() } else { S::zero() })
            .collect();
        RandomVariable {
            time: StoppingTime::at_leaves(tree),
            values,
        }
    }

    pub fn time(&self) -> &StoppingTime {
        &self.time
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    pub fn get(&self, n: NodeId) -> Option<&S> {
        self.time.position(n).map(|i| &self.values[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (NodeId, &S)> {
        self.time.region().iter().copied().zip(&self.values)
    }

    /// Re-expresses the variable on a later stopping time by copying each
    /// region value down to the descendants in `later`'s region.
    pub fn lift_to(&self, later: &StoppingTime, tree: &EventTree<S>) -> Result<Self> {
        tree.check_same(self.time.fingerprint())?;
        if !self.time.leq(later, tree)? {
            return Err(Error::NotOrdered(
                "target stopping time must not precede the variable's time".into(),
            ));
        }
        let values = later
            .region()
            .iter()
            .map(|&m| {
                let mut cur = m;
                loop {
                    if let Some(i) = self.time.position(cur) {
                        break self.values[i].clone();
                    }
                    cur = tree.parent(cur).expect("region above target");
                }
            })
            .collect();
        Ok(RandomVariable {
            time: later.clone(),
            values,
        })
    }

    pub fn on_leaves(&self, tree: &EventTree<S>) -> Result<Self> {
        self.lift_to(&StoppingTime::at_leaves(tree), tree)
    }

    /// Node-wise comparison within tolerance.
    pub fn close_to(&self, other: &Self, tol: f64) -> bool {
        self.time == other.time
            && self.values.iter().zip(&other.values).all(|(a, b)| a.close_to(b, tol))
    }

    /// Largest absolute node-wise difference, as f64.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a.clone() - b.clone()).abs_value().to_f64())
            .fold(0.0, f64::max)
    }
}
