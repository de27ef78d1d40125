//! Strategy profiles as pointed graphs.
//!
//! A [`Profile`] is a root handle into an immutable node store. Finite
//! profiles have an acyclic reachable graph; rational infinite profiles are
//! encoded by cycles. Subprofiles share the store of their parent.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::utility::Utility;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProfileError {
    #[error("invalid profile: {0}")]
    InvalidProfile(String),
    #[error("node {0} does not belong to this profile")]
    InvalidNode(usize),
    #[error("the chosen path cycles without reaching a leaf")]
    Divergent,
}

/// An agent, identified by a nonempty label.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Agent(Arc<str>);

impl Agent {
    pub fn new(label: &str) -> Result<Self, ProfileError> {
        if label.is_empty() {
            return Err(ProfileError::InvalidProfile("empty agent label".into()));
        }
        Ok(Agent(label.into()))
    }

    pub fn label(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Agent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// One of the two moves at a decision node. `One` is drawn downwards,
/// `Two` to the right.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Choice {
    One,
    Two,
}

impl Choice {
    pub fn index(self) -> usize {
        match self {
            Choice::One => 0,
            Choice::Two => 1,
        }
    }

    pub fn other(self) -> Choice {
        match self {
            Choice::One => Choice::Two,
            Choice::Two => Choice::One,
        }
    }

    pub fn from_number(n: u8) -> Option<Choice> {
        match n {
            1 => Some(Choice::One),
            2 => Some(Choice::Two),
            _ => None,
        }
    }

    pub fn number(self) -> u8 {
        self.index() as u8 + 1
    }
}

/// Total map from the agents of a profile to their utilities at a leaf.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct UtilityAssignment(BTreeMap<Agent, Utility>);

impl UtilityAssignment {
    pub fn new() -> Self {
        UtilityAssignment(BTreeMap::new())
    }

    pub fn with(mut self, agent: &Agent, value: Utility) -> Self {
        self.0.insert(agent.clone(), value);
        self
    }

    pub fn insert(&mut self, agent: Agent, value: Utility) {
        self.0.insert(agent, value);
    }

    pub fn get(&self, agent: &Agent) -> Option<&Utility> {
        self.0.get(agent)
    }

    pub fn agents(&self) -> impl Iterator<Item = &Agent> {
        self.0.keys()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Agent, &Utility)> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl FromIterator<(Agent, Utility)> for UtilityAssignment {
    fn from_iter<I: IntoIterator<Item = (Agent, Utility)>>(iter: I) -> Self {
        UtilityAssignment(iter.into_iter().collect())
    }
}

impl fmt::Display for UtilityAssignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, (a, u)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{a}:{u}")?;
        }
        f.write_str(")")
    }
}

/// Handle into the node store of one profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
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

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Node {
    Leaf(UtilityAssignment),
    Internal {
        owner: Agent,
        choice: Choice,
        children: [NodeId; 2],
    },
}

impl Node {
    pub fn is_leaf(&self) -> bool {
        matches!(self, Node::Leaf(_))
    }

    /// Child selected by the node's choice, if internal.
    pub fn chosen(&self) -> Option<NodeId> {
        match self {
            Node::Leaf(_) => None,
            Node::Internal {
                choice, children, ..
            } => Some(children[choice.index()]),
        }
    }

    pub fn children(&self) -> &[NodeId] {
        match self {
            Node::Leaf(_) => &[],
            Node::Internal { children, .. } => children,
        }
    }
}

/// A finite or rational infinite strategy profile.
#[derive(Clone)]
pub struct Profile {
    nodes: Arc<Vec<Node>>,
    root: NodeId,
}

impl fmt::Debug for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Profile")
            .field("root", &self.root)
            .field("nodes", &self.reachable().len())
            .finish()
    }
}

impl Profile {
    /// Single-leaf profile.
    pub fn leaf(u: UtilityAssignment) -> Result<Profile, ProfileError> {
        let mut b = ProfileBuilder::new();
        let id = b.leaf(u);
        b.build(id)
    }

    /// `⟨owner, choice, s1, s2⟩`. Subgraphs of `s1` and `s2` are imported
    /// as they are, so sharing and cycles inside them survive.
    pub fn internal(
        owner: Agent,
        choice: Choice,
        s1: &Profile,
        s2: &Profile,
    ) -> Result<Profile, ProfileError> {
        let mut nodes: Vec<Node> = s1.nodes.as_ref().clone();
        let c1 = s1.root;
        let c2 = if Arc::ptr_eq(&s1.nodes, &s2.nodes) {
            s2.root
        } else {
            let offset = nodes.len() as u32;
            nodes.extend(s2.nodes.iter().map(|n| shift_node(n, offset)));
            NodeId(s2.root.0 + offset)
        };
        let root = NodeId(nodes.len() as u32);
        nodes.push(Node::Internal {
            owner,
            choice,
            children: [c1, c2],
        });
        Profile::from_parts(nodes, root)
    }

    pub(crate) fn from_parts(nodes: Vec<Node>, root: NodeId) -> Result<Profile, ProfileError> {
        let p = Profile {
            nodes: Arc::new(nodes),
            root,
        };
        p.validate()?;
        Ok(p)
    }

    fn validate(&self) -> Result<(), ProfileError> {
        let n = self.nodes.len();
        if self.root.index() >= n {
            return Err(ProfileError::InvalidNode(self.root.index()));
        }
        for node in self.nodes.iter() {
            for c in node.children() {
                if c.index() >= n {
                    return Err(ProfileError::InvalidNode(c.index()));
                }
            }
        }
        let reach = self.reachable();
        let mut keys: Option<BTreeSet<&Agent>> = None;
        for &id in &reach {
            if let Node::Leaf(u) = self.node(id) {
                if u.is_empty() {
                    return Err(ProfileError::InvalidProfile(
                        "leaf with empty utility assignment".into(),
                    ));
                }
                let k: BTreeSet<&Agent> = u.agents().collect();
                match &keys {
                    None => keys = Some(k),
                    Some(prev) if *prev != k => {
                        return Err(ProfileError::InvalidProfile(
                            "leaves assign utilities to different agent sets".into(),
                        ))
                    }
                    Some(_) => {}
                }
            }
        }
        // A reachable graph without leaves carries no agent set to check against.
        if let Some(keys) = keys {
            for &id in &reach {
                if let Node::Internal { owner, .. } = self.node(id) {
                    if !keys.contains(owner) {
                        return Err(ProfileError::InvalidProfile(format!(
                            "owner {owner} has no utility at the leaves"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id.index()]
    }

    /// Size of the underlying store; valid ids are `0..store_len()`.
    pub fn store_len(&self) -> usize {
        self.nodes.len()
    }

    pub fn contains(&self, id: NodeId) -> bool {
        id.index() < self.nodes.len()
    }

    /// Nodes reachable from the root, in breadth-first order.
    pub fn reachable(&self) -> Vec<NodeId> {
        reachable_from(&self.nodes, self.root)
    }

    /// Profile rooted at `at`, sharing this profile's store.
    pub fn subprofile(&self, at: NodeId) -> Result<Profile, ProfileError> {
        if !self.contains(at) {
            return Err(ProfileError::InvalidNode(at.index()));
        }
        Ok(Profile {
            nodes: Arc::clone(&self.nodes),
            root: at,
        })
    }

    /// Agents appearing at reachable leaves or as owners.
    pub fn agents(&self) -> BTreeSet<Agent> {
        let mut out = BTreeSet::new();
        for id in self.reachable() {
            match self.node(id) {
                Node::Leaf(u) => out.extend(u.agents().cloned()),
                Node::Internal { owner, .. } => {
                    out.insert(owner.clone());
                }
            }
        }
        out
    }

    pub fn is_acyclic(&self) -> bool {
        // Kahn-style check restricted to the reachable part.
        let reach = self.reachable();
        let mut indeg = vec![0usize; self.nodes.len()];
        for &id in &reach {
            for c in self.node(id).children() {
                indeg[c.index()] += 1;
            }
        }
        let mut queue: Vec<NodeId> = reach.iter().copied().filter(|i| indeg[i.index()] == 0).collect();
        let mut seen = 0;
        while let Some(id) = queue.pop() {
            seen += 1;
            for c in self.node(id).children() {
                indeg[c.index()] -= 1;
                if indeg[c.index()] == 0 {
                    queue.push(*c);
                }
            }
        }
        seen == reach.len()
    }

    /// Follows the chosen edges from the root; `ŝ` when a leaf is reached.
    pub fn utility_assignment(&self) -> Result<&UtilityAssignment, ProfileError> {
        let leaf = self.chosen_leaf().ok_or(ProfileError::Divergent)?;
        match self.node(leaf) {
            Node::Leaf(u) => Ok(u),
            Node::Internal { .. } => unreachable!("chosen_leaf returns leaves"),
        }
    }

    /// Leaf at the end of the chosen path from the root, `None` on a cycle.
    pub fn chosen_leaf(&self) -> Option<NodeId> {
        chosen_leaf_from(&self.nodes, self.root)
    }

    /// Same profile with the choice at `at` replaced.
    pub fn with_choice(&self, at: NodeId, new: Choice) -> Result<Profile, ProfileError> {
        if !self.contains(at) {
            return Err(ProfileError::InvalidNode(at.index()));
        }
        let mut nodes = self.nodes.as_ref().clone();
        match &mut nodes[at.index()] {
            Node::Internal { choice, .. } => *choice = new,
            Node::Leaf(_) => {
                return Err(ProfileError::InvalidProfile(format!(
                    "node {at} is a leaf"
                )))
            }
        }
        Ok(Profile {
            nodes: Arc::new(nodes),
            root: self.root,
        })
    }

    /// Structural comparison of the choices made along a bisimulation
    /// between `self` and `other`: true iff the two profiles have the same
    /// game and every pair of matched internal nodes makes the same choice.
    pub fn same_profile(&self, other: &Profile) -> bool {
        bisimilar(self, other, true)
    }
}

fn shift_node(n: &Node, offset: u32) -> Node {
    match n {
        Node::Leaf(u) => Node::Leaf(u.clone()),
        Node::Internal {
            owner,
            choice,
            children,
        } => Node::Internal {
            owner: owner.clone(),
            choice: *choice,
            children: [
                NodeId(children[0].0 + offset),
                NodeId(children[1].0 + offset),
            ],
        },
    }
}

pub(crate) fn reachable_from(nodes: &[Node], root: NodeId) -> Vec<NodeId> {
    let mut seen = vec![false; nodes.len()];
    let mut out = Vec::new();
    let mut queue = VecDeque::from([root]);
    seen[root.index()] = true;
    while let Some(id) = queue.pop_front() {
        out.push(id);
        for c in nodes[id.index()].children() {
            if !seen[c.index()] {
                seen[c.index()] = true;
                queue.push_back(*c);
            }
        }
    }
    out
}

fn chosen_leaf_from(nodes: &[Node], root: NodeId) -> Option<NodeId> {
    let mut visited = vec![false; nodes.len()];
    let mut cur = root;
    loop {
        match nodes[cur.index()].chosen() {
            None => return Some(cur),
            Some(next) => {
                if visited[cur.index()] {
                    return None;
                }
                visited[cur.index()] = true;
                cur = next;
            }
        }
    }
}

/// `s =_g t`: the greatest relation on the product graph in which leaves
/// match equal assignments and internal nodes match equal owners with
/// pairwise related children. Choices are ignored.
pub fn same_game(s: &Profile, t: &Profile) -> bool {
    bisimilar(s, t, false)
}

fn bisimilar(s: &Profile, t: &Profile, match_choices: bool) -> bool {
    use std::collections::HashMap;

    // Enumerate the product pairs reachable from the two roots.
    let mut index: HashMap<(NodeId, NodeId), usize> = HashMap::new();
    let mut pairs: Vec<(NodeId, NodeId)> = Vec::new();
    let mut preds: Vec<Vec<usize>> = Vec::new();
    let mut queue = VecDeque::new();
    index.insert((s.root, t.root), 0);
    pairs.push((s.root, t.root));
    preds.push(Vec::new());
    queue.push_back(0usize);
    let mut related: Vec<bool> = Vec::new();
    while let Some(p) = queue.pop_front() {
        let (x, y) = pairs[p];
        let ok = match (s.node(x), t.node(y)) {
            (Node::Leaf(u), Node::Leaf(v)) => u == v,
            (
                Node::Internal {
                    owner: a, choice: ca, ..
                },
                Node::Internal {
                    owner: b, choice: cb, ..
                },
            ) => a == b && (!match_choices || ca == cb),
            _ => false,
        };
        if related.len() <= p {
            related.resize(p + 1, true);
        }
        related[p] = ok;
        if !ok {
            continue;
        }
        let (xs, ys) = (s.node(x).children(), t.node(y).children());
        for k in 0..xs.len() {
            let key = (xs[k], ys[k]);
            let q = *index.entry(key).or_insert_with(|| {
                pairs.push(key);
                preds.push(Vec::new());
                queue.push_back(pairs.len() - 1);
                pairs.len() - 1
            });
            preds[q].push(p);
        }
    }
    related.resize(pairs.len(), true);

    // Iterated removal: a pair survives while all its child pairs do.
    let mut work: Vec<usize> = (0..pairs.len()).filter(|&p| !related[p]).collect();
    while let Some(q) = work.pop() {
        for &p in &preds[q] {
            if related[p] {
                related[p] = false;
                work.push(p);
            }
        }
    }
    related[0]
}

/// Builder for profiles with forward references and cycles.
#[derive(Debug, Default)]
pub struct ProfileBuilder {
    nodes: Vec<Option<Node>>,
}

impl ProfileBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Reserves an id to be defined later with [`ProfileBuilder::define`].
    pub fn reserve(&mut self) -> NodeId {
        self.nodes.push(None);
        NodeId(self.nodes.len() as u32 - 1)
    }

    pub fn define(&mut self, id: NodeId, node: Node) {
        self.nodes[id.index()] = Some(node);
    }

    pub fn leaf(&mut self, u: UtilityAssignment) -> NodeId {
        self.nodes.push(Some(Node::Leaf(u)));
        NodeId(self.nodes.len() as u32 - 1)
    }

    pub fn internal(&mut self, owner: Agent, choice: Choice, c1: NodeId, c2: NodeId) -> NodeId {
        self.nodes.push(Some(Node::Internal {
            owner,
            choice,
            children: [c1, c2],
        }));
        NodeId(self.nodes.len() as u32 - 1)
    }

    pub fn build(self, root: NodeId) -> Result<Profile, ProfileError> {
        let mut nodes = Vec::with_capacity(self.nodes.len());
        for (i, n) in self.nodes.into_iter().enumerate() {
            nodes.push(n.ok_or_else(|| {
                ProfileError::InvalidProfile(format!("node {i} reserved but never defined"))
            })?);
        }
        Profile::from_parts(nodes, root)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ab(a: i64, b: i64) -> UtilityAssignment {
        let (ag, bg) = (Agent::new("A").unwrap(), Agent::new("B").unwrap());
        UtilityAssignment::new()
            .with(&ag, Utility::from_int(a))
            .with(&bg, Utility::from_int(b))
    }

    fn s_box2() -> Profile {
        let mut b = ProfileBuilder::new();
        let n0 = b.reserve();
        let l0 = b.leaf(ab(1, 0));
        let l1 = b.leaf(ab(0, 1));
        let n1 = b.internal(Agent::new("B").unwrap(), Choice::Two, l1, n0);
        b.define(
            n0,
            Node::Internal {
                owner: Agent::new("A").unwrap(),
                choice: Choice::Two,
                children: [l0, n1],
            },
        );
        b.build(n0).unwrap()
    }

    #[test]
    fn leaf_requires_nonempty_assignment() {
        assert!(matches!(
            Profile::leaf(UtilityAssignment::new()),
            Err(ProfileError::InvalidProfile(_))
        ));
        let p = Profile::leaf(ab(0, 0)).unwrap();
        assert_eq!(p.utility_assignment().unwrap(), &ab(0, 0));
    }

    #[test]
    fn internal_builds_three_nodes() {
        let l = Profile::leaf(ab(1, 2)).unwrap();
        let p = Profile::internal(Agent::new("A").unwrap(), Choice::One, &l, &l).unwrap();
        // Both children share one imported store, so the leaf appears once.
        assert_eq!(p.reachable().len(), 2);
        let m = Profile::leaf(ab(1, 2)).unwrap();
        let q = Profile::internal(Agent::new("A").unwrap(), Choice::One, &l, &m).unwrap();
        assert_eq!(q.reachable().len(), 3);
        assert!(same_game(&p, &q));
    }

    #[test]
    fn owner_without_utility_is_rejected() {
        let l = Profile::leaf(ab(1, 2)).unwrap();
        let err = Profile::internal(Agent::new("C").unwrap(), Choice::One, &l, &l);
        assert!(matches!(err, Err(ProfileError::InvalidProfile(_))));
    }

    #[test]
    fn cyclic_profile_diverges() {
        let s = s_box2();
        assert_eq!(s.utility_assignment(), Err(ProfileError::Divergent));
        assert!(!s.is_acyclic());
    }

    #[test]
    fn subprofile_of_cycle_is_bisimilar() {
        let s = s_box2();
        let n1 = s.node(s.root()).chosen().unwrap();
        let t = s.subprofile(n1).unwrap();
        let n0 = t.node(t.root()).chosen().unwrap();
        let back = t.subprofile(n0).unwrap();
        assert!(same_game(&s, &back));
        assert!(s.same_profile(&back));
        assert!(!same_game(&s, &t));
        assert_eq!(
            s.subprofile(NodeId(99)).unwrap_err(),
            ProfileError::InvalidNode(99)
        );
    }

    #[test]
    fn unrolled_cycle_has_same_game() {
        let s = s_box2();
        // n0 -> n1 -> m0 -> m1 -> n0, with fresh leaves on the copy.
        let (a, b) = (Agent::new("A").unwrap(), Agent::new("B").unwrap());
        let mut bd = ProfileBuilder::new();
        let n0 = bd.reserve();
        let m1 = bd.reserve();
        let la = bd.leaf(ab(1, 0));
        let lb = bd.leaf(ab(0, 1));
        let la2 = bd.leaf(ab(1, 0));
        let lb2 = bd.leaf(ab(0, 1));
        let m0 = bd.internal(a.clone(), Choice::Two, la2, m1);
        let n1 = bd.internal(b.clone(), Choice::Two, lb, m0);
        bd.define(m1, Node::Internal { owner: b, choice: Choice::Two, children: [lb2, n0] });
        bd.define(n0, Node::Internal { owner: a, choice: Choice::Two, children: [la, n1] });
        let t = bd.build(n0).unwrap();
        assert_eq!(t.reachable().len(), 8);
        assert!(same_game(&s, &t));
        assert!(s.same_profile(&t));
        let flipped = t.with_choice(m0, Choice::One).unwrap();
        assert!(same_game(&s, &flipped));
        assert!(!s.same_profile(&flipped));
    }

    #[test]
    fn undefined_reservation_fails() {
        let mut b = ProfileBuilder::new();
        let r = b.reserve();
        assert!(b.build(r).is_err());
    }
}
