//! Least and greatest fixpoints over a profile's node graph, and the
//! predicates built on them: convergence, always-convergence, divergence,
//! PE, SPE, and infinite rationality for rational profiles.

use std::fmt;

use crate::profile::{Node, NodeId, Profile};
use crate::utility::Utility;

/// Membership bits over the node store of one profile.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeSet {
    bits: Vec<bool>,
}

impl NodeSet {
    pub fn empty(store_len: usize) -> Self {
        NodeSet {
            bits: vec![false; store_len],
        }
    }

    pub fn of(s: &Profile, ids: impl IntoIterator<Item = NodeId>) -> Self {
        let mut set = NodeSet::empty(s.store_len());
        for id in ids {
            set.insert(id);
        }
        set
    }

    pub fn contains(&self, id: NodeId) -> bool {
        self.bits.get(id.index()).copied().unwrap_or(false)
    }

    pub fn insert(&mut self, id: NodeId) {
        self.bits[id.index()] = true;
    }

    pub fn remove(&mut self, id: NodeId) {
        self.bits[id.index()] = false;
    }

    pub fn len(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|b| *b)
    }

    pub fn iter(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, b)| **b)
            .map(|(i, _)| NodeId(i as u32))
    }

    pub fn is_subset(&self, other: &NodeSet) -> bool {
        self.bits
            .iter()
            .zip(&other.bits)
            .all(|(a, b)| !*a || *b)
    }
}

/// One clause set of an (co)inductive definition: admits a node given the
/// current approximation of the predicate. Must be monotone in `assumed`
/// and may only inspect the node's children.
pub trait LocalRule {
    fn admits(&self, s: &Profile, node: NodeId, assumed: &NodeSet) -> bool;
}

impl<F> LocalRule for F
where
    F: Fn(&Profile, NodeId, &NodeSet) -> bool,
{
    fn admits(&self, s: &Profile, node: NodeId, assumed: &NodeSet) -> bool {
        self(s, node, assumed)
    }
}

fn predecessors(s: &Profile, reach: &[NodeId]) -> Vec<Vec<NodeId>> {
    let mut preds = vec![Vec::new(); s.store_len()];
    for &id in reach {
        for c in s.node(id).children() {
            preds[c.index()].push(id);
        }
    }
    preds
}

/// Least set closed under `rule`, by worklist iteration from the empty set.
pub fn lfp_eval<R: LocalRule + ?Sized>(rule: &R, s: &Profile) -> NodeSet {
    lfp_eval_ordered(rule, s, &s.reachable())
}

/// [`lfp_eval`] with an explicit initial worklist order over the reachable
/// nodes. The result does not depend on the order.
pub fn lfp_eval_ordered<R: LocalRule + ?Sized>(rule: &R, s: &Profile, order: &[NodeId]) -> NodeSet {
    let reach = s.reachable();
    let preds = predecessors(s, &reach);
    let mut set = NodeSet::empty(s.store_len());
    let mut queued = NodeSet::of(s, order.iter().copied());
    let mut work: Vec<NodeId> = order.iter().rev().copied().collect();
    while let Some(id) = work.pop() {
        queued.remove(id);
        if set.contains(id) || !rule.admits(s, id, &set) {
            continue;
        }
        set.insert(id);
        for &p in &preds[id.index()] {
            if !set.contains(p) && !queued.contains(p) {
                queued.insert(p);
                work.push(p);
            }
        }
    }
    set
}

/// Greatest set consistent with `rule`, by iterated removal from the
/// reachable set.
pub fn gfp_eval<R: LocalRule + ?Sized>(rule: &R, s: &Profile) -> NodeSet {
    gfp_eval_ordered(rule, s, &s.reachable())
}

pub fn gfp_eval_ordered<R: LocalRule + ?Sized>(rule: &R, s: &Profile, order: &[NodeId]) -> NodeSet {
    let reach = s.reachable();
    let preds = predecessors(s, &reach);
    let mut set = NodeSet::of(s, reach.iter().copied());
    let mut queued = NodeSet::of(s, order.iter().copied());
    let mut work: Vec<NodeId> = order.iter().rev().copied().collect();
    while let Some(id) = work.pop() {
        queued.remove(id);
        if !set.contains(id) || rule.admits(s, id, &set) {
            continue;
        }
        set.remove(id);
        for &p in &preds[id.index()] {
            if set.contains(p) && !queued.contains(p) {
                queued.insert(p);
                work.push(p);
            }
        }
    }
    set
}

/// Leaf, or the chosen child is already known convergent.
pub fn conv_rule(s: &Profile, id: NodeId, assumed: &NodeSet) -> bool {
    match s.node(id).chosen() {
        None => true,
        Some(c) => assumed.contains(c),
    }
}

/// The chosen child is already known divergent; leaves never qualify.
pub fn div_rule(s: &Profile, id: NodeId, assumed: &NodeSet) -> bool {
    match s.node(id).chosen() {
        None => false,
        Some(c) => assumed.contains(c),
    }
}

/// `□P` as a local rule: `P` holds here and `□P` on both children.
pub fn always<'a>(base: &'a NodeSet) -> impl Fn(&Profile, NodeId, &NodeSet) -> bool + 'a {
    move |s: &Profile, id: NodeId, assumed: &NodeSet| {
        base.contains(id) && s.node(id).children().iter().all(|c| assumed.contains(*c))
    }
}

pub fn convergent_set(s: &Profile) -> NodeSet {
    lfp_eval(&conv_rule, s)
}

pub fn always_convergent_set(s: &Profile) -> NodeSet {
    gfp_eval(&always(&convergent_set(s)), s)
}

pub fn divergent_set(s: &Profile) -> NodeSet {
    gfp_eval(&div_rule, s)
}

/// Utility of `agent` at the leaf reached from `id`, for convergent `id`.
fn value_at<'a>(s: &'a Profile, id: NodeId, agent: &crate::profile::Agent) -> Option<&'a Utility> {
    let leaf = s.subprofile(id).ok()?.chosen_leaf()?;
    match s.node(leaf) {
        Node::Leaf(u) => u.get(agent),
        Node::Internal { .. } => None,
    }
}

/// Nodes where PE holds. Leaves are included whenever always-convergent,
/// which they always are.
pub fn pe_set(s: &Profile) -> NodeSet {
    let box_conv = always_convergent_set(s);
    let mut out = NodeSet::empty(s.store_len());
    let mut leaf_of: Vec<Option<Option<NodeId>>> = vec![None; s.store_len()];
    let mut reached = |id: NodeId| -> Option<NodeId> {
        *leaf_of[id.index()].get_or_insert_with(|| s.subprofile(id).ok().and_then(|p| p.chosen_leaf()))
    };
    for id in s.reachable() {
        if !box_conv.contains(id) {
            continue;
        }
        match s.node(id) {
            Node::Leaf(_) => out.insert(id),
            Node::Internal {
                owner,
                choice,
                children,
            } => {
                let chosen = reached(children[choice.index()]);
                let other = reached(children[choice.other().index()]);
                let util = |leaf: Option<NodeId>| match leaf.map(|l| s.node(l)) {
                    Some(Node::Leaf(u)) => u.get(owner).cloned(),
                    _ => None,
                };
                // □⇓ guarantees both values exist.
                if let (Some(c), Some(o)) = (util(chosen), util(other)) {
                    if c >= o {
                        out.insert(id);
                    }
                }
            }
        }
    }
    out
}

pub fn spe_set(s: &Profile) -> NodeSet {
    gfp_eval(&always(&pe_set(s)), s)
}

pub fn convergent(s: &Profile) -> bool {
    convergent_set(s).contains(s.root())
}

pub fn always_convergent(s: &Profile) -> bool {
    always_convergent_set(s).contains(s.root())
}

pub fn divergent(s: &Profile) -> bool {
    divergent_set(s).contains(s.root())
}

pub fn pe(s: &Profile) -> bool {
    pe_set(s).contains(s.root())
}

pub fn spe(s: &Profile) -> bool {
    spe_set(s).contains(s.root())
}

/// Utility the owner of an internal node gets from one child, when defined.
pub fn child_value(s: &Profile, id: NodeId, child: usize) -> Option<Utility> {
    match s.node(id) {
        Node::Internal {
            owner, children, ..
        } => value_at(s, children[child], owner).cloned(),
        Node::Leaf(_) => None,
    }
}

/// Three-valued answer for queries that may only be settled up to a bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Holds,
    Fails,
    UnknownAtBound(usize),
}

impl Verdict {
    pub fn from_bool(b: bool) -> Self {
        if b {
            Verdict::Holds
        } else {
            Verdict::Fails
        }
    }

    pub fn is_definite(self) -> bool {
        !matches!(self, Verdict::UnknownAtBound(_))
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Holds => f.write_str("true"),
            Verdict::Fails => f.write_str("false"),
            Verdict::UnknownAtBound(k) => write!(f, "unknown@{k}"),
        }
    }
}

/// For every node, the leaves whose utility is the outcome of some
/// subgame perfect equilibrium of the game rooted there.
///
/// Computed as a greatest fixpoint (off-path subgames need SPEs of their
/// own, arbitrarily deep) of a least fixpoint (the on-path walk to the
/// leaf is finite). Equilibria range over all profiles of the unfolded
/// game, not only those expressible on this graph.
#[derive(Debug, Clone)]
pub struct SpeOutcomes {
    leaves: Vec<NodeId>,
    outcomes: Vec<Vec<bool>>,
}

impl SpeOutcomes {
    pub fn compute(s: &Profile) -> Self {
        let reach = s.reachable();
        let leaves: Vec<NodeId> = reach.iter().copied().filter(|id| s.node(*id).is_leaf()).collect();
        let n = s.store_len();
        let width = leaves.len();
        let mut current: Vec<Vec<bool>> = vec![vec![true; width]; n];
        for (j, l) in leaves.iter().enumerate() {
            current[l.index()] = (0..width).map(|i| i == j).collect();
        }
        loop {
            let next = Self::inner(s, &reach, &leaves, &current);
            if next == current {
                break;
            }
            current = next;
        }
        SpeOutcomes {
            leaves,
            outcomes: current,
        }
    }

    fn inner(s: &Profile, reach: &[NodeId], leaves: &[NodeId], outer: &[Vec<bool>]) -> Vec<Vec<bool>> {
        let n = s.store_len();
        let width = leaves.len();
        let mut inner = vec![vec![false; width]; n];
        for (j, l) in leaves.iter().enumerate() {
            inner[l.index()][j] = true;
        }
        let leaf_value = |j: usize, agent| match s.node(leaves[j]) {
            Node::Leaf(u) => u.get(agent).cloned(),
            Node::Internal { .. } => None,
        };
        let mut changed = true;
        while changed {
            changed = false;
            for &id in reach {
                let Node::Internal { owner, children, .. } = s.node(id) else {
                    continue;
                };
                for c in 0..2 {
                    let (on, off) = (children[c], children[1 - c]);
                    // Worst outcome the owner can be held to off the path.
                    let floor = (0..width)
                        .filter(|&j| outer[off.index()][j])
                        .filter_map(|j| leaf_value(j, owner))
                        .min();
                    let Some(floor) = floor else { continue };
                    for j in 0..width {
                        if inner[on.index()][j] && !inner[id.index()][j] {
                            if leaf_value(j, owner).is_some_and(|v| v >= floor) {
                                inner[id.index()][j] = true;
                                changed = true;
                            }
                        }
                    }
                }
            }
        }
        inner
    }

    /// Leaves reachable as the outcome of some SPE rooted at `id`.
    pub fn outcomes(&self, id: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        self.outcomes[id.index()]
            .iter()
            .enumerate()
            .filter(|(_, b)| **b)
            .map(|(j, _)| self.leaves[j])
    }

    pub fn has_spe(&self, id: NodeId) -> bool {
        self.outcomes[id.index()].iter().any(|b| *b)
    }

    /// Some SPE of the game at `id` makes the given root choice.
    pub fn witness_exists(&self, s: &Profile, id: NodeId, choice: crate::profile::Choice) -> bool {
        let Node::Internal { owner, children, .. } = s.node(id) else {
            return true;
        };
        let value = |leaf: NodeId| match s.node(leaf) {
            Node::Leaf(u) => u.get(owner).cloned(),
            Node::Internal { .. } => None,
        };
        let best_on = self.outcomes(children[choice.index()]).filter_map(value).max();
        let worst_off = self.outcomes(children[choice.other().index()]).filter_map(value).min();
        matches!((best_on, worst_off), (Some(b), Some(w)) if b >= w)
    }
}

/// `Rat_∞` on a rational profile: every node along the chosen path is
/// backed by some same-game SPE making the same choice there.
pub fn rat_inf(s: &Profile) -> bool {
    let table = SpeOutcomes::compute(s);
    let supported = NodeSet::of(
        s,
        s.reachable()
            .into_iter()
            .filter(|&id| match s.node(id) {
                Node::Leaf(_) => true,
                Node::Internal { choice, .. } => table.witness_exists(s, id, *choice),
            }),
    );
    let rule = |s: &Profile, id: NodeId, assumed: &NodeSet| {
        supported.contains(id)
            && match s.node(id).chosen() {
                None => true,
                Some(c) => assumed.contains(c),
            }
    };
    gfp_eval(&rule, s).contains(s.root())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::{Agent, Choice, ProfileBuilder, UtilityAssignment};

    fn ab(a: i64, b: i64) -> UtilityAssignment {
        UtilityAssignment::new()
            .with(&Agent::new("A").unwrap(), Utility::from_int(a))
            .with(&Agent::new("B").unwrap(), Utility::from_int(b))
    }

    fn a() -> Agent {
        Agent::new("A").unwrap()
    }
    fn b() -> Agent {
        Agent::new("B").unwrap()
    }

    /// A and B both pass the turn forever.
    fn s_box2() -> Profile {
        let mut bd = ProfileBuilder::new();
        let n0 = bd.reserve();
        let l0 = bd.leaf(ab(1, 0));
        let l1 = bd.leaf(ab(0, 1));
        let n1 = bd.internal(b(), Choice::Two, l1, n0);
        bd.define(n0, Node::Internal { owner: a(), choice: Choice::Two, children: [l0, n1] });
        bd.build(n0).unwrap()
    }

    /// A stops, B continues, then the two-cycle.
    fn s_1box2() -> (Profile, [NodeId; 4]) {
        let mut bd = ProfileBuilder::new();
        let m0 = bd.reserve();
        let l_m0 = bd.leaf(ab(0, 1));
        let l_m1 = bd.leaf(ab(1, 0));
        let m1 = bd.internal(b(), Choice::Two, l_m1, m0);
        bd.define(m0, Node::Internal { owner: a(), choice: Choice::Two, children: [l_m0, m1] });
        let l1 = bd.leaf(ab(1, 0));
        let n1 = bd.internal(b(), Choice::Two, l1, m0);
        let l0 = bd.leaf(ab(0, 1));
        let n0 = bd.internal(a(), Choice::One, l0, n1);
        (bd.build(n0).unwrap(), [n0, n1, m0, m1])
    }

    #[test]
    fn conv_lfp_examples() {
        let s = s_box2();
        let conv = convergent_set(&s);
        // Only the two leaves; no decision node reaches one.
        assert_eq!(conv.len(), 2);
        assert!(conv.iter().all(|id| s.node(id).is_leaf()));
        let leaf = Profile::leaf(ab(0, 0)).unwrap();
        assert_eq!(convergent_set(&leaf).iter().collect::<Vec<_>>(), vec![leaf.root()]);

        let (s, [n0, n1, m0, m1]) = s_1box2();
        let conv = convergent_set(&s);
        assert!(conv.contains(n0) && !conv.contains(n1) && !conv.contains(m0) && !conv.contains(m1));
        // Only n0 reaches a leaf along its choices; the four leaves are in.
        assert_eq!(conv.len(), 5);
    }

    #[test]
    fn gfp_examples() {
        let (s, _) = s_1box2();
        let all = gfp_eval(&|_: &Profile, _: NodeId, _: &NodeSet| true, &s);
        assert_eq!(all.len(), s.reachable().len());
        let box_conv = always_convergent_set(&s);
        assert_eq!(box_conv.len(), 4);
        assert!(box_conv.iter().all(|id| s.node(id).is_leaf()));

        let t = s_box2();
        let div = divergent_set(&t);
        assert_eq!(div.len(), 2);
        assert!(div.iter().all(|id| !t.node(id).is_leaf()));
    }

    #[test]
    fn fig1_predicates() {
        let t = s_box2();
        assert!(divergent(&t) && !convergent(&t) && !spe(&t) && !pe(&t));
        let (s, _) = s_1box2();
        assert!(convergent(&s) && !always_convergent(&s) && !divergent(&s));
        let leaf = Profile::leaf(ab(0, 0)).unwrap();
        assert!(convergent(&leaf) && always_convergent(&leaf) && !divergent(&leaf));
        assert!(pe(&leaf) && spe(&leaf));
    }

    #[test]
    fn s_alpha_pe_and_spe() {
        let half = Utility::ratio(1, 2);
        let la = UtilityAssignment::new().with(&a(), Utility::one()).with(&b(), half);
        let mut bd = ProfileBuilder::new();
        let l1 = bd.leaf(la);
        let l2 = bd.leaf(ab(2, 1));
        let l3 = bd.leaf(ab(0, 5));
        let nb = bd.internal(b(), Choice::One, l2, l3);
        let na = bd.internal(a(), Choice::Two, l1, nb);
        let s = bd.build(na).unwrap();
        assert!(pe(&s));
        assert!(!pe(&s.subprofile(nb).unwrap()));
        assert!(!spe(&s));
        assert_eq!(child_value(&s, na, 1), Some(Utility::from_int(2)));
    }

    #[test]
    fn worklist_order_does_not_matter() {
        let (s, _) = s_1box2();
        let mut order = s.reachable();
        let base = convergent_set(&s);
        let base_g = divergent_set(&s);
        for rot in 0..order.len() {
            order.rotate_left(1);
            let mut rev = order.clone();
            rev.reverse();
            for o in [&order, &rev] {
                assert_eq!(lfp_eval_ordered(&conv_rule, &s, o), base, "rotation {rot}");
                assert_eq!(gfp_eval_ordered(&div_rule, &s, o), base_g);
            }
        }
    }

    #[test]
    fn rat_inf_on_rational_profiles() {
        // A gets 1 by stopping and no equilibrium continuation gives A more.
        let t = s_box2();
        assert!(!rat_inf(&t));
        let leaf = Profile::leaf(ab(3, 3)).unwrap();
        assert!(rat_inf(&leaf));
    }

    #[test]
    fn verdict_display() {
        assert_eq!(Verdict::Holds.to_string(), "true");
        assert_eq!(Verdict::UnknownAtBound(4).to_string(), "unknown@4");
        assert!(!Verdict::UnknownAtBound(1).is_definite());
    }
}
