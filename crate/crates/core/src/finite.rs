//! Finite strategy profiles: backward induction, finite rationality,
//! enumeration of all profiles of a game, and the BI/rationality
//! equivalence check.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::profile::{same_game, Agent, Choice, Node, NodeId, Profile, ProfileBuilder, UtilityAssignment};
use crate::utility::Utility;

/// Default cap on the number of decision nodes whose choices get enumerated.
pub const DEFAULT_ENUMERATION_BOUND: usize = 20;

/// Cap on the node count of a tree expansion.
const MAX_TREE_NODES: usize = 1 << 20;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FiniteError {
    #[error("profile is not finite: its reachable graph has a cycle")]
    NotFinite,
    #[error("game has {internal} decision nodes, more than the bound {bound}")]
    TooLarge { internal: usize, bound: usize },
}

/// A profile whose reachable graph is acyclic.
#[derive(Debug, Clone)]
pub struct FiniteProfile(Profile);

impl FiniteProfile {
    pub fn new(p: Profile) -> Result<Self, FiniteError> {
        if p.is_acyclic() {
            Ok(FiniteProfile(p))
        } else {
            Err(FiniteError::NotFinite)
        }
    }

    pub fn profile(&self) -> &Profile {
        &self.0
    }

    pub fn into_profile(self) -> Profile {
        self.0
    }
}

impl TryFrom<Profile> for FiniteProfile {
    type Error = FiniteError;
    fn try_from(p: Profile) -> Result<Self, Self::Error> {
        FiniteProfile::new(p)
    }
}

/// `BI`: every decision weakly maximises its owner's utility given the
/// subprofiles' outcomes, recursively.
pub fn bi(s: &FiniteProfile) -> bool {
    let p = s.profile();
    let mut memo: Vec<Option<(bool, NodeId)>> = vec![None; p.store_len()];
    bi_node(p, p.root(), &mut memo).0
}

fn bi_node(p: &Profile, id: NodeId, memo: &mut Vec<Option<(bool, NodeId)>>) -> (bool, NodeId) {
    if let Some(r) = memo[id.index()] {
        return r;
    }
    let r = match p.node(id) {
        Node::Leaf(_) => (true, id),
        Node::Internal {
            owner,
            choice,
            children,
        } => {
            let (ok1, l1) = bi_node(p, children[0], memo);
            let (ok2, l2) = bi_node(p, children[1], memo);
            let util = |l: NodeId| match p.node(l) {
                Node::Leaf(u) => u.get(owner),
                Node::Internal { .. } => None,
            };
            let (mine, other) = match choice {
                Choice::One => (util(l1), util(l2)),
                Choice::Two => (util(l2), util(l1)),
            };
            let reached = if *choice == Choice::One { l1 } else { l2 };
            (ok1 && ok2 && mine >= other, reached)
        }
    };
    memo[id.index()] = Some(r);
    r
}

/// Which subprofile the recursive `Rat_f` call inspects.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RatfBinding {
    /// The chosen child of the profile under test.
    #[default]
    Original,
    /// The chosen child of the BI witness.
    Witness,
}

/// `Rat_f` with the default binding.
pub fn rat_f(s: &FiniteProfile) -> bool {
    rat_f_with(s, RatfBinding::Original).expect("tree expansion of a finite profile")
}

/// `Rat_f`: at each decision along the chosen path some same-game BI
/// profile makes the same choice. Witnesses are found by exhaustive search.
pub fn rat_f_with(s: &FiniteProfile, binding: RatfBinding) -> Result<bool, FiniteError> {
    let g = GameTemplate::new(s)?;
    let choices = g.choices_of_template();
    Ok(g.rat_f_under(&choices, binding))
}

/// The game underlying a finite profile, expanded into a tree.
///
/// Choices carried by the template's own nodes are those of the profile it
/// was built from; all queries take an explicit choice vector indexed by
/// decision-node position (preorder).
#[derive(Debug, Clone)]
pub struct GameTemplate {
    tree: Profile,
    internal: Vec<NodeId>,
    position: Vec<Option<usize>>,
    subtree: Vec<Vec<usize>>,
    agents: Vec<Agent>,
    owner_index: Vec<usize>,
    /// Per leaf, the rank of each agent's utility among that agent's
    /// distinct leaf utilities. Order-equivalent to the exact values.
    ranks: Vec<Vec<u32>>,
}

impl GameTemplate {
    pub fn new(s: &FiniteProfile) -> Result<Self, FiniteError> {
        let p = s.profile();
        let mut b = ProfileBuilder::new();
        let mut count = 0usize;
        let root = expand(p, p.root(), &mut b, &mut count)?;
        let tree = b.build(root).expect("expansion of a valid profile is valid");
        Ok(Self::from_tree(tree))
    }

    fn from_tree(tree: Profile) -> Self {
        let n = tree.store_len();
        let mut internal = Vec::new();
        let mut position = vec![None; n];
        let mut subtree = vec![Vec::new(); n];
        preorder(&tree, tree.root(), &mut internal, &mut position);
        for id in (0..n).map(|i| NodeId(i as u32)) {
            let mut acc = Vec::new();
            let mut reach = Vec::new();
            preorder(&tree, id, &mut reach, &mut vec![None; n]);
            for r in reach {
                if let Some(pos) = position[r.index()] {
                    acc.push(pos);
                }
            }
            subtree[id.index()] = acc;
        }
        let agents: Vec<Agent> = tree.agents().into_iter().collect();
        let agent_idx: BTreeMap<&Agent, usize> = agents.iter().enumerate().map(|(i, a)| (a, i)).collect();
        let owner_index = internal
            .iter()
            .map(|id| match tree.node(*id) {
                Node::Internal { owner, .. } => agent_idx[owner],
                Node::Leaf(_) => unreachable!(),
            })
            .collect();
        let mut ranks = vec![Vec::new(); n];
        for (ai, agent) in agents.iter().enumerate() {
            let mut values: Vec<&Utility> = (0..n)
                .filter_map(|i| match tree.node(NodeId(i as u32)) {
                    Node::Leaf(u) => u.get(agent),
                    Node::Internal { .. } => None,
                })
                .collect();
            values.sort();
            values.dedup();
            for i in 0..n {
                if let Node::Leaf(u) = tree.node(NodeId(i as u32)) {
                    let v = u.get(agent).expect("leaves cover all agents");
                    let r = values.binary_search(&v).expect("value is present") as u32;
                    if ranks[i].len() <= ai {
                        ranks[i].resize(agents.len(), 0);
                    }
                    ranks[i][ai] = r;
                }
            }
        }
        GameTemplate {
            tree,
            internal,
            position,
            subtree,
            agents,
            owner_index,
            ranks,
        }
    }

    /// Number of decision nodes.
    pub fn internal_count(&self) -> usize {
        self.internal.len()
    }

    pub fn tree(&self) -> &Profile {
        &self.tree
    }

    pub fn agents(&self) -> &[Agent] {
        &self.agents
    }

    /// Choices carried by the template tree itself.
    pub fn choices_of_template(&self) -> Vec<Choice> {
        self.internal
            .iter()
            .map(|id| match self.tree.node(*id) {
                Node::Internal { choice, .. } => *choice,
                Node::Leaf(_) => unreachable!(),
            })
            .collect()
    }

    /// Choice vector for enumeration index `mask`: bit `i` set picks
    /// `Choice::Two` at decision node `i`.
    pub fn choices_for_mask(&self, mask: u64) -> Vec<Choice> {
        (0..self.internal.len())
            .map(|i| if mask >> i & 1 == 1 { Choice::Two } else { Choice::One })
            .collect()
    }

    /// Materialises the profile for a choice vector.
    pub fn instantiate(&self, choices: &[Choice]) -> FiniteProfile {
        let mut p = self.tree.clone();
        for (i, id) in self.internal.iter().enumerate() {
            p = p.with_choice(*id, choices[i]).expect("decision node");
        }
        FiniteProfile(p)
    }

    /// BI at `at` evaluated on ranks; returns the outcome leaf too.
    fn bi_at(&self, at: NodeId, choices: &[Choice]) -> (bool, NodeId) {
        match self.tree.node(at) {
            Node::Leaf(_) => (true, at),
            Node::Internal { children, .. } => {
                let pos = self.position[at.index()].expect("decision node");
                let (ok1, l1) = self.bi_at(children[0], choices);
                if !ok1 {
                    return (false, l1);
                }
                let (ok2, l2) = self.bi_at(children[1], choices);
                let o = self.owner_index[pos];
                let (r1, r2) = (self.ranks[l1.index()][o], self.ranks[l2.index()][o]);
                match choices[pos] {
                    Choice::One => (ok2 && r1 >= r2, l1),
                    Choice::Two => (ok2 && r2 >= r1, l2),
                }
            }
        }
    }

    pub fn bi_under(&self, choices: &[Choice]) -> bool {
        self.bi_at(self.tree.root(), choices).0
    }

    pub fn rat_f_under(&self, choices: &[Choice], binding: RatfBinding) -> bool {
        let mut scratch = choices.to_vec();
        self.rat_f_at(self.tree.root(), choices, binding, &mut scratch)
    }

    fn rat_f_at(&self, at: NodeId, choices: &[Choice], binding: RatfBinding, scratch: &mut Vec<Choice>) -> bool {
        let Node::Internal { children, .. } = self.tree.node(at) else {
            return true;
        };
        let pos = self.position[at.index()].expect("decision node");
        let c = choices[pos];
        let free: Vec<usize> = self.subtree[at.index()].iter().copied().filter(|&i| i != pos).collect();
        let next = children[c.index()];
        let mut found = false;
        for mask in 0u64..(1u64 << free.len()) {
            scratch[pos] = c;
            for (bit, &i) in free.iter().enumerate() {
                scratch[i] = if mask >> bit & 1 == 1 { Choice::Two } else { Choice::One };
            }
            if !self.bi_at(at, scratch).0 {
                continue;
            }
            if binding == RatfBinding::Witness {
                let witness = scratch.clone();
                if !self.rat_f_at(next, &witness, binding, scratch) {
                    continue;
                }
            }
            found = true;
            break;
        }
        if !found {
            return false;
        }
        match binding {
            RatfBinding::Original => self.rat_f_at(next, choices, binding, scratch),
            RatfBinding::Witness => true,
        }
    }
}

fn expand(p: &Profile, id: NodeId, b: &mut ProfileBuilder, count: &mut usize) -> Result<NodeId, FiniteError> {
    *count += 1;
    if *count > MAX_TREE_NODES {
        return Err(FiniteError::TooLarge {
            internal: *count,
            bound: MAX_TREE_NODES,
        });
    }
    Ok(match p.node(id) {
        Node::Leaf(u) => b.leaf(u.clone()),
        Node::Internal {
            owner,
            choice,
            children,
        } => {
            let c1 = expand(p, children[0], b, count)?;
            let c2 = expand(p, children[1], b, count)?;
            b.internal(owner.clone(), *choice, c1, c2)
        }
    })
}

fn preorder(t: &Profile, id: NodeId, out: &mut Vec<NodeId>, position: &mut [Option<usize>]) {
    if let Node::Internal { children, .. } = t.node(id) {
        position[id.index()] = Some(out.len());
        out.push(id);
        preorder(t, children[0], out, position);
        preorder(t, children[1], out, position);
    }
}

/// All `2^k` profiles of a game, in mask order.
pub fn enumerate_profiles(g: &GameTemplate) -> Result<ProfileEnumeration<'_>, FiniteError> {
    enumerate_profiles_bounded(g, DEFAULT_ENUMERATION_BOUND)
}

pub fn enumerate_profiles_bounded(g: &GameTemplate, bound: usize) -> Result<ProfileEnumeration<'_>, FiniteError> {
    let k = g.internal_count();
    if k > bound || k >= 64 {
        return Err(FiniteError::TooLarge { internal: k, bound });
    }
    Ok(ProfileEnumeration {
        template: g,
        next: 0,
        end: 1u64 << k,
    })
}

#[derive(Debug, Clone)]
pub struct ProfileEnumeration<'a> {
    template: &'a GameTemplate,
    next: u64,
    end: u64,
}

impl Iterator for ProfileEnumeration<'_> {
    type Item = FiniteProfile;

    fn next(&mut self) -> Option<FiniteProfile> {
        if self.next >= self.end {
            return None;
        }
        let choices = self.template.choices_for_mask(self.next);
        self.next += 1;
        Some(self.template.instantiate(&choices))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = (self.end - self.next) as usize;
        (n, Some(n))
    }
}

impl ExactSizeIterator for ProfileEnumeration<'_> {}

/// Outcome of comparing `{s : BI(s)}` with `{s : Rat_f(s)}` over a game.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AumannReport {
    pub profiles: u64,
    pub bi: u64,
    pub rat_f: u64,
    /// Masks where `Rat_f` and `BI` disagree.
    pub counterexamples: Vec<u64>,
}

impl AumannReport {
    pub fn equivalent(&self) -> bool {
        self.counterexamples.is_empty()
    }
}

pub fn aumann_report(g: &GameTemplate, binding: RatfBinding) -> Result<AumannReport, FiniteError> {
    let k = g.internal_count();
    if k > DEFAULT_ENUMERATION_BOUND {
        return Err(FiniteError::TooLarge {
            internal: k,
            bound: DEFAULT_ENUMERATION_BOUND,
        });
    }
    let mut report = AumannReport {
        profiles: 1 << k,
        bi: 0,
        rat_f: 0,
        counterexamples: Vec::new(),
    };
    for mask in 0..report.profiles {
        let choices = g.choices_for_mask(mask);
        let b = g.bi_under(&choices);
        let r = g.rat_f_under(&choices, binding);
        report.bi += b as u64;
        report.rat_f += r as u64;
        if b != r {
            report.counterexamples.push(mask);
        }
    }
    Ok(report)
}

/// True iff BI and `Rat_f` select the same profiles of the game.
pub fn aumann_equivalence(g: &GameTemplate) -> Result<bool, FiniteError> {
    Ok(aumann_report(g, RatfBinding::Original)?.equivalent())
}

/// Every dyadic game with at most `max_internal` decision nodes, owners
/// drawn from `agents`, and each agent's leaf utility drawn from `values`.
pub fn dyadic_templates<'a>(
    max_internal: usize,
    agents: &'a [Agent],
    values: &'a [Utility],
) -> impl Iterator<Item = GameTemplate> + 'a {
    (0..=max_internal).flat_map(move |k| {
        shapes(k).into_iter().flat_map(move |shape| {
            let leaves = k + 1;
            let owner_combos = agents.len().pow(k as u32);
            let util_combos = values.len().pow((leaves * agents.len()) as u32);
            (0..owner_combos).flat_map(move |oc| {
                let shape = shape.clone();
                (0..util_combos).map(move |uc| build_template(&shape, agents, values, oc, uc))
            })
        })
    })
}

/// Binary tree shapes with `k` internal nodes.
#[derive(Debug, Clone)]
enum Shape {
    Leaf,
    Node(Box<Shape>, Box<Shape>),
}

fn shapes(k: usize) -> Vec<Shape> {
    if k == 0 {
        return vec![Shape::Leaf];
    }
    let mut out = Vec::new();
    for left in 0..k {
        for l in shapes(left) {
            for r in shapes(k - 1 - left) {
                out.push(Shape::Node(Box::new(l.clone()), Box::new(r)));
            }
        }
    }
    out
}

fn build_template(shape: &Shape, agents: &[Agent], values: &[Utility], mut oc: usize, mut uc: usize) -> GameTemplate {
    fn go(
        s: &Shape,
        b: &mut ProfileBuilder,
        agents: &[Agent],
        values: &[Utility],
        oc: &mut usize,
        uc: &mut usize,
    ) -> NodeId {
        match s {
            Shape::Leaf => {
                let mut u = UtilityAssignment::new();
                for a in agents {
                    u.insert(a.clone(), values[*uc % values.len()].clone());
                    *uc /= values.len();
                }
                b.leaf(u)
            }
            Shape::Node(l, r) => {
                let owner = agents[*oc % agents.len()].clone();
                *oc /= agents.len();
                let c1 = go(l, b, agents, values, oc, uc);
                let c2 = go(r, b, agents, values, oc, uc);
                b.internal(owner, Choice::One, c1, c2)
            }
        }
    }
    let mut b = ProfileBuilder::new();
    let root = go(shape, &mut b, agents, values, &mut oc, &mut uc);
    GameTemplate::from_tree(b.build(root).expect("generated template is valid"))
}

/// Two templates describe the same game.
pub fn same_template(g: &GameTemplate, h: &GameTemplate) -> bool {
    same_game(g.tree(), h.tree())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ab(a: i64, b: i64) -> UtilityAssignment {
        UtilityAssignment::new()
            .with(&Agent::new("A").unwrap(), Utility::from_int(a))
            .with(&Agent::new("B").unwrap(), Utility::from_int(b))
    }

    fn centipede(ca: Choice, cb: Choice) -> FiniteProfile {
        let mut b = ProfileBuilder::new();
        let l1 = b.leaf(ab(1, 2));
        let l2 = b.leaf(ab(0, 1));
        let l3 = b.leaf(ab(2, 1));
        let nb = b.internal(Agent::new("B").unwrap(), cb, l2, l3);
        let na = b.internal(Agent::new("A").unwrap(), ca, l1, nb);
        FiniteProfile::new(b.build(na).unwrap()).unwrap()
    }

    fn s_alpha() -> FiniteProfile {
        let mut b = ProfileBuilder::new();
        let half = UtilityAssignment::new()
            .with(&Agent::new("A").unwrap(), Utility::one())
            .with(&Agent::new("B").unwrap(), Utility::ratio(1, 2));
        let l1 = b.leaf(half);
        let l2 = b.leaf(ab(2, 1));
        let l3 = b.leaf(ab(0, 5));
        let nb = b.internal(Agent::new("B").unwrap(), Choice::One, l2, l3);
        let na = b.internal(Agent::new("A").unwrap(), Choice::Two, l1, nb);
        FiniteProfile::new(b.build(na).unwrap()).unwrap()
    }

    #[test]
    fn bi_examples() {
        assert!(bi(&centipede(Choice::One, Choice::One)));
        assert!(bi(&centipede(Choice::Two, Choice::Two)));
        assert!(!bi(&centipede(Choice::One, Choice::Two)));
        assert!(!bi(&s_alpha()));
        let leaf = FiniteProfile::new(Profile::leaf(ab(0, 0)).unwrap()).unwrap();
        assert!(bi(&leaf) && rat_f(&leaf));
    }

    #[test]
    fn rat_f_examples() {
        assert!(rat_f(&centipede(Choice::One, Choice::One)));
        assert!(!rat_f(&s_alpha()));
        assert!(!rat_f_with(&s_alpha(), RatfBinding::Witness).unwrap());
    }

    #[test]
    fn rat_f_ignores_the_unchosen_subgame() {
        // A stops; B's off-path decision is not optimal. Some BI profile of
        // the game stops at A as well, so Rat_f holds while BI fails.
        let s = centipede(Choice::One, Choice::Two);
        assert!(rat_f(&s));
        assert!(!bi(&s));
    }

    #[test]
    fn cyclic_input_is_not_finite() {
        let mut b = ProfileBuilder::new();
        let n0 = b.reserve();
        let l = b.leaf(ab(1, 0));
        b.define(
            n0,
            Node::Internal {
                owner: Agent::new("A").unwrap(),
                choice: Choice::Two,
                children: [l, n0],
            },
        );
        let p = b.build(n0).unwrap();
        assert_eq!(FiniteProfile::new(p).unwrap_err(), FiniteError::NotFinite);
    }

    #[test]
    fn enumeration_counts() {
        let g = GameTemplate::new(&centipede(Choice::One, Choice::One)).unwrap();
        let all: Vec<_> = enumerate_profiles(&g).unwrap().collect();
        assert_eq!(all.len(), 4);
        for (i, p) in all.iter().enumerate() {
            assert!(same_game(p.profile(), g.tree()));
            for q in &all[i + 1..] {
                assert!(!p.profile().same_profile(q.profile()));
            }
        }
        let leaf = FiniteProfile::new(Profile::leaf(ab(0, 0)).unwrap()).unwrap();
        let gl = GameTemplate::new(&leaf).unwrap();
        assert_eq!(enumerate_profiles(&gl).unwrap().len(), 1);
        assert_eq!(
            enumerate_profiles_bounded(&g, 1).unwrap_err(),
            FiniteError::TooLarge { internal: 2, bound: 1 }
        );
    }

    #[test]
    fn shared_nodes_are_expanded() {
        let l = Profile::leaf(ab(1, 1)).unwrap();
        let inner = Profile::internal(Agent::new("B").unwrap(), Choice::One, &l, &l).unwrap();
        let p = Profile::internal(Agent::new("A").unwrap(), Choice::One, &inner, &inner).unwrap();
        let g = GameTemplate::new(&FiniteProfile::new(p).unwrap()).unwrap();
        assert_eq!(g.internal_count(), 3);
        assert_eq!(enumerate_profiles(&g).unwrap().len(), 8);
    }

    #[test]
    fn template_bi_matches_exact_bi() {
        let g = GameTemplate::new(&s_alpha()).unwrap();
        for p in enumerate_profiles(&g).unwrap() {
            let t = GameTemplate::new(&p).unwrap();
            assert_eq!(t.bi_under(&t.choices_of_template()), bi(&p));
        }
    }

    #[test]
    fn template_counts() {
        let agents = [Agent::new("A").unwrap(), Agent::new("B").unwrap()];
        let values = [Utility::zero(), Utility::one()];
        // shapes 1,1,2 ; owners 1,2,4 ; utilities 4^(k+1)
        let n = dyadic_templates(2, &agents, &values).count();
        assert_eq!(n, 4 + 2 * 16 + 2 * 4 * 64);
    }
}
