//! The named games and profiles, and depth-bounded truncations of combs.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::comb::{CombChoiceWord, CombSpec, Move, StageExpr};
use crate::finite::{FiniteProfile, GameTemplate};
use crate::profile::{Agent, Choice, Node, Profile, ProfileBuilder, UtilityAssignment};
use crate::utility::Utility;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum FamilyError {
    #[error("bad family: {0}")]
    BadFamily(String),
}

fn bad<T>(msg: impl Into<String>) -> Result<T, FamilyError> {
    Err(FamilyError::BadFamily(msg.into()))
}

pub const FAMILY_NAMES: &[&str] = &["centipede158", "fig1", "s_alpha", "infpede", "omegapede", "zero_one", "dollar_auction"];

#[derive(Debug, Clone)]
pub enum FamilyGame {
    Comb(CombSpec),
    Finite(GameTemplate),
    /// Profiles of distinct games shown side by side.
    Collection,
}

#[derive(Debug, Clone)]
pub enum NamedProfile {
    Word(CombChoiceWord),
    Profile(Profile),
}

#[derive(Debug, Clone)]
pub struct FamilyBundle {
    pub name: String,
    pub game: FamilyGame,
    pub profiles: BTreeMap<String, NamedProfile>,
}

impl FamilyBundle {
    pub fn profile(&self, name: &str) -> Result<&NamedProfile, FamilyError> {
        self.profiles.get(name).ok_or_else(|| {
            let known: Vec<_> = self.profiles.keys().map(String::as_str).collect();
            FamilyError::BadFamily(format!("{} has no profile `{name}` (known: {})", self.name, known.join(", ")))
        })
    }

    pub fn comb(&self) -> Option<&CombSpec> {
        match &self.game {
            FamilyGame::Comb(c) => Some(c),
            _ => None,
        }
    }
}

/// How a truncated comb ends after its last spine stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EndingOption {
    /// The next stage's take leaf.
    TakeAll,
    /// The next stage's owner picks its take leaf (1) or an even split (2).
    Choice2b,
    /// Everyone gets 0.
    Nothing,
}

impl std::str::FromStr for EndingOption {
    type Err = FamilyError;
    fn from_str(s: &str) -> Result<Self, FamilyError> {
        match s {
            "takeall" | "1" => Ok(EndingOption::TakeAll),
            "choice2b" | "2b" => Ok(EndingOption::Choice2b),
            "nothing" | "3" => Ok(EndingOption::Nothing),
            _ => bad(format!("unknown ending `{s}` (takeall, choice2b, nothing)")),
        }
    }
}

/// The game of the first `depth` stages of a comb plus the ending.
pub fn unfold(spec: &CombSpec, depth: usize, ending: EndingOption) -> Result<GameTemplate, FamilyError> {
    let p = unfold_profile(spec, depth, ending, &CombChoiceWord::all_take())?;
    GameTemplate::new(&p).map_err(|e| FamilyError::BadFamily(e.to_string()))
}

/// The truncation played by `w`; under `Choice2b` the terminal node reads
/// `w` at stage `depth` (take keeps the take leaf, push shares).
pub fn unfold_profile(spec: &CombSpec, depth: usize, ending: EndingOption, w: &CombChoiceWord) -> Result<FiniteProfile, FamilyError> {
    if depth == 0 {
        return bad("unfold depth must be at least 1");
    }
    let k = depth as u64;
    let mut b = ProfileBuilder::new();
    let mut next = match ending {
        EndingOption::TakeAll => b.leaf(spec.take_assignment(k)),
        EndingOption::Nothing => b.leaf(spec.assignment(&vec![Utility::zero(); spec.agents().len()])),
        EndingOption::Choice2b => {
            let take = b.leaf(spec.take_assignment(k));
            let share = b.leaf(spec.assignment(&vec![spec.share_at(k); spec.agents().len()]));
            b.internal(spec.owner(k).clone(), w.at(k).choice(), take, share)
        }
    };
    for j in (0..k).rev() {
        let leaf = b.leaf(spec.take_assignment(j));
        next = b.internal(spec.owner(j).clone(), w.at(j).choice(), leaf, next);
    }
    let p = b.build(next).map_err(|e| FamilyError::BadFamily(e.to_string()))?;
    Ok(FiniteProfile::new(p).expect("truncation is a tree"))
}

/// Spine choices of a truncation's decision nodes, root first.
pub fn spine_moves(p: &Profile) -> Vec<Move> {
    let mut out = vec![];
    let mut at = p.root();
    while let Node::Internal { choice, children, .. } = p.node(at) {
        out.push(if *choice == Choice::One { Move::Take } else { Move::Push });
        at = children[1];
    }
    out
}

pub fn build_family(name: &str, params: &BTreeMap<String, String>) -> Result<FamilyBundle, FamilyError> {
    let allowed: &[&str] = match name {
        "omegapede" => &["omega"],
        "dollar_auction" => &["pot", "step"],
        _ if FAMILY_NAMES.contains(&name) => &[],
        _ => return bad(format!("unknown family `{name}` (known: {})", FAMILY_NAMES.join(", "))),
    };
    if let Some(k) = params.keys().find(|k| !allowed.contains(&k.as_str())) {
        return bad(format!("{name} takes no parameter `{k}`"));
    }
    let int = |key: &str, default: Option<i64>| -> Result<i64, FamilyError> {
        match (params.get(key), default) {
            (Some(v), _) => v.parse().map_err(|_| FamilyError::BadFamily(format!("{key}={v} is not an integer"))),
            (None, Some(d)) => Ok(d),
            (None, None) => bad(format!("{name} needs parameter {key}")),
        }
    };
    let bundle = match name {
        "centipede158" => centipede158(),
        "fig1" => fig1(),
        "s_alpha" => s_alpha(),
        "infpede" => infpede(),
        "omegapede" => {
            let omega = int("omega", None)?;
            if !(1..=4096).contains(&omega) {
                return bad("omega must be between 1 and 4096");
            }
            omegapede(omega as u64)
        }
        "zero_one" => zero_one(),
        _ => dollar_auction(int("pot", Some(100))?, int("step", Some(5))?),
    };
    Ok(bundle)
}

fn a() -> Agent {
    Agent::new("A").expect("label")
}

fn b() -> Agent {
    Agent::new("B").expect("label")
}

fn ab(x: Utility, y: Utility) -> UtilityAssignment {
    UtilityAssignment::new().with(&a(), x).with(&b(), y)
}

fn abi(x: i64, y: i64) -> UtilityAssignment {
    ab(Utility::from_int(x), Utility::from_int(y))
}

fn finite_bundle(name: &str, profiles: Vec<(&str, Profile)>) -> FamilyBundle {
    let first = FiniteProfile::new(profiles[0].1.clone()).expect("finite");
    FamilyBundle {
        name: name.into(),
        game: FamilyGame::Finite(GameTemplate::new(&first).expect("small tree")),
        profiles: profiles.into_iter().map(|(n, p)| (n.to_string(), NamedProfile::Profile(p))).collect(),
    }
}

fn comb_bundle(name: &str, spec: CombSpec, words: Vec<(&str, CombChoiceWord)>) -> FamilyBundle {
    FamilyBundle {
        name: name.into(),
        game: FamilyGame::Comb(spec),
        profiles: words.into_iter().map(|(n, w)| (n.to_string(), NamedProfile::Word(w))).collect(),
    }
}

/// `⟨A, c1, (1,2), ⟨B, c2, (0,1), (2,1)⟩⟩`
pub fn centipede158_profile(c1: Choice, c2: Choice) -> Profile {
    let mut bd = ProfileBuilder::new();
    let l1 = bd.leaf(abi(1, 2));
    let l2 = bd.leaf(abi(0, 1));
    let l3 = bd.leaf(abi(2, 1));
    let nb = bd.internal(b(), c2, l2, l3);
    let na = bd.internal(a(), c1, l1, nb);
    bd.build(na).expect("valid")
}

fn centipede158() -> FamilyBundle {
    finite_bundle(
        "centipede158",
        vec![
            ("left", centipede158_profile(Choice::One, Choice::One)),
            ("right", centipede158_profile(Choice::Two, Choice::Two)),
        ],
    )
}

/// `⟨A, 2, (1, 1/2), ⟨B, 1, (2,1), (0,5)⟩⟩`, outcome `(2, 1)`.
pub fn s_alpha_profile() -> Profile {
    let mut bd = ProfileBuilder::new();
    let l1 = bd.leaf(ab(Utility::one(), Utility::ratio(1, 2)));
    let l2 = bd.leaf(abi(2, 1));
    let l3 = bd.leaf(abi(0, 5));
    let nb = bd.internal(b(), Choice::One, l2, l3);
    let na = bd.internal(a(), Choice::Two, l1, nb);
    bd.build(na).expect("valid")
}

fn s_alpha() -> FamilyBundle {
    finite_bundle("s_alpha", vec![("s_alpha", s_alpha_profile())])
}

/// A and B pass forever between two nodes.
pub fn s_box2() -> Profile {
    let mut bd = ProfileBuilder::new();
    let n0 = bd.reserve();
    let l0 = bd.leaf(abi(1, 0));
    let l1 = bd.leaf(abi(0, 1));
    let n1 = bd.internal(b(), Choice::Two, l1, n0);
    bd.define(n0, Node::Internal { owner: a(), choice: Choice::Two, children: [l0, n1] });
    bd.build(n0).expect("valid")
}

/// A stops at once; B would continue into the `s_box2` cycle.
pub fn s_1box2() -> Profile {
    let mut bd = ProfileBuilder::new();
    let m0 = bd.reserve();
    let l_m0 = bd.leaf(abi(0, 1));
    let l_m1 = bd.leaf(abi(1, 0));
    let m1 = bd.internal(b(), Choice::Two, l_m1, m0);
    bd.define(m0, Node::Internal { owner: a(), choice: Choice::Two, children: [l_m0, m1] });
    let l1 = bd.leaf(abi(1, 0));
    let n1 = bd.internal(b(), Choice::Two, l1, m0);
    let l0 = bd.leaf(abi(0, 1));
    let n0 = bd.internal(a(), Choice::One, l0, n1);
    bd.build(n0).expect("valid")
}

fn fig1() -> FamilyBundle {
    FamilyBundle {
        name: "fig1".into(),
        game: FamilyGame::Collection,
        profiles: [("s_box2", s_box2()), ("s_1box2", s_1box2())]
            .into_iter()
            .map(|(n, p)| (n.to_string(), NamedProfile::Profile(p)))
            .collect(),
    }
}

/// A's take at round `n`: `(2^(2n+2), 2^(2n))`; B's: `(2^(2n+1), 2^(2n+3))`.
/// Splitting at a stage gives each agent the geometric middle of the take.
pub fn infpede_spec() -> CombSpec {
    let take = vec![
        vec![StageExpr::pow2(2, 2), StageExpr::pow2(2, 0)],
        vec![StageExpr::pow2(2, 1), StageExpr::pow2(2, 3)],
    ];
    CombSpec::new(vec![a(), b()], vec![0, 1], take)
        .and_then(|s| s.with_share(vec![StageExpr::pow2(2, 1), StageExpr::pow2(2, 2)]))
        .expect("valid spec")
}

fn infpede() -> FamilyBundle {
    comb_bundle(
        "infpede",
        infpede_spec(),
        vec![
            ("p0", CombChoiceWord::all_take()),
            ("d0", CombChoiceWord::all_push()),
            ("push_once", CombChoiceWord::push_then_take(1)),
        ],
    )
}

/// The ∞pede whose leaves are frozen at `(2^ω, 2^ω)` from the `ω`-th
/// stage (index `ω − 1`) on.
pub fn omegapede_spec(omega: u64) -> CombSpec {
    let top = Utility::pow2(omega as i64);
    infpede_spec().with_cap(omega - 1, vec![top.clone(), top]).expect("two agents")
}

fn omegapede(omega: u64) -> FamilyBundle {
    comb_bundle(
        "omegapede",
        omegapede_spec(omega),
        vec![
            ("allpush", CombChoiceWord::all_push()),
            ("push_until_omega", CombChoiceWord::push_then_take(omega as usize - 1)),
            ("p0", CombChoiceWord::all_take()),
        ],
    )
}

/// The quitter gets 0, the other agent 1.
pub fn zero_one_spec() -> CombSpec {
    let take = vec![
        vec![StageExpr::constant(0), StageExpr::constant(1)],
        vec![StageExpr::constant(1), StageExpr::constant(0)],
    ];
    CombSpec::new(vec![a(), b()], vec![0, 1], take).expect("valid spec")
}

fn alternating() -> Vec<(&'static str, CombChoiceWord)> {
    use Move::{Push, Take};
    let w = |p: Vec<Move>| CombChoiceWord::new(vec![], p).expect("nonempty");
    vec![
        ("bothpush", w(vec![Push])),
        ("bothtake", w(vec![Take])),
        ("a_push_b_take", w(vec![Push, Take])),
        ("a_take_b_push", w(vec![Take, Push])),
    ]
}

fn zero_one() -> FamilyBundle {
    comb_bundle("zero_one", zero_one_spec(), alternating())
}

/// Round `n`: A's stage pays `(−step·n, pot − step·n)`, B's stage pays
/// `(pot − step − step·n, −step·n)`.
pub fn dollar_auction_spec(pot: i64, step: i64) -> CombSpec {
    let take = vec![
        vec![StageExpr::affine(0, -step), StageExpr::affine(pot, -step)],
        vec![StageExpr::affine(pot - step, -step), StageExpr::affine(0, -step)],
    ];
    CombSpec::new(vec![a(), b()], vec![0, 1], take).expect("valid spec")
}

fn dollar_auction(pot: i64, step: i64) -> FamilyBundle {
    comb_bundle("dollar_auction", dollar_auction_spec(pot, step), alternating())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::comb::{comb_divergent, comb_rat_inf, comb_spe};
    use crate::engine::{self, Verdict};
    use crate::finite::{bi, enumerate_profiles};

    fn no_params() -> BTreeMap<String, String> {
        BTreeMap::new()
    }

    fn word(b: &FamilyBundle, n: &str) -> CombChoiceWord {
        match b.profile(n).unwrap() {
            NamedProfile::Word(w) => w.clone(),
            NamedProfile::Profile(_) => panic!("{n} is not a comb profile"),
        }
    }

    fn prof(b: &FamilyBundle, n: &str) -> Profile {
        match b.profile(n).unwrap() {
            NamedProfile::Profile(p) => p.clone(),
            NamedProfile::Word(_) => panic!("{n} is a comb profile"),
        }
    }

    #[test]
    fn errors() {
        assert!(build_family("nosuch", &no_params()).is_err());
        assert!(build_family("omegapede", &no_params()).is_err());
        let mut p = no_params();
        p.insert("omega".into(), "x".into());
        assert!(build_family("omegapede", &p).is_err());
        p.insert("omega".into(), "3".into());
        assert!(build_family("omegapede", &p).is_ok());
        p.insert("pot".into(), "3".into());
        assert!(build_family("omegapede", &p).is_err());
        assert!(build_family("infpede", &no_params()).unwrap().profile("zz").is_err());
    }

    #[test]
    fn dollar_auction_sequence() {
        let bd = build_family("dollar_auction", &no_params()).unwrap();
        let spec = bd.comb().unwrap();
        let got: Vec<String> = (0..6)
            .map(|j| spec.take_at(j).iter().map(|u| u.to_string()).collect::<Vec<_>>().join(","))
            .collect();
        assert_eq!(got, ["0,100", "95,0", "-5,95", "90,-5", "-10,90", "85,-10"]);
    }

    #[test]
    fn infpede_leaves_match_the_sketch() {
        let spec = infpede_spec();
        let got: Vec<String> = (0..9)
            .map(|j| spec.take_at(j).iter().map(|u| u.to_string()).collect::<Vec<_>>().join(","))
            .collect();
        assert_eq!(got, ["4,1", "2,8", "16,4", "8,32", "64,16", "32,128", "256,64", "128,512", "1024,256"]);
    }

    #[test]
    fn named_profiles_have_their_predicates() {
        let f = build_family("fig1", &no_params()).unwrap();
        assert!(engine::divergent(&prof(&f, "s_box2")));
        let s = prof(&f, "s_1box2");
        assert!(engine::convergent(&s) && !engine::always_convergent(&s));

        let c = build_family("centipede158", &no_params()).unwrap();
        for n in ["left", "right"] {
            let p = FiniteProfile::new(prof(&c, n)).unwrap();
            assert!(bi(&p) && engine::spe(p.profile()), "{n}");
        }

        let i = build_family("infpede", &no_params()).unwrap();
        let spec = i.comb().unwrap();
        assert!(comb_spe(spec, &word(&i, "p0")).is_valid());
        assert!(comb_divergent(spec, &word(&i, "d0")));

        let mut params = no_params();
        params.insert("omega".into(), "4".into());
        let o = build_family("omegapede", &params).unwrap();
        let spec = o.comb().unwrap();
        let w = word(&o, "allpush");
        assert!(comb_divergent(spec, &w) && comb_rat_inf(spec, &w) == Verdict::Holds);
        assert!(comb_spe(spec, &word(&o, "push_until_omega")).is_valid());

        for fam in ["zero_one", "dollar_auction"] {
            let z = build_family(fam, &no_params()).unwrap();
            let spec = z.comb().unwrap();
            let w = word(&z, "bothpush");
            assert!(comb_divergent(spec, &w) && comb_rat_inf(spec, &w) == Verdict::Holds, "{fam}");
            assert!(comb_spe(spec, &word(&z, "a_push_b_take")).is_valid(), "{fam}");
        }
    }

    #[test]
    fn unfold_shapes() {
        let spec = infpede_spec();
        let g = unfold(&spec, 1, EndingOption::TakeAll).unwrap();
        assert_eq!(g.internal_count(), 1);
        for k in 1..6 {
            assert_eq!(unfold(&spec, k, EndingOption::Nothing).unwrap().internal_count(), k);
            assert_eq!(unfold(&spec, k, EndingOption::Choice2b).unwrap().internal_count(), k + 1);
        }
        assert!(unfold(&spec, 0, EndingOption::TakeAll).is_err());
        let w: CombChoiceWord = "pt(p)".parse().unwrap();
        let p = unfold_profile(&spec, 4, EndingOption::Choice2b, &w).unwrap();
        let got: String = spine_moves(p.profile()).iter().map(|m| m.letter()).collect();
        assert_eq!(got, "ptppp");
    }

    #[test]
    fn unfold_infpede_choice2b_takes_at_once() {
        let g = unfold(&infpede_spec(), 2, EndingOption::Choice2b).unwrap();
        let bis: Vec<_> = enumerate_profiles(&g).unwrap().filter(bi).collect();
        assert!(!bis.is_empty());
        assert!(bis.iter().all(|p| spine_moves(p.profile())[0] == Move::Take));
    }

    #[test]
    fn omegapede_truncation_may_push_through_the_plateau() {
        let g = unfold(&omegapede_spec(3), 6, EndingOption::Nothing).unwrap();
        let found = enumerate_profiles(&g)
            .unwrap()
            .filter(bi)
            .any(|p| spine_moves(p.profile())[2..5].iter().all(|&m| m == Move::Push));
        assert!(found);
    }
}
