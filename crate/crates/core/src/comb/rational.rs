//! Rationality (Rat_∞) and divergence of comb profiles.

use std::fmt;

use num_integer::Integer;

use crate::engine::Verdict;
use crate::utility::Utility;

use super::certify::{is_spe_from, StageClass};
use super::spec::CombSpec;
use super::stage::strictly_greater_from;
use super::word::{CombChoiceWord, Move};

/// The chosen path never reaches a leaf.
pub fn comb_divergent(_spec: &CombSpec, w: &CombChoiceWord) -> bool {
    !w.has_take()
}

/// Bounds of the witness search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WitnessBounds {
    /// Letters allowed between the required first move and the period.
    pub max_offset: usize,
    pub max_period: usize,
}

impl Default for WitnessBounds {
    fn default() -> Self {
        WitnessBounds { max_offset: 4, max_period: 4 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StageOutcome {
    /// An SPE witness word, relative to the stage.
    Witness(CombChoiceWord),
    /// Decided from the exact set of SPE outcomes of the subgame.
    Exact(bool),
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StageReport {
    pub class: StageClass,
    pub choice: Move,
    pub outcome: StageOutcome,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatInfReport {
    pub verdict: Verdict,
    pub stages: Vec<StageReport>,
}

impl fmt::Display for RatInfReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.stages {
            let what = match &s.outcome {
                StageOutcome::Witness(w) => format!("witness {w}"),
                StageOutcome::Exact(true) => "supported (exact)".to_string(),
                StageOutcome::Exact(false) => "no SPE makes this choice (exact)".to_string(),
                StageOutcome::Unknown => "no witness within bounds".to_string(),
            };
            writeln!(f, "stage {} {}: {what}", s.class, s.choice.letter())?;
        }
        write!(f, "Rat_inf: {}", self.verdict)
    }
}

pub fn comb_rat_inf(spec: &CombSpec, w: &CombChoiceWord) -> Verdict {
    comb_rat_inf_report(spec, w, WitnessBounds::default()).verdict
}

/// Checks every stage on the chosen path for an SPE of its subgame making
/// the same choice. Concrete stages with no bounded witness are settled
/// exactly when the comb has a tractable tail; a single unsupported path
/// stage refutes Rat_∞.
pub fn comb_rat_inf_report(spec: &CombSpec, w: &CombChoiceWord, bounds: WitnessBounds) -> RatInfReport {
    let tail = Tail::of(spec);
    let mut stages = vec![];
    let mut unknown = false;
    let mut failed = false;
    for (class, mv) in path_classes(spec, w) {
        let outcome = match search_witness(spec, class, mv, bounds) {
            Some(u) => StageOutcome::Witness(u),
            None => match tail.as_ref().map(|t| t.supports(spec, class.base, mv)) {
                Some(false) => StageOutcome::Exact(false),
                Some(true) if class.is_concrete() => StageOutcome::Exact(true),
                _ => StageOutcome::Unknown,
            },
        };
        match outcome {
            StageOutcome::Exact(false) => failed = true,
            StageOutcome::Unknown => unknown = true,
            _ => {}
        }
        stages.push(StageReport { class, choice: mv, outcome });
        if failed {
            break;
        }
    }
    let verdict = if failed {
        Verdict::Fails
    } else if unknown {
        Verdict::UnknownAtBound(bounds.max_period)
    } else {
        Verdict::Holds
    };
    RatInfReport { verdict, stages }
}

/// Stages on the chosen path, grouped into classes with a common move.
fn path_classes(spec: &CombSpec, w: &CombChoiceWord) -> Vec<(StageClass, Move)> {
    if let Some(t) = w.first_take() {
        return (0..=t).map(|j| (StageClass::at(j), w.at(j))).collect();
    }
    let p = spec.period();
    let concrete = (w.prefix().len() as u64).max(spec.cap_stage().unwrap_or(0));
    let m = (w.period().len() as u64).lcm(&p);
    let mut out: Vec<_> = (0..concrete).map(|j| (StageClass::at(j), w.at(j))).collect();
    out.extend((concrete..concrete + m).map(|j| (StageClass::every(j, m), w.at(j))));
    out
}

fn search_witness(spec: &CombSpec, class: StageClass, mv: Move, bounds: WitnessBounds) -> Option<CombChoiceWord> {
    for extra in 0..=bounds.max_offset {
        for x in words(extra) {
            let mut prefix = vec![mv];
            prefix.extend(x);
            for len in 1..=bounds.max_period {
                for period in words(len).filter(|y| y.contains(&Move::Take)) {
                    let u = CombChoiceWord::new(prefix.clone(), period).expect("nonempty period");
                    if is_spe_from(spec, class, &u) {
                        return Some(u);
                    }
                }
            }
        }
    }
    None
}

fn words(len: usize) -> impl Iterator<Item = Vec<Move>> {
    (0u32..1 << len).map(move |mask| {
        (0..len).map(|i| if mask >> i & 1 == 0 { Move::Take } else { Move::Push }).collect()
    })
}

/// A stage from which the SPE outcomes of every subgame are known.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Tail {
    /// Every leaf at or past the cap pays the cap values.
    Frozen(u64),
    /// Each owner strictly prefers its own take to the next stage's take,
    /// so the only SPE takes everywhere.
    TakeOnly(u64),
}

impl Tail {
    fn of(spec: &CombSpec) -> Option<Tail> {
        if let Some(k) = spec.cap_stage() {
            return Some(Tail::Frozen(k));
        }
        let p = spec.period();
        let mut from = 0u64;
        for pos in 0..p {
            let o = spec.owner_index(pos);
            let next = (pos + 1) % p;
            let carry = (pos + 1) / p;
            let here = spec.take_expr(pos as usize, o);
            let there = spec.take_expr(next as usize, o).substitute(carry, 1);
            let round = strictly_greater_from(here, &there)?;
            from = from.max(round * p);
        }
        Some(Tail::TakeOnly(from))
    }

    fn start(self) -> u64 {
        match self {
            Tail::Frozen(k) | Tail::TakeOnly(k) => k,
        }
    }

    /// SPE outcomes of the subgame at `stage`, by backward recursion from
    /// the tail.
    fn outcomes(self, spec: &CombSpec, stage: u64) -> Vec<Vec<Utility>> {
        let top = self.start().max(stage);
        let mut v = vec![spec.take_at(top)];
        for i in (stage..top).rev() {
            let t = spec.take_at(i);
            let o = spec.owner_index(i);
            let mut next: Vec<Vec<Utility>> = v.iter().filter(|u| u[o] >= t[o]).cloned().collect();
            if v.iter().any(|u| u[o] <= t[o]) && !next.contains(&t) {
                next.push(t);
            }
            v = next;
        }
        v
    }

    fn supports(self, spec: &CombSpec, stage: u64, mv: Move) -> bool {
        let t = spec.take_at(stage);
        let o = spec.owner_index(stage);
        let after = self.outcomes(spec, stage + 1);
        match mv {
            Move::Take => after.iter().any(|u| u[o] <= t[o]),
            Move::Push => after.iter().any(|u| u[o] >= t[o]),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::comb::stage::StageExpr;
    use crate::profile::Agent;

    fn ab() -> Vec<Agent> {
        vec![Agent::new("A").unwrap(), Agent::new("B").unwrap()]
    }

    fn infpede() -> CombSpec {
        let take = vec![
            vec![StageExpr::pow2(2, 2), StageExpr::pow2(2, 0)],
            vec![StageExpr::pow2(2, 1), StageExpr::pow2(2, 3)],
        ];
        CombSpec::new(ab(), vec![0, 1], take).unwrap()
    }

    fn omegapede(omega: u64) -> CombSpec {
        infpede().with_cap(omega - 1, vec![Utility::pow2(omega as i64); 2]).unwrap()
    }

    fn dollar() -> CombSpec {
        let take = vec![
            vec![StageExpr::affine(0, -5), StageExpr::affine(100, -5)],
            vec![StageExpr::affine(95, -5), StageExpr::affine(0, -5)],
        ];
        CombSpec::new(ab(), vec![0, 1], take).unwrap()
    }

    #[test]
    fn infpede_push_fails() {
        let r = comb_rat_inf_report(&infpede(), &CombChoiceWord::all_push(), WitnessBounds::default());
        assert_eq!(r.verdict, Verdict::Fails, "{r}");
        assert_eq!(comb_rat_inf(&infpede(), &CombChoiceWord::all_take()), Verdict::Holds);
    }

    #[test]
    fn omegapede_push_holds() {
        for omega in [1, 3, 6] {
            let r = comb_rat_inf_report(&omegapede(omega), &CombChoiceWord::all_push(), WitnessBounds::default());
            assert_eq!(r.verdict, Verdict::Holds, "ω={omega}\n{r}");
        }
    }

    #[test]
    fn exact_tail_covers_long_prefixes() {
        // The cap at stage 11 needs 11 pushes, beyond the witness bound.
        let r = comb_rat_inf_report(&omegapede(12), &CombChoiceWord::all_push(), WitnessBounds::default());
        assert_eq!(r.verdict, Verdict::Holds, "{r}");
        assert!(r.stages.iter().any(|s| s.outcome == StageOutcome::Exact(true)));
        let tight = WitnessBounds { max_offset: 0, max_period: 1 };
        let r = comb_rat_inf_report(&infpede(), &CombChoiceWord::all_push(), tight);
        assert_eq!(r.verdict, Verdict::Fails);
    }

    #[test]
    fn dollar_auction_escalation_holds() {
        let r = comb_rat_inf_report(&dollar(), &CombChoiceWord::all_push(), WitnessBounds::default());
        assert_eq!(r.verdict, Verdict::Holds, "{r}");
        assert!(comb_divergent(&dollar(), &CombChoiceWord::all_push()));
        assert!(!comb_divergent(&dollar(), &"ppppp(t)".parse().unwrap()));
    }

    #[test]
    fn unknown_when_bound_binds_without_tail() {
        // Non-regular, no strict tail, and no witness with a tiny bound.
        let tight = WitnessBounds { max_offset: 0, max_period: 1 };
        let r = comb_rat_inf_report(&dollar(), &CombChoiceWord::all_push(), tight);
        assert_eq!(r.verdict, Verdict::UnknownAtBound(1));
    }
}
