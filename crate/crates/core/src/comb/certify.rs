//! SPE certificates over stage classes.

use std::fmt;

use num_integer::Integer;

use crate::profile::Agent;

use super::spec::CombSpec;
use super::stage::{stage_compare, ForAllVerdict, StageExpr};
use super::word::{CombChoiceWord, Move};
use super::CombError;

/// The stages `base + stride·k`, `k ≥ 0`; a single stage when `stride = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StageClass {
    pub base: u64,
    pub stride: u64,
}

impl StageClass {
    pub fn at(stage: u64) -> Self {
        StageClass { base: stage, stride: 0 }
    }

    pub fn every(base: u64, stride: u64) -> Self {
        StageClass { base, stride }
    }

    pub fn is_concrete(&self) -> bool {
        self.stride == 0
    }

    pub fn shift(&self, t: u64) -> Self {
        StageClass { base: self.base + t, stride: self.stride }
    }

    pub fn contains(&self, stage: u64) -> bool {
        match self.stride {
            0 => stage == self.base,
            d => stage >= self.base && (stage - self.base) % d == 0,
        }
    }
}

impl fmt::Display for StageClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.stride {
            0 => write!(f, "{}", self.base),
            d if self.base == 0 => write!(f, "{d}k"),
            d => write!(f, "{} + {d}k", self.base),
        }
    }
}

/// One PE obligation: at every stage of `class`, the owner's utility from
/// the chosen side is at least that from the other side.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CertRecord {
    pub class: StageClass,
    pub owner: Agent,
    pub choice: Move,
    /// Stage offset of the take reached by pushing.
    pub next_take: u64,
    pub lhs: StageExpr,
    pub rhs: StageExpr,
    pub verdict: ForAllVerdict,
}

impl CertRecord {
    pub fn inequality(&self) -> String {
        format!("{}: {} ≥ {}", self.owner, self.lhs, self.rhs)
    }

    /// First failing stage, if any.
    pub fn failing_stage(&self) -> Option<u64> {
        match self.verdict {
            ForAllVerdict::FailsAt(k) => Some(self.class.base + self.class.stride * k),
            _ => None,
        }
    }
}

impl fmt::Display for CertRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mv = match self.choice {
            Move::Take => "take",
            Move::Push => "push",
        };
        write!(f, "stage {} ({mv}, next take +{}): {}  [{}]", self.class, self.next_take, self.inequality(), self.verdict)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpeCertificate {
    pub records: Vec<CertRecord>,
    pub always_convergent: bool,
}

impl SpeCertificate {
    pub fn is_valid(&self) -> bool {
        self.always_convergent && self.records.iter().all(|r| r.verdict.holds())
    }

    pub fn failures(&self) -> impl Iterator<Item = &CertRecord> {
        self.records.iter().filter(|r| !r.verdict.holds())
    }

    /// Every record compares equal quantities.
    pub fn all_ties(&self) -> bool {
        self.records.iter().all(|r| r.verdict == ForAllVerdict::AlwaysEQ)
    }
}

impl fmt::Display for SpeCertificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "always convergent: {}", self.always_convergent)?;
        for r in &self.records {
            writeln!(f, "{r}")?;
        }
        write!(f, "valid: {}", self.is_valid())
    }
}

/// Certificate for the comb played from stage 0 with word `w`.
pub fn comb_spe(spec: &CombSpec, w: &CombChoiceWord) -> SpeCertificate {
    certify(spec, StageClass::at(0), w, false).expect("stage 0 is a valid start")
}

/// Certificate for the subgames at `start`, all played with the word `w`
/// read relative to the subgame root. For a symbolic `start` the checked
/// stage set may be a superset of the real one, so a valid certificate is
/// sound and an invalid one is inconclusive.
pub fn certify_from(spec: &CombSpec, start: StageClass, w: &CombChoiceWord) -> Result<SpeCertificate, CombError> {
    certify(spec, start, w, false)
}

/// Validity only, stopping at the first failing record.
pub(crate) fn is_spe_from(spec: &CombSpec, start: StageClass, w: &CombChoiceWord) -> bool {
    certify(spec, start, w, true).map(|c| c.is_valid()).unwrap_or(false)
}

fn certify(spec: &CombSpec, start: StageClass, w: &CombChoiceWord, fail_fast: bool) -> Result<SpeCertificate, CombError> {
    let p = spec.period();
    if start.stride % p != 0 {
        return Err(CombError::InvalidSpec(format!("stride {} is not a multiple of the owner period {p}", start.stride)));
    }
    let mut cert = SpeCertificate { records: vec![], always_convergent: w.takes_infinitely_often() };
    if !cert.always_convergent {
        return Ok(cert);
    }
    let pre = w.prefix().len() as u64;
    let m = (w.period().len() as u64).lcm(&p);
    let tail_stride = if start.stride == 0 { m } else { start.stride.gcd(&m) };
    let rel = (0..pre)
        .map(|i| (i, start.stride))
        .chain((pre..pre + m).map(|i| (i, tail_stride)));
    for (i, stride) in rel {
        let delta = w.next_take_after(i).expect("period has a take");
        let class = StageClass::every(start.base + i, stride);
        for piece in split_at_cap(spec, class) {
            let rec = record(spec, piece, w.at(i), delta);
            let failed = !rec.verdict.holds();
            cert.records.push(rec);
            if failed && fail_fast {
                return Ok(cert);
            }
        }
    }
    Ok(cert)
}

fn record(spec: &CombSpec, class: StageClass, mv: Move, delta: u64) -> CertRecord {
    let o = spec.owner_index(class.base);
    let here = class_value(spec, class, o);
    let next = class_value(spec, class.shift(delta), o);
    let (lhs, rhs) = match mv {
        Move::Take => (here, next),
        Move::Push => (next, here),
    };
    let verdict = stage_compare(&lhs, &rhs);
    CertRecord {
        class,
        owner: spec.agents()[o].clone(),
        choice: mv,
        next_take: delta,
        lhs,
        rhs,
        verdict,
    }
}

/// Take value of `agent` over a class lying wholly below or above the cap.
pub(crate) fn class_value(spec: &CombSpec, class: StageClass, agent: usize) -> StageExpr {
    if class.is_concrete() || spec.cap_stage().is_some_and(|k| class.base >= k) {
        return StageExpr::Const(spec.take_value(class.base, agent));
    }
    let p = spec.period();
    let pos = (class.base % p) as usize;
    spec.take_expr(pos, agent).substitute(class.base / p, class.stride / p)
}

/// Concrete members below the cap, then the frozen remainder.
pub(crate) fn split_at_cap(spec: &CombSpec, class: StageClass) -> Vec<StageClass> {
    match spec.cap_stage() {
        Some(k) if !class.is_concrete() && class.base < k => {
            let mut out = vec![];
            let mut s = class.base;
            while s < k {
                out.push(StageClass::at(s));
                s += class.stride;
            }
            out.push(StageClass::every(s, class.stride));
            out
        }
        _ => vec![class],
    }
}
