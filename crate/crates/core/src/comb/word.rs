//! Eventually periodic choice words over the comb spine.

use std::fmt;
use std::str::FromStr;

use crate::profile::Choice;

use super::CombError;

/// The choice at one spine stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Move {
    /// Down to the stage's leaf.
    Take,
    /// On to the next stage.
    Push,
}

impl Move {
    pub fn choice(self) -> Choice {
        match self {
            Move::Take => Choice::One,
            Move::Push => Choice::Two,
        }
    }

    pub fn letter(self) -> char {
        match self {
            Move::Take => 't',
            Move::Push => 'p',
        }
    }
}

/// `prefix · period^ω`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CombChoiceWord {
    prefix: Vec<Move>,
    period: Vec<Move>,
}

impl CombChoiceWord {
    pub fn new(prefix: Vec<Move>, period: Vec<Move>) -> Result<Self, CombError> {
        if period.is_empty() {
            return Err(CombError::InvalidWord("empty period".into()));
        }
        Ok(CombChoiceWord { prefix, period })
    }

    pub fn all_take() -> Self {
        CombChoiceWord { prefix: vec![], period: vec![Move::Take] }
    }

    pub fn all_push() -> Self {
        CombChoiceWord { prefix: vec![], period: vec![Move::Push] }
    }

    /// `n` pushes, then take forever.
    pub fn push_then_take(n: usize) -> Self {
        CombChoiceWord { prefix: vec![Move::Push; n], period: vec![Move::Take] }
    }

    pub fn prefix(&self) -> &[Move] {
        &self.prefix
    }

    pub fn period(&self) -> &[Move] {
        &self.period
    }

    pub fn at(&self, stage: u64) -> Move {
        let p = self.prefix.len() as u64;
        if stage < p {
            self.prefix[stage as usize]
        } else {
            self.period[((stage - p) % self.period.len() as u64) as usize]
        }
    }

    pub fn first_take(&self) -> Option<u64> {
        if let Some(i) = self.prefix.iter().position(|&m| m == Move::Take) {
            return Some(i as u64);
        }
        let i = self.period.iter().position(|&m| m == Move::Take)?;
        Some((self.prefix.len() + i) as u64)
    }

    /// Some stage takes.
    pub fn has_take(&self) -> bool {
        self.first_take().is_some()
    }

    /// Every stage is followed by a take.
    pub fn takes_infinitely_often(&self) -> bool {
        self.period.contains(&Move::Take)
    }

    /// Least `δ ≥ 1` with a take at `stage + δ`.
    pub fn next_take_after(&self, stage: u64) -> Option<u64> {
        if !self.takes_infinitely_often() {
            let p = self.prefix.len() as u64;
            return (stage + 1..p).find(|&j| self.at(j) == Move::Take).map(|j| j - stage);
        }
        let horizon = self.prefix.len() as u64 + self.period.len() as u64 + 1;
        (1..=horizon).find(|&d| self.at(stage + d) == Move::Take)
    }

    /// The word seen from `stage` on.
    pub fn suffix(&self, stage: u64) -> CombChoiceWord {
        let p = self.prefix.len() as u64;
        if stage <= p {
            return CombChoiceWord {
                prefix: self.prefix[stage as usize..].to_vec(),
                period: self.period.clone(),
            };
        }
        let r = ((stage - p) % self.period.len() as u64) as usize;
        let mut period = self.period[r..].to_vec();
        period.extend_from_slice(&self.period[..r]);
        CombChoiceWord { prefix: vec![], period }
    }

    /// Choices at stages `0..n`.
    pub fn truncate(&self, n: u64) -> Vec<Move> {
        (0..n).map(|j| self.at(j)).collect()
    }
}

impl fmt::Display for CombChoiceWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for m in &self.prefix {
            write!(f, "{}", m.letter())?;
        }
        f.write_str("(")?;
        for m in &self.period {
            write!(f, "{}", m.letter())?;
        }
        f.write_str(")")
    }
}

/// Syntax: letters `t`/`p`, period in parentheses, e.g. `ppp(t)` or `(pt)`.
impl FromStr for CombChoiceWord {
    type Err = CombError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = |why: &str| CombError::InvalidWord(format!("`{s}`: {why}"));
        let s_trim: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let (head, tail) = s_trim.split_once('(').ok_or_else(|| bad("missing `(period)`"))?;
        let body = tail.strip_suffix(')').ok_or_else(|| bad("period must end the word"))?;
        let letters = |t: &str| -> Result<Vec<Move>, CombError> {
            t.chars()
                .map(|c| match c {
                    't' | 'T' => Ok(Move::Take),
                    'p' | 'P' => Ok(Move::Push),
                    _ => Err(bad(&format!("unexpected `{c}`"))),
                })
                .collect()
        };
        CombChoiceWord::new(letters(head)?, letters(body)?)
    }
}
