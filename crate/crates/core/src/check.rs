//! One entry point per predicate, for profiles and comb words alike.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::comb::{comb_divergent, comb_rat_inf, comb_spe, CombChoiceWord, CombSpec};
use crate::engine::{self, Verdict};
use crate::finite::{self, FiniteError, FiniteProfile};
use crate::profile::Profile;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Predicate {
    Conv,
    AlwaysConv,
    Div,
    Pe,
    Spe,
    Bi,
    RatF,
    RatInf,
}

impl Predicate {
    pub const ALL: [Predicate; 8] = [
        Predicate::Conv,
        Predicate::AlwaysConv,
        Predicate::Div,
        Predicate::Pe,
        Predicate::Spe,
        Predicate::Bi,
        Predicate::RatF,
        Predicate::RatInf,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Predicate::Conv => "conv",
            Predicate::AlwaysConv => "always-conv",
            Predicate::Div => "div",
            Predicate::Pe => "pe",
            Predicate::Spe => "spe",
            Predicate::Bi => "bi",
            Predicate::RatF => "ratf",
            Predicate::RatInf => "ratinf",
        }
    }

    /// Only defined on finite profiles.
    pub fn needs_finite(self) -> bool {
        matches!(self, Predicate::Bi | Predicate::RatF)
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum CheckError {
    #[error("unknown predicate `{0}`")]
    UnknownPredicate(String),
    #[error("{0} is only defined on finite profiles")]
    NeedsFinite(Predicate),
    #[error(transparent)]
    Finite(#[from] FiniteError),
}

impl FromStr for Predicate {
    type Err = CheckError;
    fn from_str(s: &str) -> Result<Self, CheckError> {
        Predicate::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| CheckError::UnknownPredicate(s.to_string()))
    }
}

pub fn check_profile(s: &Profile, pred: Predicate) -> Result<Verdict, CheckError> {
    let v = match pred {
        Predicate::Conv => engine::convergent(s),
        Predicate::AlwaysConv => engine::always_convergent(s),
        Predicate::Div => engine::divergent(s),
        Predicate::Pe => engine::pe(s),
        Predicate::Spe => engine::spe(s),
        Predicate::RatInf => engine::rat_inf(s),
        Predicate::Bi | Predicate::RatF => {
            let f = FiniteProfile::new(s.clone()).map_err(|_| CheckError::NeedsFinite(pred))?;
            if pred == Predicate::Bi {
                finite::bi(&f)
            } else {
                finite::rat_f_with(&f, finite::RatfBinding::Original)?
            }
        }
    };
    Ok(Verdict::from_bool(v))
}

pub fn check_comb(spec: &CombSpec, w: &CombChoiceWord, pred: Predicate) -> Result<Verdict, CheckError> {
    let v = match pred {
        Predicate::Conv => !comb_divergent(spec, w),
        Predicate::AlwaysConv => w.takes_infinitely_often(),
        Predicate::Div => comb_divergent(spec, w),
        Predicate::Pe => {
            let cert = comb_spe(spec, w);
            cert.always_convergent
                && cert
                    .records
                    .iter()
                    .filter(|r| r.class.contains(0))
                    .all(|r| r.failing_stage() != Some(0))
        }
        Predicate::Spe => comb_spe(spec, w).is_valid(),
        Predicate::RatInf => return Ok(comb_rat_inf(spec, w)),
        Predicate::Bi | Predicate::RatF => return Err(CheckError::NeedsFinite(pred)),
    };
    Ok(Verdict::from_bool(v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{infpede_spec, s_box2};

    #[test]
    fn names_round_trip() {
        for p in Predicate::ALL {
            assert_eq!(p.name().parse::<Predicate>().unwrap(), p);
        }
        assert!("nosuch".parse::<Predicate>().is_err());
    }

    #[test]
    fn dispatch() {
        let s = s_box2();
        assert_eq!(check_profile(&s, Predicate::Div).unwrap(), Verdict::Holds);
        assert_eq!(check_profile(&s, Predicate::Bi), Err(CheckError::NeedsFinite(Predicate::Bi)));
        let spec = infpede_spec();
        let w: CombChoiceWord = "p(t)".parse().unwrap();
        // A pushes and gets 2 instead of 4.
        assert_eq!(check_comb(&spec, &w, Predicate::Pe).unwrap(), Verdict::Fails);
        assert_eq!(check_comb(&spec, &CombChoiceWord::all_take(), Predicate::Pe).unwrap(), Verdict::Holds);
        assert_eq!(check_comb(&spec, &CombChoiceWord::all_push(), Predicate::RatInf).unwrap(), Verdict::Fails);
    }
}
