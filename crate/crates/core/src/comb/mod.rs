//! Infinite comb games: a spine of decision nodes, each offering a take
//! leaf or a push to the next stage. Take utilities are symbolic in the
//! stage, so non-regular games such as the ∞pede and the dollar auction
//! are decided exactly over all stages.

mod certify;
mod export;
mod rational;
mod spec;
mod stage;
mod word;

use thiserror::Error;

pub use certify::{certify_from, comb_spe, CertRecord, SpeCertificate, StageClass};
pub use export::export_profile;
pub use rational::{comb_divergent, comb_rat_inf, comb_rat_inf_report, RatInfReport, StageOutcome, StageReport, WitnessBounds};
pub use spec::{Cap, CombSpec};
pub use stage::{stage_compare, strictly_greater_from, ForAllVerdict, StageExpr};
pub use word::{CombChoiceWord, Move};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum CombError {
    #[error("invalid comb: {0}")]
    InvalidSpec(String),
    #[error("invalid choice word: {0}")]
    InvalidWord(String),
    #[error("comb is not a rational tree (no cap and non-constant stage utilities)")]
    NonRegular,
}
