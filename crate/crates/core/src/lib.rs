//! Decision procedures for finite and infinite extensive-form strategy
//! profiles with perfect information.
//!
//! * [`profile`]: profiles as pointed graphs, same-game equivalence.
//! * [`engine`]: fixpoint evaluation of convergence, divergence, PE, SPE.
//! * [`finite`]: backward induction and finite rationality.
//! * [`comb`]: symbolic analysis of infinite comb games.
//! * [`families`]: the named games and their truncations.
//! * [`textio`]: text format and DOT export.

pub mod check;
pub mod comb;
pub mod engine;
pub mod families;
pub mod finite;
pub mod profile;
pub mod textio;
pub mod utility;

pub use profile::{same_game, Agent, Choice, Node, NodeId, Profile, ProfileBuilder, ProfileError, UtilityAssignment};
pub use utility::Utility;
