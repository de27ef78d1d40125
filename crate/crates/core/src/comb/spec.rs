//! Comb games: an infinite spine of decision nodes, each with a take leaf.

use crate::profile::{Agent, UtilityAssignment};
use crate::utility::Utility;

use super::stage::StageExpr;
use super::CombError;

/// Frozen utilities from a stage on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cap {
    pub stage: u64,
    pub values: Vec<Utility>,
}

/// Stage `j` is owned by `owners[j mod P]`; its take leaf pays agent `a`
/// `take[j mod P][a]` evaluated at round `j div P`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CombSpec {
    agents: Vec<Agent>,
    owners: Vec<usize>,
    take: Vec<Vec<StageExpr>>,
    share: Option<Vec<StageExpr>>,
    cap: Option<Cap>,
}

impl CombSpec {
    pub fn new(agents: Vec<Agent>, owners: Vec<usize>, take: Vec<Vec<StageExpr>>) -> Result<Self, CombError> {
        let bad = |m: &str| Err(CombError::InvalidSpec(m.to_string()));
        if agents.is_empty() {
            return bad("no agents");
        }
        for (i, a) in agents.iter().enumerate() {
            if agents[..i].contains(a) {
                return bad(&format!("duplicate agent {a}"));
            }
        }
        if owners.is_empty() {
            return bad("empty owner cycle");
        }
        if owners.iter().any(|&o| o >= agents.len()) {
            return bad("owner index out of range");
        }
        if take.len() != owners.len() || take.iter().any(|row| row.len() != agents.len()) {
            return bad("take table must have one row per owner position and one entry per agent");
        }
        Ok(CombSpec { agents, owners, take, share: None, cap: None })
    }

    /// Per-position value each agent receives when the game is split at
    /// that position (used by truncations).
    pub fn with_share(mut self, share: Vec<StageExpr>) -> Result<Self, CombError> {
        if share.len() != self.owners.len() {
            return Err(CombError::InvalidSpec("one share expression per owner position".into()));
        }
        self.share = Some(share);
        Ok(self)
    }

    pub fn with_cap(mut self, stage: u64, values: Vec<Utility>) -> Result<Self, CombError> {
        if values.len() != self.agents.len() {
            return Err(CombError::InvalidSpec("cap needs one value per agent".into()));
        }
        self.cap = Some(Cap { stage, values });
        Ok(self)
    }

    pub fn agents(&self) -> &[Agent] {
        &self.agents
    }

    pub fn owner_cycle(&self) -> &[usize] {
        &self.owners
    }

    /// Owner period `P`.
    pub fn period(&self) -> u64 {
        self.owners.len() as u64
    }

    pub fn cap(&self) -> Option<&Cap> {
        self.cap.as_ref()
    }

    pub fn cap_stage(&self) -> Option<u64> {
        self.cap.as_ref().map(|c| c.stage)
    }

    pub fn take_expr(&self, pos: usize, agent: usize) -> &StageExpr {
        &self.take[pos][agent]
    }

    pub fn owner_index(&self, stage: u64) -> usize {
        self.owners[(stage % self.period()) as usize]
    }

    pub fn owner(&self, stage: u64) -> &Agent {
        &self.agents[self.owner_index(stage)]
    }

    pub fn take_value(&self, stage: u64, agent: usize) -> Utility {
        match &self.cap {
            Some(c) if stage >= c.stage => c.values[agent].clone(),
            _ => {
                let p = self.period();
                self.take[(stage % p) as usize][agent].eval(stage / p)
            }
        }
    }

    pub fn take_at(&self, stage: u64) -> Vec<Utility> {
        (0..self.agents.len()).map(|a| self.take_value(stage, a)).collect()
    }

    pub fn assignment(&self, values: &[Utility]) -> UtilityAssignment {
        self.agents.iter().cloned().zip(values.iter().cloned()).collect()
    }

    pub fn take_assignment(&self, stage: u64) -> UtilityAssignment {
        self.assignment(&self.take_at(stage))
    }

    /// What every agent receives when the game is split at `stage`:
    /// the share expression if given, else the mean of the take values.
    pub fn share_at(&self, stage: u64) -> Utility {
        let capped = matches!(&self.cap, Some(c) if stage >= c.stage);
        if let (Some(share), false) = (&self.share, capped) {
            let p = self.period();
            return share[(stage % p) as usize].eval(stage / p);
        }
        let vals = self.take_at(stage);
        let sum = vals.iter().fold(Utility::zero(), |acc, v| &acc + v);
        &sum * &Utility::ratio(1, vals.len() as i64)
    }

    /// The comb is a rational tree: capped, or all take expressions constant.
    pub fn is_regular(&self) -> bool {
        self.cap.is_some() || self.take.iter().flatten().all(StageExpr::is_constant)
    }

    /// First stage from which every take leaf is frozen or constant.
    pub fn regular_from(&self) -> Option<u64> {
        match &self.cap {
            Some(c) => Some(c.stage),
            None if self.is_regular() => Some(0),
            None => None,
        }
    }
}
