use num_integer::Integer;

use crate::profile::{Profile, ProfileBuilder};

use super::spec::CombSpec;
use super::word::CombChoiceWord;
use super::CombError;

/// The profile of a regular comb as a finite graph. Stages from
/// `max(cap, |prefix|)` on repeat with period `lcm(|period|, P)`, so the
/// last stage node points back into the cycle.
pub fn export_profile(spec: &CombSpec, w: &CombChoiceWord) -> Result<Profile, CombError> {
    let from = spec.regular_from().ok_or(CombError::NonRegular)?;
    let start = from.max(w.prefix().len() as u64);
    let m = (w.period().len() as u64).lcm(&spec.period());
    let total = (start + m) as usize;
    let mut b = ProfileBuilder::new();
    let ids: Vec<_> = (0..total).map(|_| b.reserve()).collect();
    for j in 0..total {
        let leaf = b.leaf(spec.take_assignment(j as u64));
        let next = if j + 1 < total { ids[j + 1] } else { ids[start as usize] };
        b.define(
            ids[j],
            crate::profile::Node::Internal {
                owner: spec.owner(j as u64).clone(),
                choice: w.at(j as u64).choice(),
                children: [leaf, next],
            },
        );
    }
    b.build(ids[0]).map_err(|e| CombError::InvalidSpec(e.to_string()))
}
