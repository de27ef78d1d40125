//! Seeded generator of random rational profiles.
#![allow(dead_code)]

use divergence_core::{Agent, Choice, Node, Profile, ProfileBuilder, Utility, UtilityAssignment};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn utility(r: &mut ChaCha8Rng) -> Utility {
    match r.gen_range(0..4) {
        0 => Utility::ratio(r.gen_range(-6..=6), r.gen_range(1..=4)),
        _ => Utility::from_int(r.gen_range(-2..=3)),
    }
}

/// A profile over agents A, B (sometimes C) with up to `max_nodes` nodes.
/// With `acyclic`, children always have larger indices, so the result is
/// finite; otherwise edges may point anywhere.
pub fn random_profile(r: &mut ChaCha8Rng, max_nodes: usize, acyclic: bool) -> Profile {
    let mut agents = vec![Agent::new("A").unwrap(), Agent::new("B").unwrap()];
    if r.gen_bool(0.25) {
        agents.push(Agent::new("C").unwrap());
    }
    let n = r.gen_range(1..=max_nodes);
    let mut b = ProfileBuilder::new();
    let ids: Vec<_> = (0..n).map(|_| b.reserve()).collect();
    // The last node is always a leaf so every profile has one.
    for i in 0..n {
        let leaf = i == n - 1 || r.gen_bool(0.4);
        let node = if leaf {
            let u: UtilityAssignment = agents.iter().map(|a| (a.clone(), utility(r))).collect();
            Node::Leaf(u)
        } else {
            let pick = |r: &mut ChaCha8Rng| if acyclic { r.gen_range(i + 1..n) } else { r.gen_range(0..n) };
            let c1 = pick(r);
            let c2 = pick(r);
            Node::Internal {
                owner: agents[r.gen_range(0..agents.len())].clone(),
                choice: if r.gen_bool(0.5) { Choice::One } else { Choice::Two },
                children: [ids[c1], ids[c2]],
            }
        };
        b.define(ids[i], node);
    }
    b.build(ids[0]).expect("generated profile is valid")
}

/// `count` profiles, alternating cyclic and acyclic.
pub fn corpus(seed: u64, count: usize) -> Vec<Profile> {
    let mut r = rng(seed);
    (0..count).map(|i| random_profile(&mut r, 10, i % 2 == 0)).collect()
}
