//! Bundled example networks.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::{Network, Reaction};
use crate::netparse::{parse_network, NetworkDocument};
use crate::num::rat;

pub const EXP_1: &str = include_str!("../fixtures/exp_1.crn");
pub const ENZYME: &str = include_str!("../fixtures/enzyme.crn");
pub const ENZYME_FAST: &str = include_str!("../fixtures/enzyme_fast.crn");
pub const ENZYME_REV: &str = include_str!("../fixtures/enzyme_rev.crn");
pub const EXP_COUNT: &str = include_str!("../fixtures/exp_count.crn");

fn load(text: &str) -> NetworkDocument {
    parse_network(text).expect("bundled fixture parses")
}

/// `A <-> U <-> B` with rates 1, 2, 2, 3.
pub fn exp1() -> NetworkDocument {
    load(EXP_1)
}

/// Irreversible two-substrate enzyme network, unit rates.
pub fn enzyme() -> NetworkDocument {
    load(ENZYME)
}

/// As [`enzyme`] with release rate 10.
pub fn enzyme_fast() -> NetworkDocument {
    load(ENZYME_FAST)
}

/// [`enzyme`] plus `E + P + Q -> EAB`, unit rates.
pub fn enzyme_rev() -> NetworkDocument {
    load(ENZYME_REV)
}

/// The factorial-rate network on `A, U`.
pub fn exp_count() -> NetworkDocument {
    load(EXP_COUNT)
}

/// Every bundled fixture with its name.
pub fn all() -> Vec<(&'static str, NetworkDocument)> {
    vec![
        ("exp_1", exp1()),
        ("enzyme", enzyme()),
        ("enzyme_fast", enzyme_fast()),
        ("enzyme_rev", enzyme_rev()),
        ("exp_count", exp_count()),
    ]
}

/// Indices of the named species. Panics on unknown names.
pub fn species_indices(net: &Network, names: &[&str]) -> Vec<usize> {
    names
        .iter()
        .map(|n| {
            net.species_index(n)
                .unwrap_or_else(|| panic!("unknown species {n}"))
        })
        .collect()
}

/// A random weakly reversible mass-action network together with a
/// non-interacting set `u`: its reactions are a union of directed cycles on
/// complexes that each hold at most one molecule of `u`.
pub fn random_weakly_reversible(seed: u64) -> (Network, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_core = rng.random_range(1..=3);
    let n_u = rng.random_range(1..=3);
    let n = n_core + n_u;
    let mut names: Vec<String> = (0..n_core).map(|i| format!("X{i}")).collect();
    names.extend((0..n_u).map(|i| format!("Y{i}")));
    let size = rng.random_range(3..=6);
    let mut complexes: Vec<Vec<u64>> = Vec::new();
    while complexes.len() < size {
        let mut c = vec![0u64; n];
        for v in c.iter_mut().take(n_core) {
            *v = rng.random_range(0..=2);
        }
        if rng.random_bool(0.6) {
            c[n_core + rng.random_range(0..n_u)] = 1;
        }
        if !complexes.contains(&c) {
            complexes.push(c);
        }
    }
    let mut edges = BTreeSet::new();
    for _ in 0..rng.random_range(1..=3) {
        let len = rng.random_range(2..=complexes.len());
        let mut idx: Vec<usize> = (0..complexes.len()).collect();
        idx.shuffle(&mut rng);
        for k in 0..len {
            edges.insert((idx[k], idx[(k + 1) % len]));
        }
    }
    let reactions = edges
        .into_iter()
        .map(|(a, b)| Reaction::mass_action(complexes[a].clone(), complexes[b].clone(), rat(rng.random_range(1..=3))))
        .collect();
    let net = Network::new(names, reactions).expect("generated network is well formed");
    (net, (n_core..n).collect())
}
