//! Reduced kinetics: branch probabilities, the absorbing chain over partial
//! walks and its linear solve, plus a truncated walk-sum oracle.

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::algebra::{oplus, ReactionPair};
use crate::elimination::{EliminationGraph, ReducedNetwork};
use crate::linalg::{residual_sparse, solve_sparse, LinalgError, SparseRows};
use crate::model::{ModelError, Network, State};
use crate::num::Rat;

/// Default bound on transient chain states.
pub const DEFAULT_CHAIN_CAP: usize = 200_000;
/// Chains up to this size are solved in exact arithmetic.
pub const EXACT_SOLVE_LIMIT: usize = 2000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KineticsError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("node {0} is not a node of the elimination graph")]
    InvalidNode(usize),
    #[error("absorbing chain exceeded {cap} transient states; the walk space does not stay bounded")]
    ChainNotFinite { cap: usize },
    #[error("absorbing chain system is singular: {0}")]
    SingularSystem(#[from] LinalgError),
    #[error("float solve of the absorbing chain left residual {0:e}")]
    Inaccurate(f64),
}

/// `β_r(x)` for every reaction leaving a node.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchTable {
    pub node: usize,
    /// `(reaction id, β_r(x))` in reaction order.
    pub entries: Vec<(usize, Rat)>,
}

impl BranchTable {
    pub fn get(&self, r: usize) -> Option<&Rat> {
        self.entries.iter().find(|(k, _)| *k == r).map(|(_, b)| b)
    }

    pub fn total(&self) -> Rat {
        self.entries.iter().map(|(_, b)| b).sum()
    }
}

pub fn branch_probabilities(
    net: &Network,
    g: &EliminationGraph,
    x: &State,
    node: usize,
) -> Result<BranchTable, KineticsError> {
    if node > g.m() {
        return Err(KineticsError::InvalidNode(node));
    }
    let mut entries = Vec::new();
    for e in g.out_reactions(node) {
        entries.push((e.reaction, net.eval_intensity(e.reaction, x)?));
    }
    let total: Rat = entries.iter().map(|(_, l)| l).sum();
    if total.is_zero() {
        for (_, b) in entries.iter_mut() {
            *b = Rat::zero();
        }
    } else {
        for (_, b) in entries.iter_mut() {
            *b = &*b / &total;
        }
    }
    Ok(BranchTable { node, entries })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Target {
    Transient(usize),
    Absorbed(usize),
}

/// Discrete-time chain of partial walks started at `U0` from a full state.
///
/// A transient state is `(node, accumulated pair)`; the molecule counts at
/// that point are `start + ζ(pair)`. Absorbing buckets record the completed
/// pair together with the last reaction of the walk.
#[derive(Debug, Clone)]
pub struct AbsorbingChain {
    pub start: State,
    pub transient: Vec<(usize, ReactionPair)>,
    /// Outgoing weights of each transient state (they sum to at most one).
    pub rows: Vec<Vec<(Target, Rat)>>,
    /// Initial weights `λ_{r0}(start)`.
    pub initial: Vec<(Target, Rat)>,
    pub buckets: Vec<(ReactionPair, usize)>,
}

fn current_state(start: &State, pair: &ReactionPair) -> State {
    start
        .shifted(&pair.zeta())
        .expect("positive-weight walks never drive counts negative")
}

/// Build the chain reachable with positive weight from `x`.
pub fn build_chain(
    net: &Network,
    g: &EliminationGraph,
    x: &State,
    cap: usize,
) -> Result<AbsorbingChain, KineticsError> {
    let pairs: Vec<ReactionPair> = net.reactions().iter().map(ReactionPair::from_reaction).collect();
    let mut chain = AbsorbingChain {
        start: x.clone(),
        transient: Vec::new(),
        rows: Vec::new(),
        initial: Vec::new(),
        buckets: Vec::new(),
    };
    let mut t_index: HashMap<(usize, ReactionPair), usize> = HashMap::new();
    let mut b_index: HashMap<(ReactionPair, usize), usize> = HashMap::new();

    let mut target_of = |chain: &mut AbsorbingChain,
                         to: usize,
                         pair: ReactionPair,
                         reaction: usize,
                         queue: &mut VecDeque<usize>|
     -> Result<Target, KineticsError> {
        if to == 0 {
            let key = (pair, reaction);
            let id = *b_index.entry(key.clone()).or_insert_with(|| {
                chain.buckets.push(key);
                chain.buckets.len() - 1
            });
            return Ok(Target::Absorbed(id));
        }
        let key = (to, pair);
        if let Some(&id) = t_index.get(&key) {
            return Ok(Target::Transient(id));
        }
        if chain.transient.len() >= cap {
            return Err(KineticsError::ChainNotFinite { cap });
        }
        let id = chain.transient.len();
        chain.transient.push(key.clone());
        chain.rows.push(Vec::new());
        t_index.insert(key, id);
        queue.push_back(id);
        Ok(Target::Transient(id))
    };

    let mut queue = VecDeque::new();
    for e in g.out_reactions(0) {
        let w = net.eval_intensity(e.reaction, x)?;
        if w.is_positive() {
            let t = target_of(&mut chain, e.to, pairs[e.reaction].clone(), e.reaction, &mut queue)?;
            chain.initial.push((t, w));
        }
    }
    while let Some(id) = queue.pop_front() {
        let (node, acc) = chain.transient[id].clone();
        let here = current_state(x, &acc);
        let table = branch_probabilities(net, g, &here, node)?;
        let mut row = Vec::new();
        for (r, beta) in table.entries {
            if beta.is_zero() {
                continue;
            }
            let next = oplus(&acc, &pairs[r]);
            let to = g.edges[r].to;
            row.push((target_of(&mut chain, to, next, r, &mut queue)?, beta));
        }
        chain.rows[id] = row;
    }
    Ok(chain)
}

impl AbsorbingChain {
    /// Total weight absorbed in each bucket.
    pub fn solve(&self) -> Result<Vec<Rat>, KineticsError> {
        let n = self.transient.len();
        let mut w = vec![Rat::zero(); n];
        let mut absorbed = vec![Rat::zero(); self.buckets.len()];
        for (t, v) in &self.initial {
            match *t {
                Target::Transient(j) => w[j] += v,
                Target::Absorbed(b) => absorbed[b] += v,
            }
        }
        if n == 0 {
            return Ok(absorbed);
        }
        // Expected weighted visits v solve (I - P^T) v = w.
        let visits = if n <= EXACT_SOLVE_LIMIT {
            solve_sparse(self.visit_system(|r| r.clone()), w)?
        } else {
            let wf: Vec<f64> = w.iter().map(crate::num::rat_to_f64).collect();
            let a = self.visit_system(crate::num::rat_to_f64);
            let v = solve_sparse(a.clone(), wf.clone())?;
            let res = residual_sparse(&a, &v, &wf);
            let scale = wf.iter().fold(1.0f64, |m, x| m.max(x.abs()));
            if res > 1e-12 * scale {
                return Err(KineticsError::Inaccurate(res));
            }
            v.into_iter()
                .map(|f| Rat::from_float(f).unwrap_or_else(Rat::zero))
                .collect()
        };
        for (i, row) in self.rows.iter().enumerate() {
            if visits[i].is_zero() {
                continue;
            }
            for (t, p) in row {
                if let Target::Absorbed(b) = *t {
                    absorbed[b] += &visits[i] * p;
                }
            }
        }
        Ok(absorbed)
    }

    fn visit_system<S: crate::num::Scalar>(&self, conv: impl Fn(&Rat) -> S) -> SparseRows<S> {
        let n = self.transient.len();
        let mut a: SparseRows<S> = vec![BTreeMap::new(); n];
        for (j, row) in a.iter_mut().enumerate() {
            row.insert(j, S::one());
        }
        for (i, row) in self.rows.iter().enumerate() {
            for (t, p) in row {
                if let Target::Transient(j) = *t {
                    let entry = a[j].entry(i).or_insert_with(S::zero);
                    *entry = entry.sub_ref(&conv(p));
                }
            }
        }
        a
    }

    /// Absorbed weight grouped by completed pair.
    pub fn absorbed_by_pair(&self) -> Result<BTreeMap<ReactionPair, Rat>, KineticsError> {
        let mut out: BTreeMap<ReactionPair, Rat> = BTreeMap::new();
        for ((pair, _), w) in self.buckets.iter().zip(self.solve()?) {
            *out.entry(pair.clone()).or_insert_with(Rat::zero) += w;
        }
        Ok(out)
    }
}

/// `λ_{U,r}(x)` for every walk sum `r`, self-loops included, at a full state.
pub fn walk_sum_intensities(
    net: &Network,
    g: &EliminationGraph,
    x: &State,
    cap: usize,
) -> Result<BTreeMap<ReactionPair, Rat>, KineticsError> {
    build_chain(net, g, x, cap)?.absorbed_by_pair()
}

/// Reduced intensities of every reaction of `rn` at core state `z`.
pub fn reduced_intensities(
    net: &Network,
    rn: &ReducedNetwork,
    z: &[u64],
    cap: usize,
) -> Result<Vec<Rat>, KineticsError> {
    let x = rn.embed(z, net.dim());
    let sums = walk_sum_intensities(net, &rn.graph, &x, cap)?;
    Ok(rn
        .reactions
        .iter()
        .map(|r| sums.get(&r.pair).cloned().unwrap_or_else(Rat::zero))
        .collect())
}

/// Reduced intensity of reaction `k` of `rn` at core state `z`.
pub fn reduced_intensity(
    net: &Network,
    rn: &ReducedNetwork,
    k: usize,
    z: &[u64],
    cap: usize,
) -> Result<Rat, KineticsError> {
    Ok(reduced_intensities(net, rn, z, cap)?.swap_remove(k))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedSum {
    /// Sum over walks with at most `depth` edges.
    pub value: Rat,
    /// Weight of partial walks still open after `depth` edges. The
    /// untruncated sum lies in `[value, value + tail_bound]`.
    pub tail_bound: Rat,
}

/// Direct enumeration of `Σ λ*_γ(x)` over closed walks of at most `depth`
/// edges with `𝔑(γ) = pair`, grouped by `(node, pair)` at each length.
pub fn truncated_walk_sum(
    net: &Network,
    g: &EliminationGraph,
    pair: &ReactionPair,
    x: &State,
    depth: usize,
) -> Result<TruncatedSum, KineticsError> {
    let pairs: Vec<ReactionPair> = net.reactions().iter().map(ReactionPair::from_reaction).collect();
    let mut value = Rat::zero();
    let mut open: HashMap<(usize, ReactionPair), Rat> = HashMap::new();
    if depth == 0 {
        return Ok(TruncatedSum {
            value,
            tail_bound: Rat::zero(),
        });
    }
    for e in g.out_reactions(0) {
        let w = net.eval_intensity(e.reaction, x)?;
        if w.is_zero() {
            continue;
        }
        let p = pairs[e.reaction].clone();
        if e.to == 0 {
            if &p == pair {
                value += w;
            }
        } else {
            *open.entry((e.to, p)).or_insert_with(Rat::zero) += w;
        }
    }
    for _ in 1..depth {
        let mut next: HashMap<(usize, ReactionPair), Rat> = HashMap::new();
        for ((node, acc), mass) in open {
            let here = current_state(x, &acc);
            for (r, beta) in branch_probabilities(net, g, &here, node)?.entries {
                if beta.is_zero() {
                    continue;
                }
                let p = oplus(&acc, &pairs[r]);
                let w = &mass * &beta;
                if g.edges[r].to == 0 {
                    if &p == pair {
                        value += w;
                    }
                } else {
                    *next.entry((g.edges[r].to, p)).or_insert_with(Rat::zero) += w;
                }
            }
        }
        open = next;
    }
    Ok(TruncatedSum {
        value,
        tail_bound: open.into_values().sum(),
    })
}

/// Both sides of the incoming-flux identity for reaction `r_star: U_ι -> η`
/// at a full state `x` with zero eliminated counts:
/// `π(x - ζ_{r*}) λ_{r*}(x - ζ_{r*})` and
/// `Σ_γ π(x - ζ_γ) λ*_γ(x - ζ_γ)` over closed walks `γ` ending in `r_star`.
///
/// Start states are found by exploring predecessors of `x - ζ_{r*}`
/// backwards through the graph; each is then evaluated by its forward chain.
pub fn incoming_flux_identity(
    net: &Network,
    g: &EliminationGraph,
    pi: &dyn Fn(&State) -> Rat,
    x: &State,
    r_star: usize,
    cap: usize,
) -> Result<(Rat, Rat), KineticsError> {
    let edge = g.edges[r_star];
    assert!(edge.from != 0 && edge.to == 0, "r_star must end a walk at U0");
    let zeta = |r: usize| net.reactions()[r].reaction_vector();
    let neg = |v: Vec<i64>| v.into_iter().map(|d| -d).collect::<Vec<_>>();
    let Some(before) = x.shifted(&neg(zeta(r_star))) else {
        return Ok((Rat::zero(), Rat::zero()));
    };
    let lhs = pi(&before) * net.eval_intensity(r_star, &before)?;

    let mut starts: HashSet<State> = HashSet::new();
    let mut seen: HashSet<(usize, State)> = HashSet::new();
    let mut queue = VecDeque::from([(edge.from, before.clone())]);
    seen.insert((edge.from, before));
    while let Some((node, s)) = queue.pop_front() {
        for e in g.edges.iter().filter(|e| e.to == node) {
            let Some(prev) = s.shifted(&neg(zeta(e.reaction))) else {
                continue;
            };
            if !net.eval_intensity(e.reaction, &prev)?.is_positive() {
                continue;
            }
            if e.from == 0 {
                starts.insert(prev);
            } else if seen.insert((e.from, prev.clone())) {
                if seen.len() > cap {
                    return Err(KineticsError::ChainNotFinite { cap });
                }
                queue.push_back((e.from, prev));
            }
        }
    }

    let mut rhs = Rat::zero();
    for start in starts {
        let weight = pi(&start);
        if weight.is_zero() {
            continue;
        }
        let chain = build_chain(net, g, &start, cap)?;
        for ((pair, last), w) in chain.buckets.iter().zip(chain.solve()?) {
            if *last == r_star && current_state(&start, pair) == *x {
                rhs += &weight * w;
            }
        }
    }
    Ok((lhs, rhs))
}

/// Sum of walk-sum intensities, which must equal the total outflow rate of
/// `U0` at `x`.
pub fn total_walk_weight(net: &Network, g: &EliminationGraph, x: &State, cap: usize) -> Result<Rat, KineticsError> {
    Ok(walk_sum_intensities(net, g, x, cap)?.into_values().sum())
}

/// Total rate of reactions leaving `U0` at `x`.
pub fn initial_weight(net: &Network, g: &EliminationGraph, x: &State) -> Result<Rat, KineticsError> {
    let mut total = Rat::zero();
    for e in g.out_reactions(0) {
        total += net.eval_intensity(e.reaction, x)?;
    }
    Ok(total)
}

/// If `λ_{U,k}(z) = κ z!/(z − y)!` for a single `κ` on every sample state
/// `z = y + d`, `d ∈ {0..=spread}^n`, return `κ`. Samples are limited to
/// `max_samples` states.
pub fn mass_action_fit(
    net: &Network,
    rn: &ReducedNetwork,
    k: usize,
    spread: u64,
    max_samples: usize,
    cap: usize,
) -> Result<Option<Rat>, KineticsError> {
    let y = &rn.reactions[k].reactant;
    let mut kappa: Option<Rat> = None;
    for d in crate::model::box_states(&vec![spread; rn.dim()]).take(max_samples) {
        let z: Vec<u64> = y.as_slice().iter().zip(d.as_slice()).map(|(a, b)| a + b).collect();
        let lam = reduced_intensity(net, rn, k, &z, cap)?;
        let mut ff = num_bigint::BigInt::one();
        for (&zi, &yi) in z.iter().zip(y.as_slice()) {
            ff *= crate::num::falling_factorial(zi, yi);
        }
        let ratio = lam / Rat::from_integer(ff);
        match &kappa {
            None => kappa = Some(ratio),
            Some(prev) if *prev == ratio => {}
            Some(_) => return Ok(None),
        }
    }
    Ok(kappa.filter(|v| v.is_positive()))
}

impl BranchTable {
    /// Whether the table is a probability vector or identically zero.
    pub fn is_conservative(&self) -> bool {
        let t = self.total();
        t.is_zero() || t.is_one()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elimination::{classify, reduce, DEFAULT_MEMO_CAP};
    use crate::fixtures;
    use crate::num::{rat, ratio};
    use proptest::prelude::*;

    fn setup(doc: crate::netparse::NetworkDocument, u: &[&str]) -> (Network, ReducedNetwork) {
        let net = doc.network;
        let g = classify(&net, &fixtures::species_indices(&net, u)).unwrap();
        let rn = reduce(&net, &g, DEFAULT_MEMO_CAP).unwrap();
        (net, rn)
    }

    fn pair_index(net: &Network, rn: &ReducedNetwork, text: &str) -> usize {
        rn.reactions
            .iter()
            .position(|r| r.pair.format_with(net.species_names()) == text)
            .unwrap()
    }

    #[test]
    fn branch_table_at_exp1_node() {
        let (net, rn) = setup(fixtures::exp1(), &["U"]);
        let t = branch_probabilities(&net, &rn.graph, &State::new(vec![0, 0, 1]), 1).unwrap();
        assert_eq!(t.entries, vec![(1, ratio(1, 2)), (2, ratio(1, 2))]);
        let empty = branch_probabilities(&net, &rn.graph, &State::new(vec![3, 3, 0]), 1).unwrap();
        assert!(empty.entries.iter().all(|(_, b)| b.is_zero()));
        assert!(matches!(
            branch_probabilities(&net, &rn.graph, &State::new(vec![0, 0, 1]), 2),
            Err(KineticsError::InvalidNode(2))
        ));
    }

    #[test]
    fn branch_table_at_enzyme_intermediate() {
        let (net, rn) = setup(fixtures::enzyme(), &["EA", "EAB"]);
        for b in 1..6u64 {
            let x = State::new(vec![0, 0, b, 0, 0, 1, 0]);
            let t = branch_probabilities(&net, &rn.graph, &x, 1).unwrap();
            assert_eq!(t.get(1), Some(&ratio(1, 1 + b as i64)));
            assert_eq!(t.get(2), Some(&ratio(b as i64, 1 + b as i64)));
            assert!(t.total().is_one());
        }
    }

    #[test]
    fn motivating_example_reduced_rates() {
        let (net, rn) = setup(fixtures::exp1(), &["U"]);
        let ab = pair_index(&net, &rn, "A -> B");
        let ba = pair_index(&net, &rn, "B -> A");
        for a in 0..6u64 {
            for b in 0..6u64 {
                let lam = reduced_intensities(&net, &rn, &[a, b], DEFAULT_CHAIN_CAP).unwrap();
                assert_eq!(lam[ab], ratio(a as i64, 2));
                assert_eq!(lam[ba], ratio(3 * b as i64, 2));
            }
        }
    }

    #[test]
    fn enzyme_matches_geometric_closed_form() {
        let (net, rn) = setup(fixtures::enzyme(), &["EA", "EAB"]);
        let fast = setup(fixtures::enzyme_fast(), &["EA", "EAB"]);
        for e in 0..4i64 {
            for a in 0..4i64 {
                for b in 0..5i64 {
                    let z = [e as u64, a as u64, b as u64, 0, 0];
                    let got = reduced_intensity(&net, &rn, 0, &z, DEFAULT_CHAIN_CAP).unwrap();
                    assert_eq!(got, ratio(e * a * b, 1) / rat(b + 2));
                    let got = reduced_intensity(&fast.0, &fast.1, 0, &z, DEFAULT_CHAIN_CAP).unwrap();
                    assert_eq!(got, ratio(10 * e * a * b, 1) / rat(10 * b + 11));
                }
            }
        }
    }

    #[test]
    fn mass_action_fit_recovers_motivating_rates() {
        let (net, rn) = setup(fixtures::exp1(), &["U"]);
        let ab = pair_index(&net, &rn, "A -> B");
        let ba = pair_index(&net, &rn, "B -> A");
        assert_eq!(mass_action_fit(&net, &rn, ab, 3, 100, DEFAULT_CHAIN_CAP).unwrap(), Some(ratio(1, 2)));
        assert_eq!(mass_action_fit(&net, &rn, ba, 3, 100, DEFAULT_CHAIN_CAP).unwrap(), Some(ratio(3, 2)));
        let (net, rn) = setup(fixtures::enzyme(), &["EA", "EAB"]);
        assert_eq!(mass_action_fit(&net, &rn, 0, 2, 300, DEFAULT_CHAIN_CAP).unwrap(), None);
    }

    #[test]
    fn truncated_sum_exp1_single_walk() {
        let (net, rn) = setup(fixtures::exp1(), &["U"]);
        let pair = &rn.reactions[pair_index(&net, &rn, "A -> B")].pair;
        let x = State::new(vec![1, 0, 0]);
        let t = truncated_walk_sum(&net, &rn.graph, pair, &x, 2).unwrap();
        assert_eq!(t.value, ratio(1, 2));
        assert!(t.tail_bound.is_zero());
        let t1 = truncated_walk_sum(&net, &rn.graph, pair, &x, 1).unwrap();
        assert!(t1.value.is_zero());
        assert!(t1.tail_bound.is_one());
    }

    #[test]
    fn truncated_sum_increases_toward_solve() {
        let (net, rn) = setup(fixtures::enzyme(), &["EA", "EAB"]);
        let pair = &rn.reactions[0].pair;
        let x = rn.embed(&[2, 3, 4, 0, 0], net.dim());
        let exact = reduced_intensity(&net, &rn, 0, &[2, 3, 4, 0, 0], DEFAULT_CHAIN_CAP).unwrap();
        let t3 = truncated_walk_sum(&net, &rn.graph, pair, &x, 3).unwrap();
        let t9 = truncated_walk_sum(&net, &rn.graph, pair, &x, 9).unwrap();
        assert!(t3.value < t9.value);
        assert!(t9.value <= exact);
        assert!(exact <= &t9.value + &t9.tail_bound);
        assert!(exact <= &t3.value + &t3.tail_bound);
    }

    #[test]
    fn infeasible_state_has_zero_truncated_sum() {
        let (net, rn) = setup(fixtures::enzyme(), &["EA", "EAB"]);
        let pair = &rn.reactions[0].pair;
        let x = rn.embed(&[1, 1, 0, 3, 3], net.dim());
        for d in 1..8 {
            assert!(truncated_walk_sum(&net, &rn.graph, pair, &x, d).unwrap().value.is_zero());
        }
    }

    #[test]
    fn walk_weights_conserve_initial_flux() {
        for (name, doc, u) in [
            ("exp1", fixtures::exp1(), vec!["U"]),
            ("enzyme", fixtures::enzyme(), vec!["EA", "EAB"]),
            ("enzyme_rev", fixtures::enzyme_rev(), vec!["EA", "EAB"]),
        ] {
            let (net, rn) = setup(doc, &u);
            for z in crate::model::box_states(&vec![2; rn.dim()]) {
                let x = rn.embed(z.as_slice(), net.dim());
                let total = total_walk_weight(&net, &rn.graph, &x, DEFAULT_CHAIN_CAP).unwrap();
                assert_eq!(total, initial_weight(&net, &rn.graph, &x).unwrap(), "{name} {z}");
            }
        }
    }

    #[test]
    fn incoming_flux_identity_for_complex_balanced_enzyme() {
        let (net, rn) = setup(fixtures::enzyme_rev(), &["EA", "EAB"]);
        // c = 1 is a complex balanced equilibrium, so π ∝ 1/x!.
        let pi = |s: &State| -> Rat {
            let d: num_bigint::BigInt = s.as_slice().iter().map(|&k| crate::num::factorial(k)).product();
            Rat::new(1.into(), d)
        };
        let ends: Vec<usize> = rn.graph.edges.iter().filter(|e| e.to == 0 && e.from != 0).map(|e| e.reaction).collect();
        for z in crate::model::box_states(&[2, 2, 1, 1, 1]) {
            let x = rn.embed(z.as_slice(), net.dim());
            for &r in &ends {
                let (lhs, rhs) = incoming_flux_identity(&net, &rn.graph, &pi, &x, r, 10_000).unwrap();
                assert_eq!(lhs, rhs, "state {z} reaction {r}");
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn branch_tables_are_conservative(e in 0u64..4, a in 0u64..4, b in 0u64..4, p in 0u64..3, ea in 0u64..2, eab in 0u64..2, node in 0usize..3) {
            let (net, rn) = setup(fixtures::enzyme(), &["EA", "EAB"]);
            let x = State::new(vec![e, a, b, p, p, ea, eab]);
            let t = branch_probabilities(&net, &rn.graph, &x, node).unwrap();
            let covered = rn.graph.out_reactions(node).any(|ed| x.dominates(net.reactions()[ed.reaction].reactant.as_slice()));
            prop_assert_eq!(t.total().is_one(), covered);
            prop_assert!(t.is_conservative());
        }

        #[test]
        fn reduced_rate_positive_iff_covered(e in 0u64..4, a in 0u64..4, b in 0u64..4) {
            let (net, rn) = setup(fixtures::enzyme(), &["EA", "EAB"]);
            let z = [e, a, b, 0, 0];
            let v = reduced_intensity(&net, &rn, 0, &z, DEFAULT_CHAIN_CAP).unwrap();
            let covers = State::new(z.to_vec()).dominates(rn.reactions[0].reactant.as_slice());
            prop_assert_eq!(v.is_positive(), covers);
        }
    }
}
