//! Non-interacting species: complex partition, the elimination multigraph,
//! eliminability, the cycle conditions and the reduced network.

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};

use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use serde::Serialize;
use thiserror::Error;

use crate::algebra::{node_of, oplus, ReactionPair, Walk};
use crate::linalg::nonnegative_solution;
use crate::model::{Complex, Network, State};
use crate::num::Rat;

/// Default bound on memoized `(node, pair)` entries in [`reduce`].
pub const DEFAULT_MEMO_CAP: usize = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ElimError {
    #[error("unknown species `{0}`")]
    UnknownSpecies(String),
    #[error("species index {0} is listed twice")]
    DuplicateSpecies(usize),
    #[error("the eliminated set must be a nonempty proper subset of the species")]
    NotProperSubset,
    #[error("complex {display} holds more than one molecule of the eliminated species")]
    NotNonInteracting { complex: Complex, display: String },
    #[error("species set is not eliminable: produced {u_pro:?}, degraded {u_deg:?}")]
    NotEliminable { u_pro: Vec<String>, u_deg: Vec<String> },
    #[error("condition 1 fails: cycle {} has net change {:?}", .witness.display, .witness.zeta)]
    Condition1Violated { witness: Box<Cycle> },
    #[error("more than {cap} walk classes; walk sums do not close up")]
    CapExceeded { cap: usize },
}

/// An edge `from -> to` of the multigraph, realized by reaction `reaction`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub reaction: usize,
}

/// Multigraph on `{U0} ∪ U`. Node 0 is `U0`; node `k + 1` is `u_set[k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct EliminationGraph {
    pub u_set: Vec<usize>,
    /// `partition[i]` lists the complexes whose projection onto `U` is node `i`.
    pub partition: Vec<Vec<Complex>>,
    /// One edge per reaction, in reaction order.
    pub edges: Vec<Edge>,
}

impl EliminationGraph {
    /// Number of eliminated species `m`.
    pub fn m(&self) -> usize {
        self.u_set.len()
    }

    pub fn node_of(&self, c: &Complex) -> Option<usize> {
        node_of(c, &self.u_set)
    }

    /// Projection onto the `U` coordinates.
    pub fn rho(&self, x: &[u64]) -> Vec<u64> {
        self.u_set.iter().map(|&s| x[s]).collect()
    }

    /// Reactions leaving node `i` (the set ∪_k R_{i,k}).
    pub fn out_reactions(&self, i: usize) -> impl Iterator<Item = &Edge> {
        self.edges.iter().filter(move |e| e.from == i)
    }

    /// Reactions of `R_{i,j}`.
    pub fn reactions_between(&self, i: usize, j: usize) -> Vec<usize> {
        self.edges
            .iter()
            .filter(|e| e.from == i && e.to == j)
            .map(|e| e.reaction)
            .collect()
    }

    /// Name of a node: `U0` or the species name.
    pub fn node_name(&self, net: &Network, i: usize) -> String {
        if i == 0 {
            "U0".to_string()
        } else {
            net.species_names()[self.u_set[i - 1]].clone()
        }
    }
}

/// Resolve species names to indices.
pub fn species_set(net: &Network, names: &[impl AsRef<str>]) -> Result<Vec<usize>, ElimError> {
    names
        .iter()
        .map(|n| {
            net.species_index(n.as_ref())
                .ok_or_else(|| ElimError::UnknownSpecies(n.as_ref().to_string()))
        })
        .collect()
}

/// Partition complexes and classify reactions by the `U`-content of their
/// source and target.
pub fn classify(net: &Network, u: &[usize]) -> Result<EliminationGraph, ElimError> {
    if u.is_empty() || u.len() >= net.dim() {
        return Err(ElimError::NotProperSubset);
    }
    let mut seen = HashSet::new();
    for &s in u {
        if s >= net.dim() {
            return Err(ElimError::UnknownSpecies(format!("#{s}")));
        }
        if !seen.insert(s) {
            return Err(ElimError::DuplicateSpecies(s));
        }
    }
    let mut partition = vec![Vec::new(); u.len() + 1];
    for c in net.complexes() {
        let node = node_of(&c, u).ok_or_else(|| ElimError::NotNonInteracting {
            display: c.format_with(net.species_names()),
            complex: c.clone(),
        })?;
        partition[node].push(c);
    }
    let edges = net
        .reactions()
        .iter()
        .enumerate()
        .map(|(k, r)| Edge {
            from: node_of(&r.reactant, u).expect("classified above"),
            to: node_of(&r.product, u).expect("classified above"),
            reaction: k,
        })
        .collect();
    Ok(EliminationGraph {
        u_set: u.to_vec(),
        partition,
        edges,
    })
}

/// Produced and degraded nodes (as node ids `1..=m`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ProducedDegraded {
    pub u_pro: Vec<usize>,
    pub u_deg: Vec<usize>,
    pub eliminable: bool,
}

fn reachable(g: &EliminationGraph, forward: bool) -> Vec<bool> {
    let mut seen = vec![false; g.m() + 1];
    seen[0] = true;
    let mut queue = VecDeque::from([0]);
    while let Some(v) = queue.pop_front() {
        for e in &g.edges {
            let (a, b) = if forward { (e.from, e.to) } else { (e.to, e.from) };
            if a == v && !seen[b] {
                seen[b] = true;
                queue.push_back(b);
            }
        }
    }
    seen
}

pub fn produced_degraded(g: &EliminationGraph) -> ProducedDegraded {
    let fwd = reachable(g, true);
    let bwd = reachable(g, false);
    let u_pro: Vec<usize> = (1..=g.m()).filter(|&i| fwd[i]).collect();
    let u_deg: Vec<usize> = (1..=g.m()).filter(|&i| bwd[i]).collect();
    let eliminable = u_pro.iter().all(|i| u_deg.contains(i));
    ProducedDegraded {
        u_pro,
        u_deg,
        eliminable,
    }
}

/// Every reaction lies in a strongly connected component of the complex graph.
pub fn check_weak_reversibility(net: &Network) -> bool {
    let complexes = net.complexes();
    let index: HashMap<&Complex, usize> = complexes.iter().enumerate().map(|(i, c)| (c, i)).collect();
    let mut graph = DiGraph::<(), ()>::new();
    let nodes: Vec<_> = complexes.iter().map(|_| graph.add_node(())).collect();
    for r in net.reactions() {
        graph.add_edge(nodes[index[&r.reactant]], nodes[index[&r.product]], ());
    }
    let mut component = vec![0; complexes.len()];
    for (k, scc) in tarjan_scc(&graph).into_iter().enumerate() {
        for v in scc {
            component[v.index()] = k;
        }
    }
    net.reactions()
        .iter()
        .all(|r| component[index[&r.reactant]] == component[index[&r.product]])
}

/// A simple cycle of the multigraph restricted to `U` (node 0 removed).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Cycle {
    /// Closed node sequence (first equals last).
    pub nodes: Vec<usize>,
    pub edges: Vec<usize>,
    /// Net reaction vector (sum of the edges' reaction vectors).
    pub zeta: Vec<i64>,
    /// Human-readable form, e.g. `EA -[EA + B -> EAB]-> EAB -[...]-> EA`.
    pub display: String,
}

/// All simple cycles avoiding `U0`, with parallel edges giving distinct
/// cycles and self-loops giving one-edge cycles.
pub fn simple_cycles(net: &Network, g: &EliminationGraph) -> Vec<Cycle> {
    let m = g.m();
    let mut parallel: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    for e in &g.edges {
        if e.from != 0 && e.to != 0 {
            parallel.entry((e.from, e.to)).or_default().push(e.reaction);
        }
    }
    let succ = |v: usize| -> Vec<usize> {
        parallel
            .keys()
            .filter(|(a, _)| *a == v)
            .map(|&(_, b)| b)
            .collect()
    };

    // Node-simple cycles whose smallest node is the start.
    let mut node_cycles: Vec<Vec<usize>> = Vec::new();
    for start in 1..=m {
        let mut path = vec![start];
        let mut on_path = vec![false; m + 1];
        on_path[start] = true;
        let mut stack = vec![succ(start).into_iter()];
        while let Some(iter) = stack.last_mut() {
            match iter.next() {
                Some(next) if next == start => {
                    let mut cyc = path.clone();
                    cyc.push(start);
                    node_cycles.push(cyc);
                }
                Some(next) if next > start && !on_path[next] => {
                    on_path[next] = true;
                    path.push(next);
                    stack.push(succ(next).into_iter());
                }
                Some(_) => {}
                None => {
                    stack.pop();
                    if let Some(v) = path.pop() {
                        on_path[v] = false;
                    }
                }
            }
        }
    }

    let zetas: Vec<Vec<i64>> = net.reactions().iter().map(|r| r.reaction_vector()).collect();
    let names = net.species_names();
    let mut out = Vec::new();
    for nodes in node_cycles {
        let choices: Vec<&Vec<usize>> = nodes
            .windows(2)
            .map(|w| &parallel[&(w[0], w[1])])
            .collect();
        let mut pick = vec![0usize; choices.len()];
        loop {
            let edges: Vec<usize> = pick.iter().zip(&choices).map(|(&k, c)| c[k]).collect();
            let mut zeta = vec![0i64; net.dim()];
            for &r in &edges {
                for (z, d) in zeta.iter_mut().zip(&zetas[r]) {
                    *z += d;
                }
            }
            let mut display = g.node_name(net, nodes[0]);
            for (k, &r) in edges.iter().enumerate() {
                let rx = &net.reactions()[r];
                display.push_str(&format!(
                    " -[{} -> {}]-> {}",
                    rx.reactant.format_with(names),
                    rx.product.format_with(names),
                    g.node_name(net, nodes[k + 1])
                ));
            }
            out.push(Cycle {
                nodes: nodes.clone(),
                edges,
                zeta,
                display,
            });
            // Odometer over parallel-edge choices.
            let mut k = 0;
            while k < pick.len() {
                pick[k] += 1;
                if pick[k] < choices[k].len() {
                    break;
                }
                pick[k] = 0;
                k += 1;
            }
            if k == pick.len() {
                break;
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Condition1 {
    pub holds: bool,
    pub witness: Option<Cycle>,
}

/// Every simple cycle avoiding `U0` has zero net reaction vector.
pub fn check_condition1(net: &Network, g: &EliminationGraph) -> Condition1 {
    let witness = simple_cycles(net, g)
        .into_iter()
        .find(|c| c.zeta.iter().any(|&z| z != 0));
    Condition1 {
        holds: witness.is_none(),
        witness,
    }
}

/// A nonnegative integer combination of cycles whose net vector is
/// nonzero and sign-definite.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConeWitness {
    pub terms: Vec<(u64, Cycle)>,
    pub combination: Vec<i64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Condition2 {
    /// No closed walk produces a strictly larger complex.
    pub part_i: bool,
    pub witness_i: Option<ConeWitness>,
    /// No closed walk produces a strictly smaller complex.
    pub part_ii: bool,
    pub witness_ii: Option<ConeWitness>,
}

/// Strongly connected component of each node of the `U`-subgraph.
fn u_components(g: &EliminationGraph) -> Vec<usize> {
    let mut graph = DiGraph::<(), ()>::new();
    let nodes: Vec<_> = (0..=g.m()).map(|_| graph.add_node(())).collect();
    for e in &g.edges {
        if e.from != 0 && e.to != 0 {
            graph.add_edge(nodes[e.from], nodes[e.to], ());
        }
    }
    let mut comp = vec![0; g.m() + 1];
    for (k, scc) in tarjan_scc(&graph).into_iter().enumerate() {
        for v in scc {
            comp[v.index()] = k;
        }
    }
    comp
}

/// Search `λ >= 0` with `Σ λ_k sign·ζ_k >= 0`, nonzero, by exact LP.
fn cone_witness(cycles: &[Cycle], sign: i64, dim: usize) -> Option<ConeWitness> {
    let active: Vec<&Cycle> = cycles.iter().filter(|c| c.zeta.iter().any(|&z| z != 0)).collect();
    if active.is_empty() {
        return None;
    }
    // Variables: λ_1..λ_k, s_1..s_n. Rows: Zλ - s = 0 and Σ s = 1.
    let k = active.len();
    let mut a = Vec::with_capacity(dim + 1);
    let mut b = Vec::with_capacity(dim + 1);
    for j in 0..dim {
        let mut row = vec![Rat::zero(); k + dim];
        for (c, cyc) in active.iter().enumerate() {
            row[c] = Rat::from_integer((sign * cyc.zeta[j]).into());
        }
        row[k + j] = -Rat::one();
        a.push(row);
        b.push(Rat::zero());
    }
    let mut norm = vec![Rat::zero(); k + dim];
    for v in norm.iter_mut().skip(k) {
        *v = Rat::one();
    }
    a.push(norm);
    b.push(Rat::one());
    let sol = nonnegative_solution(&a, &b)?;

    let lcm = sol[..k]
        .iter()
        .fold(num_bigint::BigInt::one(), |acc, v| acc.lcm(v.denom()));
    let mut terms = Vec::new();
    let mut combination = vec![0i64; dim];
    for (c, v) in sol[..k].iter().enumerate() {
        if v.is_positive() {
            let coeff = (v * Rat::from_integer(lcm.clone()))
                .to_integer()
                .to_u64()
                .expect("certificate coefficient fits in u64");
            for (acc, z) in combination.iter_mut().zip(&active[c].zeta) {
                *acc += coeff as i64 * z;
            }
            terms.push((coeff, active[c].clone()));
        }
    }
    Some(ConeWitness { terms, combination })
}

/// Decide both parts of condition 2 over the cone spanned by the simple
/// cycles of each strongly connected part of the `U`-subgraph.
pub fn check_condition2(net: &Network, g: &EliminationGraph) -> Condition2 {
    let cycles = simple_cycles(net, g);
    let comp = u_components(g);
    let mut groups: BTreeMap<usize, Vec<Cycle>> = BTreeMap::new();
    for c in cycles {
        groups.entry(comp[c.nodes[0]]).or_default().push(c);
    }
    let search = |sign: i64| {
        groups
            .values()
            .find_map(|cs| cone_witness(cs, sign, net.dim()))
    };
    let witness_i = search(1);
    let witness_ii = search(-1);
    Condition2 {
        part_i: witness_i.is_none(),
        witness_i,
        part_ii: witness_ii.is_none(),
        witness_ii,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConditionReport {
    pub condition1: Condition1,
    pub condition2: Condition2,
    pub eliminable: bool,
    pub u_pro: Vec<String>,
    pub u_deg: Vec<String>,
    pub weakly_reversible: bool,
}

pub fn condition_report(net: &Network, g: &EliminationGraph) -> ConditionReport {
    let pd = produced_degraded(g);
    let names = |ids: &[usize]| ids.iter().map(|&i| g.node_name(net, i)).collect();
    ConditionReport {
        condition1: check_condition1(net, g),
        condition2: check_condition2(net, g),
        eliminable: pd.eliminable,
        u_pro: names(&pd.u_pro),
        u_deg: names(&pd.u_deg),
        weakly_reversible: check_weak_reversibility(net),
    }
}

/// A walk sum over closed walks through `U0`, with one representative walk
/// per memoized walk class that produces it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReducedReaction {
    /// The pair in full species coordinates (zero on `U`).
    pub pair: ReactionPair,
    /// Reactant and product over the core species.
    pub reactant: Complex,
    pub product: Complex,
    pub provenance: Vec<Walk>,
}

impl ReducedReaction {
    pub fn reaction_vector(&self) -> Vec<i64> {
        crate::model::reaction_vector(&self.reactant, &self.product)
    }
}

/// The network on the core species obtained by eliminating `U`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedNetwork {
    pub graph: EliminationGraph,
    /// Indices (into the full network) of the species kept, in order.
    pub core_species: Vec<usize>,
    pub core_names: Vec<String>,
    /// Non-trivial walk sums: the reactions of the reduced network.
    pub reactions: Vec<ReducedReaction>,
    /// Walk sums of the form `(y, y)`, kept for bookkeeping.
    pub self_loops: Vec<ReducedReaction>,
    pub memo_entries: usize,
}

impl ReducedNetwork {
    pub fn dim(&self) -> usize {
        self.core_species.len()
    }

    /// Core coordinates of a full state.
    pub fn project(&self, x: &[u64]) -> State {
        State::new(self.core_species.iter().map(|&s| x[s]).collect())
    }

    /// Full state with zero counts of the eliminated species.
    pub fn embed(&self, z: &[u64], full_dim: usize) -> State {
        let mut v = vec![0; full_dim];
        for (&s, &c) in self.core_species.iter().zip(z) {
            v[s] = c;
        }
        State::new(v)
    }

    /// Species of the core that occur in some reduced reaction.
    pub fn active_species(&self) -> Vec<String> {
        (0..self.dim())
            .filter(|&i| {
                self.reactions
                    .iter()
                    .any(|r| r.reactant[i] > 0 || r.product[i] > 0)
            })
            .map(|i| self.core_names[i].clone())
            .collect()
    }

    /// All walk sums, self-loops included.
    pub fn walk_sums(&self) -> Vec<&ReducedReaction> {
        let mut all: Vec<&ReducedReaction> = self.reactions.iter().chain(&self.self_loops).collect();
        all.sort_by(|a, b| a.pair.cmp(&b.pair));
        all
    }

    /// Index of the reduced reaction with the given full-coordinate pair.
    pub fn position(&self, pair: &ReactionPair) -> Option<usize> {
        self.reactions.iter().position(|r| &r.pair == pair)
    }
}

struct MemoEntry {
    parent: Option<usize>,
    edge: usize,
}

fn walk_to(memo: &[MemoEntry], mut id: usize, last: Option<usize>, g: &EliminationGraph) -> Walk {
    let mut edges = Vec::new();
    if let Some(r) = last {
        edges.push(r);
    }
    loop {
        edges.push(memo[id].edge);
        match memo[id].parent {
            Some(p) => id = p,
            None => break,
        }
    }
    edges.reverse();
    let mut nodes = vec![0];
    for &r in &edges {
        nodes.push(g.edges[r].to);
    }
    Walk { nodes, edges }
}

/// Eliminate `U`: collect `𝔑(Ξ0)` by memoized search over
/// `(node, accumulated pair)` and drop self-loops.
pub fn reduce(net: &Network, g: &EliminationGraph, cap: usize) -> Result<ReducedNetwork, ElimError> {
    let pd = produced_degraded(g);
    if !pd.eliminable {
        let names = |ids: &[usize]| ids.iter().map(|&i| g.node_name(net, i)).collect();
        return Err(ElimError::NotEliminable {
            u_pro: names(&pd.u_pro),
            u_deg: names(&pd.u_deg),
        });
    }
    let c1 = check_condition1(net, g);
    if let Some(w) = c1.witness {
        return Err(ElimError::Condition1Violated {
            witness: Box::new(w),
        });
    }

    let pairs: Vec<ReactionPair> = net.reactions().iter().map(ReactionPair::from_reaction).collect();
    let mut memo: Vec<MemoEntry> = Vec::new();
    let mut index: HashMap<(usize, ReactionPair), usize> = HashMap::new();
    let mut queue: VecDeque<(usize, usize, ReactionPair)> = VecDeque::new();
    let mut collected: BTreeMap<ReactionPair, Vec<Walk>> = BTreeMap::new();

    for e in g.out_reactions(0) {
        let p = pairs[e.reaction].clone();
        if e.to == 0 {
            collected.entry(p).or_default().push(Walk {
                nodes: vec![0, 0],
                edges: vec![e.reaction],
            });
        } else if let std::collections::hash_map::Entry::Vacant(slot) = index.entry((e.to, p.clone())) {
            let id = memo.len();
            memo.push(MemoEntry {
                parent: None,
                edge: e.reaction,
            });
            slot.insert(id);
            queue.push_back((id, e.to, p));
        }
    }
    while let Some((id, node, acc)) = queue.pop_front() {
        for e in g.out_reactions(node) {
            let next = oplus(&acc, &pairs[e.reaction]);
            if e.to == 0 {
                collected
                    .entry(next)
                    .or_default()
                    .push(walk_to(&memo, id, Some(e.reaction), g));
                continue;
            }
            let key = (e.to, next);
            if index.contains_key(&key) {
                continue;
            }
            if memo.len() >= cap {
                return Err(ElimError::CapExceeded { cap });
            }
            let new_id = memo.len();
            memo.push(MemoEntry {
                parent: Some(id),
                edge: e.reaction,
            });
            index.insert(key.clone(), new_id);
            queue.push_back((new_id, key.0, key.1));
        }
    }

    let core_species: Vec<usize> = (0..net.dim()).filter(|s| !g.u_set.contains(s)).collect();
    let core_names = core_species
        .iter()
        .map(|&s| net.species_names()[s].clone())
        .collect();
    let mut reactions = Vec::new();
    let mut self_loops = Vec::new();
    for (pair, provenance) in collected {
        let reactant = Complex::new(core_species.iter().map(|&s| pair.need[s]).collect());
        let product = Complex::new(core_species.iter().map(|&s| pair.result[s]).collect());
        let rr = ReducedReaction {
            reactant,
            product,
            provenance,
            pair,
        };
        if rr.pair.is_self_loop() {
            self_loops.push(rr);
        } else {
            reactions.push(rr);
        }
    }
    Ok(ReducedNetwork {
        graph: g.clone(),
        core_species,
        core_names,
        reactions,
        self_loops,
        memo_entries: memo.len(),
    })
}
