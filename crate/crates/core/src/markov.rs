//! Irreducible components, stationary distributions from the master
//! equation, balance checks, product-form and conditional distributions.

use std::collections::{BTreeMap, HashMap, VecDeque};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use serde::Serialize;
use thiserror::Error;

use crate::kinetics::KineticsError;
use crate::linalg::{residual_sparse, solve_sparse, LinalgError, SparseRows};
use crate::model::{Complex, Kinetics, Network, State};
use crate::num::{factorial, rat_pow, rat_to_f64, NumericMode, Rat};
use crate::system::ReactionSystem;

/// Exact solves are used up to this many states.
pub const EXACT_STATE_LIMIT: usize = 2000;
/// Default bound on explored states.
pub const DEFAULT_STATE_CAP: usize = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MarkovError {
    #[error(transparent)]
    Kinetics(#[from] KineticsError),
    #[error("seed state {0} lies outside the bound")]
    SeedOutsideBound(State),
    #[error("component leaves the bound: {exits} transitions exit the {states} states explored")]
    BoundExceeded { states: usize, exits: usize },
    #[error("explored more than {0} states")]
    StateCap(usize),
    #[error("state set is not closed: {from} -> {to} leaves it")]
    NotClosed { from: State, to: State },
    #[error("master equation has a larger null space; the state set is not irreducible")]
    SingularBeyondNullity,
    #[error("{transient} of the {states} states reached from the seed cannot return to it; the closure is not irreducible")]
    NotIrreducible { states: usize, transient: usize },
    #[error("float solve left residual {0:e}")]
    Inaccurate(f64),
    #[error("network is not reversible: reaction {0} has no reverse")]
    NotReversible(usize),
    #[error("conditioning set has zero probability")]
    EmptySlice,
    #[error("complex balance check needs mass-action kinetics")]
    NotMassAction,
    #[error("product form needs positive c, got entry {0}")]
    NonPositive(usize),
}

/// Region inside which components are explored.
#[derive(Debug, Clone, PartialEq)]
pub enum Bound {
    /// `x_i <= max_i` for every species.
    Box(Vec<u64>),
    /// `⟨w, x⟩ <= max`.
    Linear { weights: Vec<u64>, max: u64 },
}

impl Bound {
    pub fn contains(&self, x: &State) -> bool {
        match self {
            Bound::Box(b) => x.as_slice().iter().zip(b).all(|(v, m)| v <= m),
            Bound::Linear { weights, max } => {
                x.as_slice().iter().zip(weights).map(|(v, w)| v * w).sum::<u64>() <= *max
            }
        }
    }
}

/// A finite state set with its index.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentSet {
    pub states: Vec<State>,
    index: HashMap<State, usize>,
    /// No transition leaves the set and every state reaches every other.
    pub closed: bool,
    /// Transitions that left the bound during exploration.
    pub exits: usize,
    /// Explored states that cannot return to the seed.
    pub transient: usize,
    pub generator_nnz: usize,
}

impl ComponentSet {
    pub fn from_states(mut states: Vec<State>) -> Self {
        states.sort();
        states.dedup();
        let index = states.iter().cloned().enumerate().map(|(i, s)| (s, i)).collect();
        Self {
            states,
            index,
            closed: false,
            exits: 0,
            transient: 0,
            generator_nnz: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn position(&self, x: &State) -> Option<usize> {
        self.index.get(x).copied()
    }

    pub fn contains(&self, x: &State) -> bool {
        self.index.contains_key(x)
    }
}

/// Successor states with positive intensity, as `(reaction, target, rate)`.
fn transitions(sys: &dyn ReactionSystem, x: &State) -> Result<Vec<(usize, State, Rat)>, MarkovError> {
    let lam = sys.intensities(x)?;
    let mut out = Vec::new();
    for (r, l) in lam.into_iter().enumerate() {
        if l.is_positive() {
            let y = x
                .shifted(&sys.reaction_vector(r))
                .expect("positive intensity implies the reactant is present");
            out.push((r, y, l));
        }
    }
    Ok(out)
}

/// Forward closure of `seed` inside `bound`. The result is marked closed
/// when nothing exits the bound and every state can return to the seed.
pub fn explore(
    sys: &dyn ReactionSystem,
    seed: &State,
    bound: &Bound,
    cap: usize,
) -> Result<ComponentSet, MarkovError> {
    if !bound.contains(seed) {
        return Err(MarkovError::SeedOutsideBound(seed.clone()));
    }
    let mut states = vec![seed.clone()];
    let mut index: HashMap<State, usize> = HashMap::from([(seed.clone(), 0)]);
    let mut edges: Vec<(usize, usize)> = Vec::new();
    let mut exits = 0;
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        for (_, y, _) in transitions(sys, &states[i].clone())? {
            if !bound.contains(&y) {
                exits += 1;
                continue;
            }
            let j = match index.get(&y) {
                Some(&j) => j,
                None => {
                    if states.len() >= cap {
                        return Err(MarkovError::StateCap(cap));
                    }
                    states.push(y.clone());
                    index.insert(y, states.len() - 1);
                    queue.push_back(states.len() - 1);
                    states.len() - 1
                }
            };
            if i != j {
                edges.push((i, j));
            }
        }
    }
    // Backward closure from the seed.
    let mut back: Vec<Vec<usize>> = vec![Vec::new(); states.len()];
    for &(i, j) in &edges {
        back[j].push(i);
    }
    let mut reaches = vec![false; states.len()];
    reaches[0] = true;
    let mut stack = vec![0];
    while let Some(j) = stack.pop() {
        for &i in &back[j] {
            if !reaches[i] {
                reaches[i] = true;
                stack.push(i);
            }
        }
    }
    let nnz = edges.len() + states.len();
    let transient = reaches.iter().filter(|&&b| !b).count();
    let mut set = ComponentSet::from_states(states);
    set.closed = exits == 0 && reaches.iter().all(|&b| b);
    set.exits = exits;
    set.transient = transient;
    set.generator_nnz = nnz;
    Ok(set)
}

/// The irreducible component containing `seed`; fails when the closure
/// leaves `bound` or some state cannot return to the seed.
pub fn irreducible_component(
    sys: &dyn ReactionSystem,
    seed: &State,
    bound: &Bound,
) -> Result<ComponentSet, MarkovError> {
    let set = explore(sys, seed, bound, DEFAULT_STATE_CAP)?;
    if set.exits > 0 {
        return Err(MarkovError::BoundExceeded {
            states: set.len(),
            exits: set.exits,
        });
    }
    if set.transient > 0 {
        return Err(MarkovError::NotIrreducible {
            states: set.len(),
            transient: set.transient,
        });
    }
    Ok(set)
}

/// A probability distribution on an explicit finite support.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Distribution {
    pub states: Vec<State>,
    #[serde(serialize_with = "crate::num::serde_rat::vec::serialize")]
    pub probabilities: Vec<Rat>,
    /// False when the values come from a floating point solve.
    pub exact: bool,
    /// Normalizing constant, when the distribution was built from weights.
    #[serde(skip_serializing_if = "Option::is_none", serialize_with = "serialize_opt_rat")]
    pub normalization: Option<Rat>,
}

fn serialize_opt_rat<S: serde::Serializer>(v: &Option<Rat>, s: S) -> Result<S::Ok, S::Error> {
    match v {
        Some(r) => crate::num::serde_rat::serialize(r, s),
        None => s.serialize_none(),
    }
}

impl Distribution {
    /// Normalize nonnegative weights; records `M = 1/Σ w`.
    pub fn from_weights(states: Vec<State>, weights: Vec<Rat>) -> Self {
        let total: Rat = weights.iter().sum();
        let probabilities = weights.into_iter().map(|w| w / &total).collect();
        Self {
            states,
            probabilities,
            exact: true,
            normalization: Some(Rat::one() / total),
        }
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn get(&self, x: &State) -> Rat {
        self.states
            .iter()
            .position(|s| s == x)
            .map(|i| self.probabilities[i].clone())
            .unwrap_or_else(Rat::zero)
    }

    pub fn as_map(&self) -> HashMap<State, Rat> {
        self.states.iter().cloned().zip(self.probabilities.iter().cloned()).collect()
    }

    pub fn support(&self) -> ComponentSet {
        ComponentSet::from_states(self.states.clone())
    }

    pub fn total(&self) -> Rat {
        self.probabilities.iter().sum()
    }

    /// Push forward along a coordinate projection.
    pub fn project(&self, coords: &[usize]) -> Distribution {
        let mut acc: BTreeMap<State, Rat> = BTreeMap::new();
        for (s, p) in self.states.iter().zip(&self.probabilities) {
            let key = State::new(coords.iter().map(|&c| s[c]).collect());
            *acc.entry(key).or_insert_with(Rat::zero) += p;
        }
        let (states, probabilities) = acc.into_iter().unzip();
        Distribution {
            states,
            probabilities,
            exact: self.exact,
            normalization: None,
        }
    }

    /// `½ Σ |p - q|` over the union of supports.
    pub fn total_variation(&self, other: &Distribution) -> Rat {
        let mut diff: HashMap<&State, Rat> = HashMap::new();
        for (s, p) in self.states.iter().zip(&self.probabilities) {
            *diff.entry(s).or_insert_with(Rat::zero) += p;
        }
        for (s, q) in other.states.iter().zip(&other.probabilities) {
            *diff.entry(s).or_insert_with(Rat::zero) -= q;
        }
        diff.into_values().map(|d| d.abs()).sum::<Rat>() / Rat::from_integer(2.into())
    }
}

/// Solve `πQ = 0`, `Σπ = 1` on a closed set.
pub fn stationary_distribution(
    sys: &dyn ReactionSystem,
    gamma: &ComponentSet,
    mode: NumericMode,
) -> Result<Distribution, MarkovError> {
    let n = gamma.len();
    if n == 1 {
        return Ok(Distribution::from_weights(gamma.states.clone(), vec![Rat::one()]));
    }
    // Row j of the transposed generator: Σ_i π_i Q_ij = 0.
    let mut rows: SparseRows<Rat> = vec![BTreeMap::new(); n];
    for (i, x) in gamma.states.iter().enumerate() {
        let mut out = Rat::zero();
        for (_, y, l) in transitions(sys, x)? {
            let j = gamma.position(&y).ok_or_else(|| MarkovError::NotClosed {
                from: x.clone(),
                to: y.clone(),
            })?;
            if i == j {
                continue;
            }
            out += &l;
            *rows[j].entry(i).or_insert_with(Rat::zero) += l;
        }
        *rows[i].entry(i).or_insert_with(Rat::zero) -= out;
    }
    // Replace the first balance equation by π_0 = 1.
    rows[0] = BTreeMap::from([(0, Rat::one())]);
    let mut b = vec![Rat::zero(); n];
    b[0] = Rat::one();

    let exact = mode == NumericMode::Rational && n <= EXACT_STATE_LIMIT;
    let values: Vec<Rat> = if exact {
        solve_sparse(rows, b).map_err(singular)?
    } else {
        let rf: SparseRows<f64> = rows
            .iter()
            .map(|r| r.iter().map(|(&k, v)| (k, rat_to_f64(v))).collect())
            .collect();
        let bf: Vec<f64> = b.iter().map(rat_to_f64).collect();
        let v = solve_sparse(rf.clone(), bf.clone()).map_err(singular)?;
        let total: f64 = v.iter().sum();
        let res = residual_sparse(&rf, &v, &bf) / total;
        if res.is_nan() || res > 1e-10 {
            return Err(MarkovError::Inaccurate(res));
        }
        v.into_iter()
            .map(|f| Rat::from_float(f.max(0.0)).unwrap_or_else(Rat::zero))
            .collect()
    };
    if exact && values.iter().any(|v| !v.is_positive()) {
        return Err(MarkovError::SingularBeyondNullity);
    }
    let mut d = Distribution::from_weights(gamma.states.clone(), values);
    d.exact = exact;
    d.normalization = None;
    Ok(d)
}

fn singular(_: LinalgError) -> MarkovError {
    MarkovError::SingularBeyondNullity
}

/// Signed master-equation residual at `x`:
/// `π(x) Σ_r λ_r(x) − Σ_r π(x − ζ_r) λ_r(x − ζ_r)`.
pub fn master_residual_at(
    sys: &dyn ReactionSystem,
    pi: &dyn Fn(&State) -> Rat,
    x: &State,
) -> Result<Rat, MarkovError> {
    let lam = sys.intensities(x)?;
    let mut res = pi(x) * lam.iter().sum::<Rat>();
    for r in 0..sys.num_reactions() {
        let back: Vec<i64> = sys.reaction_vector(r).iter().map(|d| -d).collect();
        if let Some(prev) = x.shifted(&back) {
            let p = pi(&prev);
            if !p.is_zero() {
                res -= p * &sys.intensities(&prev)?[r];
            }
        }
    }
    Ok(res)
}

/// Maximum absolute master-equation residual over `Γ` with `π` zero
/// outside its support.
pub fn check_stationary(
    sys: &dyn ReactionSystem,
    gamma: &ComponentSet,
    pi: &Distribution,
) -> Result<Rat, MarkovError> {
    let map = pi.as_map();
    let lookup = |s: &State| map.get(s).cloned().unwrap_or_else(Rat::zero);
    let mut worst = Rat::zero();
    for x in &gamma.states {
        let r = master_residual_at(sys, &lookup, x)?.abs();
        if r > worst {
            worst = r;
        }
    }
    Ok(worst)
}

/// Signed complex-balance residual of complex `eta` at `x`.
pub fn complex_residual_at(
    sys: &dyn ReactionSystem,
    pi: &dyn Fn(&State) -> Rat,
    eta: &Complex,
    x: &State,
) -> Result<Rat, MarkovError> {
    let lam = sys.intensities(x)?;
    let mut res = Rat::zero();
    let px = pi(x);
    for (r, l) in lam.iter().enumerate() {
        if sys.reactant(r) == eta && !px.is_zero() {
            res += &px * l;
        }
        if sys.product(r) == eta {
            let back: Vec<i64> = sys.reaction_vector(r).iter().map(|d| -d).collect();
            if let Some(prev) = x.shifted(&back) {
                let p = pi(&prev);
                if !p.is_zero() {
                    res -= p * &sys.intensities(&prev)?[r];
                }
            }
        }
    }
    Ok(res)
}

/// Per-complex maximum absolute residual of complex balance over `Γ`.
pub fn check_complex_balance(
    sys: &dyn ReactionSystem,
    gamma: &ComponentSet,
    pi: &Distribution,
) -> Result<Vec<(Complex, Rat)>, MarkovError> {
    let map = pi.as_map();
    let lookup = |s: &State| map.get(s).cloned().unwrap_or_else(Rat::zero);
    let mut out = Vec::new();
    for eta in sys.complexes() {
        let mut worst = Rat::zero();
        for x in &gamma.states {
            let r = complex_residual_at(sys, &lookup, &eta, x)?.abs();
            if r > worst {
                worst = r;
            }
        }
        out.push((eta, worst));
    }
    Ok(out)
}

/// Signed detailed-balance residual of reaction `r` at `x`:
/// `π(x)λ_r(x) − π(x + ζ_r)λ_{r'}(x + ζ_r)`.
pub fn detailed_residual_at(
    sys: &dyn ReactionSystem,
    pi: &dyn Fn(&State) -> Rat,
    r: usize,
    x: &State,
) -> Result<Rat, MarkovError> {
    let rev = sys.reverse_of(r).ok_or(MarkovError::NotReversible(r))?;
    let mut res = pi(x) * &sys.intensities(x)?[r];
    if let Some(next) = x.shifted(&sys.reaction_vector(r)) {
        let p = pi(&next);
        if !p.is_zero() {
            res -= p * &sys.intensities(&next)?[rev];
        }
    }
    Ok(res)
}

/// Per-reaction maximum absolute detailed-balance residual over `Γ`.
pub fn check_detailed_balance(
    sys: &dyn ReactionSystem,
    gamma: &ComponentSet,
    pi: &Distribution,
) -> Result<Vec<(usize, Rat)>, MarkovError> {
    if let Some(r) = (0..sys.num_reactions()).find(|&r| sys.reverse_of(r).is_none()) {
        return Err(MarkovError::NotReversible(r));
    }
    let map = pi.as_map();
    let lookup = |s: &State| map.get(s).cloned().unwrap_or_else(Rat::zero);
    let mut out = Vec::new();
    for r in 0..sys.num_reactions() {
        let mut worst = Rat::zero();
        for x in &gamma.states {
            let v = detailed_residual_at(sys, &lookup, r, x)?.abs();
            if v > worst {
                worst = v;
            }
        }
        out.push((r, worst));
    }
    Ok(out)
}

/// Maximum over a residual table.
pub fn max_residual<K>(table: &[(K, Rat)]) -> Rat {
    table.iter().map(|(_, r)| r.clone()).max().unwrap_or_else(Rat::zero)
}

/// `c^x / x!`.
pub fn product_form_weight(c: &[Rat], x: &State) -> Rat {
    let mut num = Rat::one();
    let mut den = BigInt::one();
    for (ci, &xi) in c.iter().zip(x.as_slice()) {
        num *= rat_pow(ci, xi);
        den *= factorial(xi);
    }
    num / Rat::from_integer(den)
}

/// `π(x) = M c^x / x!` normalized over `Γ`.
pub fn poisson_product_form(c: &[Rat], gamma: &ComponentSet) -> Result<Distribution, MarkovError> {
    if let Some(i) = c.iter().position(|v| !v.is_positive()) {
        return Err(MarkovError::NonPositive(i));
    }
    let weights = gamma.states.iter().map(|x| product_form_weight(c, x)).collect();
    Ok(Distribution::from_weights(gamma.states.clone(), weights))
}

/// `c^y = ∏ c_i^{y_i}`.
fn monomial(c: &[Rat], y: &Complex) -> Rat {
    c.iter().zip(y.as_slice()).map(|(ci, &yi)| rat_pow(ci, yi)).product()
}

/// Per-complex residual of the deterministic complex-balance equations
/// `Σ_{η→y'} κ c^η = Σ_{y→η} κ c^y` (signed: outflow minus inflow).
pub fn verify_deterministic_complex_balance(
    net: &Network,
    c: &[Rat],
) -> Result<Vec<(Complex, Rat)>, MarkovError> {
    let mut out = Vec::new();
    for eta in net.complexes() {
        let mut res = Rat::zero();
        for r in net.reactions() {
            let Kinetics::MassAction(k) = &r.kinetics else {
                return Err(MarkovError::NotMassAction);
            };
            if r.reactant == eta {
                res += k * monomial(c, &r.reactant);
            }
            if r.product == eta {
                res -= k * monomial(c, &r.reactant);
            }
        }
        out.push((eta, res));
    }
    Ok(out)
}

/// Search a complex balanced equilibrium by damped multiplicative
/// iteration, then round to small rationals and verify exactly.
///
/// Returns `None` unless an exactly verified equilibrium is found.
pub fn find_complex_balanced_equilibrium(net: &Network, iterations: usize) -> Option<Vec<Rat>> {
    let n = net.dim();
    let mut rates = Vec::new();
    for r in net.reactions() {
        match &r.kinetics {
            Kinetics::MassAction(k) => rates.push(rat_to_f64(k)),
            Kinetics::Expr(_) => return None,
        }
    }
    let complexes = net.complexes();
    let mut logc = vec![0.0f64; n];
    for _ in 0..iterations {
        let c: Vec<f64> = logc.iter().map(|v| v.exp()).collect();
        let mono = |y: &Complex| -> f64 {
            y.as_slice().iter().zip(&c).map(|(&k, ci)| ci.powi(k as i32)).product()
        };
        let mut step = vec![0.0f64; n];
        let mut weight = vec![0.0f64; n];
        let mut worst = 0.0f64;
        for eta in &complexes {
            let (mut outflow, mut inflow) = (0.0, 0.0);
            for (r, k) in net.reactions().iter().zip(&rates) {
                if &r.reactant == eta {
                    outflow += k * mono(&r.reactant);
                }
                if &r.product == eta {
                    inflow += k * mono(&r.reactant);
                }
            }
            if outflow <= 0.0 || inflow <= 0.0 {
                return None;
            }
            let ratio = (inflow / outflow).ln();
            worst = worst.max(ratio.abs());
            let size: u64 = eta.total();
            for (i, &k) in eta.as_slice().iter().enumerate() {
                if k > 0 {
                    step[i] += ratio * k as f64 / size as f64;
                    weight[i] += k as f64;
                }
            }
        }
        for i in 0..n {
            if weight[i] > 0.0 {
                logc[i] += 0.5 * step[i] / weight[i];
            }
        }
        if worst < 1e-13 {
            break;
        }
    }
    let c: Vec<f64> = logc.iter().map(|v| v.exp()).collect();
    let verify = |cand: &[Rat]| {
        verify_deterministic_complex_balance(net, cand)
            .map(|t| t.iter().all(|(_, r)| r.is_zero()))
            .unwrap_or(false)
    };
    // Equilibria form a family; try normalizing by each coordinate.
    let mut candidates = vec![c.clone()];
    for &ck in &c {
        candidates.push(c.iter().map(|v| v / ck).collect());
    }
    for cand in candidates {
        let rounded: Option<Vec<Rat>> = cand.iter().map(|&v| small_rational(v, 1000)).collect();
        if let Some(r) = rounded {
            if verify(&r) {
                return Some(r);
            }
        }
    }
    None
}

/// Best rational approximation with denominator at most `max_den`, kept only
/// if within `1e-9` relative error.
fn small_rational(v: f64, max_den: i64) -> Option<Rat> {
    if !v.is_finite() || v <= 0.0 {
        return None;
    }
    let (mut h0, mut h1, mut k0, mut k1) = (0i64, 1i64, 1i64, 0i64);
    let mut x = v;
    for _ in 0..40 {
        let a = x.floor() as i64;
        let h2 = a.checked_mul(h1)?.checked_add(h0)?;
        let k2 = a.checked_mul(k1)?.checked_add(k0)?;
        if k2 > max_den {
            break;
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        let frac = x - a as f64;
        if frac.abs() < 1e-12 {
            break;
        }
        x = 1.0 / frac;
    }
    let approx = h1 as f64 / k1 as f64;
    ((approx - v).abs() <= 1e-9 * v).then(|| Rat::new(h1.into(), k1.into()))
}

/// `π(x)/π(Γ₀)` on the states selected by `keep`.
pub fn conditional_distribution(
    pi: &Distribution,
    keep: impl Fn(&State) -> bool,
) -> Result<Distribution, MarkovError> {
    let (states, weights): (Vec<State>, Vec<Rat>) = pi
        .states
        .iter()
        .zip(&pi.probabilities)
        .filter(|(s, _)| keep(s))
        .map(|(s, p)| (s.clone(), p.clone()))
        .unzip();
    let mass: Rat = weights.iter().sum();
    if mass.is_zero() {
        return Err(MarkovError::EmptySlice);
    }
    let mut d = Distribution::from_weights(states, weights);
    d.exact = pi.exact;
    d.normalization = None;
    Ok(d)
}

/// Split a finite state set into mutual-reachability classes, using only
/// transitions that stay inside it.
pub fn decompose_reduced_component(
    sys: &dyn ReactionSystem,
    gamma0: &ComponentSet,
) -> Result<Vec<ComponentSet>, MarkovError> {
    let mut graph = DiGraph::<(), ()>::new();
    let nodes: Vec<_> = gamma0.states.iter().map(|_| graph.add_node(())).collect();
    for (i, x) in gamma0.states.iter().enumerate() {
        for (_, y, _) in transitions(sys, x)? {
            if let Some(j) = gamma0.position(&y) {
                graph.add_edge(nodes[i], nodes[j], ());
            }
        }
    }
    let mut parts: Vec<ComponentSet> = tarjan_scc(&graph)
        .into_iter()
        .map(|scc| {
            let states = scc.iter().map(|v| gamma0.states[v.index()].clone()).collect();
            let mut set = ComponentSet::from_states(states);
            let closed = scc.iter().all(|v| {
                graph
                    .neighbors(*v)
                    .all(|w| scc.contains(&w))
            });
            set.closed = closed;
            set
        })
        .collect();
    parts.sort_by(|a, b| a.states[0].cmp(&b.states[0]));
    Ok(parts)
}

/// Mixture weights `π(Γ_k)/π(Γ₀)` of a distribution over a partition.
pub fn mixture_weights(pi: &Distribution, parts: &[ComponentSet]) -> Vec<Rat> {
    let total = pi.total();
    parts
        .iter()
        .map(|p| {
            pi.states
                .iter()
                .zip(&pi.probabilities)
                .filter(|(s, _)| p.contains(s))
                .map(|(_, q)| q)
                .sum::<Rat>()
                / &total
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elimination::{classify, reduce, DEFAULT_MEMO_CAP};
    use crate::fixtures;
    use crate::netparse::parse_network;
    use crate::num::{rat, ratio};
    use crate::system::ReducedSrn;

    fn exp1_component(t: u64) -> (Network, ComponentSet) {
        let net = fixtures::exp1().network;
        let seed = State::new(vec![t, 0, 0]);
        let bound = Bound::Linear {
            weights: vec![1, 1, 1],
            max: t,
        };
        let gamma = irreducible_component(&net, &seed, &bound).unwrap();
        (net, gamma)
    }

    fn exp1_reduced() -> ReducedSrn {
        let net = fixtures::exp1().network;
        let g = classify(&net, &[2]).unwrap();
        let rn = reduce(&net, &g, DEFAULT_MEMO_CAP).unwrap();
        ReducedSrn::new(net, rn)
    }

    fn st(v: &[u64]) -> State {
        State::new(v.to_vec())
    }

    #[test]
    fn exp1_component_is_the_simplex() {
        for t in 0..6u64 {
            let (_, gamma) = exp1_component(t);
            assert!(gamma.closed);
            assert_eq!(gamma.len() as u64, (t + 1) * (t + 2) / 2);
            assert!(gamma.states.iter().all(|s| s.total() == t));
        }
    }

    #[test]
    fn counterexample_component_hits_box() {
        let doc = fixtures::exp_count();
        let net = doc.network;
        let set = explore(&net, &st(&[1, 0]), &Bound::Box(vec![39, 39]), DEFAULT_STATE_CAP).unwrap();
        assert_eq!(set.len(), 40 * 40 - 1);
        assert!(!set.contains(&st(&[0, 0])));
        assert!(!set.closed);
        assert!(matches!(
            irreducible_component(&net, &st(&[1, 0]), &Bound::Box(vec![39, 39])),
            Err(MarkovError::BoundExceeded { .. })
        ));
    }

    #[test]
    fn irreversible_enzyme_closure_is_not_irreducible() {
        let net = fixtures::enzyme().network;
        let seed = st(&[1, 1, 1, 0, 0, 0, 0]);
        let err = irreducible_component(&net, &seed, &Bound::Box(vec![1; 7])).unwrap_err();
        assert!(matches!(err, MarkovError::NotIrreducible { transient: 1, states: 4 }), "{err:?}");
    }

    #[test]
    fn enzyme_component_is_finite_and_conserved() {
        let net = fixtures::enzyme_rev().network;
        let seed = st(&[1, 1, 1, 0, 0, 0, 0]);
        let bound = Bound::Box(vec![1; 7]);
        let gamma = irreducible_component(&net, &seed, &bound).unwrap();
        assert!(gamma.closed);
        for s in &gamma.states {
            assert_eq!(s[0] + s[5] + s[6], 1);
            assert_eq!(s[1] + s[5] + s[6] + s[3], 1);
        }
        // The irreversible network only flows one way.
        let irr = fixtures::enzyme().network;
        let set = explore(&irr, &seed, &bound, DEFAULT_STATE_CAP).unwrap();
        assert!(!set.closed);
    }

    #[test]
    fn exp1_stationary_t2() {
        let (net, gamma) = exp1_component(2);
        let pi = stationary_distribution(&net, &gamma, NumericMode::Rational).unwrap();
        let weights = [
            (&[2, 0, 0], rat(18)),
            (&[1, 1, 0], rat(12)),
            (&[0, 2, 0], rat(2)),
            (&[1, 0, 1], rat(18)),
            (&[0, 1, 1], rat(6)),
            (&[0, 0, 2], ratio(9, 2)),
        ];
        let total = ratio(121, 2);
        for (s, w) in weights {
            assert_eq!(pi.get(&st(s)), w / &total);
        }
        assert!(check_stationary(&net, &gamma, &pi).unwrap().is_zero());
        let pf = poisson_product_form(&[rat(6), rat(2), rat(3)], &gamma).unwrap();
        assert_eq!(pf.normalization, Some(ratio(2, 121)));
        assert_eq!(pf.total_variation(&pi), Rat::zero());
    }

    #[test]
    fn float_mode_is_close() {
        let (net, gamma) = exp1_component(6);
        let exact = stationary_distribution(&net, &gamma, NumericMode::Rational).unwrap();
        let float = stationary_distribution(&net, &gamma, NumericMode::Float).unwrap();
        assert!(!float.exact);
        assert!(rat_to_f64(&exact.total_variation(&float)) < 1e-12);
    }

    #[test]
    fn reduced_stationary_t2() {
        let sys = exp1_reduced();
        let gamma = irreducible_component(
            &sys,
            &st(&[2, 0]),
            &Bound::Linear {
                weights: vec![1, 1],
                max: 2,
            },
        )
        .unwrap();
        let pi = stationary_distribution(&sys, &gamma, NumericMode::Rational).unwrap();
        assert_eq!(pi.probabilities, vec![ratio(1, 16), ratio(3, 8), ratio(9, 16)]);
        assert_eq!(pi.states[2], st(&[2, 0]));
    }

    #[test]
    fn single_state_is_point_mass() {
        let net = parse_network("species A, B\nA -> B : k=1").unwrap().network;
        let gamma = explore(&net, &st(&[0, 3]), &Bound::Box(vec![3, 3]), 10).unwrap();
        assert_eq!(gamma.len(), 1);
        let pi = stationary_distribution(&net, &gamma, NumericMode::Rational).unwrap();
        assert_eq!(pi.probabilities, vec![Rat::one()]);
    }

    #[test]
    fn not_closed_is_reported() {
        let net = fixtures::exp1().network;
        let partial = ComponentSet::from_states(vec![st(&[1, 0, 0]), st(&[0, 0, 1])]);
        assert!(matches!(
            stationary_distribution(&net, &partial, NumericMode::Rational),
            Err(MarkovError::NotClosed { .. })
        ));
    }

    #[test]
    fn uniform_is_not_stationary() {
        let (net, gamma) = exp1_component(2);
        let uniform = Distribution::from_weights(gamma.states.clone(), vec![Rat::one(); gamma.len()]);
        assert!(check_stationary(&net, &gamma, &uniform).unwrap().is_positive());
    }

    #[test]
    fn balance_hierarchy_on_exp1() {
        let (net, gamma) = exp1_component(3);
        let pi = stationary_distribution(&net, &gamma, NumericMode::Rational).unwrap();
        assert!(max_residual(&check_detailed_balance(&net, &gamma, &pi).unwrap()).is_zero());
        assert!(max_residual(&check_complex_balance(&net, &gamma, &pi).unwrap()).is_zero());
    }

    #[test]
    fn counterexample_detailed_balance_on_interior() {
        let net = fixtures::exp_count().network;
        let pi = |x: &State| -> Rat {
            if x.is_zero() {
                Rat::zero()
            } else {
                Rat::new(1.into(), BigInt::from(3) << (x[0] + x[1]) as usize)
            }
        };
        for a in 0..12u64 {
            for u in 0..12u64 {
                let x = st(&[a, u]);
                for r in 0..4 {
                    assert!(detailed_residual_at(&net, &pi, r, &x).unwrap().is_zero());
                }
                for eta in net.complexes() {
                    assert!(complex_residual_at(&net, &pi, &eta, &x).unwrap().is_zero());
                }
                if !x.is_zero() {
                    assert!(master_residual_at(&net, &pi, &x).unwrap().is_zero());
                }
            }
        }
    }

    #[test]
    fn asymmetric_cycle_is_stationary_but_not_complex_balanced() {
        // One molecule cycling A -> B -> C -> A, plus a chord A -> C.
        let net = parse_network("A -> B : k=1\nB -> C : k=2\nC -> A : k=3\nA -> C : k=1").unwrap().network;
        let gamma = irreducible_component(&net, &st(&[1, 0, 0]), &Bound::Box(vec![1, 1, 1])).unwrap();
        let pi = stationary_distribution(&net, &gamma, NumericMode::Rational).unwrap();
        assert!(check_stationary(&net, &gamma, &pi).unwrap().is_zero());
        assert!(max_residual(&check_complex_balance(&net, &gamma, &pi).unwrap()).is_zero());
        // A one-way bimolecular shortcut has outflow but no inflow at 2A.
        let net = parse_network("A -> B : k=1\nB -> C : k=2\nC -> A : k=3\n2A -> 2C : k=1").unwrap().network;
        let gamma = irreducible_component(&net, &st(&[2, 0, 0]), &Bound::Box(vec![2, 2, 2])).unwrap();
        let pi = stationary_distribution(&net, &gamma, NumericMode::Rational).unwrap();
        assert!(check_stationary(&net, &gamma, &pi).unwrap().is_zero());
        assert!(max_residual(&check_complex_balance(&net, &gamma, &pi).unwrap()).is_positive());
    }

    #[test]
    fn detailed_balance_mismatch_and_irreversible() {
        let net = parse_network("A -> B : k=1\nB -> A : k=2").unwrap().network;
        let gamma = irreducible_component(&net, &st(&[1, 0]), &Bound::Box(vec![1, 1])).unwrap();
        let uniform = Distribution::from_weights(gamma.states.clone(), vec![Rat::one(); 2]);
        assert!(max_residual(&check_detailed_balance(&net, &gamma, &uniform).unwrap()).is_positive());
        let irr = fixtures::enzyme().network;
        assert!(matches!(
            check_detailed_balance(&irr, &gamma, &uniform),
            Err(MarkovError::NotReversible(_))
        ));
    }

    #[test]
    fn deterministic_complex_balance() {
        let net = fixtures::exp1().network;
        let res = verify_deterministic_complex_balance(&net, &[rat(6), rat(2), rat(3)]).unwrap();
        assert_eq!(res.len(), 3);
        assert!(res.iter().all(|(_, r)| r.is_zero()));
        let ones = verify_deterministic_complex_balance(&net, &[rat(1), rat(1), rat(1)]).unwrap();
        assert!(ones.iter().any(|(_, r)| !r.is_zero()));
        let pair = parse_network("2A -> B : k=3\nB -> 2A : k=12").unwrap().network;
        let res = verify_deterministic_complex_balance(&pair, &[rat(2), rat(1)]).unwrap();
        assert!(res.iter().all(|(_, r)| r.is_zero()));
    }

    #[test]
    fn equilibrium_search_finds_verified_point() {
        let net = fixtures::exp1().network;
        let c = find_complex_balanced_equilibrium(&net, 5000).unwrap();
        let res = verify_deterministic_complex_balance(&net, &c).unwrap();
        assert!(res.iter().all(|(_, r)| r.is_zero()));
        assert_eq!(&c[0] / &c[2], rat(2));
        let rev = fixtures::enzyme_rev().network;
        assert!(find_complex_balanced_equilibrium(&rev, 5000).is_some());
        assert!(find_complex_balanced_equilibrium(&fixtures::exp_count().network, 10).is_none());
    }

    #[test]
    fn conditional_slices() {
        let (net, gamma) = exp1_component(2);
        let pi = stationary_distribution(&net, &gamma, NumericMode::Rational).unwrap();
        let cond = conditional_distribution(&pi, |s| s[2] == 0).unwrap();
        assert_eq!(cond.get(&st(&[2, 0, 0])), ratio(9, 16));
        assert_eq!(cond.get(&st(&[1, 1, 0])), ratio(3, 8));
        assert_eq!(cond.get(&st(&[0, 2, 0])), ratio(1, 16));
        let same = conditional_distribution(&pi, |_| true).unwrap();
        assert_eq!(same.probabilities, pi.probabilities);
        assert_eq!(conditional_distribution(&pi, |s| s.total() > 5), Err(MarkovError::EmptySlice));
    }

    #[test]
    fn reduced_slices_decompose() {
        let sys = exp1_reduced();
        let slice = ComponentSet::from_states(vec![st(&[2, 0]), st(&[1, 1]), st(&[0, 2])]);
        let parts = decompose_reduced_component(&sys, &slice).unwrap();
        assert_eq!(parts.len(), 1);
        assert!(parts[0].closed);
        let empty = parse_network("species A, B\nA -> B : k=1").unwrap().network;
        let parts = decompose_reduced_component(&empty, &ComponentSet::from_states(vec![st(&[0, 0]), st(&[0, 1])])).unwrap();
        assert_eq!(parts.len(), 2);
    }
}
