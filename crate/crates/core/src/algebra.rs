//! Reaction pairs, the ⊕ sum, walk sums and reachability.

use std::collections::{HashSet, VecDeque};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::model::{reaction_vector, Complex, Network, Reaction, State};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AlgebraError {
    #[error("cannot fold an empty sequence of reaction pairs")]
    EmptySequence,
    #[error("walk is inconsistent at step {step}: {reason}")]
    InconsistentWalk { step: usize, reason: String },
    #[error("reachability undecided after expanding {expanded} states")]
    CapExceeded { expanded: usize },
}

/// An element of N^n x N^n: what is consumed and what is left after a
/// sequence of firings.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct ReactionPair {
    pub need: Complex,
    pub result: Complex,
}

impl ReactionPair {
    pub fn new(need: Complex, result: Complex) -> Self {
        debug_assert_eq!(need.len(), result.len());
        Self { need, result }
    }

    pub fn from_reaction(r: &Reaction) -> Self {
        Self::new(r.reactant.clone(), r.product.clone())
    }

    pub fn zero(n: usize) -> Self {
        Self::new(Complex::zeros(n), Complex::zeros(n))
    }

    pub fn len(&self) -> usize {
        self.need.len()
    }

    pub fn is_empty(&self) -> bool {
        self.need.is_empty()
    }

    /// `result - need`.
    pub fn zeta(&self) -> Vec<i64> {
        reaction_vector(&self.need, &self.result)
    }

    pub fn is_self_loop(&self) -> bool {
        self.need == self.result
    }

    pub fn format_with(&self, names: &[String]) -> String {
        format!(
            "{} -> {}",
            self.need.format_with(names),
            self.result.format_with(names)
        )
    }
}

impl fmt::Debug for ReactionPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} -> {})", self.need, self.result)
    }
}

/// `(y1, y1') ⊕ (y2, y2') = (y1 + (y2 - y1')⁺, y2' + (y1' - y2)⁺)`.
pub fn oplus(p: &ReactionPair, q: &ReactionPair) -> ReactionPair {
    let n = p.len();
    let mut need = Vec::with_capacity(n);
    let mut result = Vec::with_capacity(n);
    for i in 0..n {
        let (y1, y1p) = (p.need[i], p.result[i]);
        let (y2, y2p) = (q.need[i], q.result[i]);
        need.push(y1 + y2.saturating_sub(y1p));
        result.push(y2p + y1p.saturating_sub(y2));
    }
    ReactionPair::new(Complex::new(need), Complex::new(result))
}

/// Left fold of [`oplus`].
pub fn oplus_fold<'a, I>(pairs: I) -> Result<ReactionPair, AlgebraError>
where
    I: IntoIterator<Item = &'a ReactionPair>,
{
    let mut it = pairs.into_iter();
    let first = it.next().ok_or(AlgebraError::EmptySequence)?.clone();
    Ok(it.fold(first, |acc, p| oplus(&acc, p)))
}

/// Node of a complex in the elimination multigraph: 0 for `U0` (no
/// non-interacting molecule), `k + 1` when it holds exactly one `u[k]`.
/// `None` when the complex holds more than one such molecule.
pub fn node_of(c: &Complex, u: &[usize]) -> Option<usize> {
    let mut node = 0;
    let mut total = 0;
    for (k, &s) in u.iter().enumerate() {
        total += c[s];
        if c[s] > 0 {
            node = k + 1;
        }
    }
    match total {
        0 => Some(0),
        1 => Some(node),
        _ => None,
    }
}

/// A walk in the elimination multigraph: `nodes[k] -edges[k]-> nodes[k+1]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Walk {
    pub nodes: Vec<usize>,
    pub edges: Vec<usize>,
}

impl Walk {
    pub fn is_closed(&self) -> bool {
        self.nodes.first() == self.nodes.last()
    }

    /// Build a walk from reaction ids, deriving the nodes.
    pub fn from_edges(net: &Network, u: &[usize], edges: Vec<usize>) -> Result<Self, AlgebraError> {
        let mut nodes = Vec::with_capacity(edges.len() + 1);
        for (step, &r) in edges.iter().enumerate() {
            let reaction = net.reaction(r).ok_or_else(|| AlgebraError::InconsistentWalk {
                step,
                reason: format!("unknown reaction {r}"),
            })?;
            let from = node_of(&reaction.reactant, u);
            let to = node_of(&reaction.product, u);
            let (Some(from), Some(to)) = (from, to) else {
                return Err(AlgebraError::InconsistentWalk {
                    step,
                    reason: "reaction is not non-interacting".into(),
                });
            };
            if step == 0 {
                nodes.push(from);
            }
            nodes.push(to);
        }
        let walk = Self { nodes, edges };
        walk.check(net, u)?;
        Ok(walk)
    }

    fn check(&self, net: &Network, u: &[usize]) -> Result<(), AlgebraError> {
        if self.edges.is_empty() || self.nodes.len() != self.edges.len() + 1 {
            return Err(AlgebraError::InconsistentWalk {
                step: 0,
                reason: "walk needs at least one edge and one more node than edges".into(),
            });
        }
        for (step, &r) in self.edges.iter().enumerate() {
            let reaction = net.reaction(r).ok_or_else(|| AlgebraError::InconsistentWalk {
                step,
                reason: format!("unknown reaction {r}"),
            })?;
            let from = node_of(&reaction.reactant, u);
            let to = node_of(&reaction.product, u);
            if from != Some(self.nodes[step]) || to != Some(self.nodes[step + 1]) {
                return Err(AlgebraError::InconsistentWalk {
                    step,
                    reason: format!(
                        "reaction {r} does not join node {} to node {}",
                        self.nodes[step],
                        self.nodes[step + 1]
                    ),
                });
            }
        }
        Ok(())
    }
}

/// `r_1 ⊕ ... ⊕ r_q` along a walk.
pub fn walk_sum(net: &Network, u: &[usize], walk: &Walk) -> Result<ReactionPair, AlgebraError> {
    walk.check(net, u)?;
    let pairs: Vec<ReactionPair> = walk
        .edges
        .iter()
        .map(|&r| ReactionPair::from_reaction(&net.reactions()[r]))
        .collect();
    oplus_fold(&pairs)
}

/// Whether `z` is reachable from `x` by single firings, by breadth-first
/// search expanding at most `cap` states.
pub fn leads_to(net: &Network, x: &State, z: &State, cap: usize) -> Result<bool, AlgebraError> {
    if x == z {
        return Ok(true);
    }
    let zetas: Vec<Vec<i64>> = net.reactions().iter().map(Reaction::reaction_vector).collect();
    let mut seen = HashSet::from([x.clone()]);
    let mut queue = VecDeque::from([x.clone()]);
    let mut expanded = 0;
    while let Some(s) = queue.pop_front() {
        if expanded >= cap {
            return Err(AlgebraError::CapExceeded { expanded });
        }
        expanded += 1;
        for (r, reaction) in net.reactions().iter().enumerate() {
            if !s.dominates(reaction.reactant.as_slice()) {
                continue;
            }
            let Some(next) = s.shifted(&zetas[r]) else {
                continue;
            };
            if &next == z {
                return Ok(true);
            }
            if seen.insert(next.clone()) {
                queue.push_back(next);
            }
        }
    }
    Ok(false)
}
