//! Species, complexes, reactions, kinetics and states.

use std::collections::HashSet;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::expr::{Expr, ExprError};
use crate::num::{falling_factorial, format_rat, Rat};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("species name `{0}` is declared twice")]
    DuplicateSpecies(String),
    #[error("species name must be nonempty")]
    EmptySpeciesName,
    #[error("reaction {reaction}: complex has {got} entries, network has {expected} species")]
    DimensionMismatch {
        reaction: usize,
        expected: usize,
        got: usize,
    },
    #[error("mass-action rate of reaction {reaction} must be positive, got {rate}")]
    NonPositiveRate { reaction: usize, rate: String },
    #[error("reaction index {0} out of range")]
    UnknownReaction(usize),
    #[error("state has {got} entries, network has {expected} species")]
    StateDimension { expected: usize, got: usize },
    #[error("rate expression of reaction {reaction} failed at {state}: {source}")]
    ExprEvaluation {
        reaction: usize,
        state: State,
        source: ExprError,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Species {
    pub id: usize,
    pub name: String,
}

macro_rules! count_vector {
    ($name:ident) => {
        #[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
        #[serde(transparent)]
        pub struct $name(Vec<u64>);

        impl $name {
            pub fn new(counts: Vec<u64>) -> Self {
                Self(counts)
            }

            pub fn zeros(n: usize) -> Self {
                Self(vec![0; n])
            }

            pub fn as_slice(&self) -> &[u64] {
                &self.0
            }

            pub fn into_vec(self) -> Vec<u64> {
                self.0
            }

            pub fn len(&self) -> usize {
                self.0.len()
            }

            pub fn is_empty(&self) -> bool {
                self.0.is_empty()
            }

            pub fn is_zero(&self) -> bool {
                self.0.iter().all(|&c| c == 0)
            }

            pub fn total(&self) -> u64 {
                self.0.iter().sum()
            }

            /// Componentwise `self >= other`.
            pub fn dominates(&self, other: &[u64]) -> bool {
                self.0.len() == other.len() && self.0.iter().zip(other).all(|(a, b)| a >= b)
            }

            /// `self + delta` when it stays in the nonnegative orthant.
            pub fn shifted(&self, delta: &[i64]) -> Option<Self> {
                if delta.len() != self.0.len() {
                    return None;
                }
                self.0
                    .iter()
                    .zip(delta)
                    .map(|(&c, &d)| {
                        let v = c as i64 + d;
                        (v >= 0).then_some(v as u64)
                    })
                    .collect::<Option<Vec<_>>>()
                    .map(Self)
            }
        }

        impl std::ops::Index<usize> for $name {
            type Output = u64;
            fn index(&self, i: usize) -> &u64 {
                &self.0[i]
            }
        }

        impl From<Vec<u64>> for $name {
            fn from(v: Vec<u64>) -> Self {
                Self(v)
            }
        }

        impl fmt::Debug for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{:?}", self.0)
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "(")?;
                for (k, c) in self.0.iter().enumerate() {
                    if k > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{c}")?;
                }
                write!(f, ")")
            }
        }
    };
}

count_vector!(Complex);
count_vector!(State);

impl Complex {
    /// Render as a chemical sum over `names` with species sorted
    /// alphabetically, `0` for the zero complex.
    pub fn format_with(&self, names: &[String]) -> String {
        self.render(names, true)
    }

    /// Like [`Complex::format_with`] but in species declaration order.
    pub fn format_declared(&self, names: &[String]) -> String {
        self.render(names, false)
    }

    fn render(&self, names: &[String], sorted: bool) -> String {
        let mut terms: Vec<(&str, u64)> = self
            .0
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(i, &c)| (names[i].as_str(), c))
            .collect();
        if terms.is_empty() {
            return "0".to_string();
        }
        if sorted {
            terms.sort_by(|a, b| a.0.cmp(b.0));
        }
        terms
            .iter()
            .map(|(name, c)| {
                if *c == 1 {
                    name.to_string()
                } else {
                    format!("{c} {name}")
                }
            })
            .collect::<Vec<_>>()
            .join(" + ")
    }
}

impl From<&Complex> for State {
    fn from(c: &Complex) -> Self {
        State(c.0.clone())
    }
}

impl From<&State> for Complex {
    fn from(s: &State) -> Self {
        Complex(s.0.clone())
    }
}

/// Rate law of a single reaction.
#[derive(Debug, Clone, PartialEq)]
pub enum Kinetics {
    /// `κ x!/(x-y)!` for reactant `y`.
    MassAction(Rat),
    /// User-supplied closed form; forced to zero when `x` does not cover the
    /// reactant.
    Expr(Expr),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Reaction {
    pub reactant: Complex,
    pub product: Complex,
    pub kinetics: Kinetics,
}

impl Reaction {
    pub fn new(reactant: Complex, product: Complex, kinetics: Kinetics) -> Self {
        Self {
            reactant,
            product,
            kinetics,
        }
    }

    pub fn mass_action(reactant: Vec<u64>, product: Vec<u64>, rate: Rat) -> Self {
        Self::new(reactant.into(), product.into(), Kinetics::MassAction(rate))
    }

    /// `product - reactant`.
    pub fn reaction_vector(&self) -> Vec<i64> {
        reaction_vector(&self.reactant, &self.product)
    }
}

/// Componentwise `product - reactant`.
pub fn reaction_vector(reactant: &Complex, product: &Complex) -> Vec<i64> {
    reactant
        .as_slice()
        .iter()
        .zip(product.as_slice())
        .map(|(&y, &yp)| yp as i64 - y as i64)
        .collect()
}

/// Structural problems reported by [`Network::validate`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    UnusedSpecies { species: String },
    SelfLoopReaction { reaction: usize },
    /// Rate positive outside `x >= reactant`, or zero inside it.
    Incompatible {
        reaction: usize,
        state: Vec<u64>,
        rate: String,
    },
    BadExpression {
        reaction: usize,
        state: Vec<u64>,
        message: String,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    species: Vec<Species>,
    names: Vec<String>,
    reactions: Vec<Reaction>,
}

impl Network {
    pub fn new(species_names: Vec<String>, reactions: Vec<Reaction>) -> Result<Self, ModelError> {
        let mut seen = HashSet::new();
        for name in &species_names {
            if name.is_empty() {
                return Err(ModelError::EmptySpeciesName);
            }
            if !seen.insert(name.as_str()) {
                return Err(ModelError::DuplicateSpecies(name.clone()));
            }
        }
        let n = species_names.len();
        for (k, r) in reactions.iter().enumerate() {
            for c in [&r.reactant, &r.product] {
                if c.len() != n {
                    return Err(ModelError::DimensionMismatch {
                        reaction: k,
                        expected: n,
                        got: c.len(),
                    });
                }
            }
            if let Kinetics::MassAction(rate) = &r.kinetics {
                if !rate.is_positive() {
                    return Err(ModelError::NonPositiveRate {
                        reaction: k,
                        rate: format_rat(rate),
                    });
                }
            }
        }
        let species = species_names
            .iter()
            .enumerate()
            .map(|(id, name)| Species {
                id,
                name: name.clone(),
            })
            .collect();
        Ok(Self {
            species,
            names: species_names,
            reactions,
        })
    }

    pub fn species(&self) -> &[Species] {
        &self.species
    }

    pub fn species_names(&self) -> &[String] {
        &self.names
    }

    pub fn species_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn reactions(&self) -> &[Reaction] {
        &self.reactions
    }

    pub fn reaction(&self, r: usize) -> Option<&Reaction> {
        self.reactions.get(r)
    }

    pub fn dim(&self) -> usize {
        self.names.len()
    }

    /// Distinct complexes in order of first appearance (reactant first).
    pub fn complexes(&self) -> Vec<Complex> {
        let mut out: Vec<Complex> = Vec::new();
        for r in &self.reactions {
            for c in [&r.reactant, &r.product] {
                if !out.contains(c) {
                    out.push(c.clone());
                }
            }
        }
        out
    }

    pub fn is_mass_action(&self) -> bool {
        self.reactions
            .iter()
            .all(|r| matches!(r.kinetics, Kinetics::MassAction(_)))
    }

    /// Index of the reaction `product -> reactant` of reaction `r`, if any.
    pub fn reverse_of(&self, r: usize) -> Option<usize> {
        let fwd = self.reactions.get(r)?;
        self.reactions
            .iter()
            .position(|q| q.reactant == fwd.product && q.product == fwd.reactant)
    }

    pub fn is_reversible(&self) -> bool {
        (0..self.reactions.len()).all(|r| self.reverse_of(r).is_some())
    }

    /// Intensity `λ_r(x)`: zero unless `x` covers the reactant.
    pub fn eval_intensity(&self, r: usize, x: &State) -> Result<Rat, ModelError> {
        let reaction = self.reactions.get(r).ok_or(ModelError::UnknownReaction(r))?;
        if x.len() != self.dim() {
            return Err(ModelError::StateDimension {
                expected: self.dim(),
                got: x.len(),
            });
        }
        if !x.dominates(reaction.reactant.as_slice()) {
            return Ok(Rat::zero());
        }
        match &reaction.kinetics {
            Kinetics::MassAction(kappa) => {
                let mut prod = BigInt::from(1);
                for (&xi, &yi) in x.as_slice().iter().zip(reaction.reactant.as_slice()) {
                    if yi > 0 {
                        prod *= falling_factorial(xi, yi);
                    }
                }
                Ok(kappa * Rat::from_integer(prod))
            }
            Kinetics::Expr(expr) => {
                let value = expr
                    .eval(x.as_slice())
                    .map_err(|source| ModelError::ExprEvaluation {
                        reaction: r,
                        state: x.clone(),
                        source,
                    })?;
                if value.is_negative() {
                    return Err(ModelError::ExprEvaluation {
                        reaction: r,
                        state: x.clone(),
                        source: ExprError::Negative(format_rat(&value)),
                    });
                }
                Ok(value)
            }
        }
    }

    /// Coverage and self-loop checks.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        for (i, name) in self.names.iter().enumerate() {
            let used = self
                .reactions
                .iter()
                .any(|r| r.reactant[i] > 0 || r.product[i] > 0);
            if !used {
                out.push(Violation::UnusedSpecies {
                    species: name.clone(),
                });
            }
        }
        for (k, r) in self.reactions.iter().enumerate() {
            if r.reactant == r.product {
                out.push(Violation::SelfLoopReaction { reaction: k });
            }
        }
        out
    }

    /// Check `λ_r(x) > 0 ⟺ x >= reactant` for expression kinetics on every
    /// state of the box `[0, bound_i]`. Mass-action satisfies it by form.
    pub fn check_compatibility(&self, bound: &[u64]) -> Vec<Violation> {
        let mut out = Vec::new();
        let expr_reactions: Vec<usize> = (0..self.reactions.len())
            .filter(|&r| matches!(self.reactions[r].kinetics, Kinetics::Expr(_)))
            .collect();
        if expr_reactions.is_empty() || bound.len() != self.dim() {
            return out;
        }
        for x in box_states(bound) {
            for &r in &expr_reactions {
                let reaction = &self.reactions[r];
                let Kinetics::Expr(expr) = &reaction.kinetics else {
                    continue;
                };
                match expr.eval(x.as_slice()) {
                    Ok(v) => {
                        let covers = x.dominates(reaction.reactant.as_slice());
                        if v.is_negative() || (covers != v.is_positive()) {
                            out.push(Violation::Incompatible {
                                reaction: r,
                                state: x.as_slice().to_vec(),
                                rate: format_rat(&v),
                            });
                        }
                    }
                    Err(e) => {
                        if x.dominates(reaction.reactant.as_slice()) {
                            out.push(Violation::BadExpression {
                                reaction: r,
                                state: x.as_slice().to_vec(),
                                message: e.to_string(),
                            });
                        }
                    }
                }
            }
        }
        out
    }
}

/// All states of the box `[0, bound_0] x ... x [0, bound_{n-1}]`.
pub fn box_states(bound: &[u64]) -> impl Iterator<Item = State> + '_ {
    let total: u64 = bound.iter().map(|&b| b + 1).product();
    (0..total).map(move |mut k| {
        let mut v = Vec::with_capacity(bound.len());
        for &b in bound {
            v.push(k % (b + 1));
            k /= b + 1;
        }
        State::new(v)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::{rat, ratio};

    fn exp1() -> Network {
        // species A, B, U
        Network::new(
            vec!["A".into(), "B".into(), "U".into()],
            vec![
                Reaction::mass_action(vec![1, 0, 0], vec![0, 0, 1], rat(1)),
                Reaction::mass_action(vec![0, 0, 1], vec![1, 0, 0], rat(2)),
                Reaction::mass_action(vec![0, 0, 1], vec![0, 1, 0], rat(2)),
                Reaction::mass_action(vec![0, 1, 0], vec![0, 0, 1], rat(3)),
            ],
        )
        .unwrap()
    }

    #[test]
    fn complex_rendering_orders() {
        let names: Vec<String> = ["E", "A", "B"].iter().map(|s| s.to_string()).collect();
        let c = Complex::new(vec![1, 2, 1]);
        assert_eq!(c.format_with(&names), "2 A + B + E");
        assert_eq!(c.format_declared(&names), "E + 2 A + B");
        assert_eq!(Complex::zeros(3).format_declared(&names), "0");
    }

    #[test]
    fn mass_action_intensity() {
        let net = exp1();
        assert_eq!(net.eval_intensity(0, &State::new(vec![3, 0, 0])).unwrap(), rat(3));
        assert_eq!(net.eval_intensity(1, &State::new(vec![0, 0, 0])).unwrap(), rat(0));
        assert_eq!(net.eval_intensity(3, &State::new(vec![0, 2, 0])).unwrap(), rat(6));
    }

    #[test]
    fn higher_order_mass_action() {
        let net = Network::new(
            vec!["X".into()],
            vec![Reaction::mass_action(vec![2], vec![0], ratio(1, 2))],
        )
        .unwrap();
        // (1/2) * 4 * 3
        assert_eq!(net.eval_intensity(0, &State::new(vec![4])).unwrap(), rat(6));
        assert_eq!(net.eval_intensity(0, &State::new(vec![1])).unwrap(), rat(0));
    }

    #[test]
    fn reaction_vectors() {
        let net = exp1();
        assert_eq!(net.reactions()[0].reaction_vector(), vec![-1, 0, 1]);
        let c = Complex::new(vec![1, 2]);
        assert_eq!(reaction_vector(&c, &c), vec![0, 0]);
    }

    #[test]
    fn validation_reports_problems() {
        assert!(exp1().validate().is_empty());
        let net = Network::new(
            vec!["A".into(), "Z".into()],
            vec![
                Reaction::mass_action(vec![1, 0], vec![0, 0], rat(1)),
                Reaction::mass_action(vec![1, 0], vec![1, 0], rat(1)),
            ],
        )
        .unwrap();
        let v = net.validate();
        assert!(v.contains(&Violation::UnusedSpecies {
            species: "Z".into()
        }));
        assert!(v.contains(&Violation::SelfLoopReaction { reaction: 1 }));
    }

    #[test]
    fn rejects_bad_construction() {
        assert_eq!(
            Network::new(vec!["A".into(), "A".into()], vec![]),
            Err(ModelError::DuplicateSpecies("A".into()))
        );
        assert!(matches!(
            Network::new(
                vec!["A".into()],
                vec![Reaction::mass_action(vec![1], vec![0], rat(0))]
            ),
            Err(ModelError::NonPositiveRate { .. })
        ));
    }

    #[test]
    fn complex_formatting() {
        let names: Vec<String> = vec!["E".into(), "A".into(), "B".into()];
        assert_eq!(Complex::new(vec![1, 1, 2]).format_with(&names), "A + 2 B + E");
        assert_eq!(Complex::zeros(3).format_with(&names), "0");
    }

    #[test]
    fn box_enumeration() {
        let states: Vec<State> = box_states(&[1, 2]).collect();
        assert_eq!(states.len(), 6);
        assert!(states.contains(&State::new(vec![1, 2])));
    }
}
