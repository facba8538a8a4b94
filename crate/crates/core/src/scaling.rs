//! One-parameter scaled kinetics `N^{⟨β,ρ(y)⟩} λ_{y→y'}`, the scaled
//! distributions and their limit on the minimizing slice.

use num_traits::{One, Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::expr::Expr;
use crate::markov::{conditional_distribution, Distribution, MarkovError};
use crate::model::{Kinetics, ModelError, Network, Reaction, State};
use crate::num::{format_rat, int_pow_rational, rat_to_f64, Rat};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScalingError {
    #[error("N must be at least 1")]
    ZeroN,
    #[error("beta has {got} entries for {expected} scaled species")]
    BetaLength { expected: usize, got: usize },
    #[error("beta entries must be positive, got {0}")]
    NonPositiveBeta(String),
    #[error("{n}^{exponent} is irrational")]
    Irrational { n: u64, exponent: String },
    #[error("N values must be strictly increasing")]
    NotIncreasing,
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Markov(#[from] MarkovError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingSpec {
    /// One positive entry per species of `u`.
    pub beta: Vec<Rat>,
    pub n: u64,
}

impl ScalingSpec {
    pub fn new(beta: Vec<Rat>, n: u64) -> Result<Self, ScalingError> {
        if n == 0 {
            return Err(ScalingError::ZeroN);
        }
        check_beta(&beta)?;
        Ok(Self { beta, n })
    }
}

fn check_beta(beta: &[Rat]) -> Result<(), ScalingError> {
    match beta.iter().find(|b| !b.is_positive()) {
        Some(b) => Err(ScalingError::NonPositiveBeta(format_rat(b))),
        None => Ok(()),
    }
}

/// `⟨β, ρ(x)⟩`.
pub fn exponent(x: &[u64], u: &[usize], beta: &[Rat]) -> Rat {
    u.iter()
        .zip(beta)
        .map(|(&s, b)| b * Rat::from_integer(x[s].into()))
        .sum()
}

/// `N^e` for rational `e`, when rational.
pub fn power(n: u64, e: &Rat) -> Result<Rat, ScalingError> {
    int_pow_rational(n, e).ok_or_else(|| ScalingError::Irrational {
        n,
        exponent: format_rat(e),
    })
}

/// Multiply each reaction's intensity by `N^{⟨β, ρ(source)⟩}`.
pub fn scale_kinetics(net: &Network, u: &[usize], spec: &ScalingSpec) -> Result<Network, ScalingError> {
    if spec.beta.len() != u.len() {
        return Err(ScalingError::BetaLength {
            expected: u.len(),
            got: spec.beta.len(),
        });
    }
    let mut reactions = Vec::with_capacity(net.reactions().len());
    for r in net.reactions() {
        let e = exponent(r.reactant.as_slice(), u, &spec.beta);
        let factor = power(spec.n, &e)?;
        let kinetics = if factor.is_one() {
            r.kinetics.clone()
        } else {
            match &r.kinetics {
                Kinetics::MassAction(k) => Kinetics::MassAction(k * &factor),
                Kinetics::Expr(ex) => Kinetics::Expr(Expr::Mul(
                    Box::new(Expr::Const(factor)),
                    Box::new(ex.clone()),
                )),
            }
        };
        reactions.push(Reaction::new(r.reactant.clone(), r.product.clone(), kinetics));
    }
    Ok(Network::new(net.species_names().to_vec(), reactions)?)
}

/// `π_N^β(x) ∝ N^{−⟨β,ρ(x)⟩} π(x)`; the returned normalization is
/// `M_N^β = Σ_x N^{−⟨β,ρ(x)⟩} π(x)`.
pub fn scaled_distribution(pi: &Distribution, u: &[usize], spec: &ScalingSpec) -> Result<Distribution, ScalingError> {
    let mut weights = Vec::with_capacity(pi.len());
    for (x, p) in pi.states.iter().zip(&pi.probabilities) {
        let e = exponent(x.as_slice(), u, &spec.beta);
        weights.push(p / power(spec.n, &e)?);
    }
    let total: Rat = weights.iter().sum();
    let mut d = Distribution::from_weights(pi.states.clone(), weights);
    d.exact = pi.exact;
    d.normalization = Some(total / pi.total());
    Ok(d)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LimitSupport {
    pub gamma0: Rat,
    /// Indices into the state list that attain the minimum.
    pub argmin: Vec<usize>,
    /// Smallest positive gap `⟨β,ρ(x)⟩ − γ₀`, if any state is off the slice.
    pub gap: Option<Rat>,
}

pub fn limit_support(states: &[State], u: &[usize], beta: &[Rat]) -> Result<LimitSupport, ScalingError> {
    check_beta(beta)?;
    let values: Vec<Rat> = states.iter().map(|x| exponent(x.as_slice(), u, beta)).collect();
    let gamma0 = values.iter().min().cloned().unwrap_or_else(Rat::zero);
    let argmin = (0..states.len()).filter(|&i| values[i] == gamma0).collect();
    let gap = values.iter().map(|v| v - &gamma0).filter(|d| d.is_positive()).min();
    Ok(LimitSupport { gamma0, argmin, gap })
}

/// `π(x)/π(Γ₀^β)` on the minimizing slice.
pub fn limit_distribution(pi: &Distribution, u: &[usize], beta: &[Rat]) -> Result<Distribution, ScalingError> {
    let support = limit_support(&pi.states, u, beta)?;
    let keep: std::collections::HashSet<&State> = support.argmin.iter().map(|&i| &pi.states[i]).collect();
    Ok(conditional_distribution(pi, |s| keep.contains(s))?)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub n: u64,
    #[serde(serialize_with = "crate::num::serde_rat::serialize")]
    pub tv: Rat,
    pub tv_float: f64,
    /// `TV(previous N) / TV(N)`.
    pub ratio: Option<f64>,
}

/// Total variation between `π_N^β` and the limit for each `N`.
pub fn convergence_table(
    pi: &Distribution,
    u: &[usize],
    beta: &[Rat],
    ns: &[u64],
) -> Result<Vec<ConvergenceRow>, ScalingError> {
    if ns.windows(2).any(|w| w[0] >= w[1]) {
        return Err(ScalingError::NotIncreasing);
    }
    let limit = limit_distribution(pi, u, beta)?;
    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(ns.len());
    for &n in ns {
        let scaled = scaled_distribution(pi, u, &ScalingSpec::new(beta.to_vec(), n)?)?;
        let tv = scaled.total_variation(&limit);
        let tv_float = rat_to_f64(&tv);
        let ratio = rows.last().map(|prev| prev.tv_float / tv_float);
        rows.push(ConvergenceRow { n, tv, tv_float, ratio });
    }
    Ok(rows)
}
