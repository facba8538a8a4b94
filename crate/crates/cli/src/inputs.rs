//! Reading network files and parsing command-line values.

use std::path::Path;

use crn_core::elimination::{species_set, ElimError};
use crn_core::kinetics::KineticsError;
use crn_core::markov::{Bound, MarkovError};
use crn_core::model::State;
use crn_core::netparse::{parse_network, NetworkDocument};
use crn_core::num::{parse_rat, rat, Rat};
use crn_core::scaling::ScalingError;
use crn_core::simulate::SimError;

use crate::{Failure, SetArgs};

pub fn load(path: &Path) -> Result<NetworkDocument, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::new(2, format!("cannot read {}: {e}", path.display())))?;
    parse_network(&text).map_err(|e| Failure::validation(format!("{}:{e}", path.display())))
}

fn split_list(text: &str) -> impl Iterator<Item = &str> {
    text.split(',').map(str::trim).filter(|s| !s.is_empty())
}

/// `A=2,B=0` (missing species are 0) or a plain list `2,0`.
pub fn parse_state(text: &str, names: &[String]) -> Result<State, Failure> {
    let bad = |what: &str| Failure::validation(format!("bad state `{text}`: {what}"));
    let items: Vec<&str> = split_list(text).collect();
    if items.iter().any(|s| s.contains('=')) {
        let mut x = vec![0u64; names.len()];
        for item in items {
            let (name, value) = item.split_once('=').ok_or_else(|| bad("mixed named and positional entries"))?;
            let i = names
                .iter()
                .position(|n| n == name.trim())
                .ok_or_else(|| bad(&format!("unknown species `{}`", name.trim())))?;
            x[i] = value.trim().parse().map_err(|_| bad("counts must be nonnegative integers"))?;
        }
        return Ok(State::new(x));
    }
    let x: Vec<u64> = items
        .iter()
        .map(|s| s.parse().map_err(|_| bad("counts must be nonnegative integers")))
        .collect::<Result<_, _>>()?;
    if x.len() != names.len() {
        return Err(bad(&format!("expected {} entries", names.len())));
    }
    Ok(State::new(x))
}

fn parse_counts(text: &str) -> Result<Vec<u64>, Failure> {
    split_list(text)
        .map(|s| {
            s.parse()
                .map_err(|_| Failure::validation(format!("`{s}` is not a nonnegative integer")))
        })
        .collect()
}

/// `sum:T`, `box:M`, `box:M1,..,Mn` or `linear:W1,..,Wn:T`. Without a
/// spec the bound is `sum:` of the seed's total count.
pub fn parse_bound(text: Option<&str>, dim: usize, seed: &State) -> Result<Bound, Failure> {
    let Some(text) = text else {
        return Ok(Bound::Linear {
            weights: vec![1; dim],
            max: seed.as_slice().iter().sum(),
        });
    };
    let bad = |what: &str| Failure::validation(format!("bad bound `{text}`: {what}"));
    let (kind, rest) = text.split_once(':').ok_or_else(|| bad("expected kind:values"))?;
    match kind.trim() {
        "sum" => {
            let max = rest.trim().parse().map_err(|_| bad("total must be an integer"))?;
            Ok(Bound::Linear {
                weights: vec![1; dim],
                max,
            })
        }
        "box" => {
            let v = parse_counts(rest)?;
            match v.len() {
                1 => Ok(Bound::Box(vec![v[0]; dim])),
                n if n == dim => Ok(Bound::Box(v)),
                _ => Err(bad(&format!("expected 1 or {dim} maxima"))),
            }
        }
        "linear" => {
            let (w, max) = rest.rsplit_once(':').ok_or_else(|| bad("expected linear:weights:max"))?;
            let weights = parse_counts(w)?;
            if weights.len() != dim {
                return Err(bad(&format!("expected {dim} weights")));
            }
            let max = max.trim().parse().map_err(|_| bad("max must be an integer"))?;
            Ok(Bound::Linear { weights, max })
        }
        other => Err(bad(&format!("unknown kind `{other}`"))),
    }
}

/// Species indices of the eliminated set: `--u`, then `--set`, then a set
/// named `u`, then the first declared set.
pub fn resolve_set(doc: &NetworkDocument, args: &SetArgs) -> Result<Vec<usize>, Failure> {
    let names: Vec<String> = if let Some(list) = &args.u {
        split_list(list).map(String::from).collect()
    } else if let Some(name) = &args.set {
        doc.set(name)
            .ok_or_else(|| Failure::validation(format!("no set named `{name}` in the file")))?
            .species
            .clone()
    } else if let Some(set) = doc.set("u").or_else(|| doc.sets.first()) {
        set.species.clone()
    } else {
        return Err(Failure::validation("no species set given; pass --u or declare a set"));
    };
    species_set(&doc.network, &names).map_err(elim_failure)
}

/// One exponent per species of `u`: `1`, `1,2` or `U=1,V=2`; falls back to
/// the file's scaling block, then to 1.
pub fn parse_beta(text: Option<&str>, doc: &NetworkDocument, u: &[usize]) -> Result<Vec<Rat>, Failure> {
    let names = doc.network.species_names();
    let rat_of = |s: &str| parse_rat(s.trim()).ok_or_else(|| Failure::validation(format!("`{s}` is not a rational number")));
    let by_name = |pairs: Vec<(String, Rat)>| -> Result<Vec<Rat>, Failure> {
        u.iter()
            .map(|&i| {
                pairs
                    .iter()
                    .find(|(n, _)| *n == names[i])
                    .map(|(_, b)| b.clone())
                    .ok_or_else(|| Failure::validation(format!("no exponent for `{}`", names[i])))
            })
            .collect()
    };
    match text {
        Some(t) if t.contains('=') => {
            let pairs = split_list(t)
                .map(|item| {
                    let (n, v) = item
                        .split_once('=')
                        .ok_or_else(|| Failure::validation(format!("bad exponent `{item}`")))?;
                    Ok((n.trim().to_string(), rat_of(v)?))
                })
                .collect::<Result<Vec<_>, Failure>>()?;
            by_name(pairs)
        }
        Some(t) => {
            let v: Vec<Rat> = split_list(t).map(rat_of).collect::<Result<_, _>>()?;
            match v.len() {
                1 => Ok(vec![v[0].clone(); u.len()]),
                n if n == u.len() => Ok(v),
                n => Err(Failure::validation(format!("{n} exponents for {} species", u.len()))),
            }
        }
        None => match &doc.scaling {
            Some(pairs) => by_name(pairs.clone()),
            None => Ok(vec![rat(1); u.len()]),
        },
    }
}

pub fn parse_ns(text: &str) -> Result<Vec<u64>, Failure> {
    parse_counts(text)
}

pub fn species_indices(names: &[String], list: &str) -> Result<Vec<usize>, Failure> {
    split_list(list)
        .map(|s| {
            names
                .iter()
                .position(|n| n == s)
                .ok_or_else(|| Failure::validation(format!("unknown species `{s}`")))
        })
        .collect()
}

pub fn elim_failure(e: ElimError) -> Failure {
    let code = match e {
        ElimError::Condition1Violated { .. } | ElimError::NotEliminable { .. } | ElimError::CapExceeded { .. } => 3,
        _ => 1,
    };
    Failure::new(code, e.to_string())
}

pub fn kinetics_failure(e: KineticsError) -> Failure {
    let code = match e {
        KineticsError::Model(_) | KineticsError::InvalidNode(..) => 1,
        KineticsError::ChainNotFinite { .. } | KineticsError::SingularSystem(_) => 3,
        KineticsError::Inaccurate(_) => 4,
    };
    Failure::new(code, e.to_string())
}

pub fn markov_failure(e: MarkovError) -> Failure {
    match e {
        MarkovError::Kinetics(k) => kinetics_failure(k),
        MarkovError::SeedOutsideBound(_)
        | MarkovError::BoundExceeded { .. }
        | MarkovError::StateCap(_)
        | MarkovError::NotClosed { .. }
        | MarkovError::SingularBeyondNullity
        | MarkovError::NotIrreducible { .. }
        | MarkovError::Inaccurate(_) => Failure::new(4, e.to_string()),
        other => Failure::validation(other.to_string()),
    }
}

pub fn scaling_failure(e: ScalingError) -> Failure {
    match e {
        ScalingError::Markov(m) => markov_failure(m),
        other => Failure::validation(other.to_string()),
    }
}

pub fn sim_failure(e: SimError) -> Failure {
    match e {
        SimError::Kinetics(k) => kinetics_failure(k),
        SimError::ExplosionGuard { .. } => Failure::new(5, e.to_string()),
        other => Failure::validation(other.to_string()),
    }
}
