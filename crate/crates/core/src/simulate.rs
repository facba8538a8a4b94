//! Direct-method (Gillespie) simulation and time-weighted occupation
//! measures.

use std::collections::{BTreeMap, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use serde::Serialize;
use thiserror::Error;

use crate::kinetics::KineticsError;
use crate::markov::Distribution;
use crate::model::State;
use crate::num::rat_to_f64;
use crate::system::ReactionSystem;

/// Default bound on the number of jumps of a single trajectory.
pub const DEFAULT_MAX_JUMPS: usize = 50_000_000;
/// States whose float intensities are kept per trajectory.
const RATE_MEMO_LIMIT: usize = 1 << 16;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error(transparent)]
    Kinetics(#[from] KineticsError),
    #[error("jump cap of {jumps} reached before t = {t_end} (stopped at t = {reached})")]
    ExplosionGuard { jumps: usize, t_end: f64, reached: f64 },
    #[error("initial state has {got} entries, system has {expected} species")]
    Dimension { expected: usize, got: usize },
    #[error("burn-in {burn_in} must be below t_end {t_end}")]
    BurnIn { burn_in: f64, t_end: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    /// `times[0] = 0`; `times[k]` is the time of the k-th jump.
    pub times: Vec<f64>,
    pub states: Vec<State>,
    /// Reaction fired at each jump.
    pub reactions: Vec<usize>,
    pub t_end: f64,
    pub seed: u64,
}

impl Trajectory {
    pub fn jumps(&self) -> usize {
        self.reactions.len()
    }

    pub fn final_state(&self) -> &State {
        self.states.last().expect("trajectory has an initial state")
    }

    /// `time,species...` rows, one per visited state.
    pub fn to_csv(&self, names: &[String]) -> String {
        let mut out = String::from("time");
        for n in names {
            out.push(',');
            out.push_str(n);
        }
        out.push('\n');
        for (t, s) in self.times.iter().zip(&self.states) {
            out.push_str(&t.to_string());
            for v in s.as_slice() {
                out.push(',');
                out.push_str(&v.to_string());
            }
            out.push('\n');
        }
        out
    }
}

/// Simulate on `[0, t_end]` with a seeded ChaCha8 stream.
pub fn gillespie(
    sys: &dyn ReactionSystem,
    x0: &State,
    t_end: f64,
    seed: u64,
    max_jumps: usize,
) -> Result<Trajectory, SimError> {
    if x0.len() != sys.dim() {
        return Err(SimError::Dimension {
            expected: sys.dim(),
            got: x0.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut traj = Trajectory {
        times: vec![0.0],
        states: vec![x0.clone()],
        reactions: Vec::new(),
        t_end,
        seed,
    };
    let mut t = 0.0;
    let mut x = x0.clone();
    let zetas: Vec<Vec<i64>> = (0..sys.num_reactions()).map(|r| sys.reaction_vector(r)).collect();
    let mut memo: HashMap<State, Vec<f64>> = HashMap::new();
    loop {
        let rates = match memo.get(&x) {
            Some(v) => v.clone(),
            None => {
                let v: Vec<f64> = sys.intensities(&x)?.iter().map(rat_to_f64).collect();
                if memo.len() < RATE_MEMO_LIMIT {
                    memo.insert(x.clone(), v.clone());
                }
                v
            }
        };
        let total: f64 = rates.iter().sum();
        if total <= 0.0 {
            break;
        }
        let hold: f64 = rng.sample::<f64, _>(Exp1) / total;
        if t + hold >= t_end {
            break;
        }
        if traj.reactions.len() >= max_jumps {
            return Err(SimError::ExplosionGuard {
                jumps: max_jumps,
                t_end,
                reached: t,
            });
        }
        t += hold;
        let mut pick = rng.random::<f64>() * total;
        let mut r = rates.len() - 1;
        for (k, rate) in rates.iter().enumerate() {
            if *rate <= 0.0 {
                continue;
            }
            if pick < *rate {
                r = k;
                break;
            }
            pick -= rate;
            r = k;
        }
        x = x
            .shifted(&zetas[r])
            .expect("selected reaction has positive intensity");
        traj.times.push(t);
        traj.states.push(x.clone());
        traj.reactions.push(r);
    }
    Ok(traj)
}

/// Time-weighted occupation measure with float weights.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Occupation {
    pub states: Vec<State>,
    pub weights: Vec<f64>,
}

impl Occupation {
    pub fn get(&self, x: &State) -> f64 {
        self.states.iter().position(|s| s == x).map(|i| self.weights[i]).unwrap_or(0.0)
    }

    pub fn project(&self, coords: &[usize]) -> Occupation {
        let mut acc: BTreeMap<State, f64> = BTreeMap::new();
        for (s, w) in self.states.iter().zip(&self.weights) {
            let key = State::new(coords.iter().map(|&c| s[c]).collect());
            *acc.entry(key).or_insert(0.0) += w;
        }
        let (states, weights) = acc.into_iter().unzip();
        Occupation { states, weights }
    }

    /// Total variation distance to an exact distribution.
    pub fn total_variation(&self, exact: &Distribution) -> f64 {
        let mut diff: BTreeMap<&State, f64> = BTreeMap::new();
        for (s, w) in self.states.iter().zip(&self.weights) {
            *diff.entry(s).or_insert(0.0) += w;
        }
        for (s, p) in exact.states.iter().zip(&exact.probabilities) {
            *diff.entry(s).or_insert(0.0) -= rat_to_f64(p);
        }
        diff.values().map(|d| d.abs()).sum::<f64>() / 2.0
    }

    /// Pool several measures with equal weight.
    pub fn average(parts: &[Occupation]) -> Occupation {
        let mut acc: BTreeMap<State, f64> = BTreeMap::new();
        for p in parts {
            for (s, w) in p.states.iter().zip(&p.weights) {
                *acc.entry(s.clone()).or_insert(0.0) += w / parts.len() as f64;
            }
        }
        let (states, weights) = acc.into_iter().unzip();
        Occupation { states, weights }
    }
}

/// Sojourn-time-weighted occupation of `traj` on `[burn_in, t_end]`.
pub fn empirical_distribution(traj: &Trajectory, burn_in: f64) -> Result<Occupation, SimError> {
    if burn_in >= traj.t_end {
        return Err(SimError::BurnIn {
            burn_in,
            t_end: traj.t_end,
        });
    }
    let mut acc: BTreeMap<State, f64> = BTreeMap::new();
    for (k, s) in traj.states.iter().enumerate() {
        let start = traj.times[k].max(burn_in);
        let end = traj.times.get(k + 1).copied().unwrap_or(traj.t_end);
        if end > start {
            *acc.entry(s.clone()).or_insert(0.0) += end - start;
        }
    }
    let span = traj.t_end - burn_in;
    let (states, weights): (Vec<State>, Vec<f64>) = acc.into_iter().map(|(s, w)| (s, w / span)).unzip();
    Ok(Occupation { states, weights })
}

/// Independent replicas with seeds `seed, seed + 1, ...`, run on scoped
/// threads.
pub fn replicas(
    sys: &dyn ReactionSystem,
    x0: &State,
    t_end: f64,
    seed: u64,
    count: usize,
    max_jumps: usize,
) -> Result<Vec<Trajectory>, SimError> {
    std::thread::scope(|scope| {
        let handles: Vec<_> = (0..count as u64)
            .map(|k| scope.spawn(move || gillespie(sys, x0, t_end, seed.wrapping_add(k), max_jumps)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("replica thread panicked"))
            .collect()
    })
}
