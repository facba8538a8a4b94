//! A common view of full networks and reduced networks as Markov jump
//! processes on `ℕ₀ⁿ`.

use std::num::NonZeroUsize;
use std::sync::Mutex;

use lru::LruCache;

use crate::elimination::ReducedNetwork;
use crate::kinetics::{reduced_intensities, KineticsError, DEFAULT_CHAIN_CAP};
use crate::model::{Complex, Network, State};
use crate::num::Rat;

/// Default number of cached reduced-intensity vectors.
pub const DEFAULT_CACHE_SIZE: usize = 100_000;

pub trait ReactionSystem: Sync {
    fn dim(&self) -> usize;
    fn species_names(&self) -> &[String];
    fn num_reactions(&self) -> usize;
    fn reactant(&self, r: usize) -> &Complex;
    fn product(&self, r: usize) -> &Complex;
    /// All intensities at `x`, in reaction order.
    fn intensities(&self, x: &State) -> Result<Vec<Rat>, KineticsError>;

    fn reaction_vector(&self, r: usize) -> Vec<i64> {
        crate::model::reaction_vector(self.reactant(r), self.product(r))
    }

    /// Index of the reaction `product -> reactant`, if present.
    fn reverse_of(&self, r: usize) -> Option<usize> {
        (0..self.num_reactions())
            .find(|&k| self.reactant(k) == self.product(r) && self.product(k) == self.reactant(r))
    }

    /// Distinct complexes in order of first appearance.
    fn complexes(&self) -> Vec<Complex> {
        let mut out: Vec<Complex> = Vec::new();
        for r in 0..self.num_reactions() {
            for c in [self.reactant(r), self.product(r)] {
                if !out.contains(c) {
                    out.push(c.clone());
                }
            }
        }
        out
    }
}

impl ReactionSystem for Network {
    fn dim(&self) -> usize {
        Network::dim(self)
    }
    fn species_names(&self) -> &[String] {
        Network::species_names(self)
    }
    fn num_reactions(&self) -> usize {
        self.reactions().len()
    }
    fn reactant(&self, r: usize) -> &Complex {
        &self.reactions()[r].reactant
    }
    fn product(&self, r: usize) -> &Complex {
        &self.reactions()[r].product
    }
    fn intensities(&self, x: &State) -> Result<Vec<Rat>, KineticsError> {
        (0..self.reactions().len())
            .map(|r| self.eval_intensity(r, x).map_err(KineticsError::from))
            .collect()
    }
}

/// The reduced SRN: reduced network on the core species with kinetics
/// evaluated on demand and memoized per state.
pub struct ReducedSrn {
    pub full: Network,
    pub reduced: ReducedNetwork,
    pub chain_cap: usize,
    cache: Mutex<LruCache<State, Vec<Rat>>>,
}

impl ReducedSrn {
    pub fn new(full: Network, reduced: ReducedNetwork) -> Self {
        Self::with_cache(full, reduced, DEFAULT_CACHE_SIZE)
    }

    pub fn with_cache(full: Network, reduced: ReducedNetwork, entries: usize) -> Self {
        let size = NonZeroUsize::new(entries.max(1)).expect("nonzero");
        Self {
            full,
            reduced,
            chain_cap: DEFAULT_CHAIN_CAP,
            cache: Mutex::new(LruCache::new(size)),
        }
    }

    pub fn cached_states(&self) -> usize {
        self.cache.lock().expect("cache lock").len()
    }
}

impl ReactionSystem for ReducedSrn {
    fn dim(&self) -> usize {
        self.reduced.dim()
    }
    fn species_names(&self) -> &[String] {
        &self.reduced.core_names
    }
    fn num_reactions(&self) -> usize {
        self.reduced.reactions.len()
    }
    fn reactant(&self, r: usize) -> &Complex {
        &self.reduced.reactions[r].reactant
    }
    fn product(&self, r: usize) -> &Complex {
        &self.reduced.reactions[r].product
    }
    fn intensities(&self, x: &State) -> Result<Vec<Rat>, KineticsError> {
        if let Some(v) = self.cache.lock().expect("cache lock").get(x) {
            return Ok(v.clone());
        }
        let v = reduced_intensities(&self.full, &self.reduced, x.as_slice(), self.chain_cap)?;
        self.cache.lock().expect("cache lock").put(x.clone(), v.clone());
        Ok(v)
    }
}
