//! Genetic search over tensor shapes.
//!
//! A genome is a shape `(n_1, ..., n_d)` with `min_dim <= n_i <= max_dim`
//! whose cardinality is at least that of the data. Fitness is the TT
//! compression ratio of the zero-padded data under that shape.

mod operators;
mod search;

pub use operators::{
    crossover, genome_cardinality, mutate, random_genome, repair_feasibility, select_parents,
    selection_probabilities, SHIFT_DELTA,
};
pub use search::{
    run_search, run_search_with_threads, GenerationStats, SearchHistory, SearchOutcome,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::{checked_cardinality, Shape};
use crate::tt::FitnessRecord;

/// Upper bound on the per-dimension size used when none is given.
pub const DEFAULT_MAX_DIM_CAP: usize = 4096;

/// `min(|X|, 4096)`.
pub fn default_max_dim(data_cardinality: usize) -> usize {
    data_cardinality.clamp(1, DEFAULT_MAX_DIM_CAP)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaConfig {
    /// Number of generations `T`.
    pub generations: usize,
    /// Population size `m`.
    pub population: usize,
    /// Parent-set size `p`, including the elite copy.
    pub parents: usize,
    /// Genome length, i.e. the order of the reshaped tensor.
    pub order: usize,
    pub min_dim: usize,
    pub max_dim: usize,
    /// Relative error bound passed to TT-SVD.
    pub eps: f64,
    /// Per-gene mutation probability.
    pub mutation_rate: f64,
    pub seed: u64,
    /// Iteration budget of a single feasibility repair.
    pub max_repair_attempts: usize,
    /// When set, genomes are also kept at or below
    /// `max_pad_factor * |X|` elements. Must be at least 2.
    pub max_pad_factor: Option<u64>,
    /// Memoize fitness by genome.
    pub cache: bool,
}

impl GaConfig {
    /// Config with mutation rate `1/d` and no padding cap.
    pub fn new(order: usize, min_dim: usize, max_dim: usize, eps: f64) -> Self {
        GaConfig {
            generations: 50,
            population: 100,
            parents: 30,
            order,
            min_dim,
            max_dim,
            eps,
            mutation_rate: 1.0 / order.max(1) as f64,
            seed: 0,
            max_repair_attempts: 10_000,
            max_pad_factor: None,
            cache: true,
        }
    }

    pub fn with_budget(mut self, generations: usize, population: usize, parents: usize) -> Self {
        self.generations = generations;
        self.population = population;
        self.parents = parents;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Largest admissible genome cardinality for data of `data_cardinality`
    /// elements.
    pub fn max_cardinality(&self, data_cardinality: usize) -> u64 {
        match self.max_pad_factor {
            Some(f) => f.saturating_mul(data_cardinality as u64),
            None => u64::MAX,
        }
    }

    /// Checks the config and that some genome is feasible for data with
    /// `data_cardinality` elements.
    pub fn validate(&self, data_cardinality: usize) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.generations < 1 {
            return bad("generations must be >= 1".into());
        }
        if !(1 <= self.parents && self.parents < self.population) {
            return bad(format!(
                "need 1 <= parents < population, got parents={} population={}",
                self.parents, self.population
            ));
        }
        if self.order < 1 {
            return bad("order must be >= 1".into());
        }
        if self.min_dim < 1 || self.max_dim < self.min_dim {
            return bad(format!(
                "need 1 <= min_dim <= max_dim, got {}..={}",
                self.min_dim, self.max_dim
            ));
        }
        if !(self.mutation_rate > 0.0 && self.mutation_rate <= 1.0) {
            return bad(format!("mutation rate must be in (0, 1], got {}", self.mutation_rate));
        }
        if !(self.eps.is_finite() && self.eps >= 0.0) {
            return bad(format!("eps must be finite and >= 0, got {}", self.eps));
        }
        if self.max_repair_attempts < 1 {
            return bad("max_repair_attempts must be >= 1".into());
        }
        if let Some(f) = self.max_pad_factor {
            if f < 2 {
                return bad(format!("max_pad_factor must be >= 2, got {f}"));
            }
        }
        if data_cardinality == 0 {
            return bad("data is empty".into());
        }

        let largest = checked_cardinality(&vec![self.max_dim; self.order]);
        if matches!(largest, Some(c) if c < data_cardinality as u64) {
            return Err(Error::NoFeasibleShape(format!(
                "{}^{} = {} < {data_cardinality}",
                self.max_dim,
                self.order,
                largest.unwrap_or_default()
            )));
        }
        let smallest = checked_cardinality(&vec![self.min_dim; self.order]).unwrap_or(u64::MAX);
        if smallest > self.max_cardinality(data_cardinality) {
            return Err(Error::NoFeasibleShape(format!(
                "{}^{} exceeds the padding cap of {}",
                self.min_dim,
                self.order,
                self.max_cardinality(data_cardinality)
            )));
        }
        Ok(())
    }
}

/// A genome together with its evaluated fitness.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Individual {
    pub genome: Shape,
    pub fitness: FitnessRecord,
}

impl Individual {
    pub fn compression_ratio(&self) -> f64 {
        self.fitness.compression_ratio
    }
}

/// Index of the individual with the largest compression ratio, lowest index
/// on ties.
pub fn best_index(population: &[Individual]) -> usize {
    let mut best = 0;
    for (i, ind) in population.iter().enumerate().skip(1) {
        if ind.compression_ratio() > population[best].compression_ratio() {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        let ok = GaConfig::new(3, 2, 320, 0.1).with_budget(5, 10, 3);
        assert!(ok.validate(6).is_ok());
        assert!(ok.clone().with_budget(0, 10, 3).validate(6).is_err());
        assert!(ok.clone().with_budget(5, 3, 3).validate(6).is_err());
        assert!(ok.clone().with_budget(5, 3, 0).validate(6).is_err());

        let mut bad_rate = ok.clone();
        bad_rate.mutation_rate = 0.0;
        assert!(bad_rate.validate(6).is_err());

        let tiny = GaConfig::new(2, 1, 1, 0.1).with_budget(1, 2, 1);
        assert!(matches!(tiny.validate(4), Err(Error::NoFeasibleShape(_))));

        let mut capped = GaConfig::new(3, 8, 16, 0.1).with_budget(1, 2, 1);
        capped.max_pad_factor = Some(2);
        // 8^3 = 512 > 2 * 100
        assert!(matches!(capped.validate(100), Err(Error::NoFeasibleShape(_))));
        capped.max_pad_factor = Some(1);
        assert!(matches!(capped.validate(1000), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn huge_search_space_is_not_an_overflow_error() {
        let cfg = GaConfig::new(8, 2, DEFAULT_MAX_DIM_CAP, 0.1).with_budget(1, 2, 1);
        assert!(cfg.validate(1 << 20).is_ok());
    }

    #[test]
    fn default_upper_bound() {
        assert_eq!(default_max_dim(12), 12);
        assert_eq!(default_max_dim(214 * 320 * 3), 4096);
    }
}
