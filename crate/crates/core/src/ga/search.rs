use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::operators::{
    crossover, mutate, random_genome, repair_feasibility, select_parents, selection_probabilities,
};
use super::{best_index, GaConfig, Individual};
use crate::error::{Error, Result};
use crate::tensor::{DenseTensor, Shape};
use crate::tt::{evaluate_shape, FitnessRecord};

/// Summary of one generation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenerationStats {
    pub generation: usize,
    /// Compression ratio of the best shape found so far.
    pub best_c: f64,
    /// Mean compression ratio of the population.
    pub mean_c: f64,
    /// Relative error of the best shape found so far.
    pub best_e: f64,
    pub best_shape: Shape,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SearchHistory {
    /// One entry per generation, `1..=T`.
    pub generations: Vec<GenerationStats>,
    /// Number of TT-SVD runs.
    pub evaluations: usize,
    pub cache_hits: usize,
    /// Every fitness computed, in evaluation order.
    #[serde(skip)]
    pub evaluated: Vec<FitnessRecord>,
}

#[derive(Clone, Debug)]
pub struct SearchOutcome {
    pub best: Individual,
    pub history: SearchHistory,
    pub final_population: Vec<Individual>,
}

/// Fitness evaluation with an optional genome-keyed memo.
///
/// Lookups and inserts happen on the calling thread; only the TT-SVD runs
/// for missing genomes are spread over the pool.
struct Evaluator<'a> {
    data: &'a DenseTensor,
    eps: f64,
    cache: Option<HashMap<Shape, FitnessRecord>>,
    pool: Option<&'a rayon::ThreadPool>,
    evaluations: usize,
    hits: usize,
    evaluated: Vec<FitnessRecord>,
}

impl Evaluator<'_> {
    fn evaluate(&mut self, genomes: Vec<Shape>) -> Result<Vec<Individual>> {
        let pending: Vec<Shape> = match &self.cache {
            Some(cache) => {
                let mut seen = std::collections::HashSet::new();
                genomes
                    .iter()
                    .filter(|g| !cache.contains_key(*g) && seen.insert(*g))
                    .cloned()
                    .collect()
            }
            None => genomes.clone(),
        };

        let (data, eps) = (self.data, self.eps);
        let run = || -> Result<Vec<FitnessRecord>> {
            pending
                .par_iter()
                .map(|g| evaluate_shape(data, g, eps))
                .collect()
        };
        let fresh = match self.pool {
            Some(pool) => pool.install(run)?,
            None => run()?,
        };

        self.evaluations += fresh.len();
        self.hits += genomes.len() - fresh.len();
        self.evaluated.extend(fresh.iter().cloned());

        match &mut self.cache {
            Some(cache) => {
                for record in fresh {
                    cache.insert(record.shape.clone(), record);
                }
                Ok(genomes
                    .into_iter()
                    .map(|g| Individual {
                        fitness: cache[&g].clone(),
                        genome: g,
                    })
                    .collect())
            }
            None => Ok(genomes
                .into_iter()
                .zip(fresh)
                .map(|(genome, fitness)| Individual { genome, fitness })
                .collect()),
        }
    }
}

/// Runs the genetic shape search on the global rayon pool.
pub fn run_search(data: &DenseTensor, cfg: &GaConfig) -> Result<SearchOutcome> {
    search(data, cfg, None)
}

/// Runs the genetic shape search with at most `threads` evaluation workers.
/// The outcome does not depend on `threads`.
pub fn run_search_with_threads(
    data: &DenseTensor,
    cfg: &GaConfig,
    threads: usize,
) -> Result<SearchOutcome> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::InvalidConfig(format!("cannot build thread pool: {e}")))?;
    search(data, cfg, Some(&pool))
}

fn search(
    data: &DenseTensor,
    cfg: &GaConfig,
    pool: Option<&rayon::ThreadPool>,
) -> Result<SearchOutcome> {
    let card = data.len();
    cfg.validate(card)?;

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut evaluator = Evaluator {
        data,
        eps: cfg.eps,
        cache: cfg.cache.then(HashMap::new),
        pool,
        evaluations: 0,
        hits: 0,
        evaluated: Vec::new(),
    };

    let initial = (0..cfg.population)
        .map(|_| {
            let raw = random_genome(cfg, &mut rng);
            repair_feasibility(&raw, card, cfg, &mut rng)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut population = evaluator.evaluate(initial)?;
    let mut best = population[best_index(&population)].clone();

    let mut generations = Vec::with_capacity(cfg.generations);
    for generation in 1..=cfg.generations {
        let fitnesses: Vec<f64> = population.iter().map(Individual::compression_ratio).collect();
        let probabilities = selection_probabilities(&fitnesses);
        let parents = select_parents(&population, &probabilities, cfg.parents, &mut rng);

        let offspring = (0..cfg.population - cfg.parents)
            .map(|_| {
                let a = &parents[rng.random_range(0..parents.len())].genome;
                let b = &parents[rng.random_range(0..parents.len())].genome;
                let child = if cfg.order > 1 {
                    let point = rng.random_range(1..cfg.order);
                    crossover(a.dims(), b.dims(), point)?
                } else {
                    a.dims().to_vec()
                };
                let child = mutate(&child, cfg, &mut rng);
                repair_feasibility(&child, card, cfg, &mut rng)
            })
            .collect::<Result<Vec<_>>>()?;
        let offspring = evaluator.evaluate(offspring)?;

        population = parents;
        population.extend(offspring);

        let leader = &population[best_index(&population)];
        if leader.compression_ratio() > best.compression_ratio() {
            best = leader.clone();
        }

        let mean_c = population.iter().map(Individual::compression_ratio).sum::<f64>()
            / population.len() as f64;
        generations.push(GenerationStats {
            generation,
            best_c: best.compression_ratio(),
            mean_c,
            best_e: best.fitness.relative_error,
            best_shape: best.genome.clone(),
        });
    }

    Ok(SearchOutcome {
        best,
        history: SearchHistory {
            generations,
            evaluations: evaluator.evaluations,
            cache_hits: evaluator.hits,
            evaluated: evaluator.evaluated,
        },
        final_population: population,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn data(n: usize) -> DenseTensor {
        let values = (0..n).map(|i| ((i * 37 % 23) as f64 + 1.0) / 23.0).collect();
        DenseTensor::from_vec(&[n], values).unwrap()
    }

    #[test]
    fn single_generation_boundary() {
        let x = data(12);
        let cfg = GaConfig::new(3, 1, 12, 0.1).with_budget(1, 4, 3).with_seed(5);
        let out = run_search(&x, &cfg).unwrap();
        assert_eq!(out.history.generations.len(), 1);
        assert_eq!(out.final_population.len(), 4);
    }

    #[test]
    fn population_and_feasibility_invariants() {
        let x = data(30);
        let cfg = GaConfig::new(3, 1, 30, 0.2).with_budget(8, 12, 4).with_seed(1);
        let out = run_search(&x, &cfg).unwrap();
        assert_eq!(out.final_population.len(), 12);
        for rec in &out.history.evaluated {
            assert!(rec.shape.cardinality() >= 30);
            assert!(rec.shape.dims().iter().all(|&n| (1..=30).contains(&n)));
            assert!(rec.relative_error <= 0.2);
        }
        let best: Vec<f64> = out.history.generations.iter().map(|g| g.best_c).collect();
        assert!(best.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(out.best.compression_ratio(), *best.last().unwrap());
    }

    #[test]
    fn cache_is_transparent() {
        let x = data(24);
        let mut cfg = GaConfig::new(3, 1, 24, 0.1).with_budget(6, 10, 3).with_seed(77);
        let cached = run_search(&x, &cfg).unwrap();
        cfg.cache = false;
        let uncached = run_search(&x, &cfg).unwrap();
        assert_eq!(cached.best, uncached.best);
        assert_eq!(cached.history.generations, uncached.history.generations);
        assert_eq!(cached.final_population, uncached.final_population);
        assert!(cached.history.evaluations <= uncached.history.evaluations);
        assert_eq!(uncached.history.cache_hits, 0);
        assert_eq!(
            cached.history.evaluations + cached.history.cache_hits,
            uncached.history.evaluations
        );
    }

    #[test]
    fn thread_count_does_not_change_results() {
        let x = data(36);
        let cfg = GaConfig::new(3, 1, 36, 0.1).with_budget(5, 10, 4).with_seed(3);
        let one = run_search_with_threads(&x, &cfg, 1).unwrap();
        let many = run_search_with_threads(&x, &cfg, 6).unwrap();
        assert_eq!(one.best, many.best);
        assert_eq!(one.history, many.history);
    }

    #[test]
    fn infeasible_config_is_rejected() {
        let x = data(4);
        let cfg = GaConfig::new(2, 1, 1, 0.1).with_budget(1, 2, 1);
        assert!(matches!(run_search(&x, &cfg), Err(Error::NoFeasibleShape(_))));
    }

    #[test]
    fn order_one_search() {
        let x = data(10);
        let cfg = GaConfig::new(1, 1, 20, 0.1).with_budget(3, 5, 2).with_seed(4);
        let out = run_search(&x, &cfg).unwrap();
        assert!(out.best.genome.cardinality() >= 10);
    }
}
