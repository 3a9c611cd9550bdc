//! Selection, crossover, mutation and feasibility repair.
//!
//! Genomes are handled as plain `&[usize]` here since an unrepaired genome
//! may not even have a representable cardinality.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;

use super::{best_index, GaConfig, Individual};
use crate::error::{Error, Result};
use crate::tensor::{checked_cardinality, Shape};

/// Offset added after shifting fitness values so every weight is positive.
pub const SHIFT_DELTA: f64 = 1e-6;

/// Cardinality of a genome, saturating at `u64::MAX`.
pub fn genome_cardinality(genes: &[usize]) -> u64 {
    checked_cardinality(genes).unwrap_or(u64::MAX)
}

/// Roulette probabilities proportional to fitness.
///
/// When some fitness is not strictly positive, weights become
/// `f_j - min(f) + SHIFT_DELTA`.
pub fn selection_probabilities(fitnesses: &[f64]) -> Vec<f64> {
    if fitnesses.is_empty() {
        return Vec::new();
    }
    let weights: Vec<f64> = if fitnesses.iter().all(|&c| c > 0.0) {
        fitnesses.to_vec()
    } else {
        let min = fitnesses.iter().copied().fold(f64::INFINITY, f64::min);
        fitnesses.iter().map(|c| c - min + SHIFT_DELTA).collect()
    };
    let total: f64 = weights.iter().sum();
    weights.iter().map(|w| w / total).collect()
}

/// `parents - 1` roulette draws with replacement followed by one copy of the
/// best individual.
pub fn select_parents<R: Rng + ?Sized>(
    population: &[Individual],
    probabilities: &[f64],
    parents: usize,
    rng: &mut R,
) -> Vec<Individual> {
    assert!(!population.is_empty() && parents >= 1 && parents <= population.len());
    assert_eq!(population.len(), probabilities.len());
    let wheel = WeightedIndex::new(probabilities).expect("selection probabilities sum to 1");
    let mut chosen: Vec<Individual> = (0..parents - 1)
        .map(|_| population[wheel.sample(rng)].clone())
        .collect();
    chosen.push(population[best_index(population)].clone());
    chosen
}

/// Single-point crossover: `(a_1, ..., a_c, b_{c+1}, ..., b_d)`.
pub fn crossover(a: &[usize], b: &[usize], point: usize) -> Result<Vec<usize>> {
    if a.len() != b.len() {
        return Err(Error::OrderMismatch(a.len(), b.len()));
    }
    let d = a.len();
    if point < 1 || point + 1 > d {
        return Err(Error::BadCrossoverPoint {
            point,
            max: d.saturating_sub(1),
        });
    }
    Ok(a[..point].iter().chain(&b[point..]).copied().collect())
}

/// Genome with every gene drawn from `unif{min_dim..=max_dim}`.
pub fn random_genome<R: Rng + ?Sized>(cfg: &GaConfig, rng: &mut R) -> Vec<usize> {
    (0..cfg.order)
        .map(|_| rng.random_range(cfg.min_dim..=cfg.max_dim))
        .collect()
}

/// Redraws each gene with probability `mutation_rate`; if no gene was hit,
/// one uniformly chosen gene is redrawn.
pub fn mutate<R: Rng + ?Sized>(genes: &[usize], cfg: &GaConfig, rng: &mut R) -> Vec<usize> {
    let mut out = genes.to_vec();
    let mut touched = false;
    for gene in out.iter_mut() {
        if rng.random::<f64>() < cfg.mutation_rate {
            *gene = rng.random_range(cfg.min_dim..=cfg.max_dim);
            touched = true;
        }
    }
    if !touched && !out.is_empty() {
        let i = rng.random_range(0..out.len());
        out[i] = rng.random_range(cfg.min_dim..=cfg.max_dim);
    }
    out
}

/// Moves a genome into the feasible set.
///
/// While the cardinality is below `data_cardinality`, a random gene below
/// `max_dim` is doubled (clamped to `max_dim`). With a padding cap, a random
/// gene above `min_dim` is first halved (rounding up) while the cardinality
/// exceeds the cap; since the cap is at least twice the data size, halving
/// never drops below it.
pub fn repair_feasibility<R: Rng + ?Sized>(
    genes: &[usize],
    data_cardinality: usize,
    cfg: &GaConfig,
    rng: &mut R,
) -> Result<Shape> {
    let target = data_cardinality as u64;
    let cap = cfg.max_cardinality(data_cardinality);
    let mut out = genes.to_vec();
    let mut attempts = 0;

    while genome_cardinality(&out) > cap {
        let shrinkable: Vec<usize> = (0..out.len()).filter(|&i| out[i] > cfg.min_dim).collect();
        if shrinkable.is_empty() || attempts >= cfg.max_repair_attempts {
            return Err(Error::NoFeasibleShape(format!(
                "cannot shrink {out:?} below {cap} elements"
            )));
        }
        let i = shrinkable[rng.random_range(0..shrinkable.len())];
        out[i] = out[i].div_ceil(2).max(cfg.min_dim);
        attempts += 1;
    }

    while genome_cardinality(&out) < target {
        let growable: Vec<usize> = (0..out.len()).filter(|&i| out[i] < cfg.max_dim).collect();
        if growable.is_empty() || attempts >= cfg.max_repair_attempts {
            return Err(Error::NoFeasibleShape(format!(
                "cannot grow {out:?} to {target} elements"
            )));
        }
        let i = growable[rng.random_range(0..growable.len())];
        out[i] = (out[i] * 2).min(cfg.max_dim);
        attempts += 1;
    }

    Shape::new(out)
}
