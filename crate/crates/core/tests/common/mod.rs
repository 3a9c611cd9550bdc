#![allow(dead_code)]

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ttshape::{DenseTensor, Shape, TtCores};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform_tensor(dims: &[usize], rng: &mut impl Rng) -> DenseTensor {
    let len = dims.iter().product();
    let data = (0..len).map(|_| rng.random::<f64>()).collect();
    DenseTensor::from_vec(dims, data).unwrap()
}

pub fn random_dims(order: usize, lo: usize, hi: usize, rng: &mut impl Rng) -> Vec<usize> {
    (0..order).map(|_| rng.random_range(lo..=hi)).collect()
}

/// Cores with the given bond ranks and entries drawn from `unif[-1, 1]`.
pub fn random_cores(dims: &[usize], ranks: &[usize], rng: &mut impl Rng) -> TtCores {
    assert_eq!(ranks.len(), dims.len() + 1);
    let cores = dims
        .iter()
        .enumerate()
        .map(|(j, &n)| {
            let shape = [ranks[j], n, ranks[j + 1]];
            let data = (0..shape.iter().product())
                .map(|_| rng.random_range(-1.0..1.0))
                .collect();
            DenseTensor::from_vec(&shape, data).unwrap()
        })
        .collect();
    TtCores::new(cores).unwrap()
}

/// Singular values as square roots of the eigenvalues of the smaller Gram
/// matrix (`W W^T` or `W^T W`), sorted nonincreasing.
pub fn gram_singular_values(rows: usize, cols: usize, data: &[f64]) -> Vec<f64> {
    let w = DMatrix::from_row_slice(rows, cols, data);
    let gram = if rows <= cols { &w * w.transpose() } else { w.transpose() * &w };
    let mut s: Vec<f64> = SymmetricEigen::new(gram)
        .eigenvalues
        .iter()
        .map(|l| l.max(0.0).sqrt())
        .collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

/// Smallest `r >= 1` with `sum_{i >= r} s_i^2 <= sigma^2`, checking every
/// candidate rank directly.
pub fn brute_force_rank(s: &[f64], sigma: f64) -> usize {
    (1..=s.len())
        .find(|&r| s[r..].iter().map(|v| v * v).sum::<f64>() <= sigma * sigma)
        .unwrap_or(s.len())
}

/// Best compression ratio over every shape in `[lo, hi]^order` whose
/// cardinality covers the data.
pub fn exhaustive_best(x: &DenseTensor, order: usize, lo: usize, hi: usize, eps: f64) -> (Shape, f64) {
    let mut dims = vec![lo; order];
    let mut best: Option<(Shape, f64)> = None;
    loop {
        if dims.iter().product::<usize>() >= x.len() {
            let shape = Shape::new(dims.clone()).unwrap();
            let c = ttshape::evaluate_shape(x, &shape, eps).unwrap().compression_ratio;
            if best.as_ref().is_none_or(|(_, b)| c > *b) {
                best = Some((shape, c));
            }
        }
        // odometer increment
        let mut k = order;
        loop {
            if k == 0 {
                return best.expect("some shape is feasible");
            }
            k -= 1;
            if dims[k] < hi {
                dims[k] += 1;
                break;
            }
            dims[k] = lo;
        }
    }
}
