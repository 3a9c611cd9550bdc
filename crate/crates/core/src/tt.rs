//! Tensor-train decomposition by sequential truncated SVDs, reconstruction
//! from cores, and the compression-ratio / relative-error metrics.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::svd::truncated_svd;
use crate::tensor::{DenseTensor, Shape};

/// Chain of order-3 cores; core `j` has shape `(r_{j-1}, n_j, r_j)` with
/// `r_0 = r_d = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct TtCores {
    cores: Vec<DenseTensor>,
    ranks: Vec<usize>,
}

impl TtCores {
    /// Validates the core chain and derives the rank vector.
    pub fn new(cores: Vec<DenseTensor>) -> Result<Self> {
        if cores.is_empty() {
            return Err(Error::ShapeChainBroken {
                core: 0,
                detail: "no cores".into(),
            });
        }
        let mut ranks = Vec::with_capacity(cores.len() + 1);
        ranks.push(1);
        for (j, core) in cores.iter().enumerate() {
            if core.order() != 3 {
                return Err(Error::ShapeChainBroken {
                    core: j,
                    detail: format!("core has order {}, expected 3", core.order()),
                });
            }
            let left = core.dims()[0];
            if left != ranks[j] {
                return Err(Error::ShapeChainBroken {
                    core: j,
                    detail: format!("left rank {left} does not match {}", ranks[j]),
                });
            }
            ranks.push(core.dims()[2]);
        }
        if ranks[cores.len()] != 1 {
            return Err(Error::ShapeChainBroken {
                core: cores.len() - 1,
                detail: format!("last rank is {}, expected 1", ranks[cores.len()]),
            });
        }
        Ok(TtCores { cores, ranks })
    }

    pub fn cores(&self) -> &[DenseTensor] {
        &self.cores
    }

    /// `(r_0, ..., r_d)`.
    pub fn ranks(&self) -> &[usize] {
        &self.ranks
    }

    pub fn order(&self) -> usize {
        self.cores.len()
    }

    /// Mode sizes `(n_1, ..., n_d)`.
    pub fn mode_sizes(&self) -> Vec<usize> {
        self.cores.iter().map(|c| c.dims()[1]).collect()
    }

    /// Total number of core entries, `sum_j r_{j-1} n_j r_j`.
    pub fn param_count(&self) -> usize {
        self.cores.iter().map(DenseTensor::len).sum()
    }

    /// True when every `r_j <= min(prod_{i<=j} n_i, prod_{i>j} n_i)`.
    pub fn satisfies_rank_ceiling(&self) -> bool {
        let n = self.mode_sizes();
        (1..n.len()).all(|j| {
            let left = n[..j].iter().fold(1u128, |a, &b| a * b as u128);
            let right = n[j..].iter().fold(1u128, |a, &b| a * b as u128);
            (self.ranks[j] as u128) <= left.min(right)
        })
    }

    /// Same chain with core `index` multiplied by `factor`.
    pub fn with_scaled_core(&self, index: usize, factor: f64) -> TtCores {
        let mut cores = self.cores.clone();
        cores[index] = cores[index].scaled(factor);
        TtCores {
            cores,
            ranks: self.ranks.clone(),
        }
    }

    pub fn into_cores(self) -> Vec<DenseTensor> {
        self.cores
    }
}

/// Output of [`tt_svd`].
#[derive(Clone, Debug)]
pub struct DecompositionReport {
    pub cores: TtCores,
    pub param_count: usize,
    /// Per-step truncation threshold.
    pub sigma: f64,
}

/// Decomposes `y` into TT cores so that `||y - y_hat||_F <= eps ||y||_F`.
///
/// Every one of the `d - 1` unfoldings is truncated with absolute threshold
/// `sigma = eps / (d - 1) * ||y||_F`. The all-zero tensor yields zero cores
/// of rank 1; an order-1 tensor is its own single core.
pub fn tt_svd(y: &DenseTensor, eps: f64) -> Result<DecompositionReport> {
    if !(eps >= 0.0) || !eps.is_finite() {
        return Err(Error::InvalidConfig(format!("eps must be finite and >= 0, got {eps}")));
    }
    let dims = y.dims().to_vec();
    let d = dims.len();
    if d == 1 {
        let core = y.reshape(&Shape::new(vec![1, dims[0], 1])?)?;
        return finish(vec![core], 0.0);
    }

    let norm = y.frobenius_norm();
    if !norm.is_finite() {
        return Err(Error::NumericalFailure("tensor norm is not finite".into()));
    }
    let sigma = eps / (d - 1) as f64 * norm;

    if norm == 0.0 {
        let cores = dims
            .iter()
            .map(|&n| Ok(DenseTensor::zeros(Shape::new(vec![1, n, 1])?)))
            .collect::<Result<Vec<_>>>()?;
        return finish(cores, sigma);
    }

    let mut cores = Vec::with_capacity(d);
    let mut carry = y.clone();
    let mut prev_rank = 1;
    for &n in &dims[..d - 1] {
        let w = carry.unfold(prev_rank * n)?;
        let f = truncated_svd(&w, sigma)?;
        let rank = f.rank;
        cores.push(f.u.into_reshape(&Shape::new(vec![prev_rank, n, rank])?)?);

        // carry = diag(s) * V^T
        let cols = f.vt.dims()[1];
        let mut next = f.vt.into_data();
        for (k, s) in f.singular_values.iter().enumerate() {
            for v in &mut next[k * cols..(k + 1) * cols] {
                *v *= s;
            }
        }
        carry = DenseTensor::from_vec(&[rank, cols], next)?;
        prev_rank = rank;
    }
    cores.push(carry.into_reshape(&Shape::new(vec![prev_rank, dims[d - 1], 1])?)?);
    finish(cores, sigma)
}

fn finish(cores: Vec<DenseTensor>, sigma: f64) -> Result<DecompositionReport> {
    let cores = TtCores::new(cores)?;
    Ok(DecompositionReport {
        param_count: cores.param_count(),
        cores,
        sigma,
    })
}

/// Row-major `(m x k) * (k x n)` product.
fn matmul_row_major(a: &[f64], m: usize, k: usize, b: &[f64], n: usize) -> Vec<f64> {
    // a row-major buffer is the column-major buffer of the transpose
    let at = DMatrix::from_column_slice(k, m, a);
    let bt = DMatrix::from_column_slice(n, k, b);
    let ct = bt * at;
    ct.as_slice().to_vec()
}

/// Full tensor of shape `(n_1, ..., n_d)` from its TT cores, contracted left
/// to right as a sequence of matrix products.
pub fn tt_reconstruct(g: &TtCores) -> DenseTensor {
    let ranks = g.ranks();
    let mut acc = g.cores[0].data().to_vec();
    let mut rows = g.cores[0].dims()[1];
    for (j, core) in g.cores.iter().enumerate().skip(1) {
        let (left, n, right) = (ranks[j], core.dims()[1], ranks[j + 1]);
        acc = matmul_row_major(&acc, rows, left, core.data(), n * right);
        rows *= n;
    }
    let shape = Shape::new(g.mode_sizes()).expect("mode sizes of valid cores form a shape");
    DenseTensor::new(shape, acc).expect("reconstruction has the cardinality of its mode sizes")
}

/// `C = 1 - params / original_cardinality`; negative when the cores are
/// larger than the data.
pub fn compression_ratio(param_count: usize, original_cardinality: usize) -> f64 {
    1.0 - param_count as f64 / original_cardinality as f64
}

/// `||x - x_hat||_F / ||x||_F`. A zero reference gives `0` for an exact
/// match and `+inf` otherwise.
pub fn relative_error(x: &DenseTensor, x_hat: &DenseTensor) -> Result<f64> {
    if x.dims() != x_hat.dims() {
        return Err(Error::ShapeMismatch(x.dims().to_vec(), x_hat.dims().to_vec()));
    }
    let diff = x
        .data()
        .iter()
        .zip(x_hat.data())
        .fold(0.0, |acc, (a, b)| acc + (a - b) * (a - b))
        .sqrt();
    let norm = x.frobenius_norm();
    Ok(if norm == 0.0 {
        if diff == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        diff / norm
    })
}

/// Evaluation of one candidate shape for a given tensor.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitnessRecord {
    pub shape: Shape,
    pub compression_ratio: f64,
    pub relative_error: f64,
    pub ranks: Vec<usize>,
    pub param_count: usize,
}

/// Pads `x` to `shape`, decomposes with tolerance `eps`, and measures the
/// result against the unpadded data. Returns the cores with the metrics.
pub fn decompose_shape(
    x: &DenseTensor,
    shape: &Shape,
    eps: f64,
) -> Result<(DecompositionReport, FitnessRecord)> {
    let padded = x.pad_reshape(shape)?;
    let report = tt_svd(&padded, eps)?;
    let approx = tt_reconstruct(&report.cores).unpad(x.shape())?;
    let record = FitnessRecord {
        shape: shape.clone(),
        compression_ratio: compression_ratio(report.param_count, x.len()),
        relative_error: relative_error(x, &approx)?,
        ranks: report.cores.ranks().to_vec(),
        param_count: report.param_count,
    };
    Ok((report, record))
}

pub fn evaluate_shape(x: &DenseTensor, shape: &Shape, eps: f64) -> Result<FitnessRecord> {
    decompose_shape(x, shape, eps).map(|(_, record)| record)
}
