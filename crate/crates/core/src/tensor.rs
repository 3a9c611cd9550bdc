//! Dense row-major tensors, shapes, and the reshaping operators used by the
//! compressor: plain reshape, zero-padding reshape and its inverse, and
//! matrix unfoldings.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest cardinality a shape may have (`2^63 - 1`).
pub const MAX_CARDINALITY: u64 = i64::MAX as u64;

/// Product of `dims` in wide arithmetic, `None` on overflow of `u64`.
pub fn checked_cardinality(dims: &[usize]) -> Option<u64> {
    dims.iter()
        .try_fold(1u64, |acc, &n| acc.checked_mul(n as u64))
}

/// Ordered list of dimension sizes.
///
/// Always has at least one dimension, every size is at least 1 and the
/// product of all sizes does not exceed [`MAX_CARDINALITY`].
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Shape(Vec<usize>);

impl Shape {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::InvalidShape("shape has no dimensions".into()));
        }
        if let Some(pos) = dims.iter().position(|&n| n == 0) {
            return Err(Error::InvalidShape(format!("dimension {pos} has size 0")));
        }
        match checked_cardinality(&dims) {
            Some(card) if card <= MAX_CARDINALITY && usize::try_from(card).is_ok() => {
                Ok(Shape(dims))
            }
            _ => Err(Error::InvalidShape(format!(
                "cardinality of {dims:?} overflows"
            ))),
        }
    }

    pub fn dims(&self) -> &[usize] {
        &self.0
    }

    pub fn order(&self) -> usize {
        self.0.len()
    }

    pub fn cardinality(&self) -> usize {
        self.0.iter().product()
    }
}

impl TryFrom<Vec<usize>> for Shape {
    type Error = Error;

    fn try_from(dims: Vec<usize>) -> Result<Self> {
        Shape::new(dims)
    }
}

impl From<Shape> for Vec<usize> {
    fn from(shape: Shape) -> Self {
        shape.0
    }
}

impl fmt::Display for Shape {
    /// Formats as `n1xn2x...xnd`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, n) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("x")?;
            }
            write!(f, "{n}")?;
        }
        Ok(())
    }
}

impl FromStr for Shape {
    type Err = Error;

    /// Accepts `214,320,3`, `214x320x3` or `(214, 320, 3)`.
    fn from_str(s: &str) -> Result<Self> {
        let trimmed = s.trim().trim_start_matches('(').trim_end_matches(')');
        let dims = trimmed
            .split([',', 'x'])
            .map(|part| {
                part.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::InvalidShape(format!("cannot parse {s:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Shape::new(dims)
    }
}

/// N-dimensional array of `f64` in row-major order (last index fastest).
#[derive(Clone, Debug, PartialEq)]
pub struct DenseTensor {
    shape: Shape,
    data: Vec<f64>,
}

impl DenseTensor {
    pub fn new(shape: Shape, data: Vec<f64>) -> Result<Self> {
        if data.len() != shape.cardinality() {
            return Err(Error::CardinalityMismatch {
                expected: shape.cardinality(),
                actual: data.len(),
            });
        }
        Ok(DenseTensor { shape, data })
    }

    /// Convenience constructor from raw dimensions.
    pub fn from_vec(dims: &[usize], data: Vec<f64>) -> Result<Self> {
        DenseTensor::new(Shape::new(dims.to_vec())?, data)
    }

    pub fn zeros(shape: Shape) -> Self {
        let len = shape.cardinality();
        DenseTensor {
            shape,
            data: vec![0.0; len],
        }
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn dims(&self) -> &[usize] {
        self.shape.dims()
    }

    pub fn order(&self) -> usize {
        self.shape.order()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    /// Element at a multi-index.
    pub fn get(&self, index: &[usize]) -> Option<f64> {
        if index.len() != self.order() {
            return None;
        }
        let mut offset = 0usize;
        for (&i, &n) in index.iter().zip(self.dims()) {
            if i >= n {
                return None;
            }
            offset = offset * n + i;
        }
        Some(self.data[offset])
    }

    /// Reinterprets the buffer under a shape of equal cardinality.
    pub fn reshape(&self, shape: &Shape) -> Result<DenseTensor> {
        self.clone().into_reshape(shape)
    }

    pub fn into_reshape(self, shape: &Shape) -> Result<DenseTensor> {
        if shape.cardinality() != self.len() {
            return Err(Error::CardinalityMismatch {
                expected: shape.cardinality(),
                actual: self.len(),
            });
        }
        Ok(DenseTensor {
            shape: shape.clone(),
            data: self.data,
        })
    }

    /// Flattens row-major, appends trailing zeros up to the cardinality of
    /// `shape`, and reinterprets the result under `shape`.
    pub fn pad_reshape(&self, shape: &Shape) -> Result<DenseTensor> {
        let target = shape.cardinality();
        if target < self.len() {
            return Err(Error::InfeasibleShape {
                shape: target,
                data: self.len(),
            });
        }
        let mut data = Vec::with_capacity(target);
        data.extend_from_slice(&self.data);
        data.resize(target, 0.0);
        Ok(DenseTensor {
            shape: shape.clone(),
            data,
        })
    }

    /// Inverse of [`pad_reshape`](Self::pad_reshape): keeps the leading
    /// `original.cardinality()` elements and reshapes them to `original`.
    pub fn unpad(&self, original: &Shape) -> Result<DenseTensor> {
        let keep = original.cardinality();
        if self.len() < keep {
            return Err(Error::CardinalityMismatch {
                expected: keep,
                actual: self.len(),
            });
        }
        Ok(DenseTensor {
            shape: original.clone(),
            data: self.data[..keep].to_vec(),
        })
    }

    pub fn frobenius_norm(&self) -> f64 {
        frobenius_norm(&self.data)
    }

    /// Row-major matricization with `rows` rows.
    pub fn unfold(&self, rows: usize) -> Result<DenseTensor> {
        if rows == 0 || !self.len().is_multiple_of(rows) {
            return Err(Error::NotDivisible {
                len: self.len(),
                rows,
            });
        }
        let shape = Shape::new(vec![rows, self.len() / rows])?;
        self.reshape(&shape)
    }

    /// Multiplies every entry by `factor`.
    pub fn scaled(&self, factor: f64) -> DenseTensor {
        DenseTensor {
            shape: self.shape.clone(),
            data: self.data.iter().map(|v| v * factor).collect(),
        }
    }
}

/// Square root of the sum of squares, accumulated left to right.
///
/// Plain sequential accumulation keeps the result bitwise unchanged when
/// exact zeros are appended to `values`.
pub fn frobenius_norm(values: &[f64]) -> f64 {
    values.iter().fold(0.0, |acc, v| acc + v * v).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(dims: &[usize], data: Vec<f64>) -> DenseTensor {
        DenseTensor::from_vec(dims, data).unwrap()
    }

    fn s(dims: &[usize]) -> Shape {
        Shape::new(dims.to_vec()).unwrap()
    }

    #[test]
    fn shape_validation() {
        assert!(Shape::new(vec![]).is_err());
        assert!(Shape::new(vec![3, 0]).is_err());
        assert!(Shape::new(vec![1 << 32, 1 << 32]).is_err());
        assert!(Shape::new(vec![1 << 31, 1 << 31]).is_ok());
        assert_eq!(s(&[2, 3, 4]).cardinality(), 24);
    }

    #[test]
    fn shape_parse_and_display() {
        assert_eq!("214,320,3".parse::<Shape>().unwrap(), s(&[214, 320, 3]));
        assert_eq!("(2270, 3, 30)".parse::<Shape>().unwrap(), s(&[2270, 3, 30]));
        assert_eq!(s(&[437, 8, 60]).to_string(), "437x8x60");
        assert_eq!("437x8x60".parse::<Shape>().unwrap(), s(&[437, 8, 60]));
        assert!("2,,3".parse::<Shape>().is_err());
    }

    #[test]
    fn reshape_reinterprets_buffer() {
        let x = t(&[2, 3], (1..=6).map(f64::from).collect());
        let y = x.reshape(&s(&[3, 2])).unwrap();
        assert_eq!(y.dims(), &[3, 2]);
        assert_eq!(y.data(), x.data());

        let v = t(&[6], vec![1.0; 6]);
        assert_eq!(v.reshape(&s(&[6])).unwrap(), v);

        let sq = t(&[2, 2], vec![0.0; 4]);
        assert!(matches!(
            sq.reshape(&s(&[3, 2])),
            Err(Error::CardinalityMismatch { expected: 6, actual: 4 })
        ));
    }

    #[test]
    fn pad_reshape_appends_zeros() {
        let x = t(&[2, 3], (1..=6).map(f64::from).collect());
        let y = x.pad_reshape(&s(&[2, 2, 2])).unwrap();
        assert_eq!(y.len(), 8);
        assert_eq!(&y.data()[..6], x.data());
        assert_eq!(y.data()[6].to_bits(), 0.0f64.to_bits());
        assert_eq!(y.data()[7].to_bits(), 0.0f64.to_bits());

        let v = t(&[4], vec![1.0, 2.0, 3.0, 4.0]);
        let m = v.pad_reshape(&s(&[2, 2])).unwrap();
        assert_eq!(m.data(), v.data());

        assert!(matches!(
            x.pad_reshape(&s(&[5])),
            Err(Error::InfeasibleShape { shape: 5, data: 6 })
        ));
    }

    #[test]
    fn pad_reshape_image_sized() {
        let x = DenseTensor::zeros(s(&[212, 320, 3]));
        let y = x.pad_reshape(&s(&[2270, 3, 30])).unwrap();
        assert_eq!(y.len(), 204_300);
        assert_eq!(y.len() - x.len(), 780);
    }

    #[test]
    fn unpad_inverts_padding() {
        let x = t(&[2, 3], vec![0.5, -1.0, 2.25, 3.0, 1e-300, 7.0]);
        let y = x.pad_reshape(&s(&[2, 2, 2])).unwrap();
        assert_eq!(y.unpad(x.shape()).unwrap(), x);

        let v = t(&[8], vec![1.0; 8]);
        assert_eq!(v.unpad(&s(&[8])).unwrap(), v);

        let short = t(&[4], vec![1.0; 4]);
        assert!(matches!(
            short.unpad(&s(&[2, 3])),
            Err(Error::CardinalityMismatch { .. })
        ));
    }

    #[test]
    fn norms() {
        assert_eq!(t(&[2], vec![3.0, 4.0]).frobenius_norm(), 5.0);
        assert_eq!(t(&[3], vec![0.0; 3]).frobenius_norm(), 0.0);
        assert_eq!(t(&[2, 2], vec![1.0; 4]).frobenius_norm(), 2.0);
    }

    #[test]
    fn unfoldings() {
        let x = DenseTensor::zeros(s(&[2, 3, 4]));
        assert_eq!(x.unfold(2).unwrap().dims(), &[2, 12]);
        let v = DenseTensor::zeros(s(&[6]));
        assert_eq!(v.unfold(6).unwrap().dims(), &[6, 1]);
        let m = DenseTensor::zeros(s(&[2, 3]));
        assert!(matches!(m.unfold(4), Err(Error::NotDivisible { len: 6, rows: 4 })));
    }

    #[test]
    fn multi_index_access() {
        let x = t(&[2, 3], (0..6).map(f64::from).collect());
        assert_eq!(x.get(&[1, 2]), Some(5.0));
        assert_eq!(x.get(&[0, 1]), Some(1.0));
        assert_eq!(x.get(&[2, 0]), None);
    }
}
