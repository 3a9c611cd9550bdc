//! `TTS1` archive: TT cores plus the shapes needed to undo the padding.
//!
//! Layout, all integers and floats little-endian:
//!
//! ```text
//! magic            4 bytes  "TTS1"
//! k                u32      order of the original tensor
//! original dims    k x u64
//! d                u32      order of the padded tensor
//! padded dims      d x u64
//! ranks            (d + 1) x u64
//! epsilon          f64
//! payload          sum_j r_{j-1} n_j r_j x f64, cores in order, row-major
//! checksum         u32      CRC-32 of every preceding byte
//! ```

use std::path::Path;

use crate::error::{Error, Result};
use crate::tensor::{DenseTensor, Shape};
use crate::tt::TtCores;

pub const MAGIC: &[u8; 4] = b"TTS1";

/// Orders above this are treated as a corrupt header.
const MAX_ORDER: usize = 4096;

#[derive(Clone, Debug, PartialEq)]
pub struct TtArchive {
    pub original_shape: Shape,
    pub padded_shape: Shape,
    pub eps: f64,
    pub cores: TtCores,
}

impl TtArchive {
    pub fn new(cores: TtCores, original_shape: Shape, padded_shape: Shape, eps: f64) -> Result<Self> {
        if cores.mode_sizes() != padded_shape.dims() {
            return Err(Error::ShapeMismatch(cores.mode_sizes(), padded_shape.dims().to_vec()));
        }
        if padded_shape.cardinality() < original_shape.cardinality() {
            return Err(Error::InfeasibleShape {
                shape: padded_shape.cardinality(),
                data: original_shape.cardinality(),
            });
        }
        Ok(TtArchive {
            original_shape,
            padded_shape,
            eps,
            cores,
        })
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let payload_len = 8 * self.cores.param_count();
        let mut out = Vec::with_capacity(64 + payload_len);
        out.extend_from_slice(MAGIC);
        for shape in [&self.original_shape, &self.padded_shape] {
            out.extend_from_slice(&(shape.order() as u32).to_le_bytes());
            for &n in shape.dims() {
                out.extend_from_slice(&(n as u64).to_le_bytes());
            }
        }
        for &r in self.cores.ranks() {
            out.extend_from_slice(&(r as u64).to_le_bytes());
        }
        out.extend_from_slice(&self.eps.to_le_bytes());
        for core in self.cores.cores() {
            for v in core.data() {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        let crc = crc32fast::hash(&out);
        out.extend_from_slice(&crc.to_le_bytes());
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(4)? != MAGIC {
            return Err(Error::MalformedHeader("bad magic".into()));
        }
        let original_shape = r.shape("original")?;
        let padded_shape = r.shape("padded")?;
        let d = padded_shape.order();
        let ranks = (0..=d).map(|_| r.dim()).collect::<Result<Vec<_>>>()?;
        let eps = r.f64()?;

        if ranks[0] != 1 || ranks[d] != 1 || ranks.contains(&0) {
            return Err(Error::MalformedHeader(format!("invalid rank vector {ranks:?}")));
        }
        let mut core_shapes = Vec::with_capacity(d);
        let mut params = 0usize;
        for (j, &n) in padded_shape.dims().iter().enumerate() {
            let shape = Shape::new(vec![ranks[j], n, ranks[j + 1]])
                .map_err(|e| Error::MalformedHeader(e.to_string()))?;
            params = params
                .checked_add(shape.cardinality())
                .ok_or_else(|| Error::MalformedHeader("payload size overflows".into()))?;
            core_shapes.push(shape);
        }
        let expected = params
            .checked_mul(8)
            .and_then(|p| p.checked_add(r.pos + 4))
            .ok_or_else(|| Error::MalformedHeader("payload size overflows".into()))?;
        if bytes.len() != expected {
            return Err(Error::MalformedHeader(format!(
                "expected {expected} bytes, found {}",
                bytes.len()
            )));
        }

        let body = &bytes[..expected - 4];
        let stored = u32::from_le_bytes(bytes[expected - 4..].try_into().expect("4 bytes"));
        let computed = crc32fast::hash(body);
        if stored != computed {
            return Err(Error::ChecksumMismatch { stored, computed });
        }

        let mut cores = Vec::with_capacity(d);
        for shape in core_shapes {
            let values = (0..shape.cardinality())
                .map(|_| r.f64())
                .collect::<Result<Vec<_>>>()?;
            cores.push(DenseTensor::new(shape, values)?);
        }
        let cores = TtCores::new(cores).map_err(|e| Error::MalformedHeader(e.to_string()))?;
        TtArchive::new(cores, original_shape, padded_shape, eps)
            .map_err(|e| Error::MalformedHeader(e.to_string()))
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        TtArchive::from_bytes(&std::fs::read(path)?)
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        let Some(end) = end else {
            return Err(Error::MalformedHeader(format!("truncated at byte {}", self.pos)));
        };
        let out = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn dim(&mut self) -> Result<usize> {
        let v = u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes"));
        usize::try_from(v).map_err(|_| Error::MalformedHeader(format!("dimension {v} too large")))
    }

    fn shape(&mut self, what: &str) -> Result<Shape> {
        let order = self.u32()? as usize;
        if order == 0 || order > MAX_ORDER {
            return Err(Error::MalformedHeader(format!("{what} order {order} out of range")));
        }
        let dims = (0..order).map(|_| self.dim()).collect::<Result<Vec<_>>>()?;
        Shape::new(dims).map_err(|e| Error::MalformedHeader(format!("{what} shape: {e}")))
    }
}
