//! Raw tensors as JSON: `{"shape": [n1, ...], "data": [v, ...]}` in
//! row-major order.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::{DenseTensor, Shape};

#[derive(Serialize, Deserialize)]
struct TensorFile {
    shape: Shape,
    data: Vec<f64>,
}

pub fn load_tensor_json(path: impl AsRef<Path>) -> Result<DenseTensor> {
    let text = std::fs::read_to_string(path)?;
    let file: TensorFile =
        serde_json::from_str(&text).map_err(|e| Error::UnsupportedFormat(e.to_string()))?;
    DenseTensor::new(file.shape, file.data)
}

pub fn save_tensor_json(t: &DenseTensor, path: impl AsRef<Path>) -> Result<()> {
    let file = TensorFile {
        shape: t.shape().clone(),
        data: t.data().to_vec(),
    };
    let text = serde_json::to_string(&file).map_err(|e| Error::UnsupportedFormat(e.to_string()))?;
    std::fs::write(path, text)?;
    Ok(())
}
