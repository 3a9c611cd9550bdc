//! File formats: images, raw JSON tensors, TT archives and run reports.

mod archive;
mod image;
mod report;
mod tensor_json;

use std::path::Path;

pub use self::archive::{TtArchive, MAGIC};
pub use self::image::{
    image_to_tensor, load_image, resize_nearest, resized_dims, save_image, tensor_to_image,
    to_pixel,
};
pub use self::report::{history_csv, write_history_csv, RunReport};
pub use self::tensor_json::{load_tensor_json, save_tensor_json};

use crate::error::Result;
use crate::tensor::DenseTensor;

fn has_extension(path: &Path, ext: &str) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case(ext))
}

/// Loads `.json` files as raw tensors and anything else as an image.
/// `resize_longest` only applies to images.
pub fn load_input(path: impl AsRef<Path>, resize_longest: Option<usize>) -> Result<DenseTensor> {
    let path = path.as_ref();
    if has_extension(path, "json") {
        load_tensor_json(path)
    } else {
        load_image(path, resize_longest)
    }
}

/// Writes `.png` files as images and anything else as a JSON tensor.
pub fn save_output(t: &DenseTensor, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    if has_extension(path, "png") {
        save_image(t, path)
    } else {
        save_tensor_json(t, path)
    }
}
