//! RGB image ingestion and export.

use std::path::Path;

use image::{ImageReader, RgbImage};

use crate::error::{Error, Result};
use crate::tensor::{DenseTensor, Shape};

fn io_or_format(err: image::ImageError) -> Error {
    match err {
        image::ImageError::IoError(e) => Error::Io(e),
        other => Error::UnsupportedFormat(other.to_string()),
    }
}

/// Target `(height, width)` when the longest side becomes `longest`,
/// rounding the short side half up.
pub fn resized_dims(height: usize, width: usize, longest: usize) -> (usize, usize) {
    let scale = |short: usize, long: usize| ((2 * short * longest + long) / (2 * long)).max(1);
    if height >= width {
        (longest, scale(width, height))
    } else {
        (scale(height, width), longest)
    }
}

/// Nearest-neighbour resampling, sampling source pixel centres.
pub fn resize_nearest(img: &RgbImage, height: usize, width: usize) -> RgbImage {
    let (src_w, src_h) = (img.width() as usize, img.height() as usize);
    let pick = |dst: usize, dst_len: usize, src_len: usize| {
        (((2 * dst + 1) * src_len) / (2 * dst_len)).min(src_len - 1) as u32
    };
    RgbImage::from_fn(width as u32, height as u32, |x, y| {
        let sx = pick(x as usize, width, src_w);
        let sy = pick(y as usize, height, src_h);
        *img.get_pixel(sx, sy)
    })
}

/// Loads a PNG or binary PPM as a `(height, width, 3)` tensor of raw 0..=255
/// values, optionally resizing so the longest side is `resize_longest`.
pub fn load_image(path: impl AsRef<Path>, resize_longest: Option<usize>) -> Result<DenseTensor> {
    let reader = ImageReader::open(path.as_ref())?
        .with_guessed_format()
        .map_err(Error::Io)?;
    if reader.format().is_none() {
        return Err(Error::UnsupportedFormat(format!(
            "{} is not a recognised image",
            path.as_ref().display()
        )));
    }
    let mut rgb = reader.decode().map_err(io_or_format)?.to_rgb8();
    if let Some(longest) = resize_longest {
        if longest == 0 {
            return Err(Error::InvalidConfig("resize target must be positive".into()));
        }
        let (h, w) = resized_dims(rgb.height() as usize, rgb.width() as usize, longest);
        if (h, w) != (rgb.height() as usize, rgb.width() as usize) {
            rgb = resize_nearest(&rgb, h, w);
        }
    }
    image_to_tensor(&rgb)
}

pub fn image_to_tensor(img: &RgbImage) -> Result<DenseTensor> {
    let shape = Shape::new(vec![img.height() as usize, img.width() as usize, 3])?;
    let data = img.as_raw().iter().map(|&v| f64::from(v)).collect();
    DenseTensor::new(shape, data)
}

/// Rounds half up and clamps to `0..=255`.
pub fn to_pixel(value: f64) -> u8 {
    (value + 0.5).floor().clamp(0.0, 255.0) as u8
}

pub fn tensor_to_image(t: &DenseTensor) -> Result<RgbImage> {
    let dims = t.dims();
    if dims.len() != 3 || dims[2] != 3 {
        return Err(Error::UnsupportedFormat(format!(
            "an RGB image needs shape (h, w, 3), got {}",
            t.shape()
        )));
    }
    let (h, w) = (u32::try_from(dims[0]), u32::try_from(dims[1]));
    let (Ok(h), Ok(w)) = (h, w) else {
        return Err(Error::UnsupportedFormat("image too large".into()));
    };
    let pixels = t.data().iter().map(|&v| to_pixel(v)).collect();
    Ok(RgbImage::from_raw(w, h, pixels).expect("buffer matches h * w * 3"))
}

/// Writes an order-3 tensor with trailing dimension 3 as an 8-bit PNG.
pub fn save_image(t: &DenseTensor, path: impl AsRef<Path>) -> Result<()> {
    tensor_to_image(t)?
        .save_with_format(path, image::ImageFormat::Png)
        .map_err(io_or_format)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn resize_dims_match_half_scale() {
        assert_eq!(resized_dims(428, 640, 320), (214, 320));
        assert_eq!(resized_dims(640, 428, 320), (320, 214));
        assert_eq!(resized_dims(480, 640, 320), (240, 320));
        // 427 * 0.5 = 213.5 rounds up
        assert_eq!(resized_dims(427, 640, 320), (214, 320));
        assert_eq!(resized_dims(1, 1000, 10), (1, 10));
    }

    #[test]
    fn nearest_neighbour_halving_picks_odd_pixels() {
        let img = RgbImage::from_fn(4, 2, |x, y| image::Rgb([x as u8, y as u8, 0]));
        let small = resize_nearest(&img, 1, 2);
        assert_eq!(small.get_pixel(0, 0).0, [1, 1, 0]);
        assert_eq!(small.get_pixel(1, 0).0, [3, 1, 0]);
    }

    #[test]
    fn pixel_rounding() {
        assert_eq!(to_pixel(255.7), 255);
        assert_eq!(to_pixel(-0.4), 0);
        assert_eq!(to_pixel(12.5), 13);
        assert_eq!(to_pixel(12.49), 12);
        assert_eq!(to_pixel(1e9), 255);
    }

    #[test]
    fn non_rgb_tensor_rejected() {
        let t = DenseTensor::zeros(Shape::new(vec![2, 2, 4]).unwrap());
        assert!(matches!(tensor_to_image(&t), Err(Error::UnsupportedFormat(_))));
    }
}
