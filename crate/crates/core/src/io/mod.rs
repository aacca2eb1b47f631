//! File formats: PGM/PPM/PNG image reading, PFM disparity maps,
//! Middlebury `calib.txt`, and disparity visualization.

mod calib;
mod pfm;
mod png_io;
mod pnm;

pub use calib::{read_middlebury_calib, CalibInfo};
pub use pfm::{read_pfm, write_pfm};
pub use png_io::{read_png, write_gray_png, write_visualization};
pub use pnm::read_pnm;

use std::path::Path;

use crate::error::{Error, Result};
use crate::preprocess::to_gray;
use crate::types::{GrayImage, RgbImage};

/// A decoded image before grayscale routing.
#[derive(Debug)]
pub enum DecodedImage {
    Gray(GrayImage),
    Rgb(RgbImage),
}

impl DecodedImage {
    /// Route color data through BT.601 luma; gray data passes through.
    pub fn into_gray(self) -> GrayImage {
        match self {
            DecodedImage::Gray(img) => img,
            DecodedImage::Rgb(img) => to_gray(&img),
        }
    }
}

/// Decode PGM (P2/P5), PPM (P3/P6), or PNG by file magic.
pub fn decode_image(path: &Path) -> Result<DecodedImage> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    match bytes.first() {
        Some(b'P') => pnm::decode_pnm(path, &bytes),
        Some(0x89) => png_io::decode_png(path, &bytes),
        _ => Err(Error::format(path, "unrecognized image format")),
    }
}

/// Read an image as 8-bit grayscale; color input is converted.
pub fn read_image(path: &Path) -> Result<GrayImage> {
    Ok(decode_image(path)?.into_gray())
}
