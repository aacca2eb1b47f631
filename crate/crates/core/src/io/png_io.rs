//! PNG decode (8-bit gray or color) and grayscale encode for
//! visualization output.

use std::path::Path;

use super::DecodedImage;
use crate::error::{Error, Result};
use crate::types::{DisparityMap, GrayImage, RgbImage};

pub fn read_png(path: &Path) -> Result<DecodedImage> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_png(path, &bytes)
}

pub(super) fn decode_png(path: &Path, bytes: &[u8]) -> Result<DecodedImage> {
    let decoder = png::Decoder::new(std::io::Cursor::new(bytes));
    let mut reader = decoder.read_info().map_err(|e| Error::format(path, e.to_string()))?;
    let mut buf = vec![0u8; reader.output_buffer_size().unwrap()];
    let info = reader.next_frame(&mut buf).map_err(|e| Error::format(path, e.to_string()))?;
    if info.bit_depth != png::BitDepth::Eight {
        return Err(Error::format(path, "unsupported bit depth"));
    }
    let width = info.width as usize;
    let height = info.height as usize;
    buf.truncate(info.buffer_size());

    // alpha channels are dropped
    let decoded = match info.color_type {
        png::ColorType::Grayscale => DecodedImage::Gray(GrayImage::new(width, height, buf)),
        png::ColorType::GrayscaleAlpha => {
            let data = buf.chunks_exact(2).map(|p| p[0]).collect();
            DecodedImage::Gray(GrayImage::new(width, height, data))
        }
        png::ColorType::Rgb => DecodedImage::Rgb(RgbImage::new(width, height, buf)),
        png::ColorType::Rgba => {
            let mut data = Vec::with_capacity(width * height * 3);
            for p in buf.chunks_exact(4) {
                data.extend_from_slice(&p[..3]);
            }
            DecodedImage::Rgb(RgbImage::new(width, height, data))
        }
        other => return Err(Error::format(path, format!("unsupported color type {other:?}"))),
    };
    Ok(decoded)
}

pub fn write_gray_png(img: &GrayImage, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut encoder =
        png::Encoder::new(std::io::BufWriter::new(file), img.width() as u32, img.height() as u32);
    encoder.set_color(png::ColorType::Grayscale);
    encoder.set_depth(png::BitDepth::Eight);
    let mut writer = encoder.write_header().map_err(|e| Error::format(path, e.to_string()))?;
    writer.write_image_data(img.data()).map_err(|e| Error::format(path, e.to_string()))?;
    Ok(())
}

/// Render a disparity map as an 8-bit grayscale PNG normalized by
/// `d_max_org`; invalid pixels are black.
pub fn write_visualization(map: &DisparityMap, d_max_org: usize, path: &Path) -> Result<()> {
    let img = GrayImage::from_fn(map.width(), map.height(), |x, y| {
        let v = map.get(x, y);
        if v.is_finite() {
            (v as f64 / d_max_org as f64 * 255.0).round().clamp(0.0, 255.0) as u8
        } else {
            0
        }
    });
    write_gray_png(&img, path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::INVALID_DISPARITY;

    #[test]
    fn gray_png_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("img.png");
        let img = GrayImage::new(3, 2, vec![0, 50, 100, 150, 200, 250]);
        write_gray_png(&img, &path).unwrap();
        match read_png(&path).unwrap() {
            DecodedImage::Gray(back) => assert_eq!(back, img),
            _ => panic!("expected gray"),
        }
    }

    #[test]
    fn sixteen_bit_png_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("deep.png");
        let file = std::fs::File::create(&path).unwrap();
        let mut encoder = png::Encoder::new(std::io::BufWriter::new(file), 2, 1);
        encoder.set_color(png::ColorType::Grayscale);
        encoder.set_depth(png::BitDepth::Sixteen);
        let mut writer = encoder.write_header().unwrap();
        writer.write_image_data(&[0, 1, 0, 2]).unwrap();
        drop(writer);

        let err = read_png(&path).unwrap_err().to_string();
        assert!(err.contains("unsupported bit depth"), "got: {err}");
    }

    #[test]
    fn visualization_normalizes_and_blanks_invalid() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("vis.png");
        let map = DisparityMap::new(3, 1, vec![0.0, 72.5, INVALID_DISPARITY]);
        write_visualization(&map, 145, &path).unwrap();
        match read_png(&path).unwrap() {
            DecodedImage::Gray(img) => {
                assert_eq!(img.get(0, 0), 0);
                assert_eq!(img.get(1, 0), 128); // round(72.5/145*255)
                assert_eq!(img.get(2, 0), 0);
            }
            _ => panic!("expected gray"),
        }
    }
}
