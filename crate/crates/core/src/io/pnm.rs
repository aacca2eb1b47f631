//! PGM/PPM decoding, ASCII (P2/P3) and binary (P5/P6), 8-bit only.

use std::path::Path;

use super::DecodedImage;
use crate::error::{Error, Result};
use crate::types::{GrayImage, RgbImage};

pub fn read_pnm(path: &Path) -> Result<DecodedImage> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_pnm(path, &bytes)
}

pub(super) fn decode_pnm(path: &Path, bytes: &[u8]) -> Result<DecodedImage> {
    let magic = bytes.get(..2).ok_or_else(|| Error::format(path, "truncated header"))?;
    let (channels, ascii) = match magic {
        b"P2" => (1, true),
        b"P5" => (1, false),
        b"P3" => (3, true),
        b"P6" => (3, false),
        _ => return Err(Error::format(path, "unsupported PNM variant (want P2/P3/P5/P6)")),
    };

    let mut cursor = 2;
    let width = read_header_int(path, bytes, &mut cursor)?;
    let height = read_header_int(path, bytes, &mut cursor)?;
    let maxval = read_header_int(path, bytes, &mut cursor)?;
    if width == 0 || height == 0 {
        return Err(Error::format(path, "zero image dimension"));
    }
    if maxval == 0 || maxval > 255 {
        return Err(Error::format(path, format!("unsupported bit depth (maxval {maxval})")));
    }

    let count = width * height * channels;
    let data = if ascii {
        let mut values = Vec::with_capacity(count);
        for _ in 0..count {
            values.push(read_header_int(path, bytes, &mut cursor)? as u8);
        }
        values
    } else {
        // binary data begins after exactly one whitespace byte past maxval
        cursor += 1;
        let end = cursor + count;
        if bytes.len() < end {
            return Err(Error::format(path, "truncated pixel data"));
        }
        bytes[cursor..end].to_vec()
    };
    if data.iter().any(|&v| v as usize > maxval) {
        return Err(Error::format(path, "sample exceeds maxval"));
    }

    Ok(if channels == 1 {
        DecodedImage::Gray(GrayImage::new(width, height, data))
    } else {
        DecodedImage::Rgb(RgbImage::new(width, height, data))
    })
}

/// Next unsigned integer token, skipping whitespace and `#` comments.
fn read_header_int(path: &Path, bytes: &[u8], cursor: &mut usize) -> Result<usize> {
    loop {
        match bytes.get(*cursor) {
            Some(b) if b.is_ascii_whitespace() => *cursor += 1,
            Some(b'#') => {
                while let Some(b) = bytes.get(*cursor) {
                    *cursor += 1;
                    if *b == b'\n' {
                        break;
                    }
                }
            }
            Some(b) if b.is_ascii_digit() => break,
            _ => return Err(Error::format(path, "malformed header")),
        }
    }
    let mut value = 0usize;
    while let Some(b) = bytes.get(*cursor) {
        if !b.is_ascii_digit() {
            break;
        }
        value = value
            .checked_mul(10)
            .and_then(|v| v.checked_add((b - b'0') as usize))
            .ok_or_else(|| Error::format(path, "integer overflow in header"))?;
        *cursor += 1;
    }
    Ok(value)
}
