//! Middlebury PFM disparity maps: single-channel 32-bit float, rows
//! stored bottom-up, scale sign encoding byte order. Infinite values
//! carry the invalid marker.

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::types::{DisparityMap, INVALID_DISPARITY};

pub fn read_pfm(path: &Path) -> Result<DisparityMap> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;

    let mut cursor = 0;
    let magic = read_token(path, &bytes, &mut cursor)?;
    match magic.as_str() {
        "Pf" => {}
        "PF" => return Err(Error::format(path, "color PFM is not supported")),
        _ => return Err(Error::format(path, "not a PFM file")),
    }
    let width: usize = read_token(path, &bytes, &mut cursor)?
        .parse()
        .map_err(|_| Error::format(path, "malformed width"))?;
    let height: usize = read_token(path, &bytes, &mut cursor)?
        .parse()
        .map_err(|_| Error::format(path, "malformed height"))?;
    let scale: f32 = read_token(path, &bytes, &mut cursor)?
        .parse()
        .map_err(|_| Error::format(path, "malformed scale"))?;
    if width == 0 || height == 0 {
        return Err(Error::format(path, "zero image dimension"));
    }
    if scale == 0.0 {
        return Err(Error::format(path, "scale must be nonzero"));
    }
    let little_endian = scale < 0.0;

    let expected = width * height * 4;
    let payload = bytes
        .get(cursor..cursor + expected)
        .ok_or_else(|| Error::format(path, "truncated pixel data"))?;

    // bottom row first
    let mut data = vec![0.0f32; width * height];
    for (row_idx, chunk) in payload.chunks_exact(width * 4).enumerate() {
        let y = height - 1 - row_idx;
        for (x, sample) in chunk.chunks_exact(4).enumerate() {
            let raw: [u8; 4] = sample.try_into().unwrap();
            let v = if little_endian { f32::from_le_bytes(raw) } else { f32::from_be_bytes(raw) };
            data[y * width + x] = if v.is_finite() { v } else { INVALID_DISPARITY };
        }
    }
    Ok(DisparityMap::new(width, height, data))
}

/// Write little-endian PFM with scale -1.0; invalid pixels become `+inf`.
pub fn write_pfm(map: &DisparityMap, path: &Path) -> Result<()> {
    if map.data().iter().any(|v| v.is_nan()) {
        return Err(Error::format(path, "refusing to write NaN disparities"));
    }
    let mut out = Vec::with_capacity(64 + map.data().len() * 4);
    write!(out, "Pf\n{} {}\n-1.0\n", map.width(), map.height()).unwrap();
    for y in (0..map.height()).rev() {
        for &v in map.row(y) {
            let v = if v.is_finite() { v } else { f32::INFINITY };
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

fn read_token(path: &Path, bytes: &[u8], cursor: &mut usize) -> Result<String> {
    while bytes.get(*cursor).is_some_and(|b| b.is_ascii_whitespace()) {
        *cursor += 1;
    }
    let start = *cursor;
    while bytes.get(*cursor).is_some_and(|b| !b.is_ascii_whitespace()) {
        *cursor += 1;
    }
    if start == *cursor {
        return Err(Error::format(path, "malformed header"));
    }
    let token = std::str::from_utf8(&bytes[start..*cursor])
        .map_err(|_| Error::format(path, "malformed header"))?
        .to_string();
    // the header ends with exactly one whitespace byte
    *cursor += 1;
    Ok(token)
}
