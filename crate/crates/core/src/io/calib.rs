//! Middlebury `calib.txt` parsing, enough to default the disparity range
//! and check image dimensions.

use std::collections::HashMap;
use std::path::Path;

use crate::error::{Error, Result};

/// The subset of `calib.txt` the pipeline needs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CalibInfo {
    pub ndisp: usize,
    pub width: usize,
    pub height: usize,
}

pub fn read_middlebury_calib(path: &Path) -> Result<CalibInfo> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut map = HashMap::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::format(path, format!("expected key=value, got {line:?}")))?;
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    let get = |key: &str| -> Result<usize> {
        map.get(key)
            .ok_or_else(|| Error::format(path, format!("missing key {key:?}")))?
            .parse()
            .map_err(|_| Error::format(path, format!("malformed value for {key:?}")))
    };
    Ok(CalibInfo { ndisp: get("ndisp")?, width: get("width")?, height: get("height")? })
}
