//! Scale-up of the refined disparity map and disparity-to-depth conversion.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::params::Params;
use crate::refine::{fill_row, FillStrategy};
use crate::types::{DisparityMap, GrayImage, INVALID_DISPARITY};

/// Scale a refined disparity map back to original resolution.
///
/// Disparity values are multiplied by `K` (a shift measured at half
/// resolution is half the original-resolution shift), seeded onto the
/// `(K*x, K*y)` grid, filled along x with the bilateral rule against
/// original-resolution brightness (threshold scaled to `K*T`), then the
/// remaining rows are interpolated linearly along y.
pub fn scale_up(
    map: &DisparityMap,
    base_org: &GrayImage,
    params: &Params,
) -> Result<DisparityMap> {
    let k = params.k_scale;
    let out_w = base_org.width();
    let out_h = base_org.height();
    if map.width() != out_w / k || map.height() != out_h / k {
        return Err(Error::DimensionMismatch(format!(
            "scaled map is {}x{}, expected {}x{} for a {}x{} original at K={}",
            map.width(),
            map.height(),
            out_w / k,
            out_h / k,
            out_w,
            out_h,
            k
        )));
    }

    let mut data = vec![INVALID_DISPARITY; out_w * out_h];
    for ys in 0..map.height() {
        for xs in 0..map.width() {
            let v = map.get(xs, ys);
            if v.is_finite() {
                data[ys * k * out_w + xs * k] = v * k as f32;
            }
        }
    }

    // x-pass over seeded rows
    let seeded = |y: usize| y.is_multiple_of(k) && y / k < map.height();
    let t_scaled = params.t_fill * k as f64;
    data.par_chunks_mut(out_w).enumerate().for_each(|(y, row)| {
        if seeded(y) {
            let snapshot = row.to_vec();
            fill_row(&snapshot, base_org.row(y), t_scaled, FillStrategy::Bilateral, row);
        }
    });

    // y-pass: linear interpolation between the seeded rows above and below
    let last_seeded = (map.height() - 1) * k;
    let interpolated: Vec<f32> = (0..out_w * out_h)
        .into_par_iter()
        .map(|idx| {
            let (x, y) = (idx % out_w, idx / out_w);
            if seeded(y) {
                return data[idx];
            }
            let y0 = (y / k) * k;
            if y0 >= last_seeded {
                return data[last_seeded * out_w + x];
            }
            let y1 = y0 + k;
            let a = data[y0 * out_w + x];
            let b = data[y1 * out_w + x];
            match (a.is_finite(), b.is_finite()) {
                (true, true) => {
                    let w = (y - y0) as f64 / k as f64;
                    (a as f64 + w * (b as f64 - a as f64)) as f32
                }
                (true, false) => a,
                (false, true) => b,
                (false, false) => INVALID_DISPARITY,
            }
        })
        .collect();

    Ok(DisparityMap::new(out_w, out_h, interpolated))
}

/// Depth from disparity, `Z = f * B / d`; zero disparity maps to infinity.
pub fn disparity_to_depth(d: f64, focal_px: f64, baseline_m: f64) -> f64 {
    assert!(focal_px > 0.0 && baseline_m > 0.0 && d >= 0.0);
    if d == 0.0 {
        f64::INFINITY
    } else {
        focal_px * baseline_m / d
    }
}
