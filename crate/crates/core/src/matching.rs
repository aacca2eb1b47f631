//! Winner-take-all disparity selection and left/right cross-checking.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::types::{CostSlice, DisparityMap, GcpMask, INVALID_DISPARITY};

/// Running winner-take-all state over a stream of aggregated cost slices.
///
/// Follows the running-minimum update with strict `<`, so cost ties resolve
/// to the smallest disparity.
pub struct WtaAccumulator {
    width: usize,
    height: usize,
    min_cost: Vec<f64>,
    best: Vec<f32>,
    slices_seen: usize,
}

impl WtaAccumulator {
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            min_cost: vec![f64::MAX; width * height],
            best: vec![0.0; width * height],
            slices_seen: 0,
        }
    }

    /// Fold one aggregated slice into the running minimum.
    pub fn update(&mut self, slice: &CostSlice) -> Result<()> {
        if (slice.width(), slice.height()) != (self.width, self.height) {
            return Err(Error::DimensionMismatch(format!(
                "cost slice is {}x{}, expected {}x{}",
                slice.width(),
                slice.height(),
                self.width,
                self.height
            )));
        }
        let d = slice.disparity() as f32;
        self.min_cost
            .par_chunks_mut(self.width)
            .zip(self.best.par_chunks_mut(self.width))
            .zip(slice.data().par_chunks(self.width))
            .for_each(|((min_row, best_row), cost_row)| {
                for x in 0..cost_row.len() {
                    if cost_row[x] < min_row[x] {
                        min_row[x] = cost_row[x];
                        best_row[x] = d;
                    }
                }
            });
        self.slices_seen += 1;
        Ok(())
    }

    pub fn finish(self) -> Result<DisparityMap> {
        if self.slices_seen == 0 {
            return Err(Error::InvalidParams("winner-take-all needs at least one slice".into()));
        }
        Ok(DisparityMap::new(self.width, self.height, self.best))
    }
}

/// Winner-take-all over a finished set of slices.
pub fn wta_select<'a>(slices: impl IntoIterator<Item = &'a CostSlice>) -> Result<DisparityMap> {
    let mut iter = slices.into_iter();
    let first = iter
        .next()
        .ok_or_else(|| Error::InvalidParams("winner-take-all needs at least one slice".into()))?;
    let mut acc = WtaAccumulator::new(first.width(), first.height());
    acc.update(first)?;
    for slice in iter {
        acc.update(slice)?;
    }
    acc.finish()
}

/// Mark pixels whose left-base and right-base disparities agree:
/// `mask(x, y)` is set iff `k = dl(x, y)` is valid, `x - k` is in bounds,
/// and `dr(x - k, y) = k` exactly.
pub fn cross_check(left_map: &DisparityMap, right_map: &DisparityMap) -> GcpMask {
    cross_check_with_tolerance(left_map, right_map, 0.0)
}

/// [`cross_check`] with a disparity tolerance for experimentation; the
/// exact check is `tolerance = 0`.
pub fn cross_check_with_tolerance(
    left_map: &DisparityMap,
    right_map: &DisparityMap,
    tolerance: f32,
) -> GcpMask {
    let width = left_map.width();
    let height = left_map.height();
    assert_eq!((right_map.width(), right_map.height()), (width, height));

    let mut data = vec![false; width * height];
    data.par_chunks_mut(width).enumerate().for_each(|(y, mask_row)| {
        let row = left_map.row(y);
        for (x, out) in mask_row.iter_mut().enumerate() {
            let k = row[x];
            if !k.is_finite() {
                continue;
            }
            let rx = x as isize - k.round() as isize;
            if rx < 0 {
                continue;
            }
            let rk = right_map.get(rx as usize, y);
            *out = rk.is_finite() && (rk - k).abs() <= tolerance;
        }
    });
    GcpMask::new(width, height, data)
}

/// Keep disparities where the mask is set, invalidate the rest.
pub fn apply_gcp_mask(map: &DisparityMap, mask: &GcpMask) -> DisparityMap {
    let width = map.width();
    let height = map.height();
    assert_eq!((mask.width(), mask.height()), (width, height));
    let data = map
        .data()
        .iter()
        .zip(mask.data())
        .map(|(&v, &keep)| if keep { v } else { INVALID_DISPARITY })
        .collect();
    DisparityMap::new(width, height, data)
}
