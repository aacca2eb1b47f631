//! Per-pixel matching cost: mini-census transform, AD and census cost
//! terms, left-base cost slices, and right-base reuse.

use rayon::prelude::*;

use crate::types::{CostSlice, GrayImage};

/// Cost assigned where the matching candidate falls outside the image.
///
/// This is the supremum of the valid per-pixel cost range, so border
/// disparities are never preferred over any in-bounds candidate.
pub const BORDER_COST: f64 = 2.0;

/// Per-pixel 6-bit census codes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CensusMap {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl CensusMap {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Self {
        assert_eq!(data.len(), width * height);
        debug_assert!(data.iter().all(|&c| c < 64));
        Self { width, height, data }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.data[y * self.width + x]
    }
}

/// Mini-census transform: bit `i` of the code is set iff the neighbor at
/// `offsets[i]` is strictly darker than the center pixel. Out-of-bounds
/// neighbors are clamped to the border, so ties on flat regions give 0.
pub fn mini_census(img: &GrayImage, offsets: &[(i32, i32); 6]) -> CensusMap {
    let width = img.width();
    let mut data = vec![0u8; width * img.height()];
    data.par_chunks_mut(width).enumerate().for_each(|(y, row)| {
        for (x, out) in row.iter_mut().enumerate() {
            *out = census_code(img, offsets, x, y);
        }
    });
    CensusMap::new(width, img.height(), data)
}

/// Census code of a single pixel; scalar form of [`mini_census`].
pub fn census_code(img: &GrayImage, offsets: &[(i32, i32); 6], x: usize, y: usize) -> u8 {
    let center = img.get(x, y);
    let mut code = 0u8;
    for (i, (dx, dy)) in offsets.iter().enumerate() {
        let neighbor = img.get_clamped(x as isize + *dx as isize, y as isize + *dy as isize);
        if neighbor < center {
            code |= 1 << i;
        }
    }
    code
}

/// Hamming distance between two 6-bit census codes.
#[inline]
pub fn hamming6(a: u8, b: u8) -> u32 {
    debug_assert!(a < 64 && b < 64);
    (a ^ b).count_ones()
}

/// Absolute-difference cost term `1 - exp(-(|l - r| / 255) / lambda_ad)`.
///
/// The difference is normalized to `[0, 1]` before scaling; the result is
/// in `[0, 1)`.
#[inline]
pub fn cost_ad(l: u8, r: u8, lambda_ad: f64) -> f64 {
    let diff = l.abs_diff(r) as f64 / 255.0;
    1.0 - (-diff / lambda_ad).exp()
}

/// Census cost term `1 - exp(-hd / lambda_mc)` for a Hamming distance `hd`.
#[inline]
pub fn cost_mc(hd: u32, lambda_mc: f64) -> f64 {
    1.0 - (-(hd as f64) / lambda_mc).exp()
}

/// Left-base matching cost slice for disparity `d`:
/// `cost(x, y) = cost_ad(L(x,y), R(x-d,y)) + cost_mc(hamming)`, with
/// [`BORDER_COST`] wherever `x - d` falls outside the right image.
pub fn cost_slice_left(
    left: &GrayImage,
    right: &GrayImage,
    census_left: &CensusMap,
    census_right: &CensusMap,
    d: usize,
    lambda_ad: f64,
    lambda_mc: f64,
) -> CostSlice {
    let width = left.width();
    let height = left.height();
    assert_eq!((right.width(), right.height()), (width, height));
    assert_eq!((census_left.width(), census_left.height()), (width, height));
    assert_eq!((census_right.width(), census_right.height()), (width, height));

    let mut data = vec![0.0f64; width * height];
    data.par_chunks_mut(width).enumerate().for_each(|(y, row)| {
        for (x, out) in row.iter_mut().enumerate() {
            *out = if x < d {
                BORDER_COST
            } else {
                let ad = cost_ad(left.get(x, y), right.get(x - d, y), lambda_ad);
                let mc = cost_mc(
                    hamming6(census_left.get(x, y), census_right.get(x - d, y)),
                    lambda_mc,
                );
                ad + mc
            };
        }
    });
    CostSlice::new(width, height, d, data)
}

/// Right-base cost slice recovered from the left-base slice at the same
/// disparity: `C_R(x, y, d) = C_L(x + d, y, d)`, with [`BORDER_COST`]
/// wherever `x + d` runs off the image.
pub fn right_cost_from_left(left_slice: &CostSlice) -> CostSlice {
    let width = left_slice.width();
    let height = left_slice.height();
    let d = left_slice.disparity();

    let mut data = vec![0.0f64; width * height];
    data.par_chunks_mut(width).enumerate().for_each(|(y, row)| {
        let src = left_slice.row(y);
        for (x, out) in row.iter_mut().enumerate() {
            *out = if x + d < width { src[x + d] } else { BORDER_COST };
        }
    });
    CostSlice::new(width, height, d, data)
}
