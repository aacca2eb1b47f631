//! Disparity map refinement: median filtering and non-GCP filling.

use rayon::prelude::*;

use crate::types::{DisparityMap, GrayImage, INVALID_DISPARITY};

/// How invalid pixels are filled from their flanking valid disparities.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum FillStrategy {
    /// Linear interpolation when the flanking disparities are continuous
    /// (within the threshold), brightness-guided edge-side copy otherwise.
    #[default]
    Bilateral,
    /// Copy the closer flanking disparity (ties go left).
    Nearest,
    /// Copy the smaller flanking disparity (occlusion assumption).
    Smaller,
    /// [`FillStrategy::Bilateral`] with the interpolation sign as printed
    /// in the source formula, kept for fidelity experiments; it
    /// extrapolates away from the right-hand value instead of
    /// interpolating.
    PaperEq11,
}

impl FillStrategy {
    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "bilateral" => Some(Self::Bilateral),
            "nearest" => Some(Self::Nearest),
            "smaller" => Some(Self::Smaller),
            "paper-eq11" | "paper_eq11" => Some(Self::PaperEq11),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Bilateral => "bilateral",
            Self::Nearest => "nearest",
            Self::Smaller => "smaller",
            Self::PaperEq11 => "paper-eq11",
        }
    }
}

/// 3x3 median filter over valid pixels.
///
/// Window coordinates are clamped to the border (corner windows count the
/// corner pixel several times). Invalid pixels stay invalid and do not
/// participate in their neighbors' medians; even-sized value sets take the
/// lower middle.
pub fn median3x3(map: &DisparityMap) -> DisparityMap {
    let width = map.width();
    let height = map.height();
    let mut data = vec![0.0f32; width * height];
    data.par_chunks_mut(width).enumerate().for_each(|(y, out_row)| {
        for (x, out) in out_row.iter_mut().enumerate() {
            if !map.is_valid(x, y) {
                *out = INVALID_DISPARITY;
                continue;
            }
            let mut values = [0.0f32; 9];
            let mut count = 0;
            for dy in -1..=1isize {
                for dx in -1..=1isize {
                    let nx = (x as isize + dx).clamp(0, width as isize - 1) as usize;
                    let ny = (y as isize + dy).clamp(0, height as isize - 1) as usize;
                    let v = map.get(nx, ny);
                    if v.is_finite() {
                        values[count] = v;
                        count += 1;
                    }
                }
            }
            let values = &mut values[..count];
            values.sort_by(|a, b| a.partial_cmp(b).unwrap());
            *out = values[(count - 1) / 2];
        }
    });
    DisparityMap::new(width, height, data)
}

/// Fill invalid pixels from the nearest valid disparities in the same row.
///
/// Each row is resolved against a snapshot of the input (fills never read
/// other fills). Pixels with no valid disparity anywhere in their row are
/// resolved by a final pass that copies the nearest valid value in scan
/// order.
pub fn fill(
    map: &DisparityMap,
    base: &GrayImage,
    t_fill: f64,
    strategy: FillStrategy,
) -> DisparityMap {
    let width = map.width();
    let height = map.height();
    assert_eq!((base.width(), base.height()), (width, height));

    let mut out = map.clone();
    out.data_mut()
        .par_chunks_mut(width)
        .enumerate()
        .for_each(|(y, out_row)| fill_row(map.row(y), base.row(y), t_fill, strategy, out_row));
    fill_scan_order(&mut out);
    out
}

/// Bilateral fill shorthand used by the main pipeline.
pub fn fill_bilateral(map: &DisparityMap, base: &GrayImage, t_fill: f64) -> DisparityMap {
    fill(map, base, t_fill, FillStrategy::Bilateral)
}

/// One row of the fill: `row` is the unfilled snapshot, `out_row` receives
/// the result. Exposed within the crate so scale-up can run the same rule
/// at original resolution.
pub(crate) fn fill_row(
    row: &[f32],
    base_row: &[u8],
    t_fill: f64,
    strategy: FillStrategy,
    out_row: &mut [f32],
) {
    for x in 0..row.len() {
        if row[x].is_finite() {
            out_row[x] = row[x];
            continue;
        }
        let left = (1..=x).map(|i| (i, row[x - i])).find(|(_, v)| v.is_finite());
        let right = (1..row.len() - x).map(|j| (j, row[x + j])).find(|(_, v)| v.is_finite());
        out_row[x] = match (left, right) {
            (Some((i, dl)), Some((j, dr))) => {
                fill_value(i, dl, j, dr, base_row, x, t_fill, strategy)
            }
            (Some((_, dl)), None) => dl,
            (None, Some((_, dr))) => dr,
            (None, None) => INVALID_DISPARITY,
        };
    }
}

#[allow(clippy::too_many_arguments)]
fn fill_value(
    i: usize,
    dl: f32,
    j: usize,
    dr: f32,
    base_row: &[u8],
    x: usize,
    t_fill: f64,
    strategy: FillStrategy,
) -> f32 {
    match strategy {
        FillStrategy::Nearest => {
            if i <= j {
                dl
            } else {
                dr
            }
        }
        FillStrategy::Smaller => dl.min(dr),
        FillStrategy::Bilateral | FillStrategy::PaperEq11 => {
            let (dl64, dr64) = (dl as f64, dr as f64);
            if (dl64 - dr64).abs() <= t_fill {
                let slope = match strategy {
                    FillStrategy::Bilateral => dr64 - dl64,
                    _ => dl64 - dr64,
                };
                (dl64 + i as f64 * slope / (i + j) as f64) as f32
            } else {
                // an edge lies in the gap: side with the closer brightness wins
                let center = base_row[x];
                let diff_l = base_row[x - i].abs_diff(center);
                let diff_r = base_row[x + j].abs_diff(center);
                if diff_l <= diff_r {
                    dl
                } else {
                    dr
                }
            }
        }
    }
}

/// Resolve pixels left invalid by the row pass (rows with no valid
/// disparity at all): copy the most recent valid value in row-major scan
/// order, then sweep backwards for any leading pixels.
fn fill_scan_order(map: &mut DisparityMap) {
    let data = map.data_mut();
    let mut last = INVALID_DISPARITY;
    for v in data.iter_mut() {
        if v.is_finite() {
            last = *v;
        } else if last.is_finite() {
            *v = last;
        }
    }
    let mut next = INVALID_DISPARITY;
    for v in data.iter_mut().rev() {
        if v.is_finite() {
            next = *v;
        } else if next.is_finite() {
            *v = next;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn map_from(values: &[f32]) -> DisparityMap {
        DisparityMap::new(values.len(), 1, values.to_vec())
    }

    const INV: f32 = INVALID_DISPARITY;

    #[test]
    fn median_keeps_constant_maps() {
        let map = DisparityMap::new(5, 4, vec![7.0; 20]);
        assert_eq!(median3x3(&map), map);
    }

    #[test]
    fn median_removes_an_impulse() {
        let mut map = DisparityMap::new(5, 5, vec![5.0; 25]);
        map.set(2, 2, 99.0);
        let out = median3x3(&map);
        assert_eq!(out.get(2, 2), 5.0);
    }

    #[test]
    fn median_passes_all_invalid_through() {
        let map = DisparityMap::invalid(4, 4);
        assert_eq!(median3x3(&map).valid_count(), 0);
    }

    #[test]
    fn median_excludes_invalid_neighbors() {
        // row: 1 INV 9; the center is invalid so it stays invalid, and the
        // 9's window must not see it
        let map = map_from(&[1.0, INV, 9.0]);
        let out = median3x3(&map);
        assert!(!out.is_valid(1, 0));
        // window of x=2 clamps to {1, INV, 9} x 3 rows -> values {1,9,9} x1... sorted [1,9,9,...]
        assert!(out.get(2, 0).is_finite());
    }

    #[test]
    fn median_takes_lower_middle_for_even_counts() {
        // 2x2 map with one invalid pixel: the clamped window of (1,0)
        // holds 8 valid values [1,1,4,4,4,4,9,9]; lower middle is 4
        let map = DisparityMap::new(2, 2, vec![1.0, 4.0, INV, 9.0]);
        let out = median3x3(&map);
        assert_eq!(out.get(1, 0), 4.0);

        // clamping duplicates corner pixels: window of (0,0) in a 2x1 map
        // holds [2,2,2,2,2,2,4,4,4], median 2
        let map2 = DisparityMap::new(2, 1, vec![2.0, 4.0]);
        assert_eq!(median3x3(&map2).get(0, 0), 2.0);
    }

    #[test]
    fn bilateral_fill_interpolates_continuous_gaps() {
        // D(x-2)=4, D(x+2)=6, T=3: |4-6| <= 3 -> 4 + 2*(2/4) = 5
        let map = map_from(&[4.0, INV, INV, INV, 6.0]);
        let base = GrayImage::new(5, 1, vec![100; 5]);
        let out = fill(&map, &base, 3.0, FillStrategy::Bilateral);
        assert_eq!(out.get(2, 0), 5.0);
        assert_eq!(out.get(1, 0), 4.5);
        assert_eq!(out.get(3, 0), 5.5);
    }

    #[test]
    fn bilateral_fill_copies_brightness_side_across_edges() {
        // |10-30| > T; brightness of the left flank matches the center
        let map = map_from(&[10.0, INV, 30.0]);
        let base = GrayImage::new(3, 1, vec![100, 105, 200]);
        let out = fill(&map, &base, 3.0, FillStrategy::Bilateral);
        assert_eq!(out.get(1, 0), 10.0);

        let base = GrayImage::new(3, 1, vec![200, 105, 100]);
        let out = fill(&map, &base, 3.0, FillStrategy::Bilateral);
        assert_eq!(out.get(1, 0), 30.0);
    }

    #[test]
    fn one_sided_rows_copy_the_valid_side() {
        let map = map_from(&[INV, INV, INV, 7.0]);
        let base = GrayImage::new(4, 1, vec![0; 4]);
        for strategy in [
            FillStrategy::Bilateral,
            FillStrategy::Nearest,
            FillStrategy::Smaller,
            FillStrategy::PaperEq11,
        ] {
            let out = fill(&map, &base, 3.0, strategy);
            assert_eq!(out.data(), &[7.0; 4], "{strategy:?}");
        }
    }

    #[test]
    fn nearest_and_smaller_follow_their_definitions() {
        // GCPs at distance i=1 (d=8) and j=4 (d=3) around x=1
        let map = map_from(&[8.0, INV, INV, INV, INV, 3.0]);
        let base = GrayImage::new(6, 1, vec![0; 6]);
        let nearest = fill(&map, &base, 3.0, FillStrategy::Nearest);
        assert_eq!(nearest.get(1, 0), 8.0);
        let smaller = fill(&map, &base, 3.0, FillStrategy::Smaller);
        assert_eq!(smaller.get(1, 0), 3.0);

        // equal distances tie to the left value
        let map = map_from(&[8.0, INV, 3.0]);
        let base = GrayImage::new(3, 1, vec![0; 3]);
        let nearest = fill(&map, &base, 3.0, FillStrategy::Nearest);
        assert_eq!(nearest.get(1, 0), 8.0);
    }

    #[test]
    fn paper_eq11_extrapolates_with_the_printed_sign() {
        let map = map_from(&[4.0, INV, INV, INV, 6.0]);
        let base = GrayImage::new(5, 1, vec![100; 5]);
        let out = fill(&map, &base, 3.0, FillStrategy::PaperEq11);
        // 4 + 2*((4-6)/4) = 3: moves away from the right-hand value
        assert_eq!(out.get(2, 0), 3.0);
    }

    #[test]
    fn filling_never_touches_valid_pixels_and_completes_rows() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand::rngs::StdRng::seed_from_u64(41);
        for _ in 0..50 {
            let w = rng.random_range(2..40);
            let mut values = Vec::with_capacity(w);
            for _ in 0..w {
                if rng.random_bool(0.4) {
                    values.push(rng.random_range(0..16) as f32);
                } else {
                    values.push(INV);
                }
            }
            let map = DisparityMap::new(w, 1, values.clone());
            let base = GrayImage::from_fn(w, 1, |_, _| rng.random());
            let out = fill(&map, &base, 3.0, FillStrategy::Bilateral);
            let row_has_valid = values.iter().any(|v| v.is_finite());
            for (x, &v) in values.iter().enumerate() {
                if v.is_finite() {
                    assert_eq!(out.get(x, 0), v);
                } else if row_has_valid {
                    assert!(out.is_valid(x, 0));
                }
            }
        }
    }

    #[test]
    fn empty_rows_are_filled_from_neighboring_rows_in_scan_order() {
        let mut map = DisparityMap::invalid(3, 3);
        map.set(1, 0, 5.0);
        let base = GrayImage::new(3, 3, vec![0; 9]);
        let out = fill(&map, &base, 3.0, FillStrategy::Bilateral);
        assert_eq!(out.valid_count(), 9);
        assert_eq!(out.get(1, 2), 5.0);
    }

    #[test]
    fn fully_invalid_maps_stay_invalid() {
        let map = DisparityMap::invalid(4, 2);
        let base = GrayImage::new(4, 2, vec![0; 8]);
        let out = fill(&map, &base, 3.0, FillStrategy::Bilateral);
        assert_eq!(out.valid_count(), 0);
    }

    #[test]
    fn interpolated_fills_stay_in_the_flanking_interval() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand::rngs::StdRng::seed_from_u64(42);
        for _ in 0..100 {
            let dl = rng.random_range(0..20) as f32;
            let dr = (dl as i32 + rng.random_range(-3..=3)).max(0) as f32;
            let gap = rng.random_range(1..8);
            let mut values = vec![INV; gap + 2];
            values[0] = dl;
            values[gap + 1] = dr;
            let w = values.len();
            let map = DisparityMap::new(w, 1, values);
            let base = GrayImage::new(w, 1, vec![128; w]);
            let out = fill(&map, &base, 3.0, FillStrategy::Bilateral);
            for x in 1..=gap {
                let v = out.get(x, 0);
                assert!(v >= dl.min(dr) && v <= dl.max(dr), "{v} outside [{dl},{dr}]");
            }
        }
    }
}
