//! Similar-brightness arm computation and two-pass cost aggregation.
//!
//! Arms grow pixel by pixel while the brightness stays within `delta` of
//! the center and stop at the first dissimilar pixel, the window cap, or
//! the image border. Aggregation sums the cost over the center arm along
//! x, then sums those row sums along the y arm.

use rayon::prelude::*;

use crate::types::{ArmTable, CostSlice, GrayImage};

/// Horizontal similar-brightness runs, capped at `w_x`.
pub fn arms_horizontal(img: &GrayImage, delta_arm: u32, w_x: usize) -> ArmTable {
    let width = img.width();
    let height = img.height();
    let mut minus = vec![0u32; width * height];
    let mut plus = vec![0u32; width * height];

    minus
        .par_chunks_mut(width)
        .zip(plus.par_chunks_mut(width))
        .enumerate()
        .for_each(|(y, (minus_row, plus_row))| {
            let row = img.row(y);
            for x in 0..width {
                let center = row[x];
                let cap_plus = w_x.min(width - 1 - x);
                let mut n = 0;
                while n < cap_plus && similar(row[x + n + 1], center, delta_arm) {
                    n += 1;
                }
                plus_row[x] = n as u32;

                let cap_minus = w_x.min(x);
                let mut m = 0;
                while m < cap_minus && similar(row[x - m - 1], center, delta_arm) {
                    m += 1;
                }
                minus_row[x] = m as u32;
            }
        });
    ArmTable::new(width, height, minus, plus)
}

/// Vertical similar-brightness runs, capped at `w_y`.
pub fn arms_vertical(img: &GrayImage, delta_arm: u32, w_y: usize) -> ArmTable {
    let width = img.width();
    let height = img.height();
    let mut minus = vec![0u32; width * height];
    let mut plus = vec![0u32; width * height];

    minus
        .par_chunks_mut(width)
        .zip(plus.par_chunks_mut(width))
        .enumerate()
        .for_each(|(y, (minus_row, plus_row))| {
            for x in 0..width {
                let center = img.get(x, y);
                let cap_plus = w_y.min(height - 1 - y);
                let mut n = 0;
                while n < cap_plus && similar(img.get(x, y + n + 1), center, delta_arm) {
                    n += 1;
                }
                plus_row[x] = n as u32;

                let cap_minus = w_y.min(y);
                let mut m = 0;
                while m < cap_minus && similar(img.get(x, y - m - 1), center, delta_arm) {
                    m += 1;
                }
                minus_row[x] = m as u32;
            }
        });
    ArmTable::new(width, height, minus, plus)
}

#[inline]
fn similar(a: u8, b: u8, delta: u32) -> bool {
    (a.abs_diff(b) as u32) < delta
}

/// Sum each pixel's cost over its horizontal arm.
///
/// Summation order is pinned (center, then +dx ascending, then -dx
/// ascending) so results are bit-reproducible.
pub fn aggregate_x(slice: &CostSlice, arms: &ArmTable) -> CostSlice {
    let width = slice.width();
    let height = slice.height();
    assert_eq!((arms.width(), arms.height()), (width, height));

    let mut data = vec![0.0f64; width * height];
    data.par_chunks_mut(width).enumerate().for_each(|(y, out_row)| {
        let row = slice.row(y);
        for (x, out) in out_row.iter_mut().enumerate() {
            let mut sum = row[x];
            for dx in 1..=arms.plus(x, y) as usize {
                sum += row[x + dx];
            }
            for dx in 1..=arms.minus(x, y) as usize {
                sum += row[x - dx];
            }
            *out = sum;
        }
    });
    CostSlice::new(width, height, slice.disparity(), data)
}

/// Sum each pixel's x-aggregated cost over its vertical arm.
pub fn aggregate_y(x_slice: &CostSlice, arms: &ArmTable) -> CostSlice {
    let width = x_slice.width();
    let height = x_slice.height();
    assert_eq!((arms.width(), arms.height()), (width, height));

    let mut data = vec![0.0f64; width * height];
    data.par_chunks_mut(width).enumerate().for_each(|(y, out_row)| {
        for (x, out) in out_row.iter_mut().enumerate() {
            let mut sum = x_slice.get(x, y);
            for dy in 1..=arms.plus(x, y) as usize {
                sum += x_slice.get(x, y + dy);
            }
            for dy in 1..=arms.minus(x, y) as usize {
                sum += x_slice.get(x, y - dy);
            }
            *out = sum;
        }
    });
    CostSlice::new(width, height, x_slice.disparity(), data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn random_image(rng: &mut impl Rng, w: usize, h: usize) -> GrayImage {
        GrayImage::from_fn(w, h, |_, _| rng.random())
    }

    fn random_slice(rng: &mut impl Rng, w: usize, h: usize) -> CostSlice {
        CostSlice::new(w, h, 0, (0..w * h).map(|_| rng.random_range(0.0..2.0)).collect())
    }

    #[test]
    fn constant_row_arms_hit_the_cap() {
        let img = GrayImage::new(64, 3, vec![128; 192]);
        let arms = arms_horizontal(&img, 20, 21);
        assert_eq!(arms.plus(30, 1), 21);
        assert_eq!(arms.minus(30, 1), 21);
        // border-side arm is limited by the border
        assert_eq!(arms.minus(3, 1), 3);
        assert_eq!(arms.plus(61, 1), 2);
    }

    #[test]
    fn step_edge_stops_a_run() {
        let mut row = vec![100u8; 10];
        for v in row.iter_mut().skip(5) {
            *v = 200;
        }
        let img = GrayImage::new(10, 1, row);
        let arms = arms_horizontal(&img, 20, 21);
        assert_eq!(arms.plus(4, 0), 0);
        assert_eq!(arms.minus(5, 0), 0);
        assert_eq!(arms.minus(4, 0), 4);
    }

    #[test]
    fn flanking_similar_pixels_give_symmetric_arms() {
        // seven similar pixels around the center, then dissimilar ones
        let img = GrayImage::new(
            9,
            1,
            vec![200, 100, 101, 102, 100, 103, 104, 105, 200],
        );
        let arms = arms_horizontal(&img, 20, 21);
        assert_eq!(arms.minus(4, 0), 3);
        assert_eq!(arms.plus(4, 0), 3);
    }

    #[test]
    fn constant_column_vertical_arms_hit_the_cap() {
        let img = GrayImage::new(3, 70, vec![50; 210]);
        let arms = arms_vertical(&img, 20, 31);
        assert_eq!(arms.plus(1, 35), 31);
        assert_eq!(arms.minus(1, 35), 31);
    }

    #[test]
    fn vertical_run_of_four() {
        let mut data = vec![200u8; 11];
        for v in data.iter_mut().skip(1).take(9) {
            *v = 100;
        }
        let img = GrayImage::new(1, 11, data);
        let arms = arms_vertical(&img, 20, 31);
        assert_eq!(arms.minus(0, 5), 4);
        assert_eq!(arms.plus(0, 5), 4);
    }

    #[test]
    fn vertical_arms_equal_transposed_horizontal_arms() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(21);
        let img = random_image(&mut rng, 16, 16);
        let transposed = GrayImage::from_fn(16, 16, |x, y| img.get(y, x));
        let vertical = arms_vertical(&img, 20, 7);
        let horizontal = arms_horizontal(&transposed, 20, 7);
        for y in 0..16 {
            for x in 0..16 {
                assert_eq!(vertical.minus(x, y), horizontal.minus(y, x));
                assert_eq!(vertical.plus(x, y), horizontal.plus(y, x));
            }
        }
    }

    #[test]
    fn arm_runs_are_contiguous_and_capped() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(22);
        for _ in 0..10 {
            let w = rng.random_range(4..32);
            let h = rng.random_range(4..16);
            let delta = rng.random_range(1..80);
            let cap = rng.random_range(0..10usize);
            let img = random_image(&mut rng, w, h);
            let arms = arms_horizontal(&img, delta, cap);
            for y in 0..h {
                for x in 0..w {
                    let n = arms.plus(x, y) as usize;
                    assert!(n <= cap.min(w - 1 - x));
                    for dx in 1..=n {
                        assert!(img.get(x + dx, y).abs_diff(img.get(x, y)) < delta as u8);
                    }
                    // maximality: the run stops for a reason
                    if n < cap.min(w - 1 - x) {
                        assert!(img.get(x + n + 1, y).abs_diff(img.get(x, y)) >= delta as u8);
                    }
                }
            }
        }
    }

    #[test]
    fn zero_arms_make_aggregation_identity() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(23);
        let slice = random_slice(&mut rng, 8, 6);
        let arms = ArmTable::new(8, 6, vec![0; 48], vec![0; 48]);
        assert_eq!(aggregate_x(&slice, &arms), slice);
        assert_eq!(aggregate_y(&slice, &arms), slice);
    }

    #[test]
    fn constant_slice_aggregates_to_arm_count_times_value() {
        let img = GrayImage::new(32, 8, vec![90; 256]);
        let arms = arms_horizontal(&img, 20, 5);
        let slice = CostSlice::filled(32, 8, 0, 0.25);
        let agg = aggregate_x(&slice, &arms);
        for y in 0..8 {
            for x in 0..32 {
                let terms = (arms.minus(x, y) + arms.plus(x, y) + 1) as f64;
                assert_eq!(agg.get(x, y), terms * 0.25);
            }
        }
    }

    /// Brute-force oracle with the same pinned summation order.
    fn aggregate_x_oracle(slice: &CostSlice, arms: &ArmTable) -> CostSlice {
        let mut data = Vec::new();
        for y in 0..slice.height() {
            for x in 0..slice.width() {
                let mut sum = slice.get(x, y);
                for dx in 1..=arms.plus(x, y) as usize {
                    sum += slice.get(x + dx, y);
                }
                for dx in 1..=arms.minus(x, y) as usize {
                    sum += slice.get(x - dx, y);
                }
                data.push(sum);
            }
        }
        CostSlice::new(slice.width(), slice.height(), slice.disparity(), data)
    }

    #[test]
    fn aggregation_matches_brute_force_on_random_instances() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(24);
        for _ in 0..10 {
            let img = random_image(&mut rng, 12, 12);
            let slice = random_slice(&mut rng, 12, 12);
            let arms = arms_horizontal(&img, 30, 4);
            assert_eq!(aggregate_x(&slice, &arms), aggregate_x_oracle(&slice, &arms));
        }
    }

    #[test]
    fn aggregation_is_linear() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(25);
        let img = random_image(&mut rng, 12, 12);
        let arms = arms_horizontal(&img, 30, 4);
        let s1 = random_slice(&mut rng, 12, 12);
        let s2 = random_slice(&mut rng, 12, 12);
        let (a, b) = (0.7, 1.9);
        let combined = CostSlice::new(
            12,
            12,
            0,
            s1.data().iter().zip(s2.data()).map(|(u, v)| a * u + b * v).collect(),
        );
        let agg_combined = aggregate_x(&combined, &arms);
        let agg1 = aggregate_x(&s1, &arms);
        let agg2 = aggregate_x(&s2, &arms);
        for i in 0..combined.data().len() {
            let expect = a * agg1.data()[i] + b * agg2.data()[i];
            assert!((agg_combined.data()[i] - expect).abs() < 1e-9);
        }
    }
}
