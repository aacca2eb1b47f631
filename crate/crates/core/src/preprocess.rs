//! Grayscale conversion and mean-pool scale-down of both views.

use rayon::prelude::*;

use crate::types::{GrayImage, RgbImage};

/// BT.601 luma conversion, `round(0.299 R + 0.587 G + 0.114 B)`.
pub fn to_gray(rgb: &RgbImage) -> GrayImage {
    let data = rgb
        .data()
        .chunks_exact(3)
        .map(|p| luma(p[0], p[1], p[2]))
        .collect();
    GrayImage::new(rgb.width(), rgb.height(), data)
}

/// Luma of a single RGB triple.
pub fn luma(r: u8, g: u8, b: u8) -> u8 {
    let y = 0.299 * r as f64 + 0.587 * g as f64 + 0.114 * b as f64;
    y.round().clamp(0.0, 255.0) as u8
}

/// Scale an image down by `k_scale` with a `(2m+1)^2` mean-pool window.
///
/// The output is `floor(width/K) x floor(height/K)`; output pixel `(x, y)`
/// averages the window centered at `(K*x, K*y)`, with window coordinates
/// clamped to the image border. Rounding is half-up on the exact rational
/// mean, done in integer arithmetic so the result does not depend on the
/// platform's float rounding.
pub fn mean_pool_downscale(img: &GrayImage, k_scale: usize, m_pool: usize) -> GrayImage {
    assert!(k_scale >= 1);
    let out_w = img.width() / k_scale;
    let out_h = img.height() / k_scale;
    assert!(out_w >= 1 && out_h >= 1, "image too small for scale factor");

    let window = (2 * m_pool + 1) * (2 * m_pool + 1);
    let m = m_pool as isize;

    let mut data = vec![0u8; out_w * out_h];
    data.par_chunks_mut(out_w).enumerate().for_each(|(y, row)| {
        let cy = (y * k_scale) as isize;
        for (x, out) in row.iter_mut().enumerate() {
            let cx = (x * k_scale) as isize;
            let mut sum: u32 = 0;
            for dy in -m..=m {
                for dx in -m..=m {
                    sum += img.get_clamped(cx + dx, cy + dy) as u32;
                }
            }
            // round-half-up of sum/window
            *out = ((2 * sum + window as u32) / (2 * window as u32)) as u8;
        }
    });
    GrayImage::new(out_w, out_h, data)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn luma_endpoints() {
        assert_eq!(luma(255, 255, 255), 255);
        assert_eq!(luma(0, 0, 0), 0);
    }

    #[test]
    fn luma_matches_direct_evaluation() {
        // round(29.9 + 88.05 + 22.8) = round(140.75) = 141
        assert_eq!(luma(100, 150, 200), 141);
        // solid red, needed by the PPM decode path
        assert_eq!(luma(255, 0, 0), 76);
    }

    #[test]
    fn to_gray_passes_gray_input_through() {
        let rgb = RgbImage::new(2, 1, vec![7, 7, 7, 200, 200, 200]);
        let gray = to_gray(&rgb);
        assert_eq!(gray.data(), &[7, 200]);
    }

    #[test]
    fn constant_image_pools_to_constant() {
        let img = GrayImage::new(6, 4, vec![100; 24]);
        let out = mean_pool_downscale(&img, 2, 1);
        assert_eq!(out.width(), 3);
        assert_eq!(out.height(), 2);
        assert!(out.data().iter().all(|&v| v == 100));
    }

    #[test]
    fn output_dims_are_floor_of_half() {
        let img = GrayImage::new(1436, 992, vec![0; 1436 * 992]);
        let out = mean_pool_downscale(&img, 2, 1);
        assert_eq!((out.width(), out.height()), (718, 496));

        let odd = GrayImage::new(5, 7, vec![0; 35]);
        let out = mean_pool_downscale(&odd, 2, 1);
        assert_eq!((out.width(), out.height()), (2, 3));
    }

    /// Independent scalar oracle: f64 mean of the clamped window, rounded.
    fn pool_oracle(img: &GrayImage, k: usize, m: usize, x: usize, y: usize) -> u8 {
        let mut sum = 0.0;
        let mut count = 0.0;
        for dy in -(m as isize)..=m as isize {
            for dx in -(m as isize)..=m as isize {
                sum += img.get_clamped((x * k) as isize + dx, (y * k) as isize + dy) as f64;
                count += 1.0;
            }
        }
        (sum / count).round() as u8
    }

    #[test]
    fn four_by_four_matches_scalar_oracle() {
        let img = GrayImage::new(
            4,
            4,
            vec![10, 20, 30, 40, 50, 60, 70, 80, 90, 100, 110, 120, 130, 140, 150, 160],
        );
        let out = mean_pool_downscale(&img, 2, 1);
        assert_eq!((out.width(), out.height()), (2, 2));
        for y in 0..2 {
            for x in 0..2 {
                assert_eq!(out.get(x, y), pool_oracle(&img, 2, 1, x, y), "at ({x},{y})");
            }
        }
        // spot-check one corner by hand: window of (0,0) clamps to
        // rows (10,10,20 / 10,10,20 / 50,50,60) -> mean 240/9 = 26.67 -> 27
        assert_eq!(out.get(0, 0), 27);
    }

    #[test]
    fn random_images_match_scalar_oracle() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand::rngs::StdRng::seed_from_u64(11);
        for _ in 0..20 {
            let w = rng.random_range(2..24);
            let h = rng.random_range(2..24);
            let img = GrayImage::from_fn(w, h, |_, _| rng.random());
            let k = rng.random_range(1..4usize).min(w).min(h);
            let m = rng.random_range(0..3);
            let out = mean_pool_downscale(&img, k, m);
            for y in 0..out.height() {
                for x in 0..out.width() {
                    assert_eq!(out.get(x, y), pool_oracle(&img, k, m, x, y));
                }
            }
        }
    }

    #[test]
    fn downscale_commutes_with_mirroring_on_interior() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand::rngs::StdRng::seed_from_u64(12);
        let (w, h) = (16, 10);
        let img = GrayImage::from_fn(w, h, |_, _| rng.random());
        let mirrored = GrayImage::from_fn(w, h, |x, y| img.get(w - 1 - x, y));
        // Mirroring offsets the sampling grid by one source column, so the
        // commuted route needs that shift; equality is then exact away from
        // the columns where border clamping kicks in.
        let shifted = GrayImage::from_fn(w, h, |x, y| img.get_clamped(x as isize + 1, y as isize));

        let via_mirror_first = mean_pool_downscale(&mirrored, 2, 1);
        let via_downscale_first = mean_pool_downscale(&shifted, 2, 1);
        let half_w = via_mirror_first.width();
        for y in 0..via_mirror_first.height() {
            for x in 1..half_w - 1 {
                assert_eq!(
                    via_mirror_first.get(x, y),
                    via_downscale_first.get(half_w - 1 - x, y),
                    "at ({x},{y})"
                );
            }
        }
    }
}
