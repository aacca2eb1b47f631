//! Slow, obviously-correct reference implementation of the whole pipeline
//! for differential testing.
//!
//! Everything is evaluated as nested scalar loops on a single thread, with
//! no slice reuse and no streaming: right-base costs come straight from
//! their own definition instead of shifted left-base slices, arm extents
//! are rescanned per pixel instead of read from precomputed tables, and
//! the full cost volume is held in memory. Policies (border cost,
//! tie-breaks, similarity threshold, rounding, summation order) are the
//! same as the optimized engine, so any divergence isolates an
//! optimization bug.

use crate::cost::{census_code, cost_ad, cost_mc, hamming6, CensusMap, BORDER_COST};
use crate::error::{Error, Result};
use crate::pipeline::{PipelineConfig, PipelineOutput, StageOutputs, StageTimings};
use crate::refine::FillStrategy;
use crate::types::{ArmTable, CostSlice, DisparityMap, GcpMask, GrayImage, INVALID_DISPARITY};

/// Run the reference pipeline, capturing every intermediate stage.
pub fn oracle_pipeline(
    left: &GrayImage,
    right: &GrayImage,
    cfg: &PipelineConfig,
) -> Result<PipelineOutput> {
    cfg.params.validate()?;
    if (left.width(), left.height()) != (right.width(), right.height()) {
        return Err(Error::DimensionMismatch(format!(
            "left is {}x{}, right is {}x{}",
            left.width(),
            left.height(),
            right.width(),
            right.height()
        )));
    }
    let params = &cfg.params;

    let (l, r, d_max) = if cfg.downscale {
        if left.width() < params.k_scale || left.height() < params.k_scale {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} image cannot be scaled down by K={}",
                left.width(),
                left.height(),
                params.k_scale
            )));
        }
        (downscale(left, params.k_scale, params.m_pool), downscale(right, params.k_scale, params.m_pool), params.scaled_max_disparity())
    } else {
        (left.clone(), right.clone(), params.d_max_org)
    };
    let (width, height) = (l.width(), l.height());

    let census_left = census(&l, &params.census_offsets);
    let census_right = census(&r, &params.census_offsets);

    let mut cost_left = Vec::with_capacity(d_max);
    let mut cost_right = Vec::with_capacity(d_max);
    for d in 0..d_max {
        // left base straight from the definition
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(if x < d {
                    BORDER_COST
                } else {
                    cost_ad(l.get(x, y), r.get(x - d, y), params.lambda_ad)
                        + cost_mc(
                            hamming6(census_left.get(x, y), census_right.get(x - d, y)),
                            params.lambda_mc,
                        )
                });
            }
        }
        cost_left.push(CostSlice::new(width, height, d, data));

        // right base computed independently, not by reuse
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(if x + d < width {
                    cost_ad(r.get(x, y), l.get(x + d, y), params.lambda_ad)
                        + cost_mc(
                            hamming6(census_right.get(x, y), census_left.get(x + d, y)),
                            params.lambda_mc,
                        )
                } else {
                    BORDER_COST
                });
            }
        }
        cost_right.push(CostSlice::new(width, height, d, data));
    }

    let agg_x_left: Vec<CostSlice> = cost_left.iter().map(|s| aggregate_x(&l, s, params)).collect();
    let agg_x_right: Vec<CostSlice> =
        cost_right.iter().map(|s| aggregate_x(&r, s, params)).collect();
    let agg_left: Vec<CostSlice> = agg_x_left.iter().map(|s| aggregate_y(&l, s, params)).collect();
    let agg_right: Vec<CostSlice> =
        agg_x_right.iter().map(|s| aggregate_y(&r, s, params)).collect();

    let wta_left = wta(&agg_left);
    let wta_right = wta(&agg_right);

    let gcp = gcps(&wta_left, &wta_right, cfg.cross_tolerance);
    let masked = mask(&wta_left, &gcp);
    let median = median3x3(&masked);
    let filled = fill(&median, &l, params.t_fill, cfg.fill);

    let disparity = if cfg.downscale {
        scale_up(&filled, left, params.k_scale, params.t_fill)
    } else {
        filled.clone()
    };

    // arm tables are recomputed here only so the captured stages can be
    // compared; the aggregation above never reads them
    let stages = StageOutputs {
        left_scaled: l.clone(),
        right_scaled: r.clone(),
        census_left,
        census_right,
        arms_x_left: arm_table(&l, params, Axis::X),
        arms_x_right: arm_table(&r, params, Axis::X),
        arms_y_left: arm_table(&l, params, Axis::Y),
        arms_y_right: arm_table(&r, params, Axis::Y),
        cost_left,
        cost_right,
        agg_x_left,
        agg_x_right,
        agg_left,
        agg_right,
        wta_left,
        wta_right,
        gcp,
        masked,
        median,
        filled,
    };

    Ok(PipelineOutput {
        disparity,
        timings: StageTimings::default(),
        stages: Some(Box::new(stages)),
    })
}

fn downscale(img: &GrayImage, k: usize, m: usize) -> GrayImage {
    let out_w = img.width() / k;
    let out_h = img.height() / k;
    let mut data = Vec::with_capacity(out_w * out_h);
    for y in 0..out_h {
        for x in 0..out_w {
            let mut sum = 0.0f64;
            let mut count = 0.0f64;
            for dy in -(m as isize)..=m as isize {
                for dx in -(m as isize)..=m as isize {
                    sum += img.get_clamped((x * k) as isize + dx, (y * k) as isize + dy) as f64;
                    count += 1.0;
                }
            }
            data.push((sum / count).round() as u8);
        }
    }
    GrayImage::new(out_w, out_h, data)
}

fn census(img: &GrayImage, offsets: &[(i32, i32); 6]) -> CensusMap {
    let mut data = Vec::with_capacity(img.width() * img.height());
    for y in 0..img.height() {
        for x in 0..img.width() {
            data.push(census_code(img, offsets, x, y));
        }
    }
    CensusMap::new(img.width(), img.height(), data)
}

enum Axis {
    X,
    Y,
}

fn arm_table(img: &GrayImage, params: &crate::params::Params, axis: Axis) -> ArmTable {
    let (step_minus, step_plus, cap) = match axis {
        Axis::X => ((-1isize, 0isize), (1isize, 0isize), params.w_x),
        Axis::Y => ((0isize, -1isize), (0isize, 1isize), params.w_y),
    };
    let mut minus = Vec::with_capacity(img.width() * img.height());
    let mut plus = Vec::with_capacity(img.width() * img.height());
    for y in 0..img.height() {
        for x in 0..img.width() {
            minus.push(scan(img, x, y, step_minus, cap, params.delta_arm) as u32);
            plus.push(scan(img, x, y, step_plus, cap, params.delta_arm) as u32);
        }
    }
    ArmTable::new(img.width(), img.height(), minus, plus)
}

fn scan(img: &GrayImage, x: usize, y: usize, step: (isize, isize), cap: usize, delta: u32) -> usize {
    let center = img.get(x, y);
    let mut run = 0;
    while run < cap {
        let nx = x as isize + step.0 * (run as isize + 1);
        let ny = y as isize + step.1 * (run as isize + 1);
        if nx < 0 || ny < 0 || nx >= img.width() as isize || ny >= img.height() as isize {
            break;
        }
        if (img.get(nx as usize, ny as usize).abs_diff(center) as u32) >= delta {
            break;
        }
        run += 1;
    }
    run
}

fn aggregate_x(base: &GrayImage, slice: &CostSlice, params: &crate::params::Params) -> CostSlice {
    let (width, height) = (slice.width(), slice.height());
    let mut data = Vec::with_capacity(width * height);
    for y in 0..height {
        for x in 0..width {
            let plus = scan(base, x, y, (1, 0), params.w_x, params.delta_arm);
            let minus = scan(base, x, y, (-1, 0), params.w_x, params.delta_arm);
            let mut sum = slice.get(x, y);
            for dx in 1..=plus {
                sum += slice.get(x + dx, y);
            }
            for dx in 1..=minus {
                sum += slice.get(x - dx, y);
            }
            data.push(sum);
        }
    }
    CostSlice::new(width, height, slice.disparity(), data)
}

fn aggregate_y(base: &GrayImage, slice: &CostSlice, params: &crate::params::Params) -> CostSlice {
    let (width, height) = (slice.width(), slice.height());
    let mut data = Vec::with_capacity(width * height);
    for y in 0..height {
        for x in 0..width {
            let plus = scan(base, x, y, (0, 1), params.w_y, params.delta_arm);
            let minus = scan(base, x, y, (0, -1), params.w_y, params.delta_arm);
            let mut sum = slice.get(x, y);
            for dy in 1..=plus {
                sum += slice.get(x, y + dy);
            }
            for dy in 1..=minus {
                sum += slice.get(x, y - dy);
            }
            data.push(sum);
        }
    }
    CostSlice::new(width, height, slice.disparity(), data)
}

fn wta(slices: &[CostSlice]) -> DisparityMap {
    let (width, height) = (slices[0].width(), slices[0].height());
    let mut data = Vec::with_capacity(width * height);
    for y in 0..height {
        for x in 0..width {
            let mut best = 0usize;
            let mut best_cost = f64::MAX;
            for (d, slice) in slices.iter().enumerate() {
                if slice.get(x, y) < best_cost {
                    best_cost = slice.get(x, y);
                    best = d;
                }
            }
            data.push(best as f32);
        }
    }
    DisparityMap::new(width, height, data)
}

fn gcps(left_map: &DisparityMap, right_map: &DisparityMap) -> GcpMask {
    let (width, height) = (left_map.width(), left_map.height());
    let mut data = Vec::with_capacity(width * height);
    for y in 0..height {
        for x in 0..width {
            let k = left_map.get(x, y);
            let ok = k.is_finite() && {
                let rx = x as isize - k.round() as isize;
                rx >= 0 && right_map.get(rx as usize, y) == k
            };
            data.push(ok);
        }
    }
    GcpMask::new(width, height, data)
}

fn mask(map: &DisparityMap, gcp: &GcpMask) -> DisparityMap {
    let (width, height) = (map.width(), map.height());
    let mut out = DisparityMap::invalid(width, height);
    for y in 0..height {
        for x in 0..width {
            if gcp.get(x, y) {
                out.set(x, y, map.get(x, y));
            }
        }
    }
    out
}

fn median3x3(map: &DisparityMap) -> DisparityMap {
    let (width, height) = (map.width(), map.height());
    let mut out = DisparityMap::invalid(width, height);
    for y in 0..height {
        for x in 0..width {
            if !map.is_valid(x, y) {
                continue;
            }
            let mut values = Vec::with_capacity(9);
            for dy in -1..=1isize {
                for dx in -1..=1isize {
                    let nx = (x as isize + dx).clamp(0, width as isize - 1) as usize;
                    let ny = (y as isize + dy).clamp(0, height as isize - 1) as usize;
                    let v = map.get(nx, ny);
                    if v.is_finite() {
                        values.push(v);
                    }
                }
            }
            values.sort_by(|a, b| a.partial_cmp(b).unwrap());
            out.set(x, y, values[(values.len() - 1) / 2]);
        }
    }
    out
}

fn fill(map: &DisparityMap, base: &GrayImage, t_fill: f64, strategy: FillStrategy) -> DisparityMap {
    let (width, height) = (map.width(), map.height());
    let mut out = map.clone();
    for y in 0..height {
        for x in 0..width {
            if map.is_valid(x, y) {
                continue;
            }
            let mut left = None;
            for i in 1..=x {
                if map.is_valid(x - i, y) {
                    left = Some((i, map.get(x - i, y)));
                    break;
                }
            }
            let mut right = None;
            for j in 1..width - x {
                if map.is_valid(x + j, y) {
                    right = Some((j, map.get(x + j, y)));
                    break;
                }
            }
            let v = match (left, right) {
                (Some((i, dl)), Some((j, dr))) => match strategy {
                    FillStrategy::Nearest => {
                        if i <= j {
                            dl
                        } else {
                            dr
                        }
                    }
                    FillStrategy::Smaller => dl.min(dr),
                    FillStrategy::Bilateral | FillStrategy::PaperEq11 => {
                        if (dl as f64 - dr as f64).abs() <= t_fill {
                            let slope = match strategy {
                                FillStrategy::Bilateral => dr as f64 - dl as f64,
                                _ => dl as f64 - dr as f64,
                            };
                            (dl as f64 + i as f64 * slope / (i + j) as f64) as f32
                        } else if base.get(x - i, y).abs_diff(base.get(x, y))
                            <= base.get(x + j, y).abs_diff(base.get(x, y))
                        {
                            dl
                        } else {
                            dr
                        }
                    }
                },
                (Some((_, dl)), None) => dl,
                (None, Some((_, dr))) => dr,
                (None, None) => INVALID_DISPARITY,
            };
            out.set(x, y, v);
        }
    }
    // scan-order pass for rows with no valid disparity at all
    let mut last = INVALID_DISPARITY;
    for y in 0..height {
        for x in 0..width {
            if out.is_valid(x, y) {
                last = out.get(x, y);
            } else if last.is_finite() {
                out.set(x, y, last);
            }
        }
    }
    let mut next = INVALID_DISPARITY;
    for y in (0..height).rev() {
        for x in (0..width).rev() {
            if out.is_valid(x, y) {
                next = out.get(x, y);
            } else if next.is_finite() {
                out.set(x, y, next);
            }
        }
    }
    out
}

fn scale_up(map: &DisparityMap, base_org: &GrayImage, k: usize, t_fill: f64) -> DisparityMap {
    let (out_w, out_h) = (base_org.width(), base_org.height());
    let mut out = DisparityMap::invalid(out_w, out_h);
    for ys in 0..map.height() {
        for xs in 0..map.width() {
            let v = map.get(xs, ys);
            if v.is_finite() {
                out.set(xs * k, ys * k, v * k as f32);
            }
        }
    }

    let t_scaled = t_fill * k as f64;
    for ys in 0..map.height() {
        let y = ys * k;
        let snapshot: Vec<f32> = (0..out_w).map(|x| out.get(x, y)).collect();
        for x in 0..out_w {
            if snapshot[x].is_finite() {
                continue;
            }
            let mut left = None;
            for i in 1..=x {
                if snapshot[x - i].is_finite() {
                    left = Some((i, snapshot[x - i]));
                    break;
                }
            }
            let mut right = None;
            for j in 1..out_w - x {
                if snapshot[x + j].is_finite() {
                    right = Some((j, snapshot[x + j]));
                    break;
                }
            }
            let v = match (left, right) {
                (Some((i, dl)), Some((j, dr))) => {
                    if (dl as f64 - dr as f64).abs() <= t_scaled {
                        (dl as f64 + i as f64 * (dr as f64 - dl as f64) / (i + j) as f64) as f32
                    } else if base_org.get(x - i, y).abs_diff(base_org.get(x, y))
                        <= base_org.get(x + j, y).abs_diff(base_org.get(x, y))
                    {
                        dl
                    } else {
                        dr
                    }
                }
                (Some((_, dl)), None) => dl,
                (None, Some((_, dr))) => dr,
                (None, None) => INVALID_DISPARITY,
            };
            out.set(x, y, v);
        }
    }

    let last_seeded = (map.height() - 1) * k;
    let mut final_map = DisparityMap::invalid(out_w, out_h);
    for y in 0..out_h {
        for x in 0..out_w {
            let v = if y % k == 0 && y / k < map.height() {
                out.get(x, y)
            } else {
                let y0 = (y / k) * k;
                if y0 >= last_seeded {
                    out.get(x, last_seeded)
                } else {
                    let a = out.get(x, y0);
                    let b = out.get(x, y0 + k);
                    match (a.is_finite(), b.is_finite()) {
                        (true, true) => {
                            let w = (y - y0) as f64 / k as f64;
                            (a as f64 + w * (b as f64 - a as f64)) as f32
                        }
                        (true, false) => a,
                        (false, true) => b,
                        (false, false) => INVALID_DISPARITY,
                    }
                }
            };
            final_map.set(x, y, v);
        }
    }
    final_map
}
