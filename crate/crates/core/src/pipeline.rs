//! The optimized end-to-end engine: scale-down, streamed per-disparity
//! cost + aggregation, winner-take-all for both bases, cross-checking,
//! refinement, and scale-up.
//!
//! The cost volume is streamed one disparity at a time; right-base costs
//! are recovered from the left-base slice instead of being recomputed.
//! Every kernel writes each output pixel independently, so results are
//! bit-identical for any worker count.

use std::time::Instant;

use serde::Serialize;

use crate::aggregate::{aggregate_x, aggregate_y, arms_horizontal, arms_vertical};
use crate::cost::{cost_slice_left, mini_census, right_cost_from_left, CensusMap};
use crate::error::{Error, Result};
use crate::matching::{apply_gcp_mask, cross_check_with_tolerance, WtaAccumulator};
use crate::params::Params;
use crate::preprocess::mean_pool_downscale;
use crate::refine::{fill, median3x3, FillStrategy};
use crate::rescale::scale_up;
use crate::types::{ArmTable, CostSlice, DisparityMap, GcpMask, GrayImage};

/// Everything the engine needs besides the two input images.
#[derive(Clone, Debug)]
pub struct PipelineConfig {
    pub params: Params,
    pub fill: FillStrategy,
    /// Run the scale-down / scale-up strategy; disabling it matches at
    /// full resolution with `d_max_org` candidates.
    pub downscale: bool,
    /// Worker threads; 0 uses the process default.
    pub threads: usize,
    /// Cross-check disparity tolerance; 0 is the exact check.
    pub cross_tolerance: f32,
}

impl PipelineConfig {
    pub fn new(params: Params) -> Self {
        Self {
            params,
            fill: FillStrategy::Bilateral,
            downscale: true,
            threads: 0,
            cross_tolerance: 0.0,
        }
    }
}

/// Wall time spent in each stage, milliseconds.
#[derive(Clone, Debug, Default, Serialize)]
pub struct StageTimings {
    pub scale_down_ms: f64,
    pub arms_x_ms: f64,
    pub cost_agg_x_ms: f64,
    pub arms_y_ms: f64,
    pub agg_y_wta_ms: f64,
    pub cross_check_ms: f64,
    pub post_ms: f64,
    pub scale_up_ms: f64,
    pub overall_ms: f64,
}

/// Every intermediate product of a run, for differential testing and
/// debugging. Holding the full per-disparity slice lists is only sensible
/// at small sizes.
#[derive(Clone, Debug)]
pub struct StageOutputs {
    pub left_scaled: GrayImage,
    pub right_scaled: GrayImage,
    pub census_left: CensusMap,
    pub census_right: CensusMap,
    pub arms_x_left: ArmTable,
    pub arms_x_right: ArmTable,
    pub arms_y_left: ArmTable,
    pub arms_y_right: ArmTable,
    pub cost_left: Vec<CostSlice>,
    pub cost_right: Vec<CostSlice>,
    pub agg_x_left: Vec<CostSlice>,
    pub agg_x_right: Vec<CostSlice>,
    pub agg_left: Vec<CostSlice>,
    pub agg_right: Vec<CostSlice>,
    pub wta_left: DisparityMap,
    pub wta_right: DisparityMap,
    pub gcp: GcpMask,
    pub masked: DisparityMap,
    pub median: DisparityMap,
    pub filled: DisparityMap,
}

/// Final disparity map plus run metadata.
#[derive(Clone, Debug)]
pub struct PipelineOutput {
    /// Disparity at original resolution (scaled resolution when the
    /// scale-down strategy is disabled).
    pub disparity: DisparityMap,
    pub timings: StageTimings,
    pub stages: Option<Box<StageOutputs>>,
}

/// Run the full pipeline.
pub fn run_pipeline(
    left: &GrayImage,
    right: &GrayImage,
    cfg: &PipelineConfig,
) -> Result<PipelineOutput> {
    run_with_pool(left, right, cfg, false)
}

/// Run the full pipeline and keep every intermediate stage.
pub fn run_pipeline_captured(
    left: &GrayImage,
    right: &GrayImage,
    cfg: &PipelineConfig,
) -> Result<PipelineOutput> {
    run_with_pool(left, right, cfg, true)
}

fn run_with_pool(
    left: &GrayImage,
    right: &GrayImage,
    cfg: &PipelineConfig,
    capture: bool,
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
    if cfg.downscale
        && (left.width() < cfg.params.k_scale || left.height() < cfg.params.k_scale)
    {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} image cannot be scaled down by K={}",
            left.width(),
            left.height(),
            cfg.params.k_scale
        )));
    }
    if cfg.threads == 0 {
        run_inner(left, right, cfg, capture)
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.threads)
            .build()
            .map_err(|e| Error::Pipeline(format!("failed to build thread pool: {e}")))?;
        pool.install(|| run_inner(left, right, cfg, capture))
    }
}

fn ms(since: Instant) -> f64 {
    since.elapsed().as_secs_f64() * 1e3
}

fn run_inner(
    left: &GrayImage,
    right: &GrayImage,
    cfg: &PipelineConfig,
    capture: bool,
) -> Result<PipelineOutput> {
    let params = &cfg.params;
    let start = Instant::now();
    let mut timings = StageTimings::default();

    // Step 1: scale both views down
    let t = Instant::now();
    let (l, r, d_max) = if cfg.downscale {
        (
            mean_pool_downscale(left, params.k_scale, params.m_pool),
            mean_pool_downscale(right, params.k_scale, params.m_pool),
            params.scaled_max_disparity(),
        )
    } else {
        (left.clone(), right.clone(), params.d_max_org)
    };
    timings.scale_down_ms = ms(t);
    let (width, height) = (l.width(), l.height());

    // Step 2: brightness runs along x, for both bases
    let t = Instant::now();
    let arms_x_left = arms_horizontal(&l, params.delta_arm, params.w_x);
    let arms_x_right = arms_horizontal(&r, params.delta_arm, params.w_x);
    timings.arms_x_ms = ms(t);

    // Step 4: brightness runs along y
    let t = Instant::now();
    let arms_y_left = arms_vertical(&l, params.delta_arm, params.w_y);
    let arms_y_right = arms_vertical(&r, params.delta_arm, params.w_y);
    timings.arms_y_ms = ms(t);

    // census codes feed the cost term, so their time counts toward it
    let t = Instant::now();
    let census_left = mini_census(&l, &params.census_offsets);
    let census_right = mini_census(&r, &params.census_offsets);
    timings.cost_agg_x_ms += ms(t);

    // Steps 3 and 5, streamed over the disparity candidates
    let mut acc_left = WtaAccumulator::new(width, height);
    let mut acc_right = WtaAccumulator::new(width, height);
    let mut captured: Option<Box<StageOutputs>> = None;
    if capture {
        captured = Some(Box::new(StageOutputs {
            left_scaled: l.clone(),
            right_scaled: r.clone(),
            census_left: census_left.clone(),
            census_right: census_right.clone(),
            arms_x_left: arms_x_left.clone(),
            arms_x_right: arms_x_right.clone(),
            arms_y_left: arms_y_left.clone(),
            arms_y_right: arms_y_right.clone(),
            cost_left: Vec::new(),
            cost_right: Vec::new(),
            agg_x_left: Vec::new(),
            agg_x_right: Vec::new(),
            agg_left: Vec::new(),
            agg_right: Vec::new(),
            wta_left: DisparityMap::invalid(width, height),
            wta_right: DisparityMap::invalid(width, height),
            gcp: GcpMask::new(width, height, vec![false; width * height]),
            masked: DisparityMap::invalid(width, height),
            median: DisparityMap::invalid(width, height),
            filled: DisparityMap::invalid(width, height),
        }));
    }

    for d in 0..d_max {
        let t = Instant::now();
        let cost_l =
            cost_slice_left(&l, &r, &census_left, &census_right, d, params.lambda_ad, params.lambda_mc);
        let agg_x_l = aggregate_x(&cost_l, &arms_x_left);
        let cost_r = right_cost_from_left(&cost_l);
        let agg_x_r = aggregate_x(&cost_r, &arms_x_right);
        timings.cost_agg_x_ms += ms(t);

        let t = Instant::now();
        let agg_l = aggregate_y(&agg_x_l, &arms_y_left);
        let agg_r = aggregate_y(&agg_x_r, &arms_y_right);
        acc_left.update(&agg_l)?;
        acc_right.update(&agg_r)?;
        timings.agg_y_wta_ms += ms(t);

        if let Some(stages) = captured.as_mut() {
            stages.cost_left.push(cost_l);
            stages.cost_right.push(cost_r);
            stages.agg_x_left.push(agg_x_l);
            stages.agg_x_right.push(agg_x_r);
            stages.agg_left.push(agg_l);
            stages.agg_right.push(agg_r);
        }
    }
    let wta_left = acc_left.finish()?;
    let wta_right = acc_right.finish()?;

    // Step 6: ground control points
    let t = Instant::now();
    let gcp = cross_check_with_tolerance(&wta_left, &wta_right, cfg.cross_tolerance);
    let masked = apply_gcp_mask(&wta_left, &gcp);
    timings.cross_check_ms = ms(t);

    // Step 7: median first, then fill the non-GCPs
    let t = Instant::now();
    let median = median3x3(&masked);
    let filled = fill(&median, &l, params.t_fill, cfg.fill);
    timings.post_ms = ms(t);

    // Step 8: back to original resolution
    let t = Instant::now();
    let disparity = if cfg.downscale { scale_up(&filled, left, params)? } else { filled.clone() };
    timings.scale_up_ms = ms(t);
    timings.overall_ms = ms(start);

    if let Some(stages) = captured.as_mut() {
        stages.wta_left = wta_left;
        stages.wta_right = wta_right;
        stages.gcp = gcp;
        stages.masked = masked;
        stages.median = median;
        stages.filled = filled;
    }

    Ok(PipelineOutput { disparity, timings, stages: captured })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn small_config(d_max: usize) -> PipelineConfig {
        let mut cfg = PipelineConfig::new(Params::with_max_disparity(d_max));
        cfg.params.w_x = 4;
        cfg.params.w_y = 4;
        cfg
    }

    #[test]
    fn identical_views_give_zero_disparity() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(61);
        let img = GrayImage::from_fn(32, 24, |_, _| rng.random());
        let mut cfg = small_config(4);
        cfg.downscale = false;
        let out = run_pipeline(&img, &img, &cfg).unwrap();
        // away from the left border every pixel matches itself at d = 0
        for y in 0..24 {
            for x in 8..32 {
                assert_eq!(out.disparity.get(x, y), 0.0, "at ({x},{y})");
            }
        }
    }

    #[test]
    fn downscaled_run_restores_original_resolution() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(62);
        let left = GrayImage::from_fn(40, 30, |_, _| rng.random());
        let right = GrayImage::from_fn(40, 30, |_, _| rng.random());
        let out = run_pipeline(&left, &right, &small_config(8)).unwrap();
        assert_eq!(out.disparity.width(), 40);
        assert_eq!(out.disparity.height(), 30);
        assert!(out.timings.overall_ms > 0.0);
    }

    #[test]
    fn mismatched_inputs_are_rejected() {
        let a = GrayImage::new(8, 8, vec![0; 64]);
        let b = GrayImage::new(8, 9, vec![0; 72]);
        assert!(run_pipeline(&a, &b, &small_config(4)).is_err());
    }

    #[test]
    fn capture_collects_every_stage() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(63);
        let left = GrayImage::from_fn(16, 12, |_, _| rng.random());
        let right = GrayImage::from_fn(16, 12, |_, _| rng.random());
        let cfg = small_config(6);
        let out = run_pipeline_captured(&left, &right, &cfg).unwrap();
        let stages = out.stages.unwrap();
        let d = cfg.params.scaled_max_disparity();
        assert_eq!(stages.cost_left.len(), d);
        assert_eq!(stages.agg_right.len(), d);
        assert_eq!(stages.wta_left.width(), 8);
    }

    #[test]
    fn thread_count_does_not_change_the_result() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(64);
        let left = GrayImage::from_fn(33, 21, |_, _| rng.random());
        let right = GrayImage::from_fn(33, 21, |_, _| rng.random());
        let mut cfg = small_config(6);
        cfg.threads = 1;
        let single = run_pipeline(&left, &right, &cfg).unwrap();
        cfg.threads = 4;
        let multi = run_pipeline(&left, &right, &cfg).unwrap();
        assert_eq!(single.disparity, multi.disparity);
    }
}
