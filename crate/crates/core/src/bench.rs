//! Throughput measurement with the stage taxonomy of the reference
//! timing tables.

use serde::Serialize;

use crate::error::Result;
use crate::pipeline::{run_pipeline, PipelineConfig, StageTimings};
use crate::types::GrayImage;

/// Stage times (medians over the repetitions) and normalized throughput.
#[derive(Clone, Debug, Serialize)]
pub struct BenchReport {
    /// Original-resolution width, height, and disparity range; throughput
    /// is normalized to this triple even though the core runs scaled.
    pub width: usize,
    pub height: usize,
    pub d_max: usize,
    pub repetitions: usize,
    pub timings: StageTimings,
    pub fps: f64,
    /// Mega disparity evaluations per second:
    /// `width * height * d_max * fps / 1e6`.
    pub mde_per_s: f64,
}

impl BenchReport {
    pub fn from_timings(
        width: usize,
        height: usize,
        d_max: usize,
        repetitions: usize,
        timings: StageTimings,
    ) -> Self {
        let fps = 1000.0 / timings.overall_ms;
        let mde_per_s = mde_per_s(width, height, d_max, fps);
        Self { width, height, d_max, repetitions, timings, fps, mde_per_s }
    }

    pub fn to_text(&self) -> String {
        let t = &self.timings;
        format!(
            "image         {}x{}  Dmax {}\n\
             SD            {:9.3} ms\n\
             W+-   (x)     {:9.3} ms\n\
             C+CAx         {:9.3} ms\n\
             W*+-  (y)     {:9.3} ms\n\
             CA            {:9.3} ms\n\
             CC            {:9.3} ms\n\
             Post          {:9.3} ms\n\
             SU            {:9.3} ms\n\
             Overall       {:9.3} ms  ({:.2} fps)\n\
             MDE/s         {:9.0}\n",
            self.width,
            self.height,
            self.d_max,
            t.scale_down_ms,
            t.arms_x_ms,
            t.cost_agg_x_ms,
            t.arms_y_ms,
            t.agg_y_wta_ms,
            t.cross_check_ms,
            t.post_ms,
            t.scale_up_ms,
            t.overall_ms,
            self.fps,
            self.mde_per_s,
        )
    }
}

/// Resolution-normalized throughput in mega disparity evaluations per
/// second.
pub fn mde_per_s(width: usize, height: usize, d_max: usize, fps: f64) -> f64 {
    width as f64 * height as f64 * d_max as f64 * fps / 1e6
}

/// Run the pipeline `repetitions` times and report per-stage medians.
pub fn bench_pipeline(
    left: &GrayImage,
    right: &GrayImage,
    cfg: &PipelineConfig,
    repetitions: usize,
) -> Result<BenchReport> {
    assert!(repetitions >= 1);
    let mut runs = Vec::with_capacity(repetitions);
    for _ in 0..repetitions {
        runs.push(run_pipeline(left, right, cfg)?.timings);
    }
    let timings = StageTimings {
        scale_down_ms: median(runs.iter().map(|t| t.scale_down_ms)),
        arms_x_ms: median(runs.iter().map(|t| t.arms_x_ms)),
        cost_agg_x_ms: median(runs.iter().map(|t| t.cost_agg_x_ms)),
        arms_y_ms: median(runs.iter().map(|t| t.arms_y_ms)),
        agg_y_wta_ms: median(runs.iter().map(|t| t.agg_y_wta_ms)),
        cross_check_ms: median(runs.iter().map(|t| t.cross_check_ms)),
        post_ms: median(runs.iter().map(|t| t.post_ms)),
        scale_up_ms: median(runs.iter().map(|t| t.scale_up_ms)),
        overall_ms: median(runs.iter().map(|t| t.overall_ms)),
    };
    Ok(BenchReport::from_timings(
        left.width(),
        left.height(),
        cfg.params.d_max_org,
        repetitions,
        timings,
    ))
}

fn median(values: impl Iterator<Item = f64>) -> f64 {
    let mut values: Vec<f64> = values.collect();
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    values[(values.len() - 1) / 2]
}
