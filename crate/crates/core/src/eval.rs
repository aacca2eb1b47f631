//! Accuracy evaluation against ground-truth disparities.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::types::{DisparityMap, GrayImage};

/// Bad-pixel rates and error statistics for one prediction.
#[derive(Clone, Debug, Serialize)]
pub struct EvalReport {
    /// Threshold in pixels for a prediction to count as bad.
    pub bad_threshold: f64,
    /// Percentage of bad pixels over all GT-valid pixels; a missing
    /// prediction counts as bad.
    pub bad_rate_all: f64,
    /// Same, restricted to non-occluded pixels when a mask is given.
    pub bad_rate_nonocc: Option<f64>,
    /// Mean |pred - gt| in pixels over GT-valid pixels with a valid
    /// prediction.
    pub avg_abs_err: f64,
    /// Fraction of all pixels carrying a valid prediction.
    pub coverage: f64,
}

impl EvalReport {
    /// Aligned text rendering for terminal output.
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "bad-{:<4}      {:6.2} %\navg abs err   {:6.3} px\ncoverage      {:6.2} %\n",
            self.bad_threshold,
            self.bad_rate_all,
            self.avg_abs_err,
            self.coverage * 100.0,
        );
        if let Some(nonocc) = self.bad_rate_nonocc {
            out.push_str(&format!("bad (nonocc)  {nonocc:6.2} %\n"));
        }
        out
    }
}

/// Compare a prediction against ground truth.
///
/// `occ_mask` marks non-occluded pixels with brightness 255 (the
/// Middlebury `mask0nocc` convention); when given, a second bad rate is
/// computed over those pixels only.
pub fn eval_bad(
    pred: &DisparityMap,
    gt: &DisparityMap,
    threshold: f64,
    occ_mask: Option<&GrayImage>,
) -> Result<EvalReport> {
    if (pred.width(), pred.height()) != (gt.width(), gt.height()) {
        return Err(Error::DimensionMismatch(format!(
            "prediction is {}x{}, ground truth is {}x{}",
            pred.width(),
            pred.height(),
            gt.width(),
            gt.height()
        )));
    }
    if let Some(mask) = occ_mask {
        if (mask.width(), mask.height()) != (gt.width(), gt.height()) {
            return Err(Error::DimensionMismatch(format!(
                "occlusion mask is {}x{}, ground truth is {}x{}",
                mask.width(),
                mask.height(),
                gt.width(),
                gt.height()
            )));
        }
    }

    let mut gt_valid = 0usize;
    let mut bad = 0usize;
    let mut nonocc_valid = 0usize;
    let mut nonocc_bad = 0usize;
    let mut err_sum = 0.0f64;
    let mut err_count = 0usize;
    let mut covered = 0usize;

    for (i, (&p, &g)) in pred.data().iter().zip(gt.data()).enumerate() {
        if p.is_finite() {
            covered += 1;
        }
        if !g.is_finite() {
            continue;
        }
        gt_valid += 1;
        let is_bad = !p.is_finite() || (p as f64 - g as f64).abs() > threshold;
        if is_bad {
            bad += 1;
        }
        if p.is_finite() {
            err_sum += (p as f64 - g as f64).abs();
            err_count += 1;
        }
        if occ_mask.is_some_and(|m| m.data()[i] == 255) {
            nonocc_valid += 1;
            if is_bad {
                nonocc_bad += 1;
            }
        }
    }

    let rate = |n: usize, d: usize| if d == 0 { 0.0 } else { 100.0 * n as f64 / d as f64 };
    Ok(EvalReport {
        bad_threshold: threshold,
        bad_rate_all: rate(bad, gt_valid),
        bad_rate_nonocc: occ_mask.map(|_| rate(nonocc_bad, nonocc_valid)),
        avg_abs_err: if err_count == 0 { 0.0 } else { err_sum / err_count as f64 },
        coverage: covered as f64 / pred.data().len() as f64,
    })
}
