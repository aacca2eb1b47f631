//! Deterministic stereo matching engine.
//!
//! The pipeline scales a rectified pair down by mean pooling, computes
//! per-pixel matching costs from brightness differences and a six-point
//! mini-census transform, aggregates the costs over cross-shaped
//! similar-brightness arms, selects disparities by winner-take-all for
//! both bases, cross-checks them into ground control points, refines with
//! a median filter and bilateral gap filling, and scales the map back up.
//!
//! Results are bit-identical for any worker count, and a naive reference
//! implementation ([`oracle::oracle_pipeline`]) reproduces every
//! intermediate stage exactly for differential testing.

pub mod aggregate;
pub mod bench;
pub mod cost;
mod error;
pub mod eval;
pub mod io;
pub mod matching;
pub mod oracle;
pub mod params;
pub mod pipeline;
pub mod preprocess;
pub mod refine;
pub mod rescale;
pub mod types;

pub use error::{Error, Result};
pub use params::Params;
pub use pipeline::{run_pipeline, run_pipeline_captured, PipelineConfig, PipelineOutput};
pub use refine::FillStrategy;
pub use types::{
    ArmTable, CostSlice, DisparityMap, GcpMask, GrayImage, RgbImage, INVALID_DISPARITY,
};
