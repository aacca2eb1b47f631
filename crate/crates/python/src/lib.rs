//! Python bindings exposing the stereo matching engine.
//!
//! The native module is `stereopipe_py`; build with
//! `cargo build -p stereopipe-python --release` and import the produced
//! `libstereopipe_py.so` as `stereopipe_py` (see `python/smoke_test.py`).

use std::path::PathBuf;

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyBytes;

use stereopipe_core as core;
use stereopipe_core::params::parse_census_offsets;

fn to_py_err(err: core::Error) -> PyErr {
    match &err {
        core::Error::Io { .. } => PyIOError::new_err(err.to_string()),
        _ => PyValueError::new_err(err.to_string()),
    }
}

/// Tunable parameters shared by all pipeline stages.
#[pyclass(name = "Params", skip_from_py_object)]
#[derive(Clone)]
struct PyParams {
    inner: core::Params,
}

#[pymethods]
impl PyParams {
    #[new]
    #[pyo3(signature = (max_disp, **kwargs))]
    fn new(max_disp: usize, kwargs: Option<&Bound<'_, pyo3::types::PyDict>>) -> PyResult<Self> {
        let mut inner = core::Params::with_max_disparity(max_disp);
        if let Some(kwargs) = kwargs {
            for (key, value) in kwargs.iter() {
                let key: String = key.extract()?;
                match key.as_str() {
                    "lambda_ad" => inner.lambda_ad = value.extract()?,
                    "lambda_mc" => inner.lambda_mc = value.extract()?,
                    "t_fill" => inner.t_fill = value.extract()?,
                    "w_x" => inner.w_x = value.extract()?,
                    "w_y" => inner.w_y = value.extract()?,
                    "delta_arm" => inner.delta_arm = value.extract()?,
                    "k_scale" => inner.k_scale = value.extract()?,
                    "m_pool" => inner.m_pool = value.extract()?,
                    "census_offsets" => {
                        let spec: String = value.extract()?;
                        inner.census_offsets = parse_census_offsets(&spec).map_err(to_py_err)?;
                    }
                    other => {
                        return Err(PyValueError::new_err(format!("unknown parameter {other:?}")))
                    }
                }
            }
        }
        inner.validate().map_err(to_py_err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn d_max_org(&self) -> usize {
        self.inner.d_max_org
    }

    #[getter]
    fn w_x(&self) -> usize {
        self.inner.w_x
    }

    #[getter]
    fn w_y(&self) -> usize {
        self.inner.w_y
    }

    /// Maximum disparity searched at scaled resolution.
    fn scaled_max_disparity(&self) -> usize {
        self.inner.scaled_max_disparity()
    }

    /// Serialize as key=value config text.
    fn to_config_string(&self) -> String {
        self.inner.to_config_string()
    }

    /// Parse a key=value config on top of defaults.
    #[staticmethod]
    fn from_config_string(text: &str) -> PyResult<Self> {
        Ok(Self { inner: core::Params::from_config_str(text).map_err(to_py_err)? })
    }

    fn __repr__(&self) -> String {
        format!(
            "Params(max_disp={}, w_x={}, w_y={}, delta_arm={}, k_scale={})",
            self.inner.d_max_org,
            self.inner.w_x,
            self.inner.w_y,
            self.inner.delta_arm,
            self.inner.k_scale
        )
    }
}

/// 8-bit grayscale image, row-major.
#[pyclass(name = "GrayImage", skip_from_py_object)]
#[derive(Clone)]
struct PyGrayImage {
    inner: core::GrayImage,
}

#[pymethods]
impl PyGrayImage {
    #[new]
    fn new(width: usize, height: usize, data: Vec<u8>) -> PyResult<Self> {
        if width == 0 || height == 0 || data.len() != width * height {
            return Err(PyValueError::new_err(format!(
                "need width*height = {} bytes for a {width}x{height} image, got {}",
                width * height,
                data.len()
            )));
        }
        Ok(Self { inner: core::GrayImage::new(width, height, data) })
    }

    #[getter]
    fn width(&self) -> usize {
        self.inner.width()
    }

    #[getter]
    fn height(&self) -> usize {
        self.inner.height()
    }

    fn get(&self, x: usize, y: usize) -> PyResult<u8> {
        if x >= self.inner.width() || y >= self.inner.height() {
            return Err(PyValueError::new_err("pixel out of bounds"));
        }
        Ok(self.inner.get(x, y))
    }

    /// Row-major pixel bytes.
    fn to_bytes<'py>(&self, py: Python<'py>) -> Bound<'py, PyBytes> {
        PyBytes::new(py, self.inner.data())
    }

    fn __repr__(&self) -> String {
        format!("GrayImage({}x{})", self.inner.width(), self.inner.height())
    }
}

/// Disparity map; invalid pixels read as float('inf').
#[pyclass(name = "DisparityMap", skip_from_py_object)]
#[derive(Clone)]
struct PyDisparityMap {
    inner: core::DisparityMap,
}

#[pymethods]
impl PyDisparityMap {
    #[new]
    fn new(width: usize, height: usize, data: Vec<f32>) -> PyResult<Self> {
        if width == 0 || height == 0 || data.len() != width * height {
            return Err(PyValueError::new_err(format!(
                "need width*height = {} values for a {width}x{height} map, got {}",
                width * height,
                data.len()
            )));
        }
        Ok(Self { inner: core::DisparityMap::new(width, height, data) })
    }

    #[getter]
    fn width(&self) -> usize {
        self.inner.width()
    }

    #[getter]
    fn height(&self) -> usize {
        self.inner.height()
    }

    fn get(&self, x: usize, y: usize) -> PyResult<f32> {
        if x >= self.inner.width() || y >= self.inner.height() {
            return Err(PyValueError::new_err("pixel out of bounds"));
        }
        Ok(self.inner.get(x, y))
    }

    fn is_valid(&self, x: usize, y: usize) -> PyResult<bool> {
        Ok(self.get(x, y)?.is_finite())
    }

    fn valid_count(&self) -> usize {
        self.inner.valid_count()
    }

    /// Row-major disparity values.
    fn to_list(&self) -> Vec<f32> {
        self.inner.data().to_vec()
    }

    fn __repr__(&self) -> String {
        format!("DisparityMap({}x{})", self.inner.width(), self.inner.height())
    }
}

fn pipeline_config(
    params: &PyParams,
    fill: &str,
    downscale: bool,
    threads: usize,
) -> PyResult<core::PipelineConfig> {
    let fill = core::FillStrategy::parse(fill)
        .ok_or_else(|| PyValueError::new_err(format!("unknown fill strategy {fill:?}")))?;
    Ok(core::PipelineConfig { params: params.inner.clone(), fill, downscale, threads })
}

/// Run the full matching pipeline on a rectified pair.
#[pyfunction]
#[pyo3(signature = (left, right, params, *, fill = "bilateral", downscale = true, threads = 0))]
fn compute_disparity(
    py: Python<'_>,
    left: &PyGrayImage,
    right: &PyGrayImage,
    params: &PyParams,
    fill: &str,
    downscale: bool,
    threads: usize,
) -> PyResult<PyDisparityMap> {
    let cfg = pipeline_config(params, fill, downscale, threads)?;
    let (l, r) = (left.inner.clone(), right.inner.clone());
    let out = py
        .detach(move || core::run_pipeline(&l, &r, &cfg))
        .map_err(to_py_err)?;
    Ok(PyDisparityMap { inner: out.disparity })
}

/// Run the naive single-threaded reference pipeline.
#[pyfunction]
#[pyo3(signature = (left, right, params, *, fill = "bilateral", downscale = true))]
fn oracle_disparity(
    py: Python<'_>,
    left: &PyGrayImage,
    right: &PyGrayImage,
    params: &PyParams,
    fill: &str,
    downscale: bool,
) -> PyResult<PyDisparityMap> {
    let cfg = pipeline_config(params, fill, downscale, 0)?;
    let (l, r) = (left.inner.clone(), right.inner.clone());
    let out = py
        .detach(move || core::oracle::oracle_pipeline(&l, &r, &cfg))
        .map_err(to_py_err)?;
    Ok(PyDisparityMap { inner: out.disparity })
}

/// Read PGM/PPM/PNG as 8-bit grayscale.
#[pyfunction]
fn read_image(path: PathBuf) -> PyResult<PyGrayImage> {
    Ok(PyGrayImage { inner: core::io::read_image(&path).map_err(to_py_err)? })
}

/// Read a Middlebury PFM disparity map.
#[pyfunction]
fn read_pfm(path: PathBuf) -> PyResult<PyDisparityMap> {
    Ok(PyDisparityMap { inner: core::io::read_pfm(&path).map_err(to_py_err)? })
}

/// Write a disparity map as little-endian PFM.
#[pyfunction]
fn write_pfm(map: &PyDisparityMap, path: PathBuf) -> PyResult<()> {
    core::io::write_pfm(&map.inner, &path).map_err(to_py_err)
}

/// Scale an image down by `k` with a `(2m+1)^2` mean-pool window.
#[pyfunction]
#[pyo3(signature = (img, k_scale = 2, m_pool = 1))]
fn mean_pool_downscale(img: &PyGrayImage, k_scale: usize, m_pool: usize) -> PyResult<PyGrayImage> {
    if img.inner.width() < k_scale || img.inner.height() < k_scale {
        return Err(PyValueError::new_err("image smaller than scale factor"));
    }
    Ok(PyGrayImage { inner: core::preprocess::mean_pool_downscale(&img.inner, k_scale, m_pool) })
}

/// Bad-pixel rates of a prediction against ground truth.
#[pyfunction]
#[pyo3(signature = (pred, gt, threshold = 2.0))]
fn eval_bad(
    py: Python<'_>,
    pred: &PyDisparityMap,
    gt: &PyDisparityMap,
    threshold: f64,
) -> PyResult<Py<pyo3::types::PyDict>> {
    let report = core::eval::eval_bad(&pred.inner, &gt.inner, threshold, None).map_err(to_py_err)?;
    let dict = pyo3::types::PyDict::new(py);
    dict.set_item("bad_threshold", report.bad_threshold)?;
    dict.set_item("bad_rate_all", report.bad_rate_all)?;
    dict.set_item("avg_abs_err", report.avg_abs_err)?;
    dict.set_item("coverage", report.coverage)?;
    Ok(dict.into())
}

/// Absolute-difference cost term.
#[pyfunction]
#[pyo3(signature = (l, r, lambda_ad = 0.3))]
fn cost_ad(l: u8, r: u8, lambda_ad: f64) -> f64 {
    core::cost::cost_ad(l, r, lambda_ad)
}

/// Mini-census cost term for a Hamming distance.
#[pyfunction]
#[pyo3(signature = (hd, lambda_mc = 2.3))]
fn cost_mc(hd: u32, lambda_mc: f64) -> PyResult<f64> {
    if hd > 6 {
        return Err(PyValueError::new_err("Hamming distance of 6-bit codes is at most 6"));
    }
    Ok(core::cost::cost_mc(hd, lambda_mc))
}

/// Hamming distance between two 6-bit census codes.
#[pyfunction]
fn hamming6(a: u8, b: u8) -> PyResult<u32> {
    if a >= 64 || b >= 64 {
        return Err(PyValueError::new_err("census codes are 6-bit (0..64)"));
    }
    Ok(core::cost::hamming6(a, b))
}

/// Depth in meters from disparity, focal length (px), and baseline (m).
#[pyfunction]
fn disparity_to_depth(d: f64, focal_px: f64, baseline_m: f64) -> PyResult<f64> {
    if focal_px <= 0.0 || baseline_m <= 0.0 || d < 0.0 {
        return Err(PyValueError::new_err("need focal_px > 0, baseline_m > 0, d >= 0"));
    }
    Ok(core::rescale::disparity_to_depth(d, focal_px, baseline_m))
}

#[pymodule]
fn stereopipe_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyParams>()?;
    m.add_class::<PyGrayImage>()?;
    m.add_class::<PyDisparityMap>()?;
    m.add_function(wrap_pyfunction!(compute_disparity, m)?)?;
    m.add_function(wrap_pyfunction!(oracle_disparity, m)?)?;
    m.add_function(wrap_pyfunction!(read_image, m)?)?;
    m.add_function(wrap_pyfunction!(read_pfm, m)?)?;
    m.add_function(wrap_pyfunction!(write_pfm, m)?)?;
    m.add_function(wrap_pyfunction!(mean_pool_downscale, m)?)?;
    m.add_function(wrap_pyfunction!(eval_bad, m)?)?;
    m.add_function(wrap_pyfunction!(cost_ad, m)?)?;
    m.add_function(wrap_pyfunction!(cost_mc, m)?)?;
    m.add_function(wrap_pyfunction!(hamming6, m)?)?;
    m.add_function(wrap_pyfunction!(disparity_to_depth, m)?)?;
    m.add("INVALID_DISPARITY", f64::INFINITY)?;
    Ok(())
}
