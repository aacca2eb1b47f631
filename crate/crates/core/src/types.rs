//! Grid types shared by every pipeline stage.
//!
//! All grids are row-major with `(x, y)` addressing `data[y * width + x]`.
//! Values are immutable once a grid is built; stages produce new grids
//! instead of mutating their inputs, so grids can be shared freely across
//! worker threads.

/// Disparity value marking a pixel with no (reliable) disparity.
///
/// Serialized as `+inf` in PFM output, following the Middlebury convention.
pub const INVALID_DISPARITY: f32 = f32::INFINITY;

/// 8-bit grayscale image.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl GrayImage {
    /// Wrap row-major brightness values. Panics unless
    /// `data.len() == width * height` and both dimensions are at least 1.
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Self {
        assert!(width >= 1 && height >= 1, "image dimensions must be >= 1");
        assert_eq!(data.len(), width * height, "data length must be width * height");
        Self { width, height, data }
    }

    /// Build an image by evaluating `f(x, y)` at every pixel.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> u8) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self::new(width, height, data)
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

    /// Brightness at `(x, y)` with out-of-bounds coordinates clamped to the
    /// nearest border pixel.
    #[inline]
    pub fn get_clamped(&self, x: isize, y: isize) -> u8 {
        let x = x.clamp(0, self.width as isize - 1) as usize;
        let y = y.clamp(0, self.height as isize - 1) as usize;
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn row(&self, y: usize) -> &[u8] {
        &self.data[y * self.width..(y + 1) * self.width]
    }
}

/// 8-bit RGB image, interleaved row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RgbImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl RgbImage {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Self {
        assert!(width >= 1 && height >= 1, "image dimensions must be >= 1");
        assert_eq!(data.len(), width * height * 3, "data length must be 3 * width * height");
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
    pub fn get(&self, x: usize, y: usize) -> [u8; 3] {
        let i = (y * self.width + x) * 3;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }
}

/// Matching costs for a single disparity candidate.
///
/// The cost volume is never materialized in full: slices are produced one
/// disparity at a time and consumed by aggregation and winner-take-all.
#[derive(Clone, Debug, PartialEq)]
pub struct CostSlice {
    width: usize,
    height: usize,
    d: usize,
    data: Vec<f64>,
}

impl CostSlice {
    pub fn new(width: usize, height: usize, d: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), width * height, "data length must be width * height");
        Self { width, height, d, data }
    }

    pub fn filled(width: usize, height: usize, d: usize, value: f64) -> Self {
        Self::new(width, height, d, vec![value; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Disparity candidate this slice belongs to.
    pub fn disparity(&self) -> usize {
        self.d
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn row(&self, y: usize) -> &[f64] {
        &self.data[y * self.width..(y + 1) * self.width]
    }
}

/// Per-pixel run lengths of similar brightness along one axis.
///
/// `minus` extends toward decreasing coordinate, `plus` toward increasing
/// coordinate. Runs are capped by the aggregation window and never cross
/// the image border.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ArmTable {
    width: usize,
    height: usize,
    minus: Vec<u32>,
    plus: Vec<u32>,
}

impl ArmTable {
    pub fn new(width: usize, height: usize, minus: Vec<u32>, plus: Vec<u32>) -> Self {
        assert_eq!(minus.len(), width * height);
        assert_eq!(plus.len(), width * height);
        Self { width, height, minus, plus }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn minus(&self, x: usize, y: usize) -> u32 {
        self.minus[y * self.width + x]
    }

    #[inline]
    pub fn plus(&self, x: usize, y: usize) -> u32 {
        self.plus[y * self.width + x]
    }

    pub fn minus_data(&self) -> &[u32] {
        &self.minus
    }

    pub fn plus_data(&self) -> &[u32] {
        &self.plus
    }
}

/// Disparity map with an invalid marker.
///
/// Values are integers straight out of winner-take-all selection and may
/// become fractional after bilateral filling and scale-up.
#[derive(Clone, Debug, PartialEq)]
pub struct DisparityMap {
    width: usize,
    height: usize,
    data: Vec<f32>,
}

impl DisparityMap {
    pub fn new(width: usize, height: usize, data: Vec<f32>) -> Self {
        assert!(width >= 1 && height >= 1, "map dimensions must be >= 1");
        assert_eq!(data.len(), width * height, "data length must be width * height");
        Self { width, height, data }
    }

    /// Map of the given size with every pixel invalid.
    pub fn invalid(width: usize, height: usize) -> Self {
        Self::new(width, height, vec![INVALID_DISPARITY; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub(crate) fn data_mut(&mut self) -> &mut [f32] {
        &mut self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f32 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: f32) {
        self.data[y * self.width + x] = v;
    }

    #[inline]
    pub fn is_valid(&self, x: usize, y: usize) -> bool {
        self.get(x, y).is_finite()
    }

    #[inline]
    pub fn row(&self, y: usize) -> &[f32] {
        &self.data[y * self.width..(y + 1) * self.width]
    }

    /// Number of pixels carrying a valid disparity.
    pub fn valid_count(&self) -> usize {
        self.data.iter().filter(|v| v.is_finite()).count()
    }
}

/// Boolean mask of ground-control (cross-check-consistent) pixels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GcpMask {
    width: usize,
    height: usize,
    data: Vec<bool>,
}

impl GcpMask {
    pub fn new(width: usize, height: usize, data: Vec<bool>) -> Self {
        assert_eq!(data.len(), width * height, "data length must be width * height");
        Self { width, height, data }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[bool] {
        &self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.data[y * self.width + x]
    }

    /// Fraction of pixels marked as GCP.
    pub fn fraction(&self) -> f64 {
        let set = self.data.iter().filter(|b| **b).count();
        set as f64 / self.data.len() as f64
    }
}
