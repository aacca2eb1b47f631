//! Pipeline parameter set, validation, and key=value config parsing.

use crate::error::{Error, Result};

/// Default mini-census neighbor pattern: a symmetric six-point cross of the
/// two vertical neighbors at distance 2 and the four diagonal neighbors.
pub const DEFAULT_CENSUS_OFFSETS: [(i32, i32); 6] =
    [(0, -2), (-1, -1), (1, -1), (-1, 1), (1, 1), (0, 2)];

/// Tunable parameters shared by all pipeline stages.
///
/// Brightness thresholds are on the 0-255 scale; `lambda_ad` applies to the
/// absolute brightness difference normalized to `[0, 1]`, `lambda_mc` to the
/// raw Hamming distance.
#[derive(Clone, Debug, PartialEq)]
pub struct Params {
    /// AD cost scale.
    pub lambda_ad: f64,
    /// Mini-census cost scale.
    pub lambda_mc: f64,
    /// Disparity-continuity threshold for bilateral filling.
    pub t_fill: f64,
    /// Maximum horizontal aggregation arm.
    pub w_x: usize,
    /// Maximum vertical aggregation arm.
    pub w_y: usize,
    /// Brightness-similarity threshold for arm growth.
    pub delta_arm: u32,
    /// Scale-down factor.
    pub k_scale: usize,
    /// Mean-pool radius; the pooling window is `(2m+1)^2`.
    pub m_pool: usize,
    /// Maximum disparity at original resolution.
    pub d_max_org: usize,
    /// The six neighbor offsets of the mini-census pattern.
    pub census_offsets: [(i32, i32); 6],
}

impl Default for Params {
    fn default() -> Self {
        Self {
            lambda_ad: 0.3,
            lambda_mc: 2.3,
            t_fill: 3.0,
            w_x: 21,
            w_y: 31,
            delta_arm: 20,
            k_scale: 2,
            m_pool: 1,
            d_max_org: 64,
            census_offsets: DEFAULT_CENSUS_OFFSETS,
        }
    }
}

impl Params {
    /// Defaults with the given maximum disparity at original resolution.
    pub fn with_max_disparity(d_max_org: usize) -> Self {
        Self { d_max_org, ..Self::default() }
    }

    /// Maximum disparity searched at scaled resolution: `ceil(d_max_org / K)`.
    pub fn scaled_max_disparity(&self) -> usize {
        self.d_max_org.div_ceil(self.k_scale)
    }

    /// Check every parameter invariant, reporting the first violation by name.
    pub fn validate(&self) -> Result<()> {
        // NaN fails each check as well
        if self.lambda_ad <= 0.0 || self.lambda_ad.is_nan() {
            return Err(Error::InvalidParams("lambda_ad must be > 0".into()));
        }
        if self.lambda_mc <= 0.0 || self.lambda_mc.is_nan() {
            return Err(Error::InvalidParams("lambda_mc must be > 0".into()));
        }
        if self.t_fill < 0.0 || self.t_fill.is_nan() {
            return Err(Error::InvalidParams("t_fill must be >= 0".into()));
        }
        if self.delta_arm == 0 {
            return Err(Error::InvalidParams("delta_arm must be > 0".into()));
        }
        if self.k_scale < 1 {
            return Err(Error::InvalidParams("k_scale must be >= 1".into()));
        }
        if self.d_max_org < 1 {
            return Err(Error::InvalidParams("d_max_org must be >= 1".into()));
        }
        let mut seen = Vec::new();
        for off in self.census_offsets {
            if off == (0, 0) {
                return Err(Error::InvalidParams("census_offsets must be nonzero".into()));
            }
            if seen.contains(&off) {
                return Err(Error::InvalidParams("census_offsets must be distinct".into()));
            }
            seen.push(off);
        }
        Ok(())
    }

    /// Set one field from its config key. Keys use the flag spelling with
    /// either `-` or `_` separators.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.replace('-', "_");
        let bad = |what: &str| Error::Config(format!("invalid value {value:?} for {what}"));
        match key.as_str() {
            "lambda_ad" => self.lambda_ad = value.parse().map_err(|_| bad("lambda_ad"))?,
            "lambda_mc" => self.lambda_mc = value.parse().map_err(|_| bad("lambda_mc"))?,
            "t_fill" | "tfill" => self.t_fill = value.parse().map_err(|_| bad("t_fill"))?,
            "w_x" | "wx" => self.w_x = value.parse().map_err(|_| bad("w_x"))?,
            "w_y" | "wy" => self.w_y = value.parse().map_err(|_| bad("w_y"))?,
            "delta_arm" | "delta" => {
                self.delta_arm = value.parse().map_err(|_| bad("delta_arm"))?
            }
            "k_scale" | "scale" => self.k_scale = value.parse().map_err(|_| bad("k_scale"))?,
            "m_pool" | "mpool" => self.m_pool = value.parse().map_err(|_| bad("m_pool"))?,
            "d_max_org" | "max_disp" => {
                self.d_max_org = value.parse().map_err(|_| bad("d_max_org"))?
            }
            "census_offsets" => self.census_offsets = parse_census_offsets(value)?,
            _ => return Err(Error::Config(format!("unknown parameter {key:?}"))),
        }
        Ok(())
    }

    /// Serialize as key=value lines; the inverse of [`Params::from_config_str`].
    pub fn to_config_string(&self) -> String {
        let offsets = self
            .census_offsets
            .iter()
            .map(|(dx, dy)| format!("{dx},{dy}"))
            .collect::<Vec<_>>()
            .join(";");
        format!(
            "lambda_ad={}\nlambda_mc={}\nt_fill={}\nw_x={}\nw_y={}\ndelta_arm={}\n\
             k_scale={}\nm_pool={}\nd_max_org={}\ncensus_offsets={}\n",
            self.lambda_ad,
            self.lambda_mc,
            self.t_fill,
            self.w_x,
            self.w_y,
            self.delta_arm,
            self.k_scale,
            self.m_pool,
            self.d_max_org,
            offsets,
        )
    }

    /// Parse key=value lines on top of defaults. Blank lines and `#` comments
    /// are ignored; unknown keys are an error.
    pub fn from_config_str(text: &str) -> Result<Self> {
        let mut params = Self::default();
        for (key, value) in parse_config_lines(text)? {
            params.set(&key, &value)?;
        }
        params.validate()?;
        Ok(params)
    }
}

/// Split key=value lines, skipping blanks and `#` comments.
pub fn parse_config_lines(text: &str) -> Result<Vec<(String, String)>> {
    let mut pairs = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected key=value", lineno + 1)))?;
        pairs.push((key.trim().to_string(), value.trim().to_string()));
    }
    Ok(pairs)
}

/// Parse a census pattern spec like `0,-2;-1,-1;1,-1;-1,1;1,1;0,2`.
pub fn parse_census_offsets(text: &str) -> Result<[(i32, i32); 6]> {
    let bad = || Error::Config(format!("invalid census offsets {text:?}"));
    let mut offsets = Vec::new();
    for part in text.split(';') {
        let (dx, dy) = part.split_once(',').ok_or_else(bad)?;
        let dx = dx.trim().parse().map_err(|_| bad())?;
        let dy = dy.trim().parse().map_err(|_| bad())?;
        offsets.push((dx, dy));
    }
    offsets.try_into().map_err(|_| Error::Config("census_offsets needs exactly 6 entries".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_with_middlebury_disparity_validate() {
        let params = Params::with_max_disparity(145);
        assert!(params.validate().is_ok());
    }

    #[test]
    fn zero_lambda_ad_is_rejected_by_name() {
        let params = Params { lambda_ad: 0.0, ..Params::default() };
        let err = params.validate().unwrap_err().to_string();
        assert!(err.contains("lambda_ad must be > 0"), "got: {err}");
    }

    #[test]
    fn five_census_offsets_are_rejected() {
        assert!(parse_census_offsets("0,-2;-1,-1;1,-1;-1,1;1,1").is_err());
    }

    #[test]
    fn duplicate_census_offsets_are_rejected() {
        let mut params = Params::default();
        params.census_offsets[1] = params.census_offsets[0];
        assert!(params.validate().is_err());
    }

    #[test]
    fn scaled_max_disparity_uses_ceiling() {
        assert_eq!(Params { d_max_org: 145, ..Params::default() }.scaled_max_disparity(), 73);
        assert_eq!(Params { d_max_org: 1, ..Params::default() }.scaled_max_disparity(), 1);
        assert_eq!(Params { d_max_org: 128, ..Params::default() }.scaled_max_disparity(), 64);
    }

    #[test]
    fn scaled_max_disparity_covers_original_range() {
        for d_max in 1..200 {
            for k in 1..5 {
                let params = Params { d_max_org: d_max, k_scale: k, ..Params::default() };
                assert!(params.scaled_max_disparity() * k >= d_max);
            }
        }
    }

    #[test]
    fn config_round_trip_preserves_defaults() {
        let params = Params::default();
        let text = params.to_config_string();
        assert_eq!(Params::from_config_str(&text).unwrap(), params);
    }

    #[test]
    fn config_accepts_flag_spellings_and_comments() {
        let params = Params::from_config_str(
            "# tuned for the half-size set\nlambda-ad=0.4\nwx=5\nmax-disp=90\n",
        )
        .unwrap();
        assert_eq!(params.lambda_ad, 0.4);
        assert_eq!(params.w_x, 5);
        assert_eq!(params.d_max_org, 90);
    }

    #[test]
    fn unknown_config_key_is_an_error() {
        assert!(Params::from_config_str("bogus=1\n").is_err());
    }
}
