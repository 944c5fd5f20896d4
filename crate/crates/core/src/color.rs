//! Color representations and conversions.
//!
//! Everything downstream works on [`ColorRGB`] (sRGB, channels in `[0, 1]`)
//! and converts on demand into one of the four analysis spaces of
//! [`ColorSpace`]. CIELab uses the D65 white point and sRGB linearization.

use std::fmt;
use std::sync::LazyLock;

use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use crate::error::ColorError;

/// Number of colors in a theme.
pub const THEME_SIZE: usize = 5;

/// A CIELab triple `[L, a, b]`.
pub type Lab = [f64; 3];

/// An sRGB color with channels in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct ColorRGB {
    pub r: f64,
    pub g: f64,
    pub b: f64,
}

impl ColorRGB {
    pub const BLACK: ColorRGB = ColorRGB {
        r: 0.0,
        g: 0.0,
        b: 0.0,
    };
    pub const WHITE: ColorRGB = ColorRGB {
        r: 1.0,
        g: 1.0,
        b: 1.0,
    };

    /// Builds a color, clamping each channel into `[0, 1]`.
    pub fn new(r: f64, g: f64, b: f64) -> Self {
        ColorRGB {
            r: clamp_unit(r),
            g: clamp_unit(g),
            b: clamp_unit(b),
        }
    }

    /// Lossless conversion from 8-bit channels (`v / 255`).
    pub fn from_u8(rgb: [u8; 3]) -> Self {
        ColorRGB {
            r: f64::from(rgb[0]) / 255.0,
            g: f64::from(rgb[1]) / 255.0,
            b: f64::from(rgb[2]) / 255.0,
        }
    }

    pub fn to_u8(self) -> [u8; 3] {
        let q = |v: f64| (clamp_unit(v) * 255.0).round() as u8;
        [q(self.r), q(self.g), q(self.b)]
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.r, self.g, self.b]
    }

    pub fn to_lab(self) -> Lab {
        rgb_to_lab(self)
    }

    /// Inverse of [`ColorRGB::to_lab`], clipped to the sRGB gamut.
    pub fn from_lab(lab: Lab) -> Self {
        let [r, g, b] = lab_to_rgb_unclipped(lab);
        ColorRGB::new(r, g, b)
    }
}

impl From<[f64; 3]> for ColorRGB {
    fn from(v: [f64; 3]) -> Self {
        ColorRGB::new(v[0], v[1], v[2])
    }
}

impl From<ColorRGB> for [f64; 3] {
    fn from(c: ColorRGB) -> Self {
        c.to_array()
    }
}

impl fmt::Display for ColorRGB {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [r, g, b] = self.to_u8();
        write!(f, "#{r:02x}{g:02x}{b:02x}")
    }
}

fn clamp_unit(v: f64) -> f64 {
    if v.is_nan() {
        0.0
    } else {
        v.clamp(0.0, 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ColorSpace {
    #[serde(rename = "RGB")]
    Rgb,
    #[serde(rename = "HSV")]
    Hsv,
    #[serde(rename = "CIELab")]
    Lab,
    /// Cartesian cone embedding of HSV: `(S cos H, S sin H, V)`.
    #[serde(rename = "CHSV")]
    Chsv,
}

impl ColorSpace {
    pub const ALL: [ColorSpace; 4] = [
        ColorSpace::Rgb,
        ColorSpace::Hsv,
        ColorSpace::Lab,
        ColorSpace::Chsv,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ColorSpace::Rgb => "RGB",
            ColorSpace::Hsv => "HSV",
            ColorSpace::Lab => "CIELab",
            ColorSpace::Chsv => "CHSV",
        }
    }

    pub fn channel_names(self) -> [&'static str; 3] {
        match self {
            ColorSpace::Rgb => ["R", "G", "B"],
            ColorSpace::Hsv => ["H", "S", "V"],
            ColorSpace::Lab => ["L", "a", "b"],
            ColorSpace::Chsv => ["ScosH", "SsinH", "V"],
        }
    }
}

impl fmt::Display for ColorSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A color expressed in one of the analysis spaces.
///
/// HSV hue is in degrees `[0, 360)`, with gray canonicalized to hue 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ColorCoords {
    pub space: ColorSpace,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
}

impl ColorCoords {
    pub fn channels(&self) -> [f64; 3] {
        [self.c1, self.c2, self.c3]
    }
}

pub fn convert_color(c: ColorRGB, space: ColorSpace) -> ColorCoords {
    let [c1, c2, c3] = match space {
        ColorSpace::Rgb => c.to_array(),
        ColorSpace::Hsv => rgb_to_hsv(c),
        ColorSpace::Lab => rgb_to_lab(c),
        ColorSpace::Chsv => hsv_to_chsv(rgb_to_hsv(c)),
    };
    ColorCoords { space, c1, c2, c3 }
}

/// Euclidean distance between two colors in CIELab.
pub fn delta_e(c1: ColorRGB, c2: ColorRGB) -> f64 {
    lab_distance(&rgb_to_lab(c1), &rgb_to_lab(c2))
}

#[inline]
pub fn lab_distance(a: &Lab, b: &Lab) -> f64 {
    lab_distance_sq(a, b).sqrt()
}

#[inline]
pub fn lab_distance_sq(a: &Lab, b: &Lab) -> f64 {
    let d0 = a[0] - b[0];
    let d1 = a[1] - b[1];
    let d2 = a[2] - b[2];
    d0 * d0 + d1 * d1 + d2 * d2
}

pub fn rgb_to_hsv(c: ColorRGB) -> [f64; 3] {
    let max = c.r.max(c.g).max(c.b);
    let min = c.r.min(c.g).min(c.b);
    let chroma = max - min;
    let v = max;
    let s = if max > 0.0 { chroma / max } else { 0.0 };
    let h = if chroma <= 0.0 {
        0.0
    } else if max == c.r {
        60.0 * ((c.g - c.b) / chroma).rem_euclid(6.0)
    } else if max == c.g {
        60.0 * ((c.b - c.r) / chroma + 2.0)
    } else {
        60.0 * ((c.r - c.g) / chroma + 4.0)
    };
    // rem_euclid can return exactly 360.0 for tiny negative inputs
    let h = if h >= 360.0 { h - 360.0 } else { h };
    [h, s, v]
}

pub fn hsv_to_rgb(hsv: [f64; 3]) -> ColorRGB {
    let [h, s, v] = hsv;
    let chroma = v * s;
    let hp = h.rem_euclid(360.0) / 60.0;
    let x = chroma * (1.0 - (hp.rem_euclid(2.0) - 1.0).abs());
    let (r, g, b) = match hp as u32 {
        0 => (chroma, x, 0.0),
        1 => (x, chroma, 0.0),
        2 => (0.0, chroma, x),
        3 => (0.0, x, chroma),
        4 => (x, 0.0, chroma),
        _ => (chroma, 0.0, x),
    };
    let m = v - chroma;
    ColorRGB::new(r + m, g + m, b + m)
}

pub fn hsv_to_chsv(hsv: [f64; 3]) -> [f64; 3] {
    let [h, s, v] = hsv;
    let rad = h.to_radians();
    [s * rad.cos(), s * rad.sin(), v]
}

fn srgb_to_linear(c: f64) -> f64 {
    if c <= 0.04045 {
        c / 12.92
    } else {
        ((c + 0.055) / 1.055).powf(2.4)
    }
}

fn linear_to_srgb(c: f64) -> f64 {
    let sign = c.signum();
    let c = c.abs();
    let v = if c <= 0.0031308 {
        12.92 * c
    } else {
        1.055 * c.powf(1.0 / 2.4) - 0.055
    };
    sign * v
}

// sRGB primaries, D65.
static RGB_TO_XYZ: LazyLock<Matrix3<f64>> = LazyLock::new(|| {
    Matrix3::new(
        0.4124564, 0.3575761, 0.1804375, //
        0.2126729, 0.7151522, 0.0721750, //
        0.0193339, 0.1191920, 0.9503041,
    )
});

static XYZ_TO_RGB: LazyLock<Matrix3<f64>> = LazyLock::new(|| {
    RGB_TO_XYZ
        .try_inverse()
        .expect("sRGB primaries matrix is invertible")
});

// White point taken as the image of RGB white so that white maps to a = b = 0 exactly.
static WHITE_XYZ: LazyLock<[f64; 3]> = LazyLock::new(|| {
    let m = &*RGB_TO_XYZ;
    [
        m[(0, 0)] + m[(0, 1)] + m[(0, 2)],
        m[(1, 0)] + m[(1, 1)] + m[(1, 2)],
        m[(2, 0)] + m[(2, 1)] + m[(2, 2)],
    ]
});

const LAB_DELTA: f64 = 6.0 / 29.0;

fn lab_f(t: f64) -> f64 {
    if t > LAB_DELTA * LAB_DELTA * LAB_DELTA {
        t.cbrt()
    } else {
        t / (3.0 * LAB_DELTA * LAB_DELTA) + 4.0 / 29.0
    }
}

fn lab_f_inv(t: f64) -> f64 {
    if t > LAB_DELTA {
        t * t * t
    } else {
        3.0 * LAB_DELTA * LAB_DELTA * (t - 4.0 / 29.0)
    }
}

pub fn rgb_to_lab(c: ColorRGB) -> Lab {
    let lin = nalgebra::Vector3::new(
        srgb_to_linear(c.r),
        srgb_to_linear(c.g),
        srgb_to_linear(c.b),
    );
    let xyz = *RGB_TO_XYZ * lin;
    let w = &*WHITE_XYZ;
    let fx = lab_f(xyz[0] / w[0]);
    let fy = lab_f(xyz[1] / w[1]);
    let fz = lab_f(xyz[2] / w[2]);
    [116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)]
}

/// Lab to sRGB without gamut clipping; channels may fall outside `[0, 1]`.
pub fn lab_to_rgb_unclipped(lab: Lab) -> [f64; 3] {
    let fy = (lab[0] + 16.0) / 116.0;
    let fx = fy + lab[1] / 500.0;
    let fz = fy - lab[2] / 200.0;
    let w = &*WHITE_XYZ;
    let xyz = nalgebra::Vector3::new(
        w[0] * lab_f_inv(fx),
        w[1] * lab_f_inv(fy),
        w[2] * lab_f_inv(fz),
    );
    let lin = *XYZ_TO_RGB * xyz;
    [
        linear_to_srgb(lin[0]),
        linear_to_srgb(lin[1]),
        linear_to_srgb(lin[2]),
    ]
}

/// Five ordered colors with the fraction of clustered pixels behind each.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTheme")]
pub struct ColorTheme {
    pub colors: [ColorRGB; THEME_SIZE],
    pub proportions: [f64; THEME_SIZE],
    pub source_id: String,
}

#[derive(Deserialize)]
struct RawTheme {
    colors: Vec<ColorRGB>,
    proportions: Vec<f64>,
    #[serde(default)]
    source_id: String,
}

impl TryFrom<RawTheme> for ColorTheme {
    type Error = ColorError;

    fn try_from(raw: RawTheme) -> Result<Self, Self::Error> {
        let colors: [ColorRGB; THEME_SIZE] = raw
            .colors
            .try_into()
            .map_err(|v: Vec<ColorRGB>| ColorError::ThemeSize(v.len()))?;
        let proportions: [f64; THEME_SIZE] = raw
            .proportions
            .try_into()
            .map_err(|v: Vec<f64>| ColorError::ThemeSize(v.len()))?;
        ColorTheme::new(colors, proportions, raw.source_id)
    }
}

impl ColorTheme {
    /// Builds a theme; proportions are rescaled to sum to one.
    ///
    /// Proportions already summing to one within rounding are kept as given,
    /// so rebuilding a theme from its own fields (as JSON loading does) is exact.
    pub fn new(
        colors: [ColorRGB; THEME_SIZE],
        proportions: [f64; THEME_SIZE],
        source_id: impl Into<String>,
    ) -> Result<Self, ColorError> {
        if proportions.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(ColorError::InvalidProportions);
        }
        let total: f64 = proportions.iter().sum();
        if total <= 0.0 {
            return Err(ColorError::InvalidProportions);
        }
        let proportions = if (total - 1.0).abs() <= 1e-12 {
            proportions
        } else {
            proportions.map(|p| p / total)
        };
        Ok(ColorTheme {
            colors,
            proportions,
            source_id: source_id.into(),
        })
    }

    /// Equal-proportion theme.
    pub fn uniform(colors: [ColorRGB; THEME_SIZE], source_id: impl Into<String>) -> Self {
        ColorTheme {
            colors,
            proportions: [1.0 / THEME_SIZE as f64; THEME_SIZE],
            source_id: source_id.into(),
        }
    }

    pub fn lab_colors(&self) -> [Lab; THEME_SIZE] {
        self.colors.map(rgb_to_lab)
    }

    /// Reorders colors (and their proportions) so that slot `s` holds color `order[s]`.
    pub fn reordered(&self, order: &[usize; THEME_SIZE]) -> ColorTheme {
        ColorTheme {
            colors: order.map(|i| self.colors[i]),
            proportions: order.map(|i| self.proportions[i]),
            source_id: self.source_id.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("theme serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }
}
