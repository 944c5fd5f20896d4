//! Hand-crafted theme descriptors.
//!
//! For each of the four color spaces and each channel the vector holds, in
//! order: the five raw values, the five values sorted, the four absolute
//! differences between adjacent colors, those differences sorted, then the
//! proportion-weighted mean, plain mean, standard deviation, median, max, min
//! and range. Each space then contributes a total-least-squares plane fit
//! through the five colors (unit normal and sum of squared residuals). The
//! five proportions close the vector.
//!
//! Hue is circular: adjacent differences are minor arcs as a fraction of the
//! full turn, means are circular means in degrees, and the spread is the
//! angular deviation `sqrt(2(1 - R))` in degrees.

use std::sync::LazyLock;

use nalgebra::{Matrix3, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::color::{convert_color, ColorSpace, ColorTheme, THEME_SIZE};

pub const SCHEMA_VERSION: &str = "webcolor-theme-v1";

const CHANNEL_STATS: [&str; 7] = [
    "weighted_mean",
    "mean",
    "std",
    "median",
    "max",
    "min",
    "range",
];

/// Per channel: 5 raw + 5 sorted + 4 + 4 differences + 7 statistics.
pub const PER_CHANNEL: usize = 2 * THEME_SIZE + 2 * (THEME_SIZE - 1) + CHANNEL_STATS.len();
pub const PER_SPACE: usize = 3 * PER_CHANNEL + 4;
pub const FEATURE_DIM: usize = ColorSpace::ALL.len() * PER_SPACE + THEME_SIZE;

static SCHEMA: LazyLock<Vec<String>> = LazyLock::new(|| {
    let mut names = Vec::with_capacity(FEATURE_DIM);
    for space in ColorSpace::ALL {
        for ch in space.channel_names() {
            let prefix = format!("{}.{ch}", space.name());
            for i in 0..THEME_SIZE {
                names.push(format!("{prefix}.raw.{i}"));
            }
            for i in 0..THEME_SIZE {
                names.push(format!("{prefix}.sorted.{i}"));
            }
            for i in 0..THEME_SIZE - 1 {
                names.push(format!("{prefix}.adjacent_diff.{i}"));
            }
            for i in 0..THEME_SIZE - 1 {
                names.push(format!("{prefix}.sorted_adjacent_diff.{i}"));
            }
            for stat in CHANNEL_STATS {
                names.push(format!("{prefix}.{stat}"));
            }
        }
        for i in 0..3 {
            names.push(format!("{}.plane.normal.{i}", space.name()));
        }
        names.push(format!("{}.plane.sse", space.name()));
    }
    for i in 0..THEME_SIZE {
        names.push(format!("theme.proportion.{i}"));
    }
    names
});

/// Dimension names of the theme feature schema.
pub fn feature_schema() -> &'static [String] {
    &SCHEMA
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub values: Vec<f64>,
    pub schema_version: String,
}

impl FeatureVector {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn names(&self) -> &'static [String] {
        feature_schema()
    }
}

pub fn extract_features(theme: &ColorTheme) -> FeatureVector {
    let mut values = Vec::with_capacity(FEATURE_DIM);
    for space in ColorSpace::ALL {
        let coords: [[f64; 3]; THEME_SIZE] =
            theme.colors.map(|c| convert_color(c, space).channels());
        for ch in 0..3 {
            let column: [f64; THEME_SIZE] = std::array::from_fn(|i| coords[i][ch]);
            let circular = space == ColorSpace::Hsv && ch == 0;
            channel_features(&column, &theme.proportions, circular, &mut values);
        }
        let (normal, sse) = plane_fit(&coords);
        values.extend_from_slice(&normal);
        values.push(sse);
    }
    values.extend_from_slice(&theme.proportions);
    debug_assert_eq!(values.len(), FEATURE_DIM);
    debug_assert!(values.iter().all(|v| v.is_finite()));
    FeatureVector {
        values,
        schema_version: SCHEMA_VERSION.to_string(),
    }
}

fn channel_features(
    v: &[f64; THEME_SIZE],
    weights: &[f64; THEME_SIZE],
    circular: bool,
    out: &mut Vec<f64>,
) {
    out.extend_from_slice(v);
    let mut sorted = *v;
    sorted.sort_by(f64::total_cmp);
    out.extend_from_slice(&sorted);

    let diffs: Vec<f64> = v
        .windows(2)
        .map(|w| {
            if circular {
                hue_arc(w[0], w[1])
            } else {
                (w[1] - w[0]).abs()
            }
        })
        .collect();
    out.extend_from_slice(&diffs);
    let mut sorted_diffs = diffs;
    sorted_diffs.sort_by(f64::total_cmp);
    out.extend_from_slice(&sorted_diffs);

    let n = THEME_SIZE as f64;
    let (weighted_mean, mean, std) = if circular {
        let (wm, _) = circular_mean(v, weights);
        let (m, r) = circular_mean(v, &[1.0; THEME_SIZE]);
        // 1 - R below a few ulps is rounding in the resultant, not spread
        let gap = if 1.0 - r < 8.0 * f64::EPSILON {
            0.0
        } else {
            1.0 - r
        };
        (wm, m, (2.0 * gap).sqrt().to_degrees())
    } else {
        let total_w: f64 = weights.iter().sum();
        let wm = v.iter().zip(weights).map(|(x, w)| x * w).sum::<f64>() / total_w;
        let m = v.iter().sum::<f64>() / n;
        let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n;
        (wm, m, var.sqrt())
    };
    out.push(weighted_mean);
    out.push(mean);
    out.push(std);
    out.push(sorted[THEME_SIZE / 2]);
    out.push(sorted[THEME_SIZE - 1]);
    out.push(sorted[0]);
    out.push(sorted[THEME_SIZE - 1] - sorted[0]);
}

/// Minor arc between two hues in degrees, as a fraction of 360.
fn hue_arc(a: f64, b: f64) -> f64 {
    let d = (a - b).abs().rem_euclid(360.0);
    d.min(360.0 - d) / 360.0
}

/// Weighted circular mean in degrees `[0, 360)` and mean resultant length.
fn circular_mean(hues: &[f64; THEME_SIZE], weights: &[f64; THEME_SIZE]) -> (f64, f64) {
    let total: f64 = weights.iter().sum();
    let (mut s, mut c) = (0.0, 0.0);
    for (h, w) in hues.iter().zip(weights) {
        let rad = h.to_radians();
        s += w * rad.sin();
        c += w * rad.cos();
    }
    s /= total;
    c /= total;
    let r = s.hypot(c);
    if r < 1e-12 {
        return (0.0, 0.0);
    }
    let mut deg = s.atan2(c).to_degrees().rem_euclid(360.0);
    if deg >= 360.0 {
        deg -= 360.0;
    }
    (deg, r.min(1.0))
}

/// Total-least-squares plane through the points: unit normal (largest
/// component made positive) and the sum of squared orthogonal residuals.
pub fn plane_fit(points: &[[f64; 3]; THEME_SIZE]) -> ([f64; 3], f64) {
    let n = THEME_SIZE as f64;
    let mut mean = [0.0; 3];
    for p in points {
        for d in 0..3 {
            mean[d] += p[d] / n;
        }
    }
    let mut scatter = Matrix3::<f64>::zeros();
    for p in points {
        let c = [p[0] - mean[0], p[1] - mean[1], p[2] - mean[2]];
        for r in 0..3 {
            for s in 0..3 {
                scatter[(r, s)] += c[r] * c[s];
            }
        }
    }
    let scale = scatter.abs().max();
    if scale <= 1e-24 {
        return ([0.0, 0.0, 1.0], 0.0);
    }
    let eig = SymmetricEigen::new(scatter);
    let (idx, &smallest) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("three eigenvalues");
    let v = eig.eigenvectors.column(idx);
    let mut normal = [v[0], v[1], v[2]];
    let len = (normal[0].powi(2) + normal[1].powi(2) + normal[2].powi(2)).sqrt();
    normal.iter_mut().for_each(|x| *x /= len);
    let lead = (0..3)
        .max_by(|&a, &b| normal[a].abs().total_cmp(&normal[b].abs()))
        .expect("three components");
    if normal[lead] < 0.0 {
        normal.iter_mut().for_each(|x| *x = -*x);
    }
    // tiny negative eigenvalues are rounding noise
    (normal, smallest.max(0.0))
}
