//! Five-color theme extraction from weighted page pixels.

mod acs;
mod order;
mod robust;

use serde::{Deserialize, Serialize};

use crate::color::{ColorRGB, ColorTheme, Lab, THEME_SIZE};
use crate::error::{ClusterError, Error};
use crate::fixed::SampledBlocks;
use crate::ingest::{BlockGrid, PageImage};

pub use acs::{acs, acs_centers};
pub use order::{
    average_pairwise_distances, mean_position_distances, order_by_distances, order_cost,
    order_theme, permutations, Order,
};
pub use robust::{
    kmeanspp_init, robust_kmeans, robust_kmeans_with, robust_objective, weighted_kmeans,
    ClusteringResult, RobustKMeansParams, WeightedPoints,
};

/// How the pairwise spatial distance between two clusters is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpatialDistance {
    /// Distance between cluster mean positions.
    #[default]
    MeanPosition,
    /// Mean distance over all cross-cluster pixel pairs (quadratic cost).
    AveragePairwise,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThemeParams {
    pub lambda: f64,
    pub restarts: usize,
    pub max_iters: usize,
    pub tol: f64,
    pub spatial: SpatialDistance,
    /// Use plain weighted K-means instead of the outlier-aware variant.
    pub plain_kmeans: bool,
}

impl Default for ThemeParams {
    fn default() -> Self {
        ThemeParams {
            lambda: 70.0,
            restarts: 5,
            max_iters: 300,
            tol: 1e-6,
            spatial: SpatialDistance::MeanPosition,
            plain_kmeans: false,
        }
    }
}

impl ThemeParams {
    pub fn kmeans_params(&self) -> RobustKMeansParams {
        RobustKMeansParams {
            k: THEME_SIZE,
            lambda: self.lambda,
            max_iters: self.max_iters,
            tol: self.tol,
            restarts: self.restarts,
        }
    }

    pub fn plain(mut self) -> Self {
        self.plain_kmeans = true;
        self
    }
}

/// Theme of the pixels of sampled blocks, weighted by their sample counts.
pub fn extract_theme(
    image: &PageImage,
    grid: &BlockGrid,
    sampled: &SampledBlocks,
    params: &ThemeParams,
    rng_seed: u64,
) -> Result<(ColorTheme, ClusteringResult), Error> {
    let weights = sampled.pixel_weights(grid)?;
    extract_theme_weighted(image, &weights, params, rng_seed)
}

/// Theme of all pixels with uniform weight.
pub fn extract_theme_whole(
    image: &PageImage,
    params: &ThemeParams,
    rng_seed: u64,
) -> Result<(ColorTheme, ClusteringResult), Error> {
    let weights = vec![1.0; image.pixels().len()];
    extract_theme_weighted(image, &weights, params, rng_seed)
}

/// Theme of the pixels selected by `mask`, uniform weight.
pub fn extract_theme_masked(
    image: &PageImage,
    mask: &[bool],
    params: &ThemeParams,
    rng_seed: u64,
) -> Result<(ColorTheme, ClusteringResult), Error> {
    let weights: Vec<f64> = mask.iter().map(|&m| if m { 1.0 } else { 0.0 }).collect();
    extract_theme_weighted(image, &weights, params, rng_seed)
}

/// Theme from per-pixel weights; pixels with weight 0 are ignored.
pub fn extract_theme_weighted(
    image: &PageImage,
    pixel_weights: &[f64],
    params: &ThemeParams,
    rng_seed: u64,
) -> Result<(ColorTheme, ClusteringResult), Error> {
    let width = image.width();
    if pixel_weights.len() != image.pixels().len() {
        return Err(ClusterError::LengthMismatch.into());
    }
    let selected: Vec<usize> = (0..pixel_weights.len())
        .filter(|&i| pixel_weights[i] > 0.0)
        .collect();
    let points: Vec<Lab> = selected
        .iter()
        .map(|&i| image.pixels()[i].to_lab())
        .collect();
    let weights: Vec<f64> = selected.iter().map(|&i| pixel_weights[i]).collect();
    let data = WeightedPoints::new(points, weights)?;
    let (compact, map) = data.dedup();

    let kparams = params.kmeans_params();
    let result = if params.plain_kmeans {
        weighted_kmeans(&compact, &kparams, rng_seed)?
    } else {
        robust_kmeans_with(&compact, &kparams, rng_seed)?
    };

    let mut mass = [0.0f64; THEME_SIZE];
    let mut pos_sum = [[0.0f64; 2]; THEME_SIZE];
    let mut count = [0usize; THEME_SIZE];
    let mut members: Vec<Vec<[f64; 2]>> = vec![Vec::new(); THEME_SIZE];
    let (mut all_x, mut all_y) = (0.0, 0.0);
    for (j, &pix) in selected.iter().enumerate() {
        let c = result.assignments[map[j]];
        let (x, y) = ((pix % width) as f64, (pix / width) as f64);
        mass[c] += pixel_weights[pix];
        pos_sum[c][0] += x;
        pos_sum[c][1] += y;
        count[c] += 1;
        all_x += x;
        all_y += y;
        if params.spatial == SpatialDistance::AveragePairwise {
            members[c].push([x, y]);
        }
    }
    let n_sel = selected.len() as f64;
    let overall = [all_x / n_sel, all_y / n_sel];
    let positions: [[f64; 2]; THEME_SIZE] = std::array::from_fn(|c| {
        if count[c] > 0 {
            [
                pos_sum[c][0] / count[c] as f64,
                pos_sum[c][1] / count[c] as f64,
            ]
        } else {
            overall
        }
    });

    let distances = match params.spatial {
        SpatialDistance::MeanPosition => mean_position_distances(&positions),
        SpatialDistance::AveragePairwise => average_pairwise_distances(&members),
    };
    let order = order_by_distances(&distances);

    let colors: [ColorRGB; THEME_SIZE] =
        std::array::from_fn(|c| ColorRGB::from_lab(result.centroids[c]));
    let theme =
        ColorTheme::new(colors, mass, image.url.clone().unwrap_or_default())?.reordered(&order);

    // Per-pixel assignments, in selected-pixel order.
    let expanded = ClusteringResult {
        assignments: map.iter().map(|&u| result.assignments[u]).collect(),
        outlier_vectors: map.iter().map(|&u| result.outlier_vectors[u]).collect(),
        positions: positions.to_vec(),
        ..result
    };
    Ok((theme, expanded))
}

/// Horizontal swatch: one band per theme color, widths proportional to the
/// proportions (largest remainder, so the bands fill `width` exactly).
pub fn theme_swatch(theme: &ColorTheme, width: usize, height: usize) -> PageImage {
    let exact: Vec<f64> = theme.proportions.iter().map(|p| p * width as f64).collect();
    let mut widths: Vec<usize> = exact.iter().map(|v| v.floor() as usize).collect();
    let mut order: Vec<usize> = (0..THEME_SIZE).collect();
    order.sort_by(|&a, &b| (exact[b] - exact[b].floor()).total_cmp(&(exact[a] - exact[a].floor())));
    let short = width.saturating_sub(widths.iter().sum());
    for &i in order.iter().cycle().take(short) {
        widths[i] += 1;
    }
    let mut img = PageImage::filled(width, height, theme.colors[0]);
    let mut x = 0;
    for (c, w) in theme.colors.iter().zip(widths) {
        img.fill_rect(
            crate::ingest::Rect {
                x,
                y: 0,
                w,
                h: height,
            },
            *c,
        );
        x += w;
    }
    img
}
