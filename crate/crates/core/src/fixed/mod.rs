//! Locating the fixed part of a page.
//!
//! Block sampling compares every block of the first snapshot against the same
//! block in later snapshots (EMD between Lab histograms), turns the distance
//! into a similarity, and samples blocks in proportion to it. Stable regions
//! end up sampled often; regions that change over time almost never. The
//! sample counts become per-pixel clustering weights.
//!
//! The synthesize locator instead averages all snapshots pixel by pixel.

mod emd;
mod histogram;

use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::color::{ColorRGB, Lab};
use crate::error::FixedPartError;
use crate::ingest::{BlockGrid, PageImage, SnapshotSet};

pub use emd::{emd, transport_cost, transport_plan};
pub use histogram::{block_histogram, ColorHistogram, HistogramLayout};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockSamplingParams {
    pub n1: usize,
    pub n2: usize,
    pub bins_per_axis: usize,
    /// Similarity is `exp(-emd / emd_scale)`.
    pub emd_scale: f64,
    /// Number of draws; `None` means one per block.
    pub draws: Option<usize>,
}

impl Default for BlockSamplingParams {
    fn default() -> Self {
        BlockSamplingParams {
            n1: 40,
            n2: 40,
            bins_per_axis: 4,
            emd_scale: 10.0,
            draws: None,
        }
    }
}

impl BlockSamplingParams {
    pub fn draws_for(&self, grid: &BlockGrid) -> usize {
        self.draws.unwrap_or(grid.len())
    }
}

/// Per-block average similarity, min-max normalized into `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityGrid {
    pub n1: usize,
    pub n2: usize,
    pub values: Vec<f64>,
    /// Averages before normalization, each in `(0, 1]`.
    pub raw: Vec<f64>,
}

impl SimilarityGrid {
    /// Normalizes raw averages; a constant grid maps to all ones.
    pub fn from_raw(n1: usize, n2: usize, raw: Vec<f64>) -> Result<Self, FixedPartError> {
        if raw.len() != n1 * n2 {
            return Err(FixedPartError::GridMismatch {
                grid: n1 * n2,
                values: raw.len(),
            });
        }
        let min = raw.iter().copied().fold(f64::INFINITY, f64::min);
        let max = raw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let range = max - min;
        let values = if range > 1e-12 {
            raw.iter()
                .map(|v| ((v - min) / range).clamp(0.0, 1.0))
                .collect()
        } else {
            vec![1.0; raw.len()]
        };
        Ok(SimilarityGrid {
            n1,
            n2,
            values,
            raw,
        })
    }

    /// Grayscale rendering, one block per grid cell (white = stable).
    pub fn to_image(&self, grid: &BlockGrid) -> PageImage {
        let mut img = PageImage::filled(grid.width, grid.height, ColorRGB::BLACK);
        for (rect, v) in grid.block_rects.iter().zip(&self.values) {
            img.fill_rect(*rect, ColorRGB::new(*v, *v, *v));
        }
        img
    }
}

/// How often each block was drawn.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampledBlocks {
    pub n1: usize,
    pub n2: usize,
    pub counts: Vec<u32>,
}

impl SampledBlocks {
    pub fn total(&self) -> u64 {
        self.counts.iter().map(|&c| u64::from(c)).sum()
    }

    /// Uniform weight 1 on every block.
    pub fn uniform(grid: &BlockGrid) -> Self {
        SampledBlocks {
            n1: grid.n1,
            n2: grid.n2,
            counts: vec![1; grid.len()],
        }
    }

    /// Per-pixel weight `w_i` = count of the block containing pixel `i`.
    pub fn pixel_weights(&self, grid: &BlockGrid) -> Result<Vec<f64>, FixedPartError> {
        if grid.len() != self.counts.len() {
            return Err(FixedPartError::GridMismatch {
                grid: grid.len(),
                values: self.counts.len(),
            });
        }
        let mut weights = vec![0.0; grid.width * grid.height];
        for (rect, &c) in grid.block_rects.iter().zip(&self.counts) {
            for i in rect.indices(grid.width) {
                weights[i] = f64::from(c);
            }
        }
        Ok(weights)
    }

    /// Pixels of sampled blocks.
    pub fn pixel_mask(&self, grid: &BlockGrid) -> Result<Vec<bool>, FixedPartError> {
        Ok(self
            .pixel_weights(grid)?
            .into_iter()
            .map(|w| w > 0.0)
            .collect())
    }
}

/// Similarity of each block of the first snapshot to the same block in every
/// later snapshot, averaged and normalized.
pub fn block_similarity_map(
    set: &SnapshotSet,
    grid: &BlockGrid,
    params: &BlockSamplingParams,
) -> Result<SimilarityGrid, FixedPartError> {
    if set.len() < 2 {
        return Err(FixedPartError::NeedsMultipleSnapshots(set.len()));
    }
    let dims = (grid.width, grid.height);
    for (index, img) in set.images().iter().enumerate() {
        if img.dimensions() != dims {
            return Err(FixedPartError::SizeMismatch {
                index,
                got: img.dimensions(),
                expected: dims,
            });
        }
    }
    let labs: Vec<Vec<Lab>> = set.images().iter().map(PageImage::to_lab).collect();
    let layout = HistogramLayout::new(params.bins_per_axis);
    let centers = layout.centers();
    let stride = grid.width;
    let scale = params.emd_scale;

    let raw: Vec<f64> = grid
        .block_rects
        .par_iter()
        .map(|&rect| {
            let h0 = histogram::lab_block_histogram(&labs[0], stride, rect, layout, &centers);
            let mut sims: Vec<f64> = labs[1..]
                .iter()
                .map(|lab| {
                    let h = histogram::lab_block_histogram(lab, stride, rect, layout, &centers);
                    let d = emd(&h0, &h).expect("shared layout");
                    (-d / scale).exp()
                })
                .collect();
            // fixed summation order makes the mean independent of snapshot order
            sims.sort_by(f64::total_cmp);
            sims.iter().sum::<f64>() / sims.len() as f64
        })
        .collect();
    SimilarityGrid::from_raw(grid.n1, grid.n2, raw)
}

/// `draws` independent draws with replacement, `P(b) ∝ sim_b`.
pub fn sample_blocks(
    sim: &SimilarityGrid,
    draws: usize,
    rng_seed: u64,
) -> Result<SampledBlocks, FixedPartError> {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    sample_blocks_with(sim, draws, &mut rng)
}

pub fn sample_blocks_with<R: rand::Rng + ?Sized>(
    sim: &SimilarityGrid,
    draws: usize,
    rng: &mut R,
) -> Result<SampledBlocks, FixedPartError> {
    let mut counts = vec![0u32; sim.values.len()];
    let dist =
        WeightedIndex::new(&sim.values).map_err(|_| FixedPartError::DegenerateSimilarities)?;
    for _ in 0..draws {
        counts[dist.sample(rng)] += 1;
    }
    Ok(SampledBlocks {
        n1: sim.n1,
        n2: sim.n2,
        counts,
    })
}

/// Per-pixel channel-wise mean across all snapshots.
pub fn synthesize_fixed_image(set: &SnapshotSet) -> Result<PageImage, FixedPartError> {
    if set.len() < 2 {
        return Err(FixedPartError::NeedsMultipleSnapshots(set.len()));
    }
    let (w, h) = set.dimensions();
    let n = set.len() as f64;
    let pixels = (0..w * h)
        .into_par_iter()
        .map(|i| {
            let mut acc = [0.0; 3];
            for img in set.images() {
                let c = img.pixels()[i];
                acc[0] += c.r;
                acc[1] += c.g;
                acc[2] += c.b;
            }
            ColorRGB::new(acc[0] / n, acc[1] / n, acc[2] / n)
        })
        .collect();
    let mut out = PageImage::new(w, h, pixels).expect("dimensions come from the set");
    out.url = set.first().url.clone();
    Ok(out)
}

/// Everything the block-sampling locator produces for one snapshot set.
#[derive(Debug, Clone)]
pub struct FixedPartLocation {
    pub grid: BlockGrid,
    pub similarity: SimilarityGrid,
    pub sampled: SampledBlocks,
}

pub fn locate_by_block_sampling(
    set: &SnapshotSet,
    params: &BlockSamplingParams,
    rng_seed: u64,
) -> Result<FixedPartLocation, crate::Error> {
    let grid = crate::ingest::partition_blocks(set.first(), params.n1, params.n2)?;
    let similarity = block_similarity_map(set, &grid, params)?;
    let sampled = sample_blocks(&similarity, params.draws_for(&grid), rng_seed)?;
    Ok(FixedPartLocation {
        grid,
        similarity,
        sampled,
    })
}
