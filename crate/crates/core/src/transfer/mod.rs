//! Recoloring a page's fixed part toward reference palettes, and ranking the
//! results with an assessment model.

mod collection;
mod rank;

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::color::{ColorRGB, ColorTheme, Lab};
use crate::error::{Error, TransferError};
use crate::fixed::{FixedPartLocation, SampledBlocks};
use crate::ingest::{BlockGrid, PageImage};

pub use collection::{
    build_collection, load_collection, theme_pixels, CollectionEntry, CollectionIndex,
    CollectionParams, IndexEntry, ReferenceCollection, INDEX_FILE,
};
pub use rank::{
    theme_distance, transfer_and_rank, write_results, RankOptions, RankOutcome, RankingRecord,
    TransferResult,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaskSource {
    Manual,
    BlockSampling,
    Synthesized,
}

/// Per-pixel selection of a page's fixed part.
#[derive(Debug, Clone, PartialEq)]
pub struct FixedPartMask {
    width: usize,
    height: usize,
    mask: Vec<bool>,
    pub source: MaskSource,
}

impl FixedPartMask {
    pub fn new(
        width: usize,
        height: usize,
        mask: Vec<bool>,
        source: MaskSource,
    ) -> Result<Self, TransferError> {
        if mask.len() != width * height {
            return Err(TransferError::MaskSize {
                got: (width, mask.len() / width.max(1)),
                expected: (width, height),
            });
        }
        if !mask.iter().any(|&m| m) {
            return Err(TransferError::EmptyMask);
        }
        Ok(FixedPartMask {
            width,
            height,
            mask,
            source,
        })
    }

    /// Every pixel selected.
    pub fn full(width: usize, height: usize) -> Self {
        FixedPartMask {
            width,
            height,
            mask: vec![true; width * height],
            source: MaskSource::Manual,
        }
    }

    /// White (luma at least one half) marks fixed pixels.
    pub fn from_png(path: &Path) -> Result<Self, Error> {
        let img = PageImage::load_png(path)?;
        let mask = img
            .pixels()
            .iter()
            .map(|c| 0.2126 * c.r + 0.7152 * c.g + 0.0722 * c.b >= 0.5)
            .collect();
        Ok(Self::new(
            img.width(),
            img.height(),
            mask,
            MaskSource::Manual,
        )?)
    }

    pub fn from_sampled(grid: &BlockGrid, sampled: &SampledBlocks) -> Result<Self, Error> {
        let mask = sampled.pixel_mask(grid)?;
        Ok(Self::new(
            grid.width,
            grid.height,
            mask,
            MaskSource::BlockSampling,
        )?)
    }

    pub fn from_location(loc: &FixedPartLocation) -> Result<Self, Error> {
        Self::from_sampled(&loc.grid, &loc.sampled)
    }

    pub fn dimensions(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.mask
    }

    pub fn count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    pub fn check_against(&self, image: &PageImage) -> Result<(), TransferError> {
        if self.dimensions() != image.dimensions() {
            return Err(TransferError::MaskSize {
                got: self.dimensions(),
                expected: image.dimensions(),
            });
        }
        Ok(())
    }

    pub fn to_image(&self) -> PageImage {
        let pixels = self
            .mask
            .iter()
            .map(|&m| if m { ColorRGB::WHITE } else { ColorRGB::BLACK })
            .collect();
        PageImage::new(self.width, self.height, pixels).expect("mask dimensions are valid")
    }
}

/// Result of a transfer: the recolored page and the masked pixels' Lab values
/// before gamut clipping, in pixel order.
#[derive(Debug, Clone)]
pub struct TransferOutput {
    pub image: PageImage,
    pub mapped_lab: Vec<Lab>,
}

/// A color transfer operator restricted to a mask.
pub trait ColorTransfer: Sync {
    fn transfer(
        &self,
        source: &PageImage,
        mask: &FixedPartMask,
        reference: &[Lab],
    ) -> Result<TransferOutput, Error>;

    fn name(&self) -> &'static str;
}

/// Per-channel mean and standard deviation matching in CIELab.
#[derive(Debug, Clone, Copy, Default)]
pub struct GlobalStatsTransfer;

/// Mean and population standard deviation per Lab channel.
pub fn lab_stats(points: &[Lab]) -> ([f64; 3], [f64; 3]) {
    let n = points.len() as f64;
    let mut mean = [0.0; 3];
    for p in points {
        for c in 0..3 {
            mean[c] += p[c];
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let mut var = [0.0; 3];
    for p in points {
        for c in 0..3 {
            var[c] += (p[c] - mean[c]).powi(2);
        }
    }
    (mean, var.map(|v| (v / n).sqrt()))
}

impl ColorTransfer for GlobalStatsTransfer {
    fn transfer(
        &self,
        source: &PageImage,
        mask: &FixedPartMask,
        reference: &[Lab],
    ) -> Result<TransferOutput, Error> {
        mask.check_against(source)?;
        if reference.len() < 2 {
            return Err(TransferError::TooFewReferencePixels(reference.len()).into());
        }
        let lab = source.to_lab();
        let selected: Vec<Lab> = lab
            .iter()
            .zip(mask.as_slice())
            .filter(|(_, &m)| m)
            .map(|(p, _)| *p)
            .collect();
        let (mu_s, sd_s) = lab_stats(&selected);
        let (mu_r, sd_r) = lab_stats(reference);
        // x -> x*scale + offset; a flat source channel only shifts
        let mut scale = [1.0; 3];
        let mut offset = [0.0; 3];
        for c in 0..3 {
            if sd_s[c] > 0.0 {
                scale[c] = sd_r[c] / sd_s[c];
            }
            offset[c] = mu_r[c] - mu_s[c] * scale[c];
        }

        let mut image = source.clone();
        let mut mapped = Vec::with_capacity(selected.len());
        for (i, (&m, p)) in mask.as_slice().iter().zip(&lab).enumerate() {
            if !m {
                continue;
            }
            let q: Lab = std::array::from_fn(|c| p[c] * scale[c] + offset[c]);
            mapped.push(q);
            // an unmoved pixel keeps its exact RGB instead of a Lab round trip
            if q != *p {
                image.pixels_mut()[i] = ColorRGB::from_lab(q);
            }
        }
        Ok(TransferOutput {
            image,
            mapped_lab: mapped,
        })
    }

    fn name(&self) -> &'static str {
        "global_stats"
    }
}

/// Transfers with the default operator.
pub fn color_transfer(
    source: &PageImage,
    mask: &FixedPartMask,
    reference: &[Lab],
) -> Result<PageImage, Error> {
    Ok(GlobalStatsTransfer.transfer(source, mask, reference)?.image)
}

/// Lab pixels of a theme: `count` samples split by proportion (largest remainder).
pub fn theme_reference_pixels(theme: &ColorTheme, count: usize) -> Vec<Lab> {
    let labs = theme.lab_colors();
    let raw: Vec<f64> = theme.proportions.iter().map(|p| p * count as f64).collect();
    let mut n: Vec<usize> = raw.iter().map(|r| r.floor() as usize).collect();
    let mut rest: Vec<usize> = (0..n.len()).collect();
    rest.sort_by(|&a, &b| {
        (raw[b] - n[b] as f64)
            .total_cmp(&(raw[a] - n[a] as f64))
            .then(a.cmp(&b))
    });
    let missing = count.saturating_sub(n.iter().sum::<usize>());
    for &i in rest.iter().take(missing) {
        n[i] += 1;
    }
    n.iter()
        .zip(labs)
        .flat_map(|(&k, lab)| std::iter::repeat_n(lab, k))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::Rect;

    fn two_tone() -> PageImage {
        let mut img = PageImage::filled(40, 20, ColorRGB::from_u8([230, 230, 220]));
        img.fill_rect(
            Rect {
                x: 0,
                y: 0,
                w: 40,
                h: 6,
            },
            ColorRGB::from_u8([120, 40, 30]),
        );
        img
    }

    fn left_half(img: &PageImage) -> FixedPartMask {
        let (w, h) = img.dimensions();
        FixedPartMask::new(
            w,
            h,
            (0..w * h).map(|i| i % w < w / 2).collect(),
            MaskSource::Manual,
        )
        .unwrap()
    }

    #[test]
    fn statistics_match_reference() {
        let img = two_tone();
        let mask = left_half(&img);
        let reference: Vec<Lab> = (0..50)
            .map(|i| ColorRGB::new(0.1, 0.2 + 0.01 * i as f64, 0.5 + 0.008 * i as f64).to_lab())
            .collect();
        let out = GlobalStatsTransfer
            .transfer(&img, &mask, &reference)
            .unwrap();
        let (mo, so) = lab_stats(&out.mapped_lab);
        let (mr, sr) = lab_stats(&reference);
        for c in 0..3 {
            assert!((mo[c] - mr[c]).abs() < 1e-6 && (so[c] - sr[c]).abs() < 1e-6);
        }
        for (i, (&m, p)) in mask.as_slice().iter().zip(img.pixels()).enumerate() {
            if !m {
                assert_eq!(out.image.pixels()[i], *p);
            }
        }
    }

    #[test]
    fn self_transfer_is_identity() {
        let img = two_tone();
        let mask = FixedPartMask::full(40, 20);
        let out = color_transfer(&img, &mask, &img.to_lab()).unwrap();
        assert_eq!(out, img);
    }

    #[test]
    fn flat_region_takes_reference_color() {
        let gray = PageImage::filled(10, 10, ColorRGB::new(0.5, 0.5, 0.5));
        let red = ColorRGB::new(1.0, 0.0, 0.0);
        let out = color_transfer(&gray, &FixedPartMask::full(10, 10), &[red.to_lab(); 4]).unwrap();
        assert!(out
            .pixels()
            .iter()
            .all(|c| crate::color::delta_e(*c, red) < 1e-6));
    }

    #[test]
    fn bad_inputs() {
        let img = two_tone();
        assert!(FixedPartMask::new(40, 20, vec![false; 800], MaskSource::Manual).is_err());
        let small = FixedPartMask::full(4, 4);
        assert!(color_transfer(&img, &small, &img.to_lab()).is_err());
        assert!(color_transfer(&img, &FixedPartMask::full(40, 20), &[[50.0, 0.0, 0.0]]).is_err());
    }

    #[test]
    fn theme_pixels_follow_proportions() {
        let t = ColorTheme::new(
            [ColorRGB::BLACK; 5],
            [0.5, 0.25, 0.125, 0.0625, 0.0625],
            "t",
        )
        .unwrap();
        assert_eq!(theme_reference_pixels(&t, 1000).len(), 1000);
        let t = ColorTheme::uniform([ColorRGB::WHITE; 5], "u");
        assert_eq!(theme_reference_pixels(&t, 7).len(), 7);
    }
}
