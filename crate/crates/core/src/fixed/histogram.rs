use serde::{Deserialize, Serialize};

use crate::color::Lab;
use crate::ingest::{PageImage, Rect};

const L_RANGE: (f64, f64) = (0.0, 100.0);
// Covers the sRGB gamut in a and b.
const AB_RANGE: (f64, f64) = (-110.0, 110.0);

/// Uniform quantization of CIELab into `bins_per_axis`³ cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HistogramLayout {
    pub bins_per_axis: usize,
}

impl HistogramLayout {
    pub fn new(bins_per_axis: usize) -> Self {
        assert!(bins_per_axis > 0, "bins_per_axis must be positive");
        HistogramLayout { bins_per_axis }
    }

    pub fn len(&self) -> usize {
        self.bins_per_axis.pow(3)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    fn axis_bin(&self, v: f64, (lo, hi): (f64, f64)) -> usize {
        let n = self.bins_per_axis;
        let t = ((v - lo) / (hi - lo) * n as f64).floor();
        if t.is_nan() || t < 0.0 {
            0
        } else {
            (t as usize).min(n - 1)
        }
    }

    pub fn bin_of(&self, lab: &Lab) -> usize {
        let n = self.bins_per_axis;
        let l = self.axis_bin(lab[0], L_RANGE);
        let a = self.axis_bin(lab[1], AB_RANGE);
        let b = self.axis_bin(lab[2], AB_RANGE);
        (l * n + a) * n + b
    }

    pub fn centers(&self) -> Vec<Lab> {
        let n = self.bins_per_axis;
        let mid = |i: usize, (lo, hi): (f64, f64)| lo + (i as f64 + 0.5) * (hi - lo) / n as f64;
        let mut out = Vec::with_capacity(self.len());
        for l in 0..n {
            for a in 0..n {
                for b in 0..n {
                    out.push([mid(l, L_RANGE), mid(a, AB_RANGE), mid(b, AB_RANGE)]);
                }
            }
        }
        out
    }
}

/// Normalized color histogram with Lab bin centers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColorHistogram {
    pub bins: Vec<f64>,
    pub bin_centers: Vec<Lab>,
}

impl ColorHistogram {
    /// Histogram over arbitrary bin centers; `mass` is normalized to sum to one.
    ///
    /// Panics when the lengths differ or the mass is not positive.
    pub fn new(mass: Vec<f64>, bin_centers: Vec<Lab>) -> Self {
        assert_eq!(mass.len(), bin_centers.len(), "one center per bin");
        assert!(
            mass.iter().all(|m| *m >= 0.0 && m.is_finite()),
            "mass must be non-negative"
        );
        let total: f64 = mass.iter().sum();
        assert!(total > 0.0, "histogram needs positive mass");
        ColorHistogram {
            bins: mass.into_iter().map(|m| m / total).collect(),
            bin_centers,
        }
    }

    pub fn from_lab<'a>(
        pixels: impl IntoIterator<Item = &'a Lab>,
        layout: HistogramLayout,
    ) -> Self {
        let mut counts = vec![0.0; layout.len()];
        for lab in pixels {
            counts[layout.bin_of(lab)] += 1.0;
        }
        ColorHistogram::new(counts, layout.centers())
    }

    pub fn len(&self) -> usize {
        self.bins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bins.is_empty()
    }

    pub fn same_layout(&self, other: &ColorHistogram) -> bool {
        self.bin_centers == other.bin_centers
    }
}

/// Histogram of the pixels of `rect` over `bins_per_axis`³ Lab bins.
pub fn block_histogram(image: &PageImage, rect: Rect, bins_per_axis: usize) -> ColorHistogram {
    let lab: Vec<Lab> = rect
        .indices(image.width())
        .map(|i| image.pixels()[i].to_lab())
        .collect();
    ColorHistogram::from_lab(&lab, HistogramLayout::new(bins_per_axis))
}

/// Same as [`block_histogram`] on a precomputed Lab buffer of width `stride`.
pub(crate) fn lab_block_histogram(
    lab: &[Lab],
    stride: usize,
    rect: Rect,
    layout: HistogramLayout,
    centers: &[Lab],
) -> ColorHistogram {
    let mut counts = vec![0.0; layout.len()];
    for i in rect.indices(stride) {
        counts[layout.bin_of(&lab[i])] += 1.0;
    }
    let total: f64 = counts.iter().sum();
    ColorHistogram {
        bins: counts.into_iter().map(|c| c / total).collect(),
        bin_centers: centers.to_vec(),
    }
}
