//! Generated pages, snapshot sets and regression tasks with known ground truth.
//! Used by the test suites, the guide and `selftest`.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::color::{delta_e, ColorRGB, THEME_SIZE};
use crate::ingest::{PageImage, Rect, SnapshotSet};
use crate::learn::{SourceDataset, TargetDataset};

/// Random palette whose colors are pairwise at least `min_delta_e` apart.
pub fn random_palette<R: Rng>(rng: &mut R, min_delta_e: f64) -> [ColorRGB; THEME_SIZE] {
    loop {
        let mut out: Vec<ColorRGB> = Vec::with_capacity(THEME_SIZE);
        for _ in 0..200 {
            let c = ColorRGB::from_u8([rng.gen(), rng.gen(), rng.gen()]);
            if out.iter().all(|o| delta_e(*o, c) >= min_delta_e) {
                out.push(c);
                if out.len() == THEME_SIZE {
                    return out.try_into().expect("five colors");
                }
            }
        }
    }
}

/// Vertical stripes of equal width, left to right in palette order.
pub fn stripe_page(palette: &[ColorRGB; THEME_SIZE], width: usize, height: usize) -> PageImage {
    let mut img = PageImage::filled(width, height, palette[0]);
    let sw = width / THEME_SIZE;
    for (i, c) in palette.iter().enumerate() {
        let w = if i == THEME_SIZE - 1 {
            width - i * sw
        } else {
            sw
        };
        img.fill_rect(
            Rect {
                x: i * sw,
                y: 0,
                w,
                h: height,
            },
            *c,
        );
    }
    img
}

/// Overwrites `fraction` of the pixels with uniformly random colors.
pub fn add_noise<R: Rng>(img: &mut PageImage, fraction: f64, rng: &mut R) -> usize {
    let (w, h) = img.dimensions();
    let count = (fraction * (w * h) as f64).floor() as usize;
    for _ in 0..count {
        let (x, y) = (rng.gen_range(0..w), rng.gen_range(0..h));
        img.set(x, y, ColorRGB::from_u8([rng.gen(), rng.gen(), rng.gen()]));
    }
    count
}

/// A page with a fixed layout and a banner whose content changes between
/// snapshots.
#[derive(Debug, Clone)]
pub struct BannerPage {
    pub snapshots: SnapshotSet,
    pub palette: [ColorRGB; THEME_SIZE],
    pub banner: Rect,
}

impl BannerPage {
    /// Pixels outside the banner.
    pub fn fixed_mask(&self) -> Vec<bool> {
        let (w, h) = self.snapshots.dimensions();
        (0..w * h)
            .map(|i| !self.banner.contains(i % w, i / w))
            .collect()
    }
}

pub const BANNER_PAGE_SIZE: (usize, usize) = (160, 120);

/// Layout: background, header, sidebar, two content panels and a footer, in
/// five palette colors. The banner (aligned to the default 40 x 40 grid on a
/// 160 x 120 page) is repainted with random rectangles in every snapshot.
pub fn banner_page<R: Rng>(rng: &mut R, snapshots: usize) -> BannerPage {
    let (w, h) = BANNER_PAGE_SIZE;
    let palette = random_palette(rng, 25.0);
    let mut base = PageImage::filled(w, h, palette[0]);
    base.fill_rect(
        Rect {
            x: 0,
            y: 0,
            w,
            h: 18,
        },
        palette[1],
    );
    base.fill_rect(
        Rect {
            x: 0,
            y: 18,
            w: 32,
            h: h - 30,
        },
        palette[2],
    );
    base.fill_rect(
        Rect {
            x: 48,
            y: 90,
            w: 48,
            h: 18,
        },
        palette[3],
    );
    base.fill_rect(
        Rect {
            x: 104,
            y: 90,
            w: 44,
            h: 18,
        },
        palette[3],
    );
    base.fill_rect(
        Rect {
            x: 0,
            y: h - 12,
            w,
            h: 12,
        },
        palette[4],
    );
    let banner = Rect {
        x: 48,
        y: 30,
        w: 100,
        h: 51,
    };

    let images = (0..snapshots)
        .map(|_| {
            let mut img = base.clone();
            img.fill_rect(banner, ColorRGB::from_u8([rng.gen(), rng.gen(), rng.gen()]));
            for _ in 0..14 {
                let rw = rng.gen_range(6..40);
                let rh = rng.gen_range(4..26);
                let x = banner.x + rng.gen_range(0..banner.w - rw.min(banner.w - 1));
                let y = banner.y + rng.gen_range(0..banner.h - rh.min(banner.h - 1));
                let rect = Rect {
                    x,
                    y,
                    w: rw.min(banner.x + banner.w - x),
                    h: rh.min(banner.y + banner.h - y),
                };
                img.fill_rect(rect, ColorRGB::from_u8([rng.gen(), rng.gen(), rng.gen()]));
            }
            img
        })
        .collect();
    BannerPage {
        snapshots: SnapshotSet::new("synthetic://banner", images).expect("equal sizes"),
        palette,
        banner,
    }
}

/// Regression task whose target inputs sit in a shifted region of the source
/// distribution. Labels come from one nonlinear function, so the best linear
/// fit on the target region differs from the best fit on the whole source.
///
/// Source latents are standard normal and target latents are
/// `shift + spread·N(0, 1)` per coordinate. With `spread < 1` the density
/// ratio is bounded; its peak sets how many samples a bootstrap bag keeps
/// (about `n_source / max β`), so the defaults keep it in single digits.
#[derive(Debug, Clone)]
pub struct ShiftTask {
    pub source: SourceDataset,
    pub target: TargetDataset,
    pub test_x: Vec<Vec<f64>>,
    pub test_y: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShiftTaskSpec {
    pub n_source: usize,
    pub n_target: usize,
    pub n_test: usize,
    pub latent_dim: usize,
    /// Each latent coordinate appears this many times as a feature, with noise.
    pub copies: usize,
    pub copy_noise: f64,
    pub label_noise: f64,
    pub target_shift: f64,
    pub target_spread: f64,
}

impl Default for ShiftTaskSpec {
    fn default() -> Self {
        ShiftTaskSpec {
            n_source: 200,
            n_target: 200,
            n_test: 200,
            latent_dim: 3,
            copies: 1,
            copy_noise: 0.0,
            label_noise: 0.1,
            target_shift: 0.5,
            target_spread: 0.8,
        }
    }
}

/// Ground-truth label of a latent point.
pub fn shift_label(z: &[f64]) -> f64 {
    z.iter()
        .enumerate()
        .map(|(j, v)| (1.0 + 0.5 * j as f64) * v + 0.6 * v * v)
        .sum()
}

pub fn covariate_shift_task<R: Rng>(spec: &ShiftTaskSpec, rng: &mut R) -> ShiftTask {
    let d = spec.latent_dim;
    let std = Normal::new(0.0, 1.0).expect("unit normal");
    let features = |z: &[f64], rng: &mut R| -> Vec<f64> {
        let mut out = Vec::with_capacity(d * spec.copies);
        for &v in z {
            for _ in 0..spec.copies {
                out.push(v + spec.copy_noise * std.sample(rng));
            }
        }
        out
    };
    let source_z: Vec<Vec<f64>> = (0..spec.n_source)
        .map(|_| (0..d).map(|_| std.sample(rng)).collect())
        .collect();
    let target_point = |rng: &mut R| -> Vec<f64> {
        (0..d)
            .map(|_| spec.target_shift + spec.target_spread * std.sample(rng))
            .collect()
    };
    let target_z: Vec<Vec<f64>> = (0..spec.n_target).map(|_| target_point(rng)).collect();
    let test_z: Vec<Vec<f64>> = (0..spec.n_test).map(|_| target_point(rng)).collect();

    let names: Vec<String> = (0..d * spec.copies).map(|i| format!("x{i}")).collect();
    let sx = source_z.iter().map(|z| features(z, rng)).collect();
    let sy = source_z
        .iter()
        .map(|z| shift_label(z) + spec.label_noise * std.sample(rng))
        .collect();
    let tx = target_z.iter().map(|z| features(z, rng)).collect();
    let test_x = test_z.iter().map(|z| features(z, rng)).collect();
    let test_y = test_z
        .iter()
        .map(|z| shift_label(z) + spec.label_noise * std.sample(rng))
        .collect();
    ShiftTask {
        source: SourceDataset::new(names.clone(), sx, sy, "synthetic").expect("consistent rows"),
        target: TargetDataset::new(names, tx).expect("consistent rows"),
        test_x,
        test_y,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn banner_changes_only_inside() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        let page = banner_page(&mut rng, 5);
        let imgs = page.snapshots.images();
        let mask = page.fixed_mask();
        for img in &imgs[1..] {
            for (i, (&fixed, p)) in mask.iter().zip(img.pixels()).enumerate() {
                if fixed {
                    assert_eq!(*p, imgs[0].pixels()[i]);
                }
            }
            assert_ne!(img, &imgs[0]);
        }
    }

    #[test]
    fn palettes_are_separated() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let p = random_palette(&mut rng, 30.0);
        for i in 0..5 {
            for j in i + 1..5 {
                assert!(delta_e(p[i], p[j]) >= 30.0);
            }
        }
    }

    #[test]
    fn task_shapes() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let spec = ShiftTaskSpec {
            copies: 3,
            copy_noise: 0.2,
            ..Default::default()
        };
        let t = covariate_shift_task(&spec, &mut rng);
        assert_eq!(t.source.names.len(), 9);
        assert_eq!(t.test_x.len(), spec.n_test);
    }
}
