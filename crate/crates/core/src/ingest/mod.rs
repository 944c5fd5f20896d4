//! Page screenshots, temporal snapshot sets and the block grid.

mod fetch;

use std::path::{Path, PathBuf};

use image::{Rgb, RgbImage};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::color::{ColorRGB, Lab};
use crate::error::{Error, IngestError};

pub use fetch::{fetch_snapshots, ArchiveClient};

/// A rasterized web page (or any image), row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PageImage {
    width: usize,
    height: usize,
    pixels: Vec<ColorRGB>,
    pub url: Option<String>,
}

impl PageImage {
    pub fn new(width: usize, height: usize, pixels: Vec<ColorRGB>) -> Result<Self, IngestError> {
        if width == 0 || height == 0 {
            return Err(IngestError::InvalidImage(format!(
                "dimensions must be positive, got {width}x{height}"
            )));
        }
        if pixels.len() != width * height {
            return Err(IngestError::InvalidImage(format!(
                "buffer holds {} pixels, expected {}",
                pixels.len(),
                width * height
            )));
        }
        Ok(PageImage {
            width,
            height,
            pixels,
            url: None,
        })
    }

    pub fn filled(width: usize, height: usize, color: ColorRGB) -> Self {
        assert!(width > 0 && height > 0, "image dimensions must be positive");
        PageImage {
            width,
            height,
            pixels: vec![color; width * height],
            url: None,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dimensions(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn pixels(&self) -> &[ColorRGB] {
        &self.pixels
    }

    pub fn pixels_mut(&mut self) -> &mut [ColorRGB] {
        &mut self.pixels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> ColorRGB {
        self.pixels[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, c: ColorRGB) {
        self.pixels[y * self.width + x] = c;
    }

    /// Paints an axis-aligned rectangle, clipped to the image.
    pub fn fill_rect(&mut self, rect: Rect, c: ColorRGB) {
        let x1 = (rect.x + rect.w).min(self.width);
        let y1 = (rect.y + rect.h).min(self.height);
        for y in rect.y.min(y1)..y1 {
            for x in rect.x.min(x1)..x1 {
                self.set(x, y, c);
            }
        }
    }

    pub fn to_lab(&self) -> Vec<Lab> {
        self.pixels.par_iter().map(|c| c.to_lab()).collect()
    }

    pub fn resize_nearest(&self, width: usize, height: usize) -> PageImage {
        if (width, height) == self.dimensions() {
            return self.clone();
        }
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            let sy = (y * self.height) / height;
            for x in 0..width {
                let sx = (x * self.width) / width;
                pixels.push(self.get(sx, sy));
            }
        }
        PageImage {
            width,
            height,
            pixels,
            url: self.url.clone(),
        }
    }

    pub fn from_rgb_image(img: &RgbImage) -> Self {
        let (w, h) = img.dimensions();
        let pixels = img.pixels().map(|p| ColorRGB::from_u8(p.0)).collect();
        PageImage {
            width: w as usize,
            height: h as usize,
            pixels,
            url: None,
        }
    }

    pub fn to_rgb_image(&self) -> RgbImage {
        let mut img = RgbImage::new(self.width as u32, self.height as u32);
        for (dst, src) in img.pixels_mut().zip(&self.pixels) {
            *dst = Rgb(src.to_u8());
        }
        img
    }

    /// Decodes a PNG; alpha is composited over white.
    pub fn load_png(path: impl AsRef<Path>) -> Result<Self, IngestError> {
        let path = path.as_ref();
        let decoded = image::open(path).map_err(|e| IngestError::UndecodableImage {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })?;
        let rgba = decoded.to_rgba8();
        let (w, h) = rgba.dimensions();
        if w == 0 || h == 0 {
            return Err(IngestError::UndecodableImage {
                path: path.to_path_buf(),
                reason: "zero-sized image".into(),
            });
        }
        let pixels = rgba
            .pixels()
            .map(|p| {
                let [r, g, b, a] = p.0;
                if a == 255 {
                    ColorRGB::from_u8([r, g, b])
                } else {
                    let alpha = f64::from(a) / 255.0;
                    let over = |v: u8| f64::from(v) / 255.0 * alpha + (1.0 - alpha);
                    ColorRGB::new(over(r), over(g), over(b))
                }
            })
            .collect();
        Ok(PageImage {
            width: w as usize,
            height: h as usize,
            pixels,
            url: None,
        })
    }

    pub fn save_png(&self, path: impl AsRef<Path>) -> Result<(), Error> {
        self.to_rgb_image().save(path.as_ref())?;
        Ok(())
    }
}

/// Temporal screenshots of one URL; the first image is the page under assessment.
#[derive(Debug, Clone)]
pub struct SnapshotSet {
    pub url: String,
    images: Vec<PageImage>,
}

impl SnapshotSet {
    /// Builds a set, resizing later images to the first one's dimensions.
    pub fn new(url: impl Into<String>, images: Vec<PageImage>) -> Result<Self, IngestError> {
        let first = images
            .first()
            .ok_or_else(|| IngestError::InvalidImage("snapshot set is empty".into()))?;
        let (w, h) = first.dimensions();
        let images = images
            .into_iter()
            .map(|img| img.resize_nearest(w, h))
            .collect();
        Ok(SnapshotSet {
            url: url.into(),
            images,
        })
    }

    pub fn images(&self) -> &[PageImage] {
        &self.images
    }

    pub fn first(&self) -> &PageImage {
        &self.images[0]
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn dimensions(&self) -> (usize, usize) {
        self.images[0].dimensions()
    }

    /// Writes the set as `<index>_<label>.png` files.
    pub fn save(&self, dir: impl AsRef<Path>) -> Result<Vec<PathBuf>, Error> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        self.images
            .iter()
            .enumerate()
            .map(|(i, img)| {
                let path = dir.join(format!("{i:03}_{i:014}.png"));
                img.save_png(&path)?;
                Ok(path)
            })
            .collect()
    }
}

/// Lists PNG files of a directory in lexicographic file-name order.
pub fn list_pngs(dir: &Path) -> Result<Vec<PathBuf>, IngestError> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| {
            p.is_file()
                && p.extension()
                    .and_then(|e| e.to_str())
                    .is_some_and(|e| e.eq_ignore_ascii_case("png"))
        })
        .collect();
    files.sort_by(|a, b| a.file_name().cmp(&b.file_name()));
    Ok(files)
}

/// Loads every PNG of `dir` as one snapshot set; file-name order is temporal order.
pub fn load_snapshot_set(dir: impl AsRef<Path>) -> Result<SnapshotSet, IngestError> {
    let dir = dir.as_ref();
    if !dir.is_dir() {
        return Err(IngestError::Io(std::io::Error::new(
            std::io::ErrorKind::NotFound,
            format!("{} is not a directory", dir.display()),
        )));
    }
    let files = list_pngs(dir)?;
    if files.is_empty() {
        return Err(IngestError::EmptyDirectory(dir.to_path_buf()));
    }
    let images = files
        .par_iter()
        .map(PageImage::load_png)
        .collect::<Result<Vec<_>, _>>()?;
    let url = std::fs::read_to_string(dir.join("url.txt"))
        .map(|s| s.trim().to_string())
        .unwrap_or_else(|_| {
            dir.file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_default()
        });
    SnapshotSet::new(url, images)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Rect {
    pub x: usize,
    pub y: usize,
    pub w: usize,
    pub h: usize,
}

impl Rect {
    pub fn area(&self) -> usize {
        self.w * self.h
    }

    pub fn contains(&self, x: usize, y: usize) -> bool {
        x >= self.x && x < self.x + self.w && y >= self.y && y < self.y + self.h
    }

    /// Row-major pixel indices of the rectangle inside an image of width `stride`.
    pub fn indices(&self, stride: usize) -> impl Iterator<Item = usize> + '_ {
        (self.y..self.y + self.h)
            .flat_map(move |y| (self.x..self.x + self.w).map(move |x| y * stride + x))
    }
}

/// `n1` columns by `n2` rows of blocks tiling an image.
///
/// Block `b` sits at column `b % n1`, row `b / n1`. Remainder pixels go to the
/// last column and the last row.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockGrid {
    pub n1: usize,
    pub n2: usize,
    pub width: usize,
    pub height: usize,
    pub block_rects: Vec<Rect>,
}

impl BlockGrid {
    pub fn len(&self) -> usize {
        self.block_rects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.block_rects.is_empty()
    }

    /// Index of the block covering pixel `(x, y)`.
    pub fn block_of(&self, x: usize, y: usize) -> usize {
        let bw = self.width / self.n1;
        let bh = self.height / self.n2;
        let col = (x / bw).min(self.n1 - 1);
        let row = (y / bh).min(self.n2 - 1);
        row * self.n1 + col
    }

    /// Per-pixel block index, row-major.
    pub fn pixel_blocks(&self) -> Vec<usize> {
        let mut out = vec![0; self.width * self.height];
        for (b, rect) in self.block_rects.iter().enumerate() {
            for i in rect.indices(self.width) {
                out[i] = b;
            }
        }
        out
    }
}

pub fn partition_blocks(image: &PageImage, n1: usize, n2: usize) -> Result<BlockGrid, IngestError> {
    partition_dims(image.width(), image.height(), n1, n2)
}

pub fn partition_dims(
    width: usize,
    height: usize,
    n1: usize,
    n2: usize,
) -> Result<BlockGrid, IngestError> {
    if n1 == 0 || n2 == 0 || n1 > width || n2 > height {
        return Err(IngestError::GridTooFine {
            n1,
            n2,
            width,
            height,
        });
    }
    let bw = width / n1;
    let bh = height / n2;
    let mut block_rects = Vec::with_capacity(n1 * n2);
    for row in 0..n2 {
        let h = if row + 1 == n2 { height - bh * row } else { bh };
        for col in 0..n1 {
            let w = if col + 1 == n1 { width - bw * col } else { bw };
            block_rects.push(Rect {
                x: col * bw,
                y: row * bh,
                w,
                h,
            });
        }
    }
    Ok(BlockGrid {
        n1,
        n2,
        width,
        height,
        block_rects,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn even_grid() {
        let grid = partition_dims(400, 400, 40, 40).unwrap();
        assert_eq!(grid.len(), 1600);
        assert!(grid.block_rects.iter().all(|r| r.w == 10 && r.h == 10));
    }

    #[test]
    fn remainder_goes_to_last_column() {
        let grid = partition_dims(401, 400, 40, 40).unwrap();
        for (b, r) in grid.block_rects.iter().enumerate() {
            let expected = if b % 40 == 39 { 11 } else { 10 };
            assert_eq!(r.w, expected, "block {b}");
            assert_eq!(r.h, 10);
        }
    }

    #[test]
    fn too_fine() {
        let img = PageImage::filled(10, 10, ColorRGB::WHITE);
        assert!(matches!(
            partition_blocks(&img, 20, 5),
            Err(IngestError::GridTooFine { .. })
        ));
    }

    #[test]
    fn block_of_agrees_with_rects() {
        let grid = partition_dims(37, 23, 5, 4).unwrap();
        let map = grid.pixel_blocks();
        for y in 0..23 {
            for x in 0..37 {
                let b = grid.block_of(x, y);
                assert_eq!(map[y * 37 + x], b);
                assert!(grid.block_rects[b].contains(x, y));
            }
        }
    }

    #[test]
    fn resize_keeps_corners() {
        let mut img = PageImage::filled(4, 4, ColorRGB::WHITE);
        img.set(0, 0, ColorRGB::BLACK);
        let big = img.resize_nearest(8, 8);
        assert_eq!(big.get(0, 0), ColorRGB::BLACK);
        assert_eq!(big.get(1, 1), ColorRGB::BLACK);
        assert_eq!(big.get(2, 2), ColorRGB::WHITE);
    }

    #[test]
    fn rejects_bad_buffer() {
        assert!(PageImage::new(2, 2, vec![ColorRGB::WHITE; 3]).is_err());
        assert!(PageImage::new(0, 2, vec![]).is_err());
    }

    proptest! {
        #[test]
        fn blocks_tile_image(w in 1usize..120, h in 1usize..120, n1 in 1usize..30, n2 in 1usize..30) {
            prop_assume!(n1 <= w && n2 <= h);
            let grid = partition_dims(w, h, n1, n2).unwrap();
            let total: usize = grid.block_rects.iter().map(Rect::area).sum();
            prop_assert_eq!(total, w * h);
            let mut seen = vec![0u8; w * h];
            for r in &grid.block_rects {
                for i in r.indices(w) {
                    seen[i] += 1;
                }
            }
            prop_assert!(seen.iter().all(|&c| c == 1));
            prop_assert_eq!(grid, partition_dims(w, h, n1, n2).unwrap());
        }
    }
}
