//! Reference pages for color transfer.
//!
//! A collection directory holds PNG pages, theme JSON files and snapshot
//! subdirectories; alternatively a `collection.json` index lists entries
//! explicitly. Every entry resolves to a theme plus the Lab pixels that serve
//! as the transfer target.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::theme_reference_pixels;
use crate::color::{ColorTheme, Lab};
use crate::error::{Error, TransferError};
use crate::fixed::{locate_by_block_sampling, BlockSamplingParams};
use crate::ingest::{list_pngs, load_snapshot_set, PageImage};
use crate::rng::{derive_seed_for, Stream};
use crate::theme::{extract_theme, extract_theme_whole, ThemeParams};

pub const INDEX_FILE: &str = "collection.json";
/// Pixels synthesized for references that only have a theme.
const THEME_ONLY_PIXELS: usize = 1000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexEntry {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub image_path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theme_path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snapshot_dir: Option<PathBuf>,
    #[serde(default)]
    pub tags: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CollectionIndex {
    pub entries: Vec<IndexEntry>,
}

impl CollectionIndex {
    pub fn load(path: &Path) -> Result<Self, Error> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::json(path, e))
    }

    pub fn save(&self, path: &Path) -> Result<(), Error> {
        let json = serde_json::to_string_pretty(self).map_err(|e| Error::json(path, e))?;
        std::fs::write(path, json + "\n").map_err(|e| Error::io(path, e))
    }

    /// Index of the pages, themes and snapshot folders found in `dir`.
    pub fn scan(dir: &Path) -> Result<Self, Error> {
        let read = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
        let mut by_id: BTreeMap<String, IndexEntry> = BTreeMap::new();
        let mut paths: Vec<PathBuf> = read.filter_map(|e| e.ok().map(|e| e.path())).collect();
        paths.sort();
        for path in paths {
            let Some(stem) = path
                .file_stem()
                .and_then(|s| s.to_str())
                .map(str::to_string)
            else {
                continue;
            };
            let ext = path
                .extension()
                .and_then(|e| e.to_str())
                .map(str::to_ascii_lowercase);
            let entry = by_id.entry(stem.clone()).or_insert_with(|| IndexEntry {
                id: stem.clone(),
                image_path: None,
                theme_path: None,
                snapshot_dir: None,
                tags: Vec::new(),
            });
            if path.is_dir() {
                if list_pngs(&path).map(|p| !p.is_empty()).unwrap_or(false) {
                    if entry.image_path.is_some() || entry.snapshot_dir.is_some() {
                        return Err(TransferError::DuplicateId(stem).into());
                    }
                    entry.snapshot_dir = Some(path);
                }
            } else if ext.as_deref() == Some("png") {
                if entry.snapshot_dir.is_some() {
                    return Err(TransferError::DuplicateId(stem).into());
                }
                entry.image_path = Some(path);
            } else if ext.as_deref() == Some("json")
                && path.file_name() != Some(INDEX_FILE.as_ref())
            {
                entry.theme_path = Some(path);
            }
        }
        let entries: Vec<IndexEntry> = by_id
            .into_values()
            .filter(|e| {
                e.image_path.is_some() || e.theme_path.is_some() || e.snapshot_dir.is_some()
            })
            .collect();
        Ok(CollectionIndex { entries })
    }
}

#[derive(Debug, Clone)]
pub struct CollectionEntry {
    pub id: String,
    pub image: Option<PageImage>,
    pub theme: ColorTheme,
    /// Lab pixels a transfer aims at.
    pub reference_pixels: Vec<Lab>,
    pub tags: Vec<String>,
    pub from_snapshots: bool,
}

#[derive(Debug, Clone)]
pub struct ReferenceCollection {
    pub entries: Vec<CollectionEntry>,
    pub root: PathBuf,
}

impl ReferenceCollection {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&CollectionEntry> {
        self.entries.iter().find(|e| e.id == id)
    }
}

/// Settings used to derive themes for image and snapshot entries.
#[derive(Debug, Clone, Copy, Default)]
pub struct CollectionParams {
    pub theme: ThemeParams,
    pub sampling: BlockSamplingParams,
    pub seed: u64,
}

/// Builds a collection from a directory, honoring `collection.json` when present.
pub fn build_collection(
    dir: &Path,
    params: &CollectionParams,
) -> Result<ReferenceCollection, Error> {
    let index_path = dir.join(INDEX_FILE);
    let index = if index_path.is_file() {
        CollectionIndex::load(&index_path)?
    } else {
        CollectionIndex::scan(dir)?
    };
    load_collection(dir, &index, params)
}

/// Resolves every index entry; relative paths are taken from `root`.
pub fn load_collection(
    root: &Path,
    index: &CollectionIndex,
    params: &CollectionParams,
) -> Result<ReferenceCollection, Error> {
    if index.entries.is_empty() {
        return Err(TransferError::EmptyCollection(root.to_path_buf()).into());
    }
    let mut seen = std::collections::HashSet::new();
    for e in &index.entries {
        if !seen.insert(e.id.as_str()) {
            return Err(TransferError::DuplicateId(e.id.clone()).into());
        }
    }
    let entries = index
        .entries
        .par_iter()
        .map(|e| resolve(root, e, params))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ReferenceCollection {
        entries,
        root: root.to_path_buf(),
    })
}

fn resolve(
    root: &Path,
    e: &IndexEntry,
    params: &CollectionParams,
) -> Result<CollectionEntry, Error> {
    let at = |p: &PathBuf| {
        if p.is_absolute() {
            p.clone()
        } else {
            root.join(p)
        }
    };
    let file_theme = match &e.theme_path {
        Some(p) => {
            let path = at(p);
            let text = std::fs::read_to_string(&path).map_err(|err| Error::io(&path, err))?;
            Some(ColorTheme::from_json(&text).map_err(|err| Error::json(&path, err))?)
        }
        None => None,
    };
    let seed = derive_seed_for(params.seed, Stream::Clustering, &e.id);

    if let Some(dir) = &e.snapshot_dir {
        let set = load_snapshot_set(at(dir))?;
        let loc = locate_by_block_sampling(
            &set,
            &params.sampling,
            derive_seed_for(params.seed, Stream::Locator, &e.id),
        )?;
        let first = set.first().clone();
        let theme = match file_theme {
            Some(t) => t,
            None => extract_theme(&first, &loc.grid, &loc.sampled, &params.theme, seed)?.0,
        };
        let mask = loc.sampled.pixel_mask(&loc.grid)?;
        let pixels = first
            .pixels()
            .iter()
            .zip(&mask)
            .filter(|(_, &m)| m)
            .map(|(c, _)| c.to_lab())
            .collect();
        return Ok(entry(e, Some(first), theme, pixels, true));
    }
    match (&e.image_path, file_theme) {
        (Some(p), theme) => {
            let image = PageImage::load_png(at(p))?;
            let theme = match theme {
                Some(t) => t,
                None => extract_theme_whole(&image, &params.theme, seed)?.0,
            };
            let pixels = image.to_lab();
            Ok(entry(e, Some(image), theme, pixels, false))
        }
        (None, Some(theme)) => {
            let pixels = theme_reference_pixels(&theme, THEME_ONLY_PIXELS);
            Ok(entry(e, None, theme, pixels, false))
        }
        (None, None) => Err(TransferError::Unresolvable(e.id.clone()).into()),
    }
}

fn entry(
    e: &IndexEntry,
    image: Option<PageImage>,
    mut theme: ColorTheme,
    pixels: Vec<Lab>,
    snap: bool,
) -> CollectionEntry {
    if theme.source_id.is_empty() {
        theme.source_id = e.id.clone();
    }
    CollectionEntry {
        id: e.id.clone(),
        image,
        theme,
        reference_pixels: pixels,
        tags: e.tags.clone(),
        from_snapshots: snap,
    }
}

/// Transfer target pixels of an entry.
pub fn theme_pixels(entry: &CollectionEntry) -> &[Lab] {
    &entry.reference_pixels
}
