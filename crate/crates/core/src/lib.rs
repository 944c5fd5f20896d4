//! Color themes, compatibility scoring and color transfer for web pages.
//!
//! The crate covers the whole path from page screenshots to ranked recolorings:
//! [`ingest`] loads snapshot sets, [`fixed`] finds the part of a page that stays
//! put over time, [`theme`] clusters it into a five-color theme, [`features`]
//! describes the theme numerically, [`learn`] fits a scoring model that
//! corrects for the gap between rated palettes and real pages, and
//! [`transfer`] recolors a page toward references and ranks the outcomes.

pub mod color;
pub mod config;
pub mod error;
pub mod features;
pub mod fixed;
pub mod ingest;
pub mod learn;
pub mod pipeline;
pub mod rng;
pub mod synthetic;
pub mod theme;
pub mod transfer;

pub use error::{Error, Result};
