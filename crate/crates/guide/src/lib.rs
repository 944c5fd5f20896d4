//! Compiles and runs every listing of the book under `book/src` as a doctest.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/colors.md")]
pub mod colors {}

#[doc = include_str!("../../../book/src/fixed-part.md")]
pub mod fixed_part {}

#[doc = include_str!("../../../book/src/themes.md")]
pub mod themes {}

#[doc = include_str!("../../../book/src/features.md")]
pub mod features {}

#[doc = include_str!("../../../book/src/learning.md")]
pub mod learning {}

#[doc = include_str!("../../../book/src/transfer.md")]
pub mod transfer {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
