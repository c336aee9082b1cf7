//! The guide under `book/` is plain mdbook, which cannot build listings that
//! depend on a crate. Each chapter is included here as a module doc so that
//! `cargo test --doc` runs its code blocks.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/geometry.md")]
pub mod geometry {}
#[doc = include_str!("../../../book/src/nested-sets.md")]
pub mod nested_sets {}
#[doc = include_str!("../../../book/src/algorithm.md")]
pub mod algorithm {}
#[doc = include_str!("../../../book/src/certificates.md")]
pub mod certificates {}
#[doc = include_str!("../../../book/src/experiments.md")]
pub mod experiments {}
