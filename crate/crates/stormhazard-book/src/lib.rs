//! Doc-test shim for the guide in `book/`.
//!
//! mdBook renders the chapters but cannot run their Rust snippets against
//! this workspace, so each chapter is also included here as module
//! documentation; `cargo test --doc -p stormhazard-book` compiles and runs
//! every fenced snippet. One module per chapter keeps failures traceable to
//! their source file.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/data-model.md")]
pub mod data_model {}

#[doc = include_str!("../../../book/src/declustering.md")]
pub mod declustering {}

#[doc = include_str!("../../../book/src/hazard-model.md")]
pub mod hazard_model {}

#[doc = include_str!("../../../book/src/base-intensity.md")]
pub mod base_intensity {}

#[doc = include_str!("../../../book/src/extrapolation.md")]
pub mod extrapolation {}

#[doc = include_str!("../../../book/src/simulation.md")]
pub mod simulation {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
