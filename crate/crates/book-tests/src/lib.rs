//! Runs the guide's code blocks as doctests.
//!
//! mdbook cannot link external crates when testing, so each chapter is
//! included as the docs of an empty module and `cargo test --doc` does the
//! rest. One module per chapter keeps failures traceable.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/model.md")]
pub mod model {}
#[doc = include_str!("../../../book/src/phase-space.md")]
pub mod phase_space {}
#[doc = include_str!("../../../book/src/reductions.md")]
pub mod reductions {}
#[doc = include_str!("../../../book/src/shooting.md")]
pub mod shooting {}
#[doc = include_str!("../../../book/src/trapping.md")]
pub mod trapping {}
#[doc = include_str!("../../../book/src/simulation.md")]
pub mod simulation {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
#[doc = include_str!("../../../README.md")]
pub mod readme {}
