//! The book, attached as rustdoc so its code snippets build and run under
//! `cargo test --doc`. Each chapter of `book/src/` appears here as one
//! module; keeping the two in sync is the point — a snippet that drifts from
//! the library breaks the test suite.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/video-io.md")]
pub mod video_io {}

#[doc = include_str!("../../../book/src/natural-scene-statistics.md")]
pub mod natural_scene_statistics {}

#[doc = include_str!("../../../book/src/spatial-features.md")]
pub mod spatial_features {}

#[doc = include_str!("../../../book/src/temporal-features.md")]
pub mod temporal_features {}

#[doc = include_str!("../../../book/src/regression.md")]
pub mod regression_guide {}

#[doc = include_str!("../../../book/src/evaluation.md")]
pub mod evaluation_protocol {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod command_line {}
