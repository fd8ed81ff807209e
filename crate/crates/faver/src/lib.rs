//! Blind quality prediction of variable and high frame rate videos.
//!
//! The model scores a video with no reference by measuring how far its
//! natural-scene statistics drift from those of pristine footage, in two
//! complementary branches:
//!
//! * a **spatial branch** — 272 features from generalized-Gaussian fits of
//!   locally normalized luma, chroma, gradient-magnitude, and
//!   Laplacian-of-Gaussian maps at two scales ([`spatial`]);
//! * a **temporal branch** — 476 features from the same statistics applied to
//!   the responses of three-level wavelet-packet filter banks run along time,
//!   which is what makes the model sensitive to frame-rate artifacts
//!   ([`temporal`]).
//!
//! Two support-vector regressors (one per branch) are trained on subjective
//! scores and averaged at prediction time ([`regression`]); the evaluation
//! protocol with content-separated splits and median SROCC/PLCC/RMSE lives in
//! [`eval`]. The `faver` binary exposes extraction, training, prediction,
//! evaluation, and benchmarking; the mdbook under `book/` walks through every
//! stage with runnable snippets (they compile and run as doctests of the
//! [`guide`] module).

pub mod dataset;
pub mod error;
pub mod eval;
pub mod guide;
pub mod pipeline;
pub mod plane;
pub mod regression;
pub mod schema;
pub mod spatial;
pub mod synth;
pub mod temporal;
pub mod video;

mod seeds;
pub mod nss;

pub use error::{Error, Result};
pub use plane::Plane;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

// Re-exported for downstream seed derivation (CLI, tests).
pub use seeds::derive_rng;
