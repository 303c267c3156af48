//! Clustering of SISO LTI systems by ν-gap distance, prototype construction
//! per cluster, and robust controller synthesis that stabilizes every member.
//!
//! The pipeline runs pairwise ν-gap distances, complete-linkage clustering,
//! iterative prototype construction by chordal interpolation, normalized
//! coprime factor controller synthesis for each prototype, and per-member
//! verification of closed-loop stability.

// parameter checks are written so that NaN fails them
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod linalg;
pub mod poly;
pub mod tf;
pub mod ss;
pub mod freq;
pub mod coprime;
pub mod metric;
pub mod io;
pub mod cluster;
pub mod sphere;
pub mod prototype;
pub mod controller;
pub mod rng;
pub mod tsne;
pub mod dataset;
pub mod plots;
pub mod pipeline;

pub use error::{Error, Result};
pub use freq::FrequencyGrid;
pub use poly::Polynomial;
pub use tf::{RationalTF, Response};
