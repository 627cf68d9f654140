//! Numerical laboratory for relatively bounded quantum perturbations of
//! classical lattice models.
//!
//! * [`lattice`]: torus geometry and tensor-product embeddings.
//! * [`forms`]: model assembly, relative form bounds and blocking.
//! * [`cluster`]: space-time polymer and cluster expansion of `ln Z`.
//! * [`aklt`]: spin-1 AKLT chain, valence-bond ground states and block splits.

pub mod error;
pub mod linalg;
pub mod lattice;
pub mod forms;
pub mod report;
pub mod model_io;
pub mod cluster;
pub mod aklt;

pub use error::{Error, Result};
