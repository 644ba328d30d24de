//! Rotation-based privacy-preserving transformations for distance-based
//! clustering.
//!
//! A data owner holds an `a × n` numeric dataset (one record per column). The
//! crate provides:
//!
//! * [`rotation`]: orthonormal block-diagonal rotation matrices built from a
//!   single angle, their composition, and unification angles.
//! * [`dataset`]: CSV ingestion, normalization, partitioning and synthetic
//!   data generation.
//! * [`transform`]: single rotation (RBT), per-subset rotation (MRBT) and the
//!   client/server halves of augmented rotation (ARBT), where the owner
//!   releases unification angles so the miner can bring two subsets into a
//!   common frame.
//! * [`ledger`]: the release policy that keeps released angle differences
//!   linearly independent.
//! * [`clustering`]: Lloyd k-means and the warm-start merge of two already
//!   clustered subsets.
//! * [`bench`]: the timing harness used by the CLI `bench` command.

pub mod bench;
pub mod clustering;
pub mod dataset;
mod error;
pub mod ledger;
pub mod rotation;
pub mod transform;

pub use clustering::{
    euclidean_dist, kmeans, label_agreement, warm_start_merge, Clustering, Init, KMeansConfig,
};
pub use dataset::{Dataset, NormMethod, NormalizationSpec, PartitionedDataset};
pub use error::{Error, Result};
pub use ledger::{PolicyViolation, ReleaseCheck, ReleaseLedger};
pub use nalgebra::DMatrix;
pub use rotation::{Angle, RotationMatrix, Seed};
pub use transform::{ClientSecrets, ReleaseOutcome, TransformedDataset, UnifiedPair};
