//! Algorithms for learned prefracture generation.
//!
//! A mesh is voxelized and broken into fine pieces with a voxel Voronoi
//! fracture. The piece centers of mass form a point cloud that a small
//! local-attention network clusters into groups. Training uses a
//! permutation-invariant pairwise-identity loss, so group ids are never
//! compared by value. Post-processing turns piece labels into connected
//! group meshes.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the command
//! line and everything else that touches the file system lives in the
//! `prefracture` companion crate.
//!
//! # Modules
//!
//! - [`diff`]: dense tensors and a reverse-mode tape
//! - [`geometry`]: meshes, voxelization, fracturing, surface extraction
//! - [`dataset`]: training example construction and synthetic shapes
//! - [`model`]: the point network
//! - [`loss`]: pairwise-identity loss
//! - [`inference`]: logits to labels
//! - [`postprocess`]: split and merge groups into meshes
//! - [`train`]: optimizer, training loop, metrics and baselines

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod dataset;
pub mod diff;
mod error;
pub mod geometry;
pub mod inference;
pub mod loss;
mod math;
pub mod model;
pub mod postprocess;
pub mod rng;
pub mod train;

pub use error::{Error, Result};
pub(crate) use error::contract;
