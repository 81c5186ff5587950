//! Permutation-equivariant point network.
//!
//! Each point starts from `(x, y, z, group_count_feature)`. Encoder stages
//! run local self-attention over k-nearest-neighbour graphs, with
//! farthest-point downsampling between stages. The decoder interpolates
//! coarse features back with inverse-distance weights over the three nearest
//! coarse points, concatenates the skip features and attends again. A linear
//! head emits `k` group logits per point.

mod config;
mod network;
mod neighbors;
mod params;

pub use config::ModelConfig;
pub use neighbors::{fps, fps_start, knn, knn_query};
pub use network::{CloudStructure, PointNet};
pub use params::{parameter_count, Params};
