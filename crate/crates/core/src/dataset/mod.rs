//! Supervised clustering examples.
//!
//! Fracture datasets map fragments to a whole shape. Flipping them gives the
//! supervision this crate needs: the whole shape is broken into fine pieces
//! and each piece is labelled with the fragment that contains its center of
//! mass. [`synth`] generates small shapes with obvious weak necks when no
//! fracture dataset is at hand.

mod flip;
mod normalize;
pub mod synth;

use alloc::string::String;
use alloc::vec::Vec;

use crate::geometry::Point3;
use crate::{contract, Result};

pub use flip::flip_example;
pub use normalize::{normalize, Normalization};

/// Unordered per-piece group ids plus the requested group count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupLabeling {
    pub labels: Vec<usize>,
    pub num_groups_requested: usize,
}

impl GroupLabeling {
    pub fn new(labels: Vec<usize>, num_groups_requested: usize) -> Result<Self> {
        if num_groups_requested == 0 {
            return Err(contract("num_groups_requested must be positive"));
        }
        Ok(GroupLabeling { labels, num_groups_requested })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Checks every label against the model's output width.
    pub fn check_width(&self, k: usize) -> Result<()> {
        match self.labels.iter().find(|&&l| l >= k) {
            Some(l) => Err(contract(alloc::format!("label {l} does not fit {k} groups"))),
            None => Ok(()),
        }
    }
}

/// A normalized point cloud with its ground-truth grouping.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingExample {
    pub points: Vec<Point3>,
    pub labels: GroupLabeling,
    pub source: String,
}

impl TrainingExample {
    pub fn new(points: Vec<Point3>, labels: GroupLabeling, source: impl Into<String>) -> Result<Self> {
        if points.is_empty() {
            return Err(contract("training example has no points"));
        }
        if points.len() != labels.len() {
            return Err(contract(alloc::format!(
                "{} points but {} labels",
                points.len(),
                labels.len()
            )));
        }
        Ok(TrainingExample { points, labels, source: source.into() })
    }

    pub fn num_groups(&self) -> usize {
        self.labels.num_groups_requested
    }

    /// The scalar conditioning feature for a model with `k` output groups.
    pub fn group_count_feature(&self, k: usize) -> f64 {
        group_count_feature(self.num_groups(), k)
    }
}

/// Group count encoded as `groups / k`.
pub fn group_count_feature(groups: usize, k: usize) -> f64 {
    groups as f64 / k as f64
}
