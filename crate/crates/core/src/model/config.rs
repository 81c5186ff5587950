use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::{contract, Result};

/// Network shape and initialization seed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelConfig {
    /// Output width: the largest number of groups the model can express.
    pub k: usize,
    /// Neighbourhood size for attention and pooling.
    pub neighbors: usize,
    /// Feature width per encoder stage; its length is the stage count.
    pub channels: Vec<usize>,
    pub seed: u64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig { k: 16, neighbors: 8, channels: vec![32, 64], seed: 0 }
    }
}

impl ModelConfig {
    pub fn stages(&self) -> usize {
        self.channels.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 2 {
            return Err(contract(format!("k must be at least 2, got {}", self.k)));
        }
        if self.neighbors == 0 {
            return Err(contract("neighbors must be at least 1"));
        }
        if self.channels.is_empty() || self.channels.contains(&0) {
            return Err(contract("channels must be non-empty and positive"));
        }
        Ok(())
    }
}
