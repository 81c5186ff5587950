use alloc::string::String;

/// Errors raised by the algorithms in this crate.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("shape mismatch in {op}: {detail}")]
    Shape { op: &'static str, detail: String },

    #[error("non-finite value produced by {op}")]
    NonFinite { op: &'static str },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("mesh is not watertight ({open_edges} open or non-manifold edges); repair it before voxelizing")]
    NotWatertight { open_edges: usize },

    #[error("fragment {index} has no occupied voxels at this resolution")]
    EmptyFragment { index: usize },

    #[error("training diverged at step {step}: loss is not finite")]
    Diverged { step: usize },
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn contract(msg: impl Into<String>) -> Error {
    Error::Contract(msg.into())
}
