//! Dense `f64` tensors with a reverse-mode tape.
//!
//! A [`Graph`] is an arena of nodes. Every operation appends a node whose
//! operands already exist, so the arena order is a topological order and the
//! backward pass is a single reverse sweep. Graphs are built per forward pass
//! and thrown away afterwards.
//!
//! ```
//! use prefracture_core::diff::{Graph, Tensor};
//!
//! let mut g = Graph::new();
//! let x = g.param(Tensor::row(&[1.0, 2.0, 3.0]));
//! let sq = g.mul(x, x).unwrap();
//! let loss = g.sum(sq).unwrap();
//! let grads = g.backward(loss).unwrap();
//! assert_eq!(grads.get(x).unwrap().data(), &[2.0, 4.0, 6.0]);
//! ```

mod gradcheck;
mod graph;
mod tensor;

pub use gradcheck::gradcheck;
pub use graph::{Gradients, Graph, Var};
pub use tensor::Tensor;
