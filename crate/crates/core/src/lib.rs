//! Normal spanning trees on finite and lazily presented countable graphs.

pub mod construct;
pub mod cover;
pub mod error;
pub mod extend;
pub mod export;
pub mod families;
pub mod graph;
pub mod separators;
pub mod tree;
pub mod witness;

pub use error::{Error, Result};
pub use graph::{FiniteGraph, Graph, VertexId};
pub use tree::RootedTree;
