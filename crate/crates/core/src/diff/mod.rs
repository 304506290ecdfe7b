//! Reverse-mode differentiation kernel: graph, parameters, optimizer,
//! gradient checking and checkpoints.

pub mod checkpoint;
pub mod gradcheck;
pub mod graph;
pub mod optim;
pub mod params;

pub use checkpoint::Checkpoint;
pub use gradcheck::{grad_check, GradCheckConfig, GradCheckReport};
pub use graph::{gradients, Axis, Gradients, Graph, Op, Var, LOG_FLOOR};
pub use optim::{RmsProp, RmsPropConfig};
pub use params::{Initializer, ParamStore};
