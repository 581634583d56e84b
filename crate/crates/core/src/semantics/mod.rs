//! Hybrid data models and the satisfaction relation.

mod eval;
mod frame;
mod io;
mod model;
pub mod relational;

pub use eval::{check_node, check_path, satisfying_nodes, EvalError, Evaluator};
pub use frame::{frame_of, reachability, FrameClass, FrameShape};
pub use io::{ModelIoError, ModelJson};
pub use model::{DataModel, Violation};
pub use relational::RelModel;

pub fn validate_model(m: &DataModel) -> Vec<Violation> {
    m.validate()
}

#[cfg(test)]
mod tests;
