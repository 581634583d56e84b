//! Forests, trees, pure axioms and node-creating rules.

mod axioms;
mod reach;

pub use axioms::{
    builtin_axiom_sets, example_axioms, is_global, parse_axiom_file, parse_rule_file, AxiomError, NodeCreatingRule,
    PureAxiom,
};
pub use reach::{final_check, frame_clash, is_connected};

use crate::semantics::FrameClass;
use crate::syntax::Node;
use crate::tableau::{saturate_with, Calculus, Verdict};

/// Decides `phi` over the given frame class with the naive engine.
pub fn decide_with_frame(phi: &Node, frame: FrameClass) -> Verdict {
    saturate_with(phi, Calculus::with_frame(frame), false).verdict
}

/// Decides `phi` over the frames defined by `axioms`, firing `rules` at most
/// `budget` times each.
pub fn decide_with_extensions(
    phi: &Node,
    frame: FrameClass,
    axioms: Vec<PureAxiom>,
    rules: Vec<NodeCreatingRule>,
    budget: usize,
) -> Verdict {
    let calc = Calculus { frame, axioms, node_rules: rules, node_rule_budget: budget, ..Calculus::default() };
    saturate_with(phi, calc, false).verdict
}

#[cfg(test)]
mod tests;
