//! The internalized tableau calculus and its depth-first saturation engine.

mod branch;
mod extract;
pub mod metrics;
mod naive;
mod rules;

pub use branch::{
    Action, Branch, Calculus, ClashKind, ClashReport, Conclusion, Exhausted, Generate, Label, Recorder, RuleInstance,
    TraceEvent, PLUS,
};
pub use extract::{extract_model, urfather};
pub use naive::{saturate, saturate_branch, saturate_with, Run, SearchStats, Verdict};
pub use rules::{classify, RuleId, RuleType};

use crate::syntax::Node;

/// The initial branch for `phi` under the default calculus, with eager seeding.
pub fn init(phi: &Node) -> Branch {
    Branch::init(phi, Calculus::default(), &mut Recorder::default())
}

/// Untreated instances in scheduling order: Type1, then branching, then generating.
pub fn applicable_instances(b: &Branch) -> Vec<RuleInstance> {
    b.applicable()
}

/// Applies one instance, returning one branch (two for branching rules).
pub fn apply(b: &Branch, r: &RuleInstance) -> Vec<Branch> {
    let mut rec = Recorder::default();
    match r.action {
        Action::Split(..) => {
            let mut left = b.clone();
            let mut right = b.clone();
            left.apply_split(r, false, &mut rec);
            right.apply_split(r, true, &mut rec);
            vec![left, right]
        }
        _ => {
            let mut next = b.clone();
            // Budgets only bound whole searches; a single application always proceeds.
            let _ = next.apply_linear(r, &mut rec);
            vec![next]
        }
    }
}

pub fn has_clash(b: &Branch) -> Option<ClashReport> {
    b.clash().cloned()
}
