use std::collections::{BTreeMap, BTreeSet};

use crate::semantics::FrameClass;
use crate::syntax::{NodeExpr, Nominal};
use crate::tableau::{Branch, ClashKind, ClashReport, PLUS};

fn plus(i: Nominal, j: Nominal) -> crate::syntax::Node {
    NodeExpr::at(i, NodeExpr::diamond(PLUS, NodeExpr::nom(j.0)))
}

fn related(b: &Branch, j: Nominal, k: Nominal) -> bool {
    b.contains(&NodeExpr::at(j, NodeExpr::nom(k.0))) || b.contains(&plus(j, k))
}

/// Loop and two-parent clashes over transitivity constraints.
pub fn frame_clash(b: &Branch) -> Option<ClashReport> {
    let mut preds: BTreeMap<Nominal, Vec<(Nominal, u32)>> = BTreeMap::new();
    for (p, l) in b.labels().iter().enumerate() {
        let NodeExpr::At(i, d) = &*l.expr else { continue };
        let NodeExpr::Diamond(a, j) = &**d else { continue };
        let (true, Some(j)) = (&**a == PLUS, j.as_nominal()) else { continue };
        if j == *i {
            return Some(ClashReport { kind: ClashKind::LoopClash, witnesses: vec![p as u32] });
        }
        preds.entry(j).or_default().push((*i, p as u32));
    }
    let strict = b.calculus().strict_two_parent;
    for ps in preds.values() {
        for (x, &(j, pj)) in ps.iter().enumerate() {
            for &(k, pk) in &ps[x + 1..] {
                let ok = if strict {
                    related(b, j, k) && related(b, k, j)
                } else {
                    related(b, j, k) || related(b, k, j)
                };
                if !ok {
                    return Some(ClashReport { kind: ClashKind::TwoParentClash, witnesses: vec![pj, pk] });
                }
            }
        }
    }
    None
}

/// Every nominal is equal to, or ⟨+⟩-reachable from, `root`, both read modulo ≡Θ.
pub fn is_connected(b: &Branch, root: Nominal) -> bool {
    let r = b.urfather(root);
    let class: Vec<Nominal> = b.nominals().iter().copied().filter(|&n| b.urfather(n) == r).collect();
    let mut reach: BTreeSet<Nominal> = BTreeSet::new();
    reach.insert(r);
    for &k in &class {
        for l in b.plus_successors(k) {
            reach.insert(b.urfather(l));
        }
    }
    b.nominals().iter().all(|&j| reach.contains(&b.urfather(j)))
}

/// Checks applied to an open branch with no rule left to apply.
pub fn final_check(b: &Branch) -> Option<ClashReport> {
    let frame = b.calculus().frame;
    if frame == FrameClass::All {
        return None;
    }
    if let Some(c) = frame_clash(b) {
        return Some(c);
    }
    if frame == FrameClass::Tree && !is_connected(b, b.root()) {
        return Some(ClashReport { kind: ClashKind::Disconnected, witnesses: Vec::new() });
    }
    None
}
