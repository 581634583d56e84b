use std::collections::HashSet;

use super::ast::{Node, NodeExpr, Path, PathExpr, Polarity, Sym};

pub fn size_node(e: &NodeExpr) -> usize {
    match e {
        NodeExpr::Prop(_) | NodeExpr::Nom(_) => 1,
        NodeExpr::Neg(x) | NodeExpr::Diamond(_, x) => 1 + size_node(x),
        NodeExpr::And(l, r) => 1 + size_node(l) + size_node(r),
        NodeExpr::At(_, x) => 3 + size_node(x),
        NodeExpr::DataCmp(l, _, _, r) => 5 + size_path(l) + size_path(r),
    }
}

pub fn size_path(p: &PathExpr) -> usize {
    match p {
        PathExpr::Axis(_) | PathExpr::Jump(_) => 1,
        PathExpr::Test(e) => 1 + size_node(e),
        PathExpr::Concat(l, r) => size_path(l) + size_path(r),
        PathExpr::Union(l, r) => 1 + size_path(l) + size_path(r),
    }
}

/// The subcomponents of a node expression.
pub fn subcomponents(e: &Node) -> HashSet<Node> {
    let mut out = HashSet::new();
    sub_into(e, &mut out);
    out
}

fn sub_into(e: &Node, out: &mut HashSet<Node>) {
    if !out.insert(e.clone()) {
        return;
    }
    match &**e {
        NodeExpr::Prop(_) | NodeExpr::Nom(_) => {}
        NodeExpr::Neg(x) | NodeExpr::Diamond(_, x) => sub_into(x, out),
        NodeExpr::And(l, r) => {
            sub_into(l, out);
            sub_into(r, out);
        }
        NodeExpr::At(i, x) => {
            out.insert(std::sync::Arc::new(NodeExpr::Nom(*i)));
            sub_into(x, out);
        }
        NodeExpr::DataCmp(l, pol, c, r) => sub_cmp(l, *pol, c, r, out),
    }
}

// `self` has already been inserted by the caller.
fn sub_cmp(l: &Path, pol: Polarity, c: &Sym, r: &Path, out: &mut HashSet<Node>) {
    let (lh, lrest) = PathExpr::head(l);
    let recur = |a: Path, b: Path, out: &mut HashSet<Node>| sub_into(&NodeExpr::data(a, pol, c.clone(), b), out);
    match (&**lh, lrest) {
        (PathExpr::Union(x, y), rest) => {
            recur(PathExpr::prepend(x.clone(), rest), r.clone(), out);
            recur(PathExpr::prepend(y.clone(), rest), r.clone(), out);
        }
        (_, Some(rest)) => {
            recur(rest.clone(), r.clone(), out);
            sub_step(lh, out);
        }
        (_, None) if r.is_atomic() => {
            sub_step(lh, out);
            sub_step(r, out);
        }
        // An atomic left side facing a compound right side commutes; this also
        // covers a right side headed by a union.
        (_, None) => recur(r.clone(), lh.clone(), out),
    }
}

fn sub_step(step: &Path, out: &mut HashSet<Node>) {
    match &**step {
        PathExpr::Jump(i) => {
            out.insert(std::sync::Arc::new(NodeExpr::Nom(*i)));
        }
        PathExpr::Test(e) => sub_into(e, out),
        _ => {}
    }
}

#[derive(Clone, Hash, PartialEq, Eq)]
struct CmpKey {
    negated: bool,
    pol: Polarity,
    cmp: Sym,
}

/// Shape matcher for quasi-subcomponents of a fixed root label.
///
/// Comparison shapes are matched up to commutation of the two sides, since
/// (com₁)/(com₂) produce commuted forms whose right side may be atomic.
pub struct QsubIndex {
    sub: HashSet<Node>,
    full: HashSet<(CmpKey, Path, Path)>,
    sides: HashSet<(CmpKey, Path)>,
    any: HashSet<CmpKey>,
}

impl QsubIndex {
    pub fn new(root: &Node) -> Self {
        let sub = subcomponents(root);
        let mut idx = QsubIndex { sub: HashSet::new(), full: HashSet::new(), sides: HashSet::new(), any: HashSet::new() };
        for e in &sub {
            let (negated, inner) = e.strip_neg();
            if let NodeExpr::DataCmp(l, pol, c, r) = inner {
                let key = CmpKey { negated, pol: *pol, cmp: c.clone() };
                idx.full.insert((key.clone(), l.clone(), r.clone()));
                idx.sides.insert((key.clone(), l.clone()));
                idx.sides.insert((key.clone(), r.clone()));
                idx.any.insert(key);
            }
        }
        idx.sub = sub;
        idx
    }

    pub fn subcomponents(&self) -> &HashSet<Node> {
        &self.sub
    }

    pub fn contains(&self, label: &NodeExpr) -> bool {
        match label {
            NodeExpr::At(_, x) => {
                self.sub.contains(x) || matches!(&**x, NodeExpr::Neg(y) if self.sub.contains(y))
            }
            _ => {
                let (negated, inner) = label.strip_neg();
                let NodeExpr::DataCmp(l, pol, c, r) = inner else { return false };
                let (Some((_, la)), Some((_, rb))) = (PathExpr::leading_jump(l), PathExpr::leading_jump(r)) else {
                    return false;
                };
                // A negated comparison also qualifies through its unnegated form, as `i:¬ψ` does.
                let matched = [negated, false].into_iter().any(|negated| {
                    let key = CmpKey { negated, pol: *pol, cmp: c.clone() };
                    match (la, rb) {
                        (Some(a), Some(b)) => {
                            self.full.contains(&(key.clone(), a.clone(), b.clone()))
                                || self.full.contains(&(key, b.clone(), a.clone()))
                        }
                        (Some(a), None) | (None, Some(a)) => self.sides.contains(&(key, a.clone())),
                        (None, None) => self.any.contains(&key),
                    }
                });
                if matched {
                    return true;
                }
                // ⟨@j ⋟̄ @k⟩ arising from a negated comparison.
                !negated
                    && la.is_none()
                    && rb.is_none()
                    && self.any.contains(&CmpKey { negated: true, pol: pol.dual(), cmp: c.clone() })
            }
        }
    }
}

pub fn is_quasi_subcomponent(label: &NodeExpr, root: &Node) -> bool {
    QsubIndex::new(root).contains(label)
}
