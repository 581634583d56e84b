//! Termination and analyticity instrumentation over a branch.

use std::collections::{BTreeMap, BTreeSet};

use super::branch::{Branch, PLUS};
use super::rules::RuleId;
use crate::syntax::{size_node, size_path, Node, NodeExpr, Nominal, Path, PathExpr, QsubIndex};

/// The quasi-subcomponent matcher for the root label of `b`.
pub fn qsub_index(b: &Branch) -> QsubIndex {
    QsubIndex::new(&NodeExpr::at(b.root(), b.phi().clone()))
}

/// `{ψ | j:ψ ∈ Θ ∩ qsub}`
pub fn at_node(b: &Branch, q: &QsubIndex, j: Nominal) -> Vec<Node> {
    b.labels()
        .iter()
        .filter_map(|l| match &*l.expr {
            NodeExpr::At(i, psi) if *i == j && q.contains(&l.expr) => Some(psi.clone()),
            _ => None,
        })
        .collect()
}

/// `{α | ±⟨@jα ⋟ β⟩ ∈ Θ ∩ qsub}`
pub fn at_path(b: &Branch, q: &QsubIndex, j: Nominal) -> Vec<Path> {
    b.labels()
        .iter()
        .filter_map(|l| {
            let (_, inner) = l.expr.strip_neg();
            let NodeExpr::DataCmp(left, ..) = inner else { return None };
            match PathExpr::leading_jump(left) {
                Some((i, Some(alpha))) if i == j && q.contains(&l.expr) => Some(alpha.clone()),
                _ => None,
            }
        })
        .collect()
}

pub fn maxsize(b: &Branch, q: &QsubIndex, j: Nominal) -> usize {
    let node = at_node(b, q, j).iter().map(|e| size_node(e)).max().unwrap_or(0);
    let path = at_path(b, q, j).iter().map(|p| size_path(p)).max().unwrap_or(0);
    node.max(path)
}

/// `i ≺Θ j`: accessibility constraints produced by (◇) or (child).
pub fn generated_edges(b: &Branch) -> Vec<(Nominal, Nominal)> {
    let mut out = BTreeSet::new();
    for l in b.labels() {
        if !l.is_accessibility() || !matches!(l.origin, RuleId::Dia | RuleId::Child) {
            continue;
        }
        if let NodeExpr::At(i, d) = &*l.expr {
            if let NodeExpr::Diamond(_, j) = &**d {
                if let Some(j) = j.as_nominal() {
                    out.insert((*i, j));
                }
            }
        }
    }
    out.into_iter().collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TerminationViolation {
    pub parent: Nominal,
    pub child: Nominal,
    pub parent_size: usize,
    pub child_size: usize,
}

/// Generated edges along which maxsize fails to decrease.
pub fn termination_violations(b: &Branch) -> Vec<TerminationViolation> {
    let q = qsub_index(b);
    let mut memo = BTreeMap::new();
    let mut size = |n: Nominal| *memo.entry(n).or_insert_with(|| maxsize(b, &q, n));
    generated_edges(b)
        .into_iter()
        .filter_map(|(i, j)| {
            let (si, sj) = (size(i), size(j));
            (si <= sj).then_some(TerminationViolation { parent: i, child: j, parent_size: si, child_size: sj })
        })
        .collect()
}

/// True when `(Noms, ≺Θ)` is a forest whose out-degrees are bounded by `|at(i)|`.
pub fn generated_graph_is_forest(b: &Branch) -> bool {
    let q = qsub_index(b);
    let edges = generated_edges(b);
    let mut parent: BTreeMap<Nominal, Nominal> = BTreeMap::new();
    let mut out_degree: BTreeMap<Nominal, usize> = BTreeMap::new();
    for &(i, j) in &edges {
        if parent.insert(j, i).is_some() {
            return false;
        }
        *out_degree.entry(i).or_default() += 1;
    }
    for (&i, &d) in &out_degree {
        if d > at_node(b, &q, i).len() + at_path(b, &q, i).len() {
            return false;
        }
    }
    // Fresh nominals exceed their generator, so parent chains cannot cycle.
    edges.iter().all(|&(i, j)| i < j)
}

/// Positions of labels that are neither quasi-subcomponents of the root nor
/// one of the bookkeeping constraint shapes.
pub fn analyticity_violations(b: &Branch) -> Vec<u32> {
    let q = qsub_index(b);
    b.labels()
        .iter()
        .enumerate()
        .filter(|(_, l)| {
            if q.contains(&l.expr) {
                return false;
            }
            match &*l.expr {
                NodeExpr::At(_, x) => match &**x {
                    NodeExpr::Nom(_) => false,
                    NodeExpr::Diamond(a, j) => !(j.as_nominal().is_some() && (l.access || &**a == PLUS)),
                    _ => true,
                },
                NodeExpr::DataCmp(l, crate::syntax::Polarity::Eq, _, r) => {
                    !matches!((&**l, &**r), (PathExpr::Jump(_), PathExpr::Jump(_)))
                }
                _ => true,
            }
        })
        .map(|(p, _)| p as u32)
        .collect()
}

/// ≡Θ read off `i:j` labels is reflexive, symmetric and transitive on the branch nominals.
pub fn equivalence_holds(b: &Branch) -> bool {
    let noms = b.nominals();
    let eq = |i: Nominal, j: Nominal| b.contains(&NodeExpr::at(i, NodeExpr::nom(j.0)));
    noms.iter().all(|&i| eq(i, i))
        && noms.iter().all(|&i| noms.iter().all(|&j| !eq(i, j) || eq(j, i)))
        && noms.iter().all(|&i| {
            noms.iter().all(|&j| !eq(i, j) || noms.iter().all(|&k| !eq(j, k) || eq(i, k)))
        })
}

/// Positions of labels `i:φ` whose urfather copy `urf(i):φ` is missing.
pub fn urfather_closure_violations(b: &Branch) -> Vec<u32> {
    b.labels()
        .iter()
        .enumerate()
        .filter(|(_, l)| match &*l.expr {
            NodeExpr::At(i, phi) => {
                let u = b.urfather(*i);
                u != *i && phi.as_nominal().is_none() && !b.contains(&NodeExpr::at(u, phi.clone()))
            }
            _ => false,
        })
        .map(|(p, _)| p as u32)
        .collect()
}
