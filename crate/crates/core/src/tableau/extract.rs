use std::collections::{BTreeMap, BTreeSet};

use petgraph::unionfind::UnionFind;

use super::branch::{Branch, PLUS};
use crate::semantics::DataModel;
use crate::syntax::{NodeExpr, Nominal, PathExpr, Polarity, Signature};

/// Least member of the ≡Θ-class of `i`.
pub fn urfather(b: &Branch, i: Nominal) -> Option<Nominal> {
    b.nominals().contains(&i).then(|| b.urfather(i))
}

/// Signature of the input together with the loaded extensions.
pub(crate) fn problem_signature(b: &Branch) -> Signature {
    let mut sig = b.phi().signature();
    for ax in &b.calculus().axioms {
        sig.merge(&ax.signature());
    }
    for r in &b.calculus().node_rules {
        sig.merge(&r.signature());
    }
    sig
}

/// The model read off an open saturated branch: one node per urfather.
pub fn extract_model(b: &Branch) -> DataModel {
    let mut urfs: BTreeSet<Nominal> = BTreeSet::new();
    for &n in b.nominals() {
        urfs.insert(b.urfather(n));
    }
    let order: Vec<Nominal> = urfs.into_iter().collect();
    let id = |n: Nominal| order.binary_search(&b.urfather(n)).expect("urfather is a node");
    let sig = problem_signature(b);

    let mut edges: BTreeMap<_, BTreeSet<(usize, usize)>> = sig.rels.iter().map(|r| (r.clone(), BTreeSet::new())).collect();
    let mut valuation: BTreeMap<_, BTreeSet<usize>> = sig.props.iter().map(|p| (p.clone(), BTreeSet::new())).collect();
    let mut uf: BTreeMap<_, UnionFind<usize>> =
        b.comparison_symbols().iter().map(|c| (c.clone(), UnionFind::new(order.len()))).collect();
    for c in &sig.cmps {
        uf.entry(c.clone()).or_insert_with(|| UnionFind::new(order.len()));
    }
    for l in b.labels() {
        match &*l.expr {
            NodeExpr::At(i, body) => match &**body {
                NodeExpr::Diamond(a, j) if &**a != PLUS => {
                    if let Some(j) = j.as_nominal() {
                        edges.entry(a.clone()).or_default().insert((id(*i), id(j)));
                    }
                }
                NodeExpr::Prop(p) => {
                    valuation.entry(p.clone()).or_default().insert(id(*i));
                }
                _ => {}
            },
            NodeExpr::DataCmp(l, Polarity::Eq, c, r) => {
                if let (PathExpr::Jump(i), PathExpr::Jump(j)) = (&**l, &**r) {
                    uf.entry(c.clone()).or_insert_with(|| UnionFind::new(order.len())).union(id(*i), id(*j));
                }
            }
            _ => {}
        }
    }
    let data = uf
        .into_iter()
        .map(|(c, uf)| {
            let mut classes: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
            for n in 0..order.len() {
                classes.entry(uf.find(n)).or_default().push(n);
            }
            let mut cls: Vec<Vec<usize>> = classes.into_values().collect();
            cls.sort();
            (c, cls)
        })
        .collect();
    DataModel {
        nodes: order.iter().map(|n| n.to_string()).collect(),
        edges: edges.into_iter().map(|(k, v)| (k, v.into_iter().collect())).collect(),
        data,
        valuation: valuation.into_iter().map(|(k, v)| (k, v.into_iter().collect())).collect(),
        naming: b.nominals().iter().map(|&n| (n, id(n))).collect(),
        dangling: Vec::new(),
    }
}
