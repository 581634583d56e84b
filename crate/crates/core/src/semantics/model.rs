use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use petgraph::unionfind::UnionFind;

use crate::syntax::{Nominal, Sym};

/// A hybrid data model. Node ids are dense indices into `nodes`.
///
/// Indices at or beyond `nodes.len()` are dangling; their display names live in
/// `dangling` so that imported models can be diagnosed rather than rejected.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DataModel {
    pub nodes: Vec<String>,
    pub edges: BTreeMap<Sym, Vec<(usize, usize)>>,
    /// Each comparison's equivalence classes; nodes absent from every class are singletons.
    pub data: BTreeMap<Sym, Vec<Vec<usize>>>,
    pub valuation: BTreeMap<Sym, Vec<usize>>,
    pub naming: BTreeMap<Nominal, usize>,
    pub dangling: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    Partition { cmp: Sym, node: String },
    ClassRange { cmp: Sym, node: String },
    EdgeRange { rel: Sym, from: String, to: String },
    ValuationRange { prop: Sym, node: String },
    NamingRange { nominal: Nominal, node: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Partition { cmp, node } => write!(f, "partition violation: {node} is in two {cmp}-classes"),
            Violation::ClassRange { cmp, node } => write!(f, "class range violation: {cmp}-class mentions unknown node {node}"),
            Violation::EdgeRange { rel, from, to } => write!(f, "edge range violation: {rel}-edge ({from}, {to})"),
            Violation::ValuationRange { prop, node } => write!(f, "valuation range violation: {prop} at unknown node {node}"),
            Violation::NamingRange { nominal, node } => write!(f, "naming range violation: {nominal} names unknown node {node}"),
        }
    }
}

impl DataModel {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n == name)
    }

    pub fn name(&self, idx: usize) -> String {
        match self.nodes.get(idx) {
            Some(n) => n.clone(),
            None => self.dangling.get(idx - self.nodes.len()).cloned().unwrap_or_else(|| format!("#{idx}")),
        }
    }

    /// Class representative of each node for `cmp` (the first class listing it wins).
    pub fn class_ids(&self, cmp: &str) -> Option<Vec<usize>> {
        let classes = self.data.get(cmp)?;
        let n = self.nodes.len();
        let mut ids: Vec<usize> = (0..n).map(|v| v + classes.len()).collect();
        let mut seen = vec![false; n];
        for (k, class) in classes.iter().enumerate() {
            for &v in class {
                if v < n && !seen[v] {
                    seen[v] = true;
                    ids[v] = k;
                }
            }
        }
        Some(ids)
    }

    pub fn validate(&self) -> Vec<Violation> {
        let n = self.nodes.len();
        let mut out = Vec::new();
        for (cmp, classes) in &self.data {
            let mut seen = vec![false; n];
            let mut reported = BTreeSet::new();
            for &v in classes.iter().flatten() {
                if v >= n {
                    out.push(Violation::ClassRange { cmp: cmp.clone(), node: self.name(v) });
                } else if std::mem::replace(&mut seen[v], true) && reported.insert(v) {
                    out.push(Violation::Partition { cmp: cmp.clone(), node: self.name(v) });
                }
            }
        }
        for (rel, es) in &self.edges {
            for &(x, y) in es {
                if x >= n || y >= n {
                    out.push(Violation::EdgeRange { rel: rel.clone(), from: self.name(x), to: self.name(y) });
                }
            }
        }
        for (prop, vs) in &self.valuation {
            for &v in vs.iter().filter(|&&v| v >= n) {
                out.push(Violation::ValuationRange { prop: prop.clone(), node: self.name(v) });
            }
        }
        for (&nominal, &v) in &self.naming {
            if v >= n {
                out.push(Violation::NamingRange { nominal, node: self.name(v) });
            }
        }
        out
    }

    /// Merges overlapping classes (union-find closure), drops singletons and
    /// sorts/dedups every component. Dangling references are kept for diagnosis.
    pub fn normalize(&mut self) {
        let n = self.nodes.len();
        for classes in self.data.values_mut() {
            let mut uf = UnionFind::<usize>::new(n);
            for class in classes.iter() {
                let members: Vec<usize> = class.iter().copied().filter(|&v| v < n).collect();
                for w in members.windows(2) {
                    uf.union(w[0], w[1]);
                }
            }
            let dangling: Vec<usize> = classes.iter().flatten().copied().filter(|&v| v >= n).collect();
            let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
            for v in 0..n {
                groups.entry(uf.find(v)).or_default().push(v);
            }
            let mut merged: Vec<Vec<usize>> = groups.into_values().filter(|g| g.len() > 1).collect();
            if !dangling.is_empty() {
                merged.push(dangling);
            }
            merged.sort();
            *classes = merged;
        }
        for es in self.edges.values_mut() {
            es.sort_unstable();
            es.dedup();
        }
        for vs in self.valuation.values_mut() {
            vs.sort_unstable();
            vs.dedup();
        }
    }
}
