use std::cell::RefCell;
use std::collections::{BTreeMap, HashMap};
use std::rc::Rc;

use thiserror::Error;

use super::model::DataModel;
use crate::syntax::{NodeExpr, Nominal, Path, PathExpr, Polarity, Sym};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum EvalError {
    #[error("nominal {0} is not named in the model")]
    UnnamedNominal(Nominal),
    #[error("relation '{0}' is not part of the model")]
    UnknownRel(Sym),
    #[error("comparison '{0}' is not part of the model")]
    UnknownCmp(Sym),
    #[error("node {0} is not in the model")]
    NoSuchNode(usize),
}

/// A path with the endpoint set it reaches from one start node.
type Reached = (Path, Rc<Vec<usize>>);

/// Pointwise evaluator following the satisfaction clauses directly.
///
/// Endpoint sets of paths are memoized per (path node, start node).
pub struct Evaluator<'m> {
    model: &'m DataModel,
    succ: BTreeMap<Sym, Vec<Vec<usize>>>,
    classes: BTreeMap<Sym, Vec<usize>>,
    // The stored `Path` keeps the keyed allocation alive.
    memo: RefCell<HashMap<(*const PathExpr, usize), Reached>>,
}

impl<'m> Evaluator<'m> {
    pub fn new(model: &'m DataModel) -> Self {
        let n = model.nodes.len();
        let mut succ = BTreeMap::new();
        for (rel, es) in &model.edges {
            let mut adj = vec![Vec::new(); n];
            for &(x, y) in es {
                if x < n && y < n {
                    adj[x].push(y);
                }
            }
            succ.insert(rel.clone(), adj);
        }
        let classes = model.data.keys().map(|c| (c.clone(), model.class_ids(c).unwrap_or_default())).collect();
        Evaluator { model, succ, classes, memo: RefCell::new(HashMap::new()) }
    }

    fn named(&self, i: Nominal) -> Result<usize, EvalError> {
        self.model.naming.get(&i).copied().ok_or(EvalError::UnnamedNominal(i))
    }

    pub fn node(&self, n: usize, e: &NodeExpr) -> Result<bool, EvalError> {
        if n >= self.model.nodes.len() {
            return Err(EvalError::NoSuchNode(n));
        }
        Ok(match e {
            NodeExpr::Prop(p) => self.model.valuation.get(p).is_some_and(|vs| vs.contains(&n)),
            NodeExpr::Nom(i) => self.named(*i)? == n,
            NodeExpr::Neg(x) => !self.node(n, x)?,
            NodeExpr::And(l, r) => self.node(n, l)? && self.node(n, r)?,
            NodeExpr::At(i, x) => self.node(self.named(*i)?, x)?,
            NodeExpr::Diamond(a, x) => {
                let adj = self.succ.get(a).ok_or_else(|| EvalError::UnknownRel(a.clone()))?;
                let mut hit = false;
                for &m in &adj[n] {
                    if self.node(m, x)? {
                        hit = true;
                        break;
                    }
                }
                hit
            }
            NodeExpr::DataCmp(l, pol, c, r) => {
                let ids = self.classes.get(c).ok_or_else(|| EvalError::UnknownCmp(c.clone()))?;
                let left = self.reach(n, l)?;
                let right = self.reach(n, r)?;
                let want = *pol == Polarity::Eq;
                left.iter().any(|&x| right.iter().any(|&y| (ids[x] == ids[y]) == want))
            }
        })
    }

    pub fn path(&self, n: usize, n2: usize, p: &Path) -> Result<bool, EvalError> {
        Ok(self.reach(n, p)?.contains(&n2))
    }

    /// Sorted endpoints of `p` starting from `n`.
    pub fn reach(&self, n: usize, p: &Path) -> Result<Rc<Vec<usize>>, EvalError> {
        let key = (Path::as_ptr(p), n);
        if let Some((_, hit)) = self.memo.borrow().get(&key) {
            return Ok(hit.clone());
        }
        let mut out: Vec<usize> = match &**p {
            PathExpr::Axis(a) => self.succ.get(a).ok_or_else(|| EvalError::UnknownRel(a.clone()))?[n].clone(),
            PathExpr::Jump(i) => vec![self.named(*i)?],
            PathExpr::Test(e) => {
                if self.node(n, e)? {
                    vec![n]
                } else {
                    vec![]
                }
            }
            PathExpr::Concat(h, t) => {
                let mut acc = Vec::new();
                for &z in self.reach(n, h)?.iter() {
                    acc.extend(self.reach(z, t)?.iter().copied());
                }
                acc
            }
            PathExpr::Union(l, r) => {
                let mut acc = self.reach(n, l)?.to_vec();
                acc.extend(self.reach(n, r)?.iter().copied());
                acc
            }
        };
        out.sort_unstable();
        out.dedup();
        let out = Rc::new(out);
        self.memo.borrow_mut().insert(key, (p.clone(), out.clone()));
        Ok(out)
    }
}

pub fn check_node(m: &DataModel, n: usize, e: &NodeExpr) -> Result<bool, EvalError> {
    Evaluator::new(m).node(n, e)
}

pub fn check_path(m: &DataModel, n: usize, n2: usize, p: &Path) -> Result<bool, EvalError> {
    if n >= m.nodes.len() || n2 >= m.nodes.len() {
        return Err(EvalError::NoSuchNode(n.max(n2)));
    }
    Evaluator::new(m).path(n, n2, p)
}

/// Nodes of `m` at which `e` holds.
pub fn satisfying_nodes(m: &DataModel, e: &NodeExpr) -> Result<Vec<usize>, EvalError> {
    let ev = Evaluator::new(m);
    let mut out = Vec::new();
    for n in 0..m.nodes.len() {
        if ev.node(n, e)? {
            out.push(n);
        }
    }
    Ok(out)
}
