//! Set-at-a-time evaluator: node expressions denote node sets and paths denote
//! relations, both as bitsets. Independent of [`super::Evaluator`] and used to
//! cross-check it, and as the inner loop of the bounded oracle.

use super::eval::EvalError;
use super::model::DataModel;
use crate::syntax::{NodeExpr, Nominal, PathExpr, Polarity, Sym};

pub const MAX_NODES: usize = 64;

/// A model with at most [`MAX_NODES`] nodes in bitset form.
#[derive(Clone, Debug)]
pub struct RelModel {
    pub n: usize,
    /// Per relation, row `x` is the set of successors of `x`.
    pub rels: Vec<(Sym, Vec<u64>)>,
    /// Per comparison, the masks of its classes (covering every node).
    pub classes: Vec<(Sym, Vec<u64>)>,
    pub props: Vec<(Sym, u64)>,
    pub naming: Vec<(Nominal, usize)>,
}

fn bit(x: usize) -> u64 {
    1u64 << x
}

impl RelModel {
    pub fn full(&self) -> u64 {
        if self.n == 64 {
            u64::MAX
        } else {
            bit(self.n) - 1
        }
    }

    pub fn from_model(m: &DataModel) -> Option<RelModel> {
        let n = m.nodes.len();
        if n > MAX_NODES {
            return None;
        }
        let rels = m
            .edges
            .iter()
            .map(|(a, es)| {
                let mut rows = vec![0u64; n];
                for &(x, y) in es.iter().filter(|&&(x, y)| x < n && y < n) {
                    rows[x] |= bit(y);
                }
                (a.clone(), rows)
            })
            .collect();
        let classes = m
            .data
            .keys()
            .map(|c| {
                let ids = m.class_ids(c).unwrap_or_default();
                let mut masks: Vec<u64> = Vec::new();
                let mut reps: Vec<usize> = Vec::new();
                for (v, id) in ids.into_iter().enumerate() {
                    match reps.iter().position(|&r| r == id) {
                        Some(k) => masks[k] |= bit(v),
                        None => {
                            reps.push(id);
                            masks.push(bit(v));
                        }
                    }
                }
                (c.clone(), masks)
            })
            .collect();
        let props = m
            .valuation
            .iter()
            .map(|(p, vs)| (p.clone(), vs.iter().filter(|&&v| v < n).fold(0u64, |acc, &v| acc | bit(v))))
            .collect();
        let naming = m.naming.iter().map(|(&i, &v)| (i, v)).collect();
        Some(RelModel { n, rels, classes, props, naming })
    }

    fn named(&self, i: Nominal) -> Result<usize, EvalError> {
        self.naming.iter().find(|(j, _)| *j == i).map(|(_, v)| *v).ok_or(EvalError::UnnamedNominal(i))
    }

    /// The set of nodes satisfying `e`.
    pub fn denote_node(&self, e: &NodeExpr) -> Result<u64, EvalError> {
        let full = self.full();
        Ok(match e {
            NodeExpr::Prop(p) => self.props.iter().find(|(q, _)| q == p).map_or(0, |(_, m)| *m),
            NodeExpr::Nom(i) => bit(self.named(*i)?),
            NodeExpr::Neg(x) => !self.denote_node(x)? & full,
            NodeExpr::And(l, r) => self.denote_node(l)? & self.denote_node(r)?,
            NodeExpr::At(i, x) => {
                if self.denote_node(x)? & bit(self.named(*i)?) != 0 {
                    full
                } else {
                    0
                }
            }
            NodeExpr::Diamond(a, x) => {
                let rows = self.rel(a)?;
                let target = self.denote_node(x)?;
                (0..self.n).filter(|&v| rows[v] & target != 0).fold(0, |acc, v| acc | bit(v))
            }
            NodeExpr::DataCmp(l, pol, c, r) => {
                let classes = &self
                    .classes
                    .iter()
                    .find(|(d, _)| d == c)
                    .ok_or_else(|| EvalError::UnknownCmp(c.clone()))?
                    .1;
                let left = self.denote_path(l)?;
                let right = self.denote_path(r)?;
                let mut out = 0;
                for v in 0..self.n {
                    let (a, b) = (left[v], right[v]);
                    let holds = match pol {
                        Polarity::Eq => classes.iter().any(|k| a & k != 0 && b & k != 0),
                        Polarity::Neq => a != 0 && b != 0 && !classes.iter().any(|k| (a | b) & !k == 0),
                    };
                    if holds {
                        out |= bit(v);
                    }
                }
                out
            }
        })
    }

    fn rel(&self, a: &Sym) -> Result<&Vec<u64>, EvalError> {
        self.rels.iter().find(|(b, _)| b == a).map(|(_, r)| r).ok_or_else(|| EvalError::UnknownRel(a.clone()))
    }

    /// The relation denoted by `p`, as successor rows.
    pub fn denote_path(&self, p: &PathExpr) -> Result<Vec<u64>, EvalError> {
        Ok(match p {
            PathExpr::Axis(a) => self.rel(a)?.clone(),
            PathExpr::Jump(i) => vec![bit(self.named(*i)?); self.n],
            PathExpr::Test(e) => {
                let s = self.denote_node(e)?;
                (0..self.n).map(|v| s & bit(v)).collect()
            }
            PathExpr::Concat(l, r) => {
                let (left, right) = (self.denote_path(l)?, self.denote_path(r)?);
                left.iter()
                    .map(|&row| (0..self.n).filter(|&z| row & bit(z) != 0).fold(0, |acc, z| acc | right[z]))
                    .collect()
            }
            PathExpr::Union(l, r) => {
                let (left, right) = (self.denote_path(l)?, self.denote_path(r)?);
                left.iter().zip(right).map(|(a, b)| a | b).collect()
            }
        })
    }

    pub fn holds_at(&self, v: usize, e: &NodeExpr) -> Result<bool, EvalError> {
        Ok(self.denote_node(e)? & bit(v) != 0)
    }
}
