//! Seeded random formulas and models over props {p, q}, rels {a, b},
//! comparison {c} and nominals {1, 2}.
#![allow(dead_code)]

use hxpath_core::semantics::DataModel;
use hxpath_core::syntax::{sym, Node, NodeExpr, Nominal, Path, PathExpr, Polarity};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const PROPS: [&str; 2] = ["p", "q"];
pub const RELS: [&str; 2] = ["a", "b"];
pub const NOMINALS: [u32; 2] = [1, 2];

fn pick<'a, T>(rng: &mut impl Rng, xs: &'a [T]) -> &'a T {
    &xs[rng.gen_range(0..xs.len())]
}

/// A formula of size at most `budget` (at least 1).
pub fn node(rng: &mut impl Rng, budget: usize) -> Node {
    if budget <= 1 {
        return if rng.gen_bool(0.7) {
            NodeExpr::prop(pick(rng, &PROPS))
        } else {
            NodeExpr::nom(*pick(rng, &NOMINALS))
        };
    }
    let mut kinds = vec![0, 1];
    if budget >= 3 {
        kinds.push(2);
        kinds.push(2);
    }
    if budget >= 4 {
        kinds.push(3);
    }
    if budget >= 7 {
        kinds.push(4);
        kinds.push(4);
    }
    match *pick(rng, &kinds) {
        0 => NodeExpr::neg(node(rng, budget - 1)),
        1 => NodeExpr::diamond(pick(rng, &RELS), node(rng, budget - 1)),
        2 => {
            let left = rng.gen_range(1..budget - 1);
            NodeExpr::and(node(rng, left), node(rng, budget - 1 - left))
        }
        3 => NodeExpr::at(Nominal(*pick(rng, &NOMINALS)), node(rng, budget - 3)),
        _ => {
            let rest = budget - 5;
            let left = rng.gen_range(1..rest);
            let pol = if rng.gen_bool(0.5) { Polarity::Eq } else { Polarity::Neq };
            NodeExpr::data(path(rng, left), pol, sym("c"), path(rng, rest - left))
        }
    }
}

/// A path of size at most `budget` (at least 1).
pub fn path(rng: &mut impl Rng, budget: usize) -> Path {
    if budget <= 1 || rng.gen_bool(0.3) {
        return if rng.gen_bool(0.8) {
            PathExpr::axis(pick(rng, &RELS))
        } else {
            PathExpr::jump(*pick(rng, &NOMINALS))
        };
    }
    let mut kinds = vec![0, 1, 1];
    if budget >= 3 {
        kinds.push(2);
    }
    match *pick(rng, &kinds) {
        0 => PathExpr::test(node(rng, budget - 1)),
        1 => {
            let left = rng.gen_range(1..budget);
            PathExpr::concat(path(rng, left), path(rng, budget - left))
        }
        _ => {
            let left = rng.gen_range(1..budget - 1);
            PathExpr::union(path(rng, left), path(rng, budget - 1 - left))
        }
    }
}

/// `count` formulas with sizes drawn uniformly from `1..=max_size`.
pub fn corpus(seed: u64, count: usize, max_size: usize) -> Vec<Node> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let budget = rng.gen_range(1..=max_size);
            node(&mut rng, budget)
        })
        .collect()
}

/// A model over `n` nodes naming nominals 0 to 3.
pub fn model(rng: &mut impl Rng, n: usize) -> DataModel {
    let mut m = DataModel { nodes: (0..n).map(|v| v.to_string()).collect(), ..DataModel::default() };
    for a in RELS {
        let es = (0..n).flat_map(|x| (0..n).map(move |y| (x, y))).filter(|_| rng.gen_bool(0.3)).collect();
        m.edges.insert(sym(a), es);
    }
    for p in PROPS {
        m.valuation.insert(sym(p), (0..n).filter(|_| rng.gen_bool(0.5)).collect());
    }
    let ids: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n)).collect();
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for id in 0..n {
        let class: Vec<usize> = (0..n).filter(|&v| ids[v] == id).collect();
        if !class.is_empty() {
            classes.push(class);
        }
    }
    m.data.insert(sym("c"), classes);
    for i in 0..4 {
        m.naming.insert(Nominal(i), rng.gen_range(0..n));
    }
    m
}

pub fn arb_node(max_size: usize) -> impl Strategy<Value = Node> {
    (any::<u64>(), 1..=max_size).prop_map(|(seed, budget)| node(&mut ChaCha8Rng::seed_from_u64(seed), budget))
}

pub fn arb_path(max_size: usize) -> impl Strategy<Value = Path> {
    (any::<u64>(), 1..=max_size).prop_map(|(seed, budget)| path(&mut ChaCha8Rng::seed_from_u64(seed), budget))
}

pub fn arb_model(max_nodes: usize) -> impl Strategy<Value = DataModel> {
    (any::<u64>(), 1..=max_nodes).prop_map(|(seed, n)| model(&mut ChaCha8Rng::seed_from_u64(seed), n))
}
