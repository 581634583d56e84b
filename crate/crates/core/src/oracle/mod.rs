//! Bounded brute-force satisfiability over small models.
//!
//! Models are enumerated in a fixed canonical order: node count, then naming,
//! then edges, then one restricted-growth string per comparison, then the
//! valuation. The formula is always evaluated at node 0, which loses no models
//! since any node can be renumbered to 0.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use crate::semantics::{check_node, frame_of, DataModel, FrameClass, RelModel};
use crate::syntax::{Node, Nominal, Sym};
use crate::tableau::Verdict;

/// Hard cap on the node bound. Signatures with many relations are capped lower
/// so that all edges fit in one 64-bit mask; the answer reports the bound reached.
pub const MAX_BOUND: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Bound {
    pub max_nodes: usize,
    pub max_seconds: Duration,
}

impl Bound {
    pub fn nodes(max_nodes: usize) -> Bound {
        Bound { max_nodes, max_seconds: Duration::from_secs(60) }
    }
}

/// `max(3, nominal count + modal depth)`.
pub fn default_bound(phi: &Node) -> Bound {
    Bound::nodes((phi.nominals().len() + phi.modal_depth()).max(3))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OracleAnswer {
    Witness(DataModel, usize),
    NoModelUpTo(usize),
    TimedOut,
}

impl OracleAnswer {
    pub fn is_witness(&self) -> bool {
        matches!(self, OracleAnswer::Witness(..))
    }
}

/// Restricted-growth strings of length `n`, in lexicographic order.
pub fn restricted_growth_strings(n: usize) -> Vec<Vec<usize>> {
    fn go(prefix: &mut Vec<usize>, max: usize, n: usize, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == n {
            out.push(prefix.clone());
            return;
        }
        for k in 0..=max + 1 {
            prefix.push(k);
            go(prefix, max.max(k), n, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if n == 0 {
        out.push(Vec::new());
    } else {
        go(&mut vec![0], 0, n, &mut out);
    }
    out
}

fn class_masks(rgs: &[usize]) -> Vec<u64> {
    let k = rgs.iter().max().map_or(0, |m| m + 1);
    let mut masks = vec![0u64; k];
    for (v, &c) in rgs.iter().enumerate() {
        masks[c] |= 1 << v;
    }
    masks
}

/// Odometer over mixed radices; false once it wraps around.
fn advance(digits: &mut [usize], radix: &[usize]) -> bool {
    for (d, r) in digits.iter_mut().zip(radix) {
        *d += 1;
        if *d < *r {
            return true;
        }
        *d = 0;
    }
    false
}

struct Signature {
    rels: Vec<Sym>,
    cmps: Vec<Sym>,
    props: Vec<Sym>,
    nominals: Vec<Nominal>,
}

impl Signature {
    /// Edge sets and valuations over `n` nodes fit in one mask each.
    fn fits(&self, n: usize) -> bool {
        self.rels.len() * n * n < 64 && self.props.len() * n < 64
    }

    fn of(phi: &Node) -> Signature {
        let s = phi.signature();
        Signature {
            rels: s.rels.into_iter().collect(),
            cmps: s.cmps.into_iter().collect(),
            props: s.props.into_iter().collect(),
            nominals: phi.nominals().into_iter().collect(),
        }
    }
}

/// Visits every model with exactly `n` nodes in canonical order until `visit` returns false.
/// Returns false when stopped early.
fn for_each_model(n: usize, sig: &Signature, with_valuations: bool, mut visit: impl FnMut(&RelModel) -> bool) -> bool {
    assert!((1..=MAX_BOUND).contains(&n), "node bound out of range");
    let partitions: Vec<Vec<u64>> = restricted_growth_strings(n).iter().map(|r| class_masks(r)).collect();
    let edge_bits = sig.rels.len() * n * n;
    let val_bits = if with_valuations { sig.props.len() * n } else { 0 };
    assert!(edge_bits < 64 && val_bits < 64, "enumeration space too large");
    let row_mask = (1u64 << n) - 1;
    let mut naming = vec![0usize; sig.nominals.len()];
    let naming_radix = vec![n; sig.nominals.len()];
    loop {
        let mut m = RelModel {
            n,
            rels: sig.rels.iter().map(|a| (a.clone(), vec![0; n])).collect(),
            classes: sig.cmps.iter().map(|c| (c.clone(), vec![])).collect(),
            props: sig.props.iter().map(|p| (p.clone(), 0)).collect(),
            naming: sig.nominals.iter().copied().zip(naming.iter().copied()).collect(),
        };
        for edges in 0..1u64 << edge_bits {
            for (k, (_, rows)) in m.rels.iter_mut().enumerate() {
                for (x, row) in rows.iter_mut().enumerate() {
                    *row = (edges >> ((k * n + x) * n)) & row_mask;
                }
            }
            let mut parts = vec![0usize; sig.cmps.len()];
            let parts_radix = vec![partitions.len(); sig.cmps.len()];
            loop {
                for (k, (_, classes)) in m.classes.iter_mut().enumerate() {
                    classes.clone_from(&partitions[parts[k]]);
                }
                for val in 0..1u64 << val_bits {
                    for (k, (_, set)) in m.props.iter_mut().enumerate() {
                        *set = (val >> (k * n)) & row_mask;
                    }
                    if !visit(&m) {
                        return false;
                    }
                }
                if !advance(&mut parts, &parts_radix) {
                    break;
                }
            }
        }
        if !advance(&mut naming, &naming_radix) {
            return true;
        }
    }
}

/// Number of (edge set, partition) structures over `n` nodes for `rels`
/// relations and `cmps` comparisons, counted by the enumerator.
pub fn count_structures(n: usize, rels: usize, cmps: usize) -> usize {
    let sig = Signature {
        rels: (0..rels).map(|k| crate::syntax::sym(&format!("r{k}"))).collect(),
        cmps: (0..cmps).map(|k| crate::syntax::sym(&format!("c{k}"))).collect(),
        props: vec![],
        nominals: vec![],
    };
    let mut count = 0;
    for_each_model(n, &sig, false, |_| {
        count += 1;
        true
    });
    count
}

/// Converts an enumerated model to a [`DataModel`] with nodes named `0..n`.
pub fn to_data_model(m: &RelModel) -> DataModel {
    let members = |mask: u64| (0..m.n).filter(|v| mask & (1 << v) != 0).collect::<Vec<_>>();
    DataModel {
        nodes: (0..m.n).map(|v| v.to_string()).collect(),
        edges: m
            .rels
            .iter()
            .map(|(a, rows)| {
                let es = rows.iter().enumerate().flat_map(|(x, &row)| members(row).into_iter().map(move |y| (x, y)));
                (a.clone(), es.collect())
            })
            .collect(),
        data: m.classes.iter().map(|(c, masks)| (c.clone(), masks.iter().map(|&k| members(k)).collect())).collect(),
        valuation: m.props.iter().map(|(p, set)| (p.clone(), members(*set))).collect(),
        naming: m.naming.iter().copied().collect::<BTreeMap<_, _>>(),
        dangling: vec![],
    }
}

pub fn bounded_sat(phi: &Node, b: Bound) -> OracleAnswer {
    bounded_sat_in(phi, b, FrameClass::All)
}

/// As [`bounded_sat`], keeping only models whose frame belongs to `frame`.
pub fn bounded_sat_in(phi: &Node, b: Bound, frame: FrameClass) -> OracleAnswer {
    assert!(b.max_nodes >= 1, "bound must allow one node");
    let sig = Signature::of(phi);
    let start = Instant::now();
    let mut ticks = 0u32;
    let mut timed_out = false;
    let mut found = None;
    let top = (1..=b.max_nodes.min(MAX_BOUND)).take_while(|&n| sig.fits(n)).last().unwrap_or(0);
    for n in 1..=top {
        let done = for_each_model(n, &sig, true, |m| {
            ticks = ticks.wrapping_add(1);
            if ticks.is_multiple_of(4096) && start.elapsed() > b.max_seconds {
                timed_out = true;
                return false;
            }
            // Unknown symbols cannot occur: the signature is taken from phi.
            if !m.holds_at(0, phi).unwrap_or(false) {
                return true;
            }
            let dm = to_data_model(m);
            if frame != FrameClass::All && !frame_of(&dm).admits(frame) {
                return true;
            }
            found = Some(dm);
            false
        });
        if let Some(dm) = found {
            return OracleAnswer::Witness(dm, 0);
        }
        if timed_out {
            return OracleAnswer::TimedOut;
        }
        debug_assert!(done);
    }
    OracleAnswer::NoModelUpTo(top)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CrossReport {
    Consistent,
    /// The oracle ran out of time, or the verdict was unknown.
    Inconclusive(String),
    Discrepancy(String),
}

/// Checks a SAT verdict's model independently and an UNSAT verdict against the oracle.
pub fn cross_check(phi: &Node, verdict: &Verdict, b: Bound) -> CrossReport {
    cross_check_in(phi, verdict, b, FrameClass::All)
}

pub fn cross_check_in(phi: &Node, verdict: &Verdict, b: Bound, frame: FrameClass) -> CrossReport {
    match verdict {
        Verdict::Sat { branch, model } => {
            let Some(&root) = model.naming.get(&branch.root()) else {
                return CrossReport::Discrepancy("extracted model does not name the root".into());
            };
            match check_node(model, root, phi) {
                Ok(true) if frame_of(model).admits(frame) => CrossReport::Consistent,
                Ok(true) => CrossReport::Discrepancy(format!("extracted model is not in the {frame} class")),
                Ok(false) => CrossReport::Discrepancy("extracted model does not satisfy the formula".into()),
                Err(e) => CrossReport::Discrepancy(format!("extracted model cannot be evaluated: {e}")),
            }
        }
        Verdict::Unsat => match bounded_sat_in(phi, b, frame) {
            OracleAnswer::NoModelUpTo(_) => CrossReport::Consistent,
            OracleAnswer::TimedOut => CrossReport::Inconclusive("oracle timed out".into()),
            OracleAnswer::Witness(m, v) => {
                CrossReport::Discrepancy(format!("UNSAT verdict but the oracle found a {}-node model at node {v}", m.len()))
            }
        },
        Verdict::Unknown(why) => CrossReport::Inconclusive(why.clone()),
    }
}
