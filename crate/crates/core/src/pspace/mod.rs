//! Depth-first diamond exploration with an explicit alternatives stack.
//!
//! The machine keeps a single branch. Each frame of the call stack claims the
//! generating instances that were pending when it started and explores them
//! one at a time. Facts derived inside a recursive call stay in the branch
//! when the call returns, so later siblings see everything earlier ones
//! derived; only branching alternatives are undone, by restoring snapshots.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::frames::final_check;
use crate::syntax::{print_node, Node, NodeExpr, Nominal, PathExpr};
use crate::tableau::{
    extract_model, Action, Branch, Calculus, ClashReport, Generate, Label, Recorder, RuleInstance, RuleType, TraceEvent,
    Verdict,
};

pub use crate::tableau::classify;

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SpaceMetrics {
    pub max_branch_len: usize,
    pub max_recursion_depth: usize,
    pub max_phi_len: usize,
    pub rule_fires_by_type: BTreeMap<RuleType, usize>,
}

/// One recursive call: the generating premise it explores and the nominal it allocated.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CallRecord {
    pub depth: usize,
    pub nominal: u32,
    pub premise: String,
}

#[derive(Clone, Debug)]
pub struct PspaceRun {
    pub verdict: Verdict,
    pub metrics: SpaceMetrics,
    pub calls: Vec<CallRecord>,
    /// Generating premises skipped because their urfather form is present.
    pub skipped: Vec<String>,
    pub last_clash: Option<(ClashReport, Vec<String>)>,
    pub trace: Option<Vec<TraceEvent>>,
}

#[derive(Clone, Debug, Default)]
struct Frame {
    claimed: bool,
    todo: Vec<RuleInstance>,
    next: usize,
}

/// A stored alternative: the branch and call stack at the split, and the right conclusion.
#[derive(Clone, Debug)]
pub struct Alternative {
    pub at: usize,
    pub chi: Vec<Node>,
    branch: Branch,
    frames: Vec<Frame>,
    rule: RuleInstance,
}

#[derive(Clone, Debug)]
pub struct CallContext {
    pub phi: Vec<Node>,
    pub next: Nominal,
    pub root_nominals: BTreeSet<Nominal>,
}

#[derive(Clone, Debug)]
pub struct PspaceOptions {
    pub calculus: Calculus,
    pub trace: bool,
}

impl Default for PspaceOptions {
    fn default() -> Self {
        PspaceOptions { calculus: Calculus { copy_variants: true, ..Calculus::default() }, trace: false }
    }
}

/// Decides `phi` and reports the space counters.
pub fn sat(phi: &Node) -> (bool, SpaceMetrics) {
    let run = run(phi, PspaceOptions::default());
    (run.verdict.is_sat(), run.metrics)
}

pub fn run(phi: &Node, opts: PspaceOptions) -> PspaceRun {
    let mut rec = if opts.trace { Recorder::tracing() } else { Recorder::default() };
    let b = Branch::init(phi, opts.calculus, &mut rec);
    Machine::new(b, rec).run()
}

/// Runs the machine from an explicit context (the list Φ and the next nominal).
pub fn sat_rec(ctx: &CallContext, calculus: Calculus) -> bool {
    if ctx.phi.is_empty() {
        return true;
    }
    for e in &ctx.phi {
        assert!(e.nominals().iter().all(|n| *n < ctx.next), "nominals of Φ must lie below N");
    }
    let mut rec = Recorder::default();
    let b = Branch::from_context(&ctx.phi, ctx.next, ctx.root_nominals.clone(), calculus, &mut rec);
    Machine::new(b, rec).run().verdict.is_sat()
}

struct Machine {
    branch: Branch,
    frames: Vec<Frame>,
    sigma: Vec<Alternative>,
    rec: Recorder,
    metrics: SpaceMetrics,
    calls: Vec<CallRecord>,
    skipped: Vec<String>,
    last_clash: Option<(ClashReport, Vec<String>)>,
}

fn clash_text(b: &Branch, c: &ClashReport) -> Vec<String> {
    c.witnesses.iter().map(|p| print_node(&b.labels()[*p as usize].expr)).collect()
}

impl Machine {
    fn new(branch: Branch, rec: Recorder) -> Self {
        Machine {
            branch,
            frames: vec![Frame::default()],
            sigma: Vec::new(),
            rec,
            metrics: SpaceMetrics { max_recursion_depth: 1, ..SpaceMetrics::default() },
            calls: Vec::new(),
            skipped: Vec::new(),
            last_clash: None,
        }
    }

    fn finish(mut self, verdict: Verdict) -> PspaceRun {
        self.metrics.rule_fires_by_type = self.rec.fires.clone();
        PspaceRun {
            verdict,
            metrics: self.metrics,
            calls: self.calls,
            skipped: self.skipped,
            last_clash: self.last_clash,
            trace: self.rec.events.take(),
        }
    }

    /// Type1 closure interleaved with branching rules, left conclusion first.
    fn expand(&mut self) -> Result<(), String> {
        loop {
            self.branch.close(&mut self.rec).map_err(|e| e.to_string())?;
            self.metrics.max_branch_len = self.metrics.max_branch_len.max(self.branch.len());
            if self.branch.is_closed() {
                return Ok(());
            }
            let Some(r) = self.branch.next_split() else { return Ok(()) };
            let Action::Split(_, right) = &r.action else { unreachable!("branching instance") };
            self.rec.copied += self.branch.len();
            self.sigma.push(Alternative {
                at: self.branch.len(),
                chi: right.iter().map(|c| c.expr.clone()).collect(),
                branch: self.branch.clone(),
                frames: self.frames.clone(),
                rule: r.clone(),
            });
            self.branch.apply_split(&r, false, &mut self.rec);
        }
    }

    /// Restores the most recent alternative; false when none is left.
    fn backtrack(&mut self) -> bool {
        let Some(alt) = self.sigma.pop() else { return false };
        self.branch = alt.branch;
        self.frames = alt.frames;
        self.rec.branch += 1;
        self.branch.apply_split(&alt.rule, true, &mut self.rec);
        true
    }

    fn next_claim(&mut self) -> Option<RuleInstance> {
        loop {
            let top = self.frames.last_mut().expect("frame stack is never empty here");
            if !top.claimed {
                top.claimed = true;
                top.todo = self.branch.take_generates();
            }
            let top = self.frames.last().unwrap();
            if top.next >= top.todo.len() {
                let more = self.branch.take_generates();
                if more.is_empty() {
                    return None;
                }
                self.frames.last_mut().unwrap().todo.extend(more);
                continue;
            }
            let r = top.todo[top.next].clone();
            self.frames.last_mut().unwrap().next += 1;
            if !self.branch.is_untreated(&r) {
                continue;
            }
            if self.branch.urfather_duplicate(&r) {
                self.skipped.push(print_node(&self.branch.labels()[r.premises[0] as usize].expr));
                continue;
            }
            return Some(r);
        }
    }

    fn run(mut self) -> PspaceRun {
        loop {
            if let Err(e) = self.expand() {
                return self.finish(Verdict::Unknown(e));
            }
            if let Some(c) = self.branch.clash().cloned() {
                self.last_clash = Some((c.clone(), clash_text(&self.branch, &c)));
                if self.backtrack() {
                    continue;
                }
                return self.finish(Verdict::Unsat);
            }
            match self.next_claim() {
                Some(r) => {
                    let depth = self.frames.len() + 1;
                    let phi_len = self.branch.len() - self.branch.diamond_count() + 2;
                    self.metrics.max_phi_len = self.metrics.max_phi_len.max(phi_len);
                    self.metrics.max_recursion_depth = self.metrics.max_recursion_depth.max(depth);
                    let nominal = self.branch.next_nominal();
                    let premise = match r.premises.first() {
                        Some(p) if !matches!(r.action, Action::Generate(Generate::NodeRule { .. })) => {
                            print_node(&self.branch.labels()[*p as usize].expr)
                        }
                        _ => r.rule.name(),
                    };
                    if let Err(e) = self.branch.apply_linear(&r, &mut self.rec) {
                        return self.finish(Verdict::Unknown(e.to_string()));
                    }
                    self.calls.push(CallRecord { depth, nominal: nominal.0, premise });
                    self.frames.push(Frame::default());
                }
                None => {
                    self.frames.pop();
                    if !self.frames.is_empty() {
                        continue;
                    }
                    debug_assert!(self.branch.is_quiescent());
                    if let Some(c) = final_check(&self.branch) {
                        self.rec.mark_clash(&self.branch, &c);
                        self.last_clash = Some((c.clone(), clash_text(&self.branch, &c)));
                        if self.backtrack() {
                            continue;
                        }
                        return self.finish(Verdict::Unsat);
                    }
                    let model = extract_model(&self.branch);
                    let branch = Box::new(self.branch.clone());
                    return self.finish(Verdict::Sat { branch, model });
                }
            }
        }
    }
}

fn all_root(e: &NodeExpr, roots: &BTreeSet<Nominal>) -> bool {
    e.nominals().iter().all(|n| roots.contains(n))
}

/// `i:j`, `i:¬j`, `i:p`, `i:¬p`, `i:⟨a⟩j` and bare comparisons, over root nominals only.
pub fn root_literals(list: &[Node], roots: &BTreeSet<Nominal>) -> Vec<Node> {
    list.iter()
        .filter(|e| {
            let literal = match &***e {
                NodeExpr::At(_, x) => match &**x {
                    NodeExpr::Nom(_) | NodeExpr::Prop(_) => true,
                    NodeExpr::Neg(y) => matches!(&**y, NodeExpr::Nom(_) | NodeExpr::Prop(_)),
                    NodeExpr::Diamond(_, j) => j.as_nominal().is_some(),
                    _ => false,
                },
                NodeExpr::DataCmp(l, _, _, r) => {
                    matches!((&**l, &**r), (PathExpr::Jump(_), PathExpr::Jump(_)))
                }
                _ => false,
            };
            literal && all_root(e, roots)
        })
        .cloned()
        .collect()
}

/// `i:¬⟨a⟩ψ` and `¬⟨@iα ⋟ @jβ⟩` with `i`, `j` root nominals.
pub fn rooted_boxes(list: &[Node], roots: &BTreeSet<Nominal>) -> Vec<Node> {
    list.iter()
        .filter(|e| match &***e {
            NodeExpr::At(i, x) => roots.contains(i) && matches!(&**x, NodeExpr::Neg(y) if matches!(&**y, NodeExpr::Diamond(..))),
            NodeExpr::Neg(x) => match &**x {
                NodeExpr::DataCmp(l, _, _, r) => {
                    match (PathExpr::leading_jump(l), PathExpr::leading_jump(r)) {
                        (Some((i, _)), Some((j, _))) => roots.contains(&i) && roots.contains(&j),
                        _ => false,
                    }
                }
                _ => false,
            },
            _ => false,
        })
        .cloned()
        .collect()
}

/// Drops untreated diamonds: `i:⟨a⟩ψ` that are not accessibility constraints,
/// and positive comparisons whose path continues with an axis after `@i`.
pub fn strip_diamonds(labels: &[Label]) -> Vec<Label> {
    labels
        .iter()
        .filter(|l| match &*l.expr {
            NodeExpr::At(_, x) => !matches!(&**x, NodeExpr::Diamond(..)) || l.access,
            NodeExpr::DataCmp(left, ..) => match PathExpr::leading_jump(left) {
                Some((_, Some(rest))) => !matches!(&**PathExpr::head(rest).0, PathExpr::Axis(_)),
                _ => true,
            },
            _ => true,
        })
        .cloned()
        .collect()
}
