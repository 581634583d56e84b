use std::collections::BTreeMap;

use serde::Serialize;

use super::branch::{Action, Branch, Calculus, ClashReport, Exhausted, Recorder, RuleInstance, TraceEvent};
use super::extract::extract_model;
use super::rules::RuleType;
use crate::frames::final_check;
use crate::semantics::DataModel;
use crate::syntax::Node;

#[derive(Clone, Debug)]
pub enum Verdict {
    Sat { branch: Box<Branch>, model: DataModel },
    Unsat,
    Unknown(String),
}

impl Verdict {
    pub fn is_sat(&self) -> bool {
        matches!(self, Verdict::Sat { .. })
    }

    pub fn is_unsat(&self) -> bool {
        matches!(self, Verdict::Unsat)
    }

    pub fn model(&self) -> Option<&DataModel> {
        match self {
            Verdict::Sat { model, .. } => Some(model),
            _ => None,
        }
    }

    pub fn branch(&self) -> Option<&Branch> {
        match self {
            Verdict::Sat { branch, .. } => Some(branch),
            _ => None,
        }
    }

    pub fn word(&self) -> &'static str {
        match self {
            Verdict::Sat { .. } => "SAT",
            Verdict::Unsat => "UNSAT",
            Verdict::Unknown(_) => "UNKNOWN",
        }
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct SearchStats {
    pub steps: usize,
    pub branches: usize,
    pub max_branch_len: usize,
    pub rule_fires_by_type: BTreeMap<RuleType, usize>,
}

/// A finished search: verdict, counters, the clash that closed the last
/// explored branch, and the trace when requested.
#[derive(Clone, Debug)]
pub struct Run {
    pub verdict: Verdict,
    pub stats: SearchStats,
    pub last_clash: Option<(ClashReport, Vec<String>)>,
    pub trace: Option<Vec<TraceEvent>>,
}

/// Depth-first saturation with the default calculus.
pub fn saturate(phi: &Node) -> Verdict {
    saturate_with(phi, Calculus::default(), false).verdict
}

fn clash_text(b: &Branch, c: &ClashReport) -> Vec<String> {
    c.witnesses.iter().map(|p| crate::syntax::print_node(&b.labels()[*p as usize].expr)).collect()
}

/// Depth-first saturation: Type1 rules to fixpoint, then one branching rule
/// (left first), then one generating rule.
pub fn saturate_with(phi: &Node, calculus: Calculus, trace: bool) -> Run {
    let mut rec = if trace { Recorder::tracing() } else { Recorder::default() };
    let root = Branch::init(phi, calculus, &mut rec);
    let mut stats = SearchStats::default();
    let mut last_clash = None;
    let mut next_id = 1;
    let mut stack: Vec<(Branch, Option<RuleInstance>, usize)> = vec![(root, None, 0)];
    let verdict = 'search: loop {
        let Some((mut b, alt, id)) = stack.pop() else { break Verdict::Unsat };
        stats.branches += 1;
        rec.branch = id;
        if let Some(r) = alt {
            b.apply_split(&r, true, &mut rec);
        }
        loop {
            if let Err(e) = b.close(&mut rec) {
                break 'search Verdict::Unknown(e.to_string());
            }
            stats.max_branch_len = stats.max_branch_len.max(b.len());
            if let Some(c) = b.clash() {
                last_clash = Some((c.clone(), clash_text(&b, c)));
                break;
            }
            if let Some(r) = b.next_split() {
                debug_assert!(matches!(r.action, Action::Split(..)));
                rec.copied += b.len();
                stack.push((b.clone(), Some(r.clone()), next_id));
                next_id += 1;
                b.apply_split(&r, false, &mut rec);
                continue;
            }
            if let Some(r) = b.next_generate() {
                if let Err(e) = b.apply_linear(&r, &mut rec) {
                    break 'search Verdict::Unknown(e.to_string());
                }
                continue;
            }
            if let Some(c) = final_check(&b) {
                b.set_clash(c.clone());
                rec.mark_clash(&b, &c);
                last_clash = Some((c.clone(), clash_text(&b, &c)));
                break;
            }
            let model = extract_model(&b);
            break 'search Verdict::Sat { branch: Box::new(b), model };
        }
    };
    stats.steps = rec.steps;
    stats.rule_fires_by_type = rec.fires.clone();
    Run { verdict, stats, last_clash, trace: rec.events.take() }
}

/// Expands `b` to a quiescent state along the leftmost choices, for inspection.
pub fn saturate_branch(b: &mut Branch, rec: &mut Recorder) -> Result<(), Exhausted> {
    loop {
        b.close(rec)?;
        if b.is_closed() {
            return Ok(());
        }
        if let Some(r) = b.next_split() {
            b.apply_split(&r, false, rec);
        } else if let Some(r) = b.next_generate() {
            b.apply_linear(&r, rec)?;
        } else {
            return Ok(());
        }
    }
}
