use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use super::rules::{RuleId, RuleType};
use crate::frames::{NodeCreatingRule, PureAxiom};
use crate::semantics::FrameClass;
use crate::syntax::{print_node, sym, Node, NodeExpr, Nominal, Path, PathExpr, Polarity, Sym};

/// Relation symbol of transitivity constraints. Never accepted from user input.
pub const PLUS: &str = "+";

/// Immutable configuration of the calculus.
#[derive(Clone, Debug)]
pub struct Calculus {
    pub frame: FrameClass,
    /// Literal one-sided reading of the two-parent clash.
    pub strict_two_parent: bool,
    /// Enables the admissible rules copy₀, copy₁ and copy₂.
    pub copy_variants: bool,
    pub axioms: Vec<PureAxiom>,
    pub node_rules: Vec<NodeCreatingRule>,
    pub node_rule_budget: usize,
    pub max_steps: usize,
}

impl Default for Calculus {
    fn default() -> Self {
        Calculus {
            frame: FrameClass::All,
            strict_two_parent: false,
            copy_variants: false,
            axioms: Vec::new(),
            node_rules: Vec::new(),
            node_rule_budget: 100,
            max_steps: 2_000_000,
        }
    }
}

impl Calculus {
    pub fn with_frame(frame: FrameClass) -> Self {
        Calculus { frame, ..Calculus::default() }
    }

    pub fn frame_rules(&self) -> bool {
        self.frame != FrameClass::All
    }

    /// Extensions may equate any two nominals, so every nominal may receive copies.
    pub fn all_root(&self) -> bool {
        !self.axioms.is_empty() || !self.node_rules.is_empty()
    }
}

#[derive(Debug)]
pub(crate) struct Ctx {
    pub root: Nominal,
    pub phi: Node,
    pub root_nominals: BTreeSet<Nominal>,
    pub cmps: Vec<Sym>,
    pub calculus: Calculus,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Label {
    pub expr: Node,
    /// Set when `expr` is `i:⟨a⟩j` produced by (◇) or (child), or inherited by a copy.
    pub access: bool,
    pub origin: RuleId,
}

impl Label {
    pub fn is_transitivity(&self) -> bool {
        matches!(&*self.expr, NodeExpr::At(_, d) if matches!(&**d, NodeExpr::Diamond(a, _) if &**a == PLUS))
    }

    pub fn is_accessibility(&self) -> bool {
        self.access && !self.is_transitivity()
    }
}

#[derive(Clone, Debug)]
pub struct Conclusion {
    pub expr: Node,
    pub access: bool,
}

#[derive(Clone, Debug)]
pub enum Generate {
    Diamond { at: Nominal, rel: Sym, body: Node },
    Child { at: Nominal, rel: Sym, rest: Option<Path>, pol: Polarity, cmp: Sym, right: Path },
    NodeRule { rule: usize, tuple: Vec<Nominal> },
}

#[derive(Clone, Debug)]
pub enum Action {
    Extend(Vec<Conclusion>),
    Split(Vec<Conclusion>, Vec<Conclusion>),
    Generate(Generate),
}

#[derive(Clone, Debug)]
pub struct RuleInstance {
    pub rule: RuleId,
    /// Label positions, or the instantiated nominals for extension rules.
    pub premises: Vec<u32>,
    pub action: Action,
}

impl RuleInstance {
    pub fn kind(&self) -> RuleType {
        self.rule.classify()
    }

    fn key(&self) -> (RuleId, Vec<u32>) {
        (self.rule, self.premises.clone())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ClashKind {
    PropClash,
    DataClash,
    LoopClash,
    TwoParentClash,
    /// Tree mode only: open and saturated, but not connected from the root.
    Disconnected,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClashReport {
    pub kind: ClashKind,
    pub witnesses: Vec<u32>,
}

impl fmt::Display for ClashKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TraceEvent {
    pub step: usize,
    pub rule: String,
    pub premises: Vec<String>,
    pub conclusions: Vec<String>,
    pub branch: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub clash: Option<String>,
}

/// Per-run bookkeeping shared by all branches of one search.
#[derive(Debug, Default)]
pub struct Recorder {
    pub events: Option<Vec<TraceEvent>>,
    pub steps: usize,
    /// Labels copied into saved alternatives; charged against the step budget.
    pub copied: usize,
    pub branch: usize,
    pub fires: BTreeMap<RuleType, usize>,
}

impl Recorder {
    pub fn tracing() -> Self {
        Recorder { events: Some(Vec::new()), ..Recorder::default() }
    }

    fn fire(&mut self, b: &Branch, rule: RuleId, premises: &[u32], added: &[u32]) {
        self.steps += 1;
        *self.fires.entry(rule.classify()).or_default() += 1;
        if let Some(ev) = self.events.as_mut() {
            let show = |p: &u32| print_node(&b.labels[*p as usize].expr);
            let premises = if matches!(rule, RuleId::Pure(_) | RuleId::NodeRule(_)) {
                premises.iter().map(|n| n.to_string()).collect()
            } else {
                premises.iter().map(show).collect()
            };
            ev.push(TraceEvent {
                step: self.steps,
                rule: rule.name(),
                premises,
                conclusions: added.iter().map(show).collect(),
                branch: self.branch,
                clash: None,
            });
        }
    }

    pub(crate) fn mark_clash(&mut self, b: &Branch, c: &ClashReport) {
        if let Some(ev) = self.events.as_mut() {
            let shown: Vec<String> = c.witnesses.iter().map(|p| print_node(&b.labels[*p as usize].expr)).collect();
            let text = format!("{} {{{}}}", c.kind, shown.join(", "));
            match ev.last_mut() {
                Some(last) if last.branch == self.branch && last.clash.is_none() => last.clash = Some(text),
                _ => ev.push(TraceEvent {
                    step: self.steps,
                    rule: "clash".into(),
                    premises: Vec::new(),
                    conclusions: Vec::new(),
                    branch: self.branch,
                    clash: Some(text),
                }),
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Exhausted {
    Steps(usize),
    NodeRuleBudget { rule: String, budget: usize },
}

impl fmt::Display for Exhausted {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exhausted::Steps(n) => write!(f, "step budget of {n} exhausted (rule applications plus labels copied at splits)"),
            Exhausted::NodeRuleBudget { rule, budget } => {
                write!(f, "node-creating rule '{rule}' exhausted its budget of {budget} firings")
            }
        }
    }
}

type Pos = u32;

/// `¬⟨@i a rest ⋟ right⟩` split at its first axis: rest, polarity, comparison, right side, position.
type NegChild = (Option<Path>, Polarity, Sym, Path, Pos);

#[derive(Clone, Debug, Default)]
struct Indices {
    eq_out: HashMap<Nominal, Vec<(Nominal, Pos)>>,
    eq_in: HashMap<Nominal, Vec<(Nominal, Pos)>>,
    by_prefix: HashMap<Nominal, Vec<Pos>>,
    acc_out: HashMap<(Nominal, Sym), Vec<(Nominal, Pos)>>,
    /// Non-transitivity edges `h:⟨a⟩j`, keyed by `j`.
    edges_in: HashMap<Nominal, Vec<(Nominal, Sym, Pos)>>,
    boxes: HashMap<(Nominal, Sym), Vec<(Node, Pos)>>,
    neg_child: HashMap<(Nominal, Sym), Vec<NegChild>>,
    cmp_left: HashMap<Nominal, Vec<Pos>>,
    deq: HashMap<(Sym, Nominal), Vec<(Nominal, Pos)>>,
    deq_in: HashMap<(Sym, Nominal), Vec<(Nominal, Pos)>>,
    plus_out: HashMap<Nominal, Vec<(Nominal, Pos)>>,
    plus_in: HashMap<Nominal, Vec<(Nominal, Pos)>>,
}

/// One tableau branch with incremental indices.
///
/// Labels are deduplicated, so a premise position identifies a premise
/// expression and `fired` keys coincide with structural keys.
#[derive(Clone, Debug)]
pub struct Branch {
    pub(crate) ctx: Arc<Ctx>,
    labels: Vec<Label>,
    index: HashMap<Node, Pos>,
    fired: HashSet<(RuleId, Vec<u32>)>,
    next_nominal: u32,
    nominals: Vec<Nominal>,
    nominal_set: HashSet<Nominal>,
    fresh_queue: Vec<Nominal>,
    idx: Indices,
    cursor: usize,
    requeue: Vec<Pos>,
    pending2: Vec<RuleInstance>,
    pending3: Vec<RuleInstance>,
    clash: Option<ClashReport>,
    node_rule_fires: Vec<usize>,
    seeding: bool,
    diamonds: usize,
}

fn jump(i: Nominal) -> Path {
    Arc::new(PathExpr::Jump(i))
}

fn jumped(i: Nominal, rest: Option<&Path>) -> Path {
    PathExpr::prepend(jump(i), rest)
}

fn at(i: Nominal, e: Node) -> Node {
    NodeExpr::at(i, e)
}

fn nom(i: Nominal) -> Node {
    Arc::new(NodeExpr::Nom(i))
}

fn edge(i: Nominal, a: &Sym, j: Nominal) -> Node {
    at(i, Arc::new(NodeExpr::Diamond(a.clone(), nom(j))))
}

fn neg(e: Node) -> Node {
    NodeExpr::neg(e)
}

fn maybe_neg(negated: bool, e: Node) -> Node {
    if negated {
        neg(e)
    } else {
        e
    }
}

fn bare(i: Nominal, pol: Polarity, c: &Sym, j: Nominal) -> Node {
    NodeExpr::data(jump(i), pol, c.clone(), jump(j))
}

fn plain(e: Node) -> Conclusion {
    Conclusion { expr: e, access: false }
}

fn extend(rule: RuleId, premises: Vec<u32>, concl: Vec<Conclusion>) -> RuleInstance {
    RuleInstance { rule, premises, action: Action::Extend(concl) }
}

/// `(negated, left, pol, cmp, right)` for a possibly negated comparison.
fn as_cmp(e: &NodeExpr) -> Option<(bool, &Path, Polarity, &Sym, &Path)> {
    match e {
        NodeExpr::DataCmp(l, p, c, r) => Some((false, l, *p, c, r)),
        NodeExpr::Neg(x) => match &**x {
            NodeExpr::DataCmp(l, p, c, r) => Some((true, l, *p, c, r)),
            _ => None,
        },
        _ => None,
    }
}

/// `(i, j)` for a bare comparison `⟨@i ⋟ @j⟩`.
fn bare_ends(l: &Path, r: &Path) -> Option<(Nominal, Nominal)> {
    match (&**l, &**r) {
        (PathExpr::Jump(i), PathExpr::Jump(j)) => Some((*i, *j)),
        _ => None,
    }
}

/// Positive comparisons whose left side continues with an axis after its jump.
fn is_path_diamond(e: &NodeExpr) -> bool {
    match e {
        NodeExpr::DataCmp(l, ..) => match PathExpr::leading_jump(l) {
            Some((_, Some(rest))) => matches!(&**PathExpr::head(rest).0, PathExpr::Axis(_)),
            _ => false,
        },
        _ => false,
    }
}

fn is_node_diamond(e: &NodeExpr) -> bool {
    matches!(e, NodeExpr::At(_, d) if matches!(&**d, NodeExpr::Diamond(a, _) if &**a != PLUS))
}

fn push_to<K: std::hash::Hash + Eq, V>(m: &mut HashMap<K, Vec<V>>, k: K, v: V) {
    m.entry(k).or_default().push(v);
}

fn get<'a, K: std::hash::Hash + Eq, V>(m: &'a HashMap<K, Vec<V>>, k: &K) -> &'a [V] {
    m.get(k).map(|v| v.as_slice()).unwrap_or(&[])
}

impl Branch {
    /// The single-label branch `i:φ` with `i` one above the largest nominal of `φ`
    /// (and of the loaded extensions), after eager seeding.
    pub fn init(phi: &Node, calculus: Calculus, rec: &mut Recorder) -> Branch {
        let mut noms = phi.nominals();
        for ax in &calculus.axioms {
            noms.extend(ax.signature().nominals);
        }
        for r in &calculus.node_rules {
            noms.extend(r.signature().nominals);
        }
        let root = Nominal(noms.iter().next_back().map_or(0, |n| n.0 + 1));
        let mut root_nominals = phi.nominals();
        root_nominals.insert(root);
        let mut cmps = phi.signature().cmps;
        for ax in &calculus.axioms {
            cmps.extend(ax.signature().cmps);
        }
        for r in &calculus.node_rules {
            cmps.extend(r.signature().cmps);
        }
        let ctx = Ctx { root, phi: phi.clone(), root_nominals, cmps: cmps.into_iter().collect(), calculus };
        let mut b = Branch::empty(Arc::new(ctx), true);
        let pos = b.push(at(root, phi.clone()), false, RuleId::Root);
        if let Some(p) = pos {
            rec.fire(&b, RuleId::Root, &[], &[p]);
        }
        // Nominals of the extensions exist in every model.
        for n in noms {
            b.note_nominal(n);
        }
        b.flush(rec);
        b
    }

    /// A branch holding exactly `labels`, without eager seeding. For tests and
    /// for inspecting single rule applications.
    pub fn from_labels(phi: &Node, labels: &[(Node, bool)], calculus: Calculus) -> Branch {
        let root = Nominal(phi.max_nominal().map_or(0, |n| n.0 + 1));
        let mut root_nominals = phi.nominals();
        root_nominals.insert(root);
        let cmps = phi.signature().cmps.into_iter().collect();
        let ctx = Ctx { root, phi: phi.clone(), root_nominals, cmps, calculus };
        let mut b = Branch::empty(Arc::new(ctx), false);
        for (e, access) in labels {
            b.push(e.clone(), *access, RuleId::Root);
        }
        b.fresh_queue.clear();
        b
    }

    /// A seeded branch over the list `phi`, allocating from `next` upward. The
    /// largest root nominal acts as the root. `i:⟨a⟩j` entries are edges.
    pub fn from_context(
        phi: &[Node],
        next: Nominal,
        mut root_nominals: BTreeSet<Nominal>,
        calculus: Calculus,
        rec: &mut Recorder,
    ) -> Branch {
        let mut cmps = BTreeSet::new();
        for e in phi {
            cmps.extend(e.signature().cmps);
            root_nominals.extend(e.nominals());
        }
        let root = root_nominals.iter().next_back().copied().unwrap_or(Nominal(0));
        root_nominals.insert(root);
        let conj = phi.iter().cloned().reduce(NodeExpr::and).unwrap_or_else(|| NodeExpr::nom(root.0));
        let ctx = Ctx { root, phi: conj, root_nominals: root_nominals.clone(), cmps: cmps.into_iter().collect(), calculus };
        let mut b = Branch::empty(Arc::new(ctx), true);
        b.next_nominal = next.0;
        for e in phi {
            let edge = matches!(&**e, NodeExpr::At(_, d) if matches!(&**d, NodeExpr::Diamond(_, j) if j.as_nominal().is_some()));
            if let Some(p) = b.push(e.clone(), edge, RuleId::Root) {
                rec.fire(&b, RuleId::Root, &[], &[p]);
            }
        }
        for n in root_nominals {
            b.note_nominal(n);
        }
        b.flush(rec);
        b
    }

    fn empty(ctx: Arc<Ctx>, seeding: bool) -> Branch {
        let rules = ctx.calculus.node_rules.len();
        Branch {
            ctx,
            labels: Vec::new(),
            index: HashMap::new(),
            fired: HashSet::new(),
            next_nominal: 0,
            nominals: Vec::new(),
            nominal_set: HashSet::new(),
            fresh_queue: Vec::new(),
            idx: Indices::default(),
            cursor: 0,
            requeue: Vec::new(),
            pending2: Vec::new(),
            pending3: Vec::new(),
            clash: None,
            node_rule_fires: vec![0; rules],
            seeding,
            diamonds: 0,
        }
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn root(&self) -> Nominal {
        self.ctx.root
    }

    pub fn phi(&self) -> &Node {
        &self.ctx.phi
    }

    pub fn calculus(&self) -> &Calculus {
        &self.ctx.calculus
    }

    pub fn root_nominals(&self) -> &BTreeSet<Nominal> {
        &self.ctx.root_nominals
    }

    pub fn comparison_symbols(&self) -> &[Sym] {
        &self.ctx.cmps
    }

    pub fn next_nominal(&self) -> Nominal {
        Nominal(self.next_nominal)
    }

    pub fn nominals(&self) -> &[Nominal] {
        &self.nominals
    }

    pub fn contains(&self, e: &Node) -> bool {
        self.index.contains_key(e)
    }

    pub fn position(&self, e: &Node) -> Option<u32> {
        self.index.get(e).copied()
    }

    pub fn clash(&self) -> Option<&ClashReport> {
        self.clash.as_ref()
    }

    pub fn fired_count(&self) -> usize {
        self.fired.len()
    }

    pub fn was_fired(&self, rule: RuleId, premises: &[u32]) -> bool {
        self.fired.contains(&(rule, premises.to_vec()))
    }

    /// Number of labels that are untreated diamonds (dropped when passing
    /// global information to a recursive call).
    pub fn diamond_count(&self) -> usize {
        self.diamonds
    }

    pub fn is_root_nominal(&self, j: Nominal) -> bool {
        self.ctx.calculus.all_root() || self.ctx.root_nominals.contains(&j)
    }

    pub fn equals(&self, i: Nominal) -> impl Iterator<Item = Nominal> + '_ {
        get(&self.idx.eq_out, &i).iter().map(|(j, _)| *j)
    }

    /// Least nominal `j` with `i:j` in the branch (`i` itself when none is smaller).
    pub fn urfather(&self, i: Nominal) -> Nominal {
        self.equals(i).fold(i, Nominal::min)
    }

    pub fn plus_successors(&self, i: Nominal) -> impl Iterator<Item = Nominal> + '_ {
        get(&self.idx.plus_out, &i).iter().map(|(j, _)| *j)
    }

    pub fn plus_predecessors(&self, j: Nominal) -> impl Iterator<Item = (Nominal, u32)> + '_ {
        get(&self.idx.plus_in, &j).iter().copied()
    }

    pub fn is_closed(&self) -> bool {
        self.clash.is_some()
    }

    pub(crate) fn set_clash(&mut self, c: ClashReport) {
        if self.clash.is_none() {
            self.clash = Some(c);
        }
    }

    /// True when no rule instance is left to process.
    pub fn is_quiescent(&self) -> bool {
        self.cursor >= self.labels.len()
            && self.requeue.is_empty()
            && self.fresh_queue.is_empty()
            && self.pending2.iter().all(|r| !self.is_untreated(r))
            && self.pending3.iter().all(|r| !self.is_untreated(r))
    }

    fn note_nominal(&mut self, n: Nominal) {
        if self.nominal_set.insert(n) {
            self.nominals.push(n);
            self.next_nominal = self.next_nominal.max(n.0 + 1);
            if self.seeding {
                self.fresh_queue.push(n);
            }
        }
    }

    fn alloc(&mut self) -> Nominal {
        let n = Nominal(self.next_nominal);
        self.note_nominal(n);
        n
    }

    /// Appends a label unless present; returns its position when new. A copy
    /// that carries the accessibility flag upgrades an unflagged duplicate.
    fn push(&mut self, e: Node, access: bool, origin: RuleId) -> Option<Pos> {
        if let Some(&p) = self.index.get(&e) {
            let l = &mut self.labels[p as usize];
            if access && !l.access {
                l.access = true;
                if is_node_diamond(&l.expr) {
                    self.diamonds -= 1;
                }
                if (p as usize) < self.cursor {
                    self.requeue.push(p);
                }
            }
            return None;
        }
        let pos = self.labels.len() as Pos;
        let access = access || matches!(&*e, NodeExpr::At(_, d) if matches!(&**d, NodeExpr::Diamond(a, _) if &**a == PLUS));
        if (is_node_diamond(&e) && !access) || is_path_diamond(&e) {
            self.diamonds += 1;
        }
        for n in e.nominals() {
            self.note_nominal(n);
        }
        self.labels.push(Label { expr: e.clone(), access, origin });
        self.index.insert(e.clone(), pos);
        if self.clash.is_none() {
            if let Some(c) = self.clash_with(&e, pos) {
                self.clash = Some(c);
            }
        }
        Some(pos)
    }

    fn clash_with(&self, e: &Node, pos: Pos) -> Option<ClashReport> {
        let report = |kind, other: Pos| {
            let mut w = vec![other, pos];
            w.sort_unstable();
            w.dedup();
            Some(ClashReport { kind, witnesses: w })
        };
        match &**e {
            NodeExpr::At(i, phi) => {
                if let NodeExpr::Diamond(a, j) = &**phi {
                    if &**a == PLUS && j.as_nominal() == Some(*i) {
                        return report(ClashKind::LoopClash, pos);
                    }
                }
                let comp = match &**phi {
                    NodeExpr::Neg(x) => at(*i, x.clone()),
                    _ => at(*i, neg(phi.clone())),
                };
                self.index.get(&comp).and_then(|&q| report(ClashKind::PropClash, q))
            }
            NodeExpr::DataCmp(l, pol, c, r) => {
                let (i, j) = bare_ends(l, r)?;
                let d = pol.dual();
                [bare(i, d, c, j), bare(j, d, c, i)]
                    .iter()
                    .find_map(|x| self.index.get(x).copied())
                    .and_then(|q| report(ClashKind::DataClash, q))
            }
            _ => None,
        }
    }

    /// Eager (ref), (dRef), pure-axiom instances and node-rule obligations for
    /// nominals that just entered the branch.
    fn flush(&mut self, rec: &mut Recorder) {
        while let Some(n) = self.fresh_queue.pop() {
            if let Some(p) = self.push(at(n, nom(n)), false, RuleId::Ref) {
                self.fired.insert((RuleId::Ref, vec![n.0]));
                rec.fire(self, RuleId::Ref, &[], &[p]);
                self.after_fire(rec);
            }
            let ctx = self.ctx.clone();
            for c in &ctx.cmps {
                if let Some(p) = self.push(bare(n, Polarity::Eq, c, n), false, RuleId::DRef) {
                    rec.fire(self, RuleId::DRef, &[], &[p]);
                    self.after_fire(rec);
                }
            }
            let known: Vec<Nominal> = self.nominals.iter().copied().filter(|m| !self.fresh_queue.contains(m)).collect();
            for (k, ax) in ctx.calculus.axioms.iter().enumerate() {
                for tuple in tuples_with(&known, n, ax.placeholders.len()) {
                    let rule = RuleId::Pure(k as u16);
                    let key: Vec<u32> = tuple.iter().map(|m| m.0).collect();
                    if !self.fired.insert((rule, key.clone())) {
                        continue;
                    }
                    if let Some(p) = self.push(ax.instantiate(&tuple, self.ctx.root), false, rule) {
                        rec.fire(self, rule, &key, &[p]);
                        self.after_fire(rec);
                    }
                }
            }
            for (k, r) in ctx.calculus.node_rules.iter().enumerate() {
                for tuple in tuples_with(&known, n, r.universals.len()) {
                    let premises = tuple.iter().map(|m| m.0).collect();
                    self.pending3.push(RuleInstance {
                        rule: RuleId::NodeRule(k as u16),
                        premises,
                        action: Action::Generate(Generate::NodeRule { rule: k, tuple }),
                    });
                }
            }
        }
    }

    fn after_fire(&mut self, rec: &mut Recorder) {
        if let Some(c) = &self.clash {
            if rec.events.as_ref().is_some_and(|e| e.last().is_some_and(|l| l.clash.is_none())) {
                let c = c.clone();
                rec.mark_clash(self, &c);
            }
        }
    }

    /// True when applying `r` could still change the branch.
    pub fn is_untreated(&self, r: &RuleInstance) -> bool {
        if self.fired.contains(&r.key()) {
            return false;
        }
        match &r.action {
            Action::Extend(c) => c.iter().any(|c| !self.contains(&c.expr)),
            Action::Split(l, r) => l.iter().chain(r).all(|c| !self.contains(&c.expr)),
            Action::Generate(Generate::Diamond { .. }) => !self.labels[r.premises[0] as usize].access,
            Action::Generate(_) => true,
        }
    }

    /// Applies an extension or generating instance in place.
    pub fn apply_linear(&mut self, r: &RuleInstance, rec: &mut Recorder) -> Result<(), Exhausted> {
        self.fired.insert(r.key());
        let mut added = Vec::new();
        match &r.action {
            Action::Extend(cs) => {
                for c in cs {
                    added.extend(self.push(c.expr.clone(), c.access, r.rule));
                }
            }
            Action::Split(..) => panic!("split instances are applied with apply_split"),
            Action::Generate(g) => self.generate(g, r.rule, &mut added)?,
        }
        rec.fire(self, r.rule, &r.premises, &added);
        self.after_fire(rec);
        self.flush(rec);
        Ok(())
    }

    /// Applies one side of a branching instance in place.
    pub fn apply_split(&mut self, r: &RuleInstance, right: bool, rec: &mut Recorder) {
        self.fired.insert(r.key());
        let Action::Split(l, rr) = &r.action else { panic!("not a branching instance") };
        let side = if right { rr } else { l };
        let mut added = Vec::new();
        for c in side {
            added.extend(self.push(c.expr.clone(), c.access, r.rule));
        }
        rec.fire(self, r.rule, &r.premises, &added);
        self.after_fire(rec);
        self.flush(rec);
    }

    fn generate(&mut self, g: &Generate, rule: RuleId, added: &mut Vec<Pos>) -> Result<(), Exhausted> {
        match g {
            Generate::Diamond { at: i, rel, body } => {
                let n = self.alloc();
                added.extend(self.push(edge(*i, rel, n), true, rule));
                added.extend(self.push(at(n, body.clone()), false, rule));
            }
            Generate::Child { at: i, rel, rest, pol, cmp, right } => {
                let n = self.alloc();
                added.extend(self.push(edge(*i, rel, n), true, rule));
                let l = jumped(n, rest.as_ref());
                added.extend(self.push(NodeExpr::data(l, *pol, cmp.clone(), right.clone()), false, rule));
            }
            Generate::NodeRule { rule: k, tuple } => {
                let budget = self.ctx.calculus.node_rule_budget;
                let nr = &self.ctx.calculus.node_rules[*k];
                if self.node_rule_fires[*k] >= budget {
                    return Err(Exhausted::NodeRuleBudget { rule: nr.name.clone(), budget });
                }
                self.node_rule_fires[*k] += 1;
                let ctx = self.ctx.clone();
                let nr = &ctx.calculus.node_rules[*k];
                let fresh: Vec<Nominal> = nr.existentials.iter().map(|_| self.alloc()).collect();
                added.extend(self.push(nr.instantiate(tuple, &fresh, ctx.root), false, rule));
            }
        }
        Ok(())
    }

    /// Processes labels until every Type1 consequence is present, queueing
    /// branching and generating instances. Stops early on a clash.
    pub fn close(&mut self, rec: &mut Recorder) -> Result<(), Exhausted> {
        let max = self.ctx.calculus.max_steps;
        loop {
            if self.clash.is_some() {
                return Ok(());
            }
            if rec.steps + rec.copied > max {
                return Err(Exhausted::Steps(max));
            }
            let insts = if let Some(p) = self.requeue.pop() {
                self.upgrade_instances(p)
            } else if self.cursor < self.labels.len() {
                let p = self.cursor as Pos;
                self.cursor += 1;
                self.index_label(p);
                self.instances_at(p)
            } else {
                return Ok(());
            };
            for r in insts {
                match r.kind() {
                    RuleType::Type1 => {
                        if self.is_untreated(&r) {
                            self.apply_linear(&r, rec)?;
                            if self.clash.is_some() {
                                return Ok(());
                            }
                        } else {
                            self.fired.insert(r.key());
                        }
                    }
                    RuleType::Type2 => self.pending2.push(r),
                    RuleType::Type3 => self.pending3.push(r),
                }
            }
        }
    }

    /// The first untreated branching instance, removing treated ones.
    pub fn next_split(&mut self) -> Option<RuleInstance> {
        while !self.pending2.is_empty() {
            let r = self.pending2.remove(0);
            if self.is_untreated(&r) {
                return Some(r);
            }
        }
        None
    }

    /// A generating instance whose premise, with leading nominals replaced by
    /// their urfathers, is a different label already on the branch.
    pub fn urfather_duplicate(&self, r: &RuleInstance) -> bool {
        let Some(&p) = r.premises.first() else { return false };
        let premise = &self.labels[p as usize].expr;
        let form = match (&r.action, &**premise) {
            (Action::Generate(Generate::Diamond { .. }), NodeExpr::At(i, body)) => {
                let u = self.urfather(*i);
                (u != *i).then(|| NodeExpr::at(u, body.clone()))
            }
            (Action::Generate(Generate::Child { .. }), NodeExpr::DataCmp(l, pol, c, rt)) => {
                let swap = |p: &Path| match PathExpr::leading_jump(p) {
                    Some((j, rest)) if self.urfather(j) != j => {
                        Some(PathExpr::prepend(Arc::new(PathExpr::Jump(self.urfather(j))), rest))
                    }
                    _ => None,
                };
                match (swap(l), swap(rt)) {
                    (None, None) => None,
                    (nl, nr) => Some(NodeExpr::data(nl.unwrap_or_else(|| l.clone()), *pol, c.clone(), nr.unwrap_or_else(|| rt.clone()))),
                }
            }
            _ => None,
        };
        form.is_some_and(|f| self.contains(&f))
    }

    /// The first untreated generating instance, removing treated ones. Under
    /// frame rules, urfather duplicates are dropped as well.
    pub fn next_generate(&mut self) -> Option<RuleInstance> {
        while !self.pending3.is_empty() {
            let r = self.pending3.remove(0);
            if self.is_untreated(&r) && !(self.ctx.calculus.frame_rules() && self.urfather_duplicate(&r)) {
                return Some(r);
            }
        }
        None
    }

    /// Removes and returns all untreated generating instances.
    pub fn take_generates(&mut self) -> Vec<RuleInstance> {
        let all = std::mem::take(&mut self.pending3);
        all.into_iter().filter(|r| self.is_untreated(r)).collect()
    }

    /// Every instance that could still change the branch, in scheduling order.
    pub fn applicable(&self) -> Vec<RuleInstance> {
        let mut probe = self.clone();
        probe.seeding = false;
        let mut t1 = Vec::new();
        let mut seen = HashSet::new();
        for p in 0..self.labels.len() as Pos {
            probe.index_label(p);
        }
        for p in 0..self.labels.len() as Pos {
            for r in probe.instances_at(p) {
                if r.kind() == RuleType::Type1 && self.is_untreated(&r) && seen.insert(r.key()) {
                    t1.push(r);
                }
            }
        }
        let mut t2 = Vec::new();
        let mut t3 = Vec::new();
        for p in 0..self.labels.len() as Pos {
            for r in probe.instances_at(p) {
                if self.is_untreated(&r) && seen.insert(r.key()) {
                    match r.kind() {
                        RuleType::Type2 => t2.push(r),
                        RuleType::Type3 => t3.push(r),
                        RuleType::Type1 => {}
                    }
                }
            }
        }
        for r in self.pending3.iter() {
            if matches!(r.action, Action::Generate(Generate::NodeRule { .. }))
                && self.is_untreated(r)
                && seen.insert(r.key())
            {
                t3.push(r.clone());
            }
        }
        t1.extend(t2);
        t1.extend(t3);
        t1
    }

    fn index_label(&mut self, p: Pos) {
        let l = &self.labels[p as usize];
        let e = l.expr.clone();
        let access = l.access;
        let ix = &mut self.idx;
        match &*e {
            NodeExpr::At(i, phi) => {
                let i = *i;
                match &**phi {
                    NodeExpr::Nom(j) => {
                        push_to(&mut ix.eq_out, i, (*j, p));
                        push_to(&mut ix.eq_in, *j, (i, p));
                    }
                    NodeExpr::Diamond(a, body) => {
                        ix.by_prefix.entry(i).or_default().push(p);
                        if let Some(j) = body.as_nominal() {
                            if &**a == PLUS {
                                push_to(&mut ix.plus_out, i, (j, p));
                                push_to(&mut ix.plus_in, j, (i, p));
                            } else {
                                push_to(&mut ix.edges_in, j, (i, a.clone(), p));
                                if access {
                                    push_to(&mut ix.acc_out, (i, a.clone()), (j, p));
                                }
                            }
                        }
                    }
                    NodeExpr::Neg(x) => {
                        ix.by_prefix.entry(i).or_default().push(p);
                        if let NodeExpr::Diamond(a, body) = &**x {
                            push_to(&mut ix.boxes, (i, a.clone()), (body.clone(), p));
                        }
                    }
                    _ => ix.by_prefix.entry(i).or_default().push(p),
                }
            }
            _ => {
                if let Some((negated, l, pol, c, r)) = as_cmp(&e) {
                    if let Some((i, rest)) = PathExpr::leading_jump(l) {
                        ix.cmp_left.entry(i).or_default().push(p);
                        match rest {
                            None => {
                                if let (false, Polarity::Eq, PathExpr::Jump(j)) = (negated, pol, &**r) {
                                    push_to(&mut ix.deq, (c.clone(), i), (*j, p));
                                    push_to(&mut ix.deq_in, (c.clone(), *j), (i, p));
                                }
                            }
                            Some(rest) => {
                                let (h, t) = PathExpr::head(rest);
                                if let (true, PathExpr::Axis(a)) = (negated, &**h) {
                                    push_to(
                                        &mut ix.neg_child,
                                        (i, a.clone()),
                                        (t.cloned(), pol, c.clone(), r.clone(), p),
                                    );
                                }
                            }
                        }
                    }
                }
            }
        }
    }

    /// Joins that become available when an already indexed edge gains the
    /// accessibility flag.
    fn upgrade_instances(&mut self, p: Pos) -> Vec<RuleInstance> {
        let e = self.labels[p as usize].expr.clone();
        let mut out = Vec::new();
        if let NodeExpr::At(i, phi) = &*e {
            if let NodeExpr::Diamond(a, body) = &**phi {
                if let Some(j) = body.as_nominal() {
                    if &**a != PLUS {
                        push_to(&mut self.idx.acc_out, (*i, a.clone()), (j, p));
                        self.access_joins(p, *i, a, j, &mut out);
                    }
                }
            }
        }
        out
    }

    fn access_joins(&self, p: Pos, i: Nominal, a: &Sym, j: Nominal, out: &mut Vec<RuleInstance>) {
        let key = (i, a.clone());
        for (psi, q) in get(&self.idx.boxes, &key) {
            out.push(extend(RuleId::NegDia, vec![*q, p], vec![plain(at(j, neg(psi.clone())))]));
        }
        for (t, pol, c, r, q) in get(&self.idx.neg_child, &key) {
            let l = jumped(j, t.as_ref());
            out.push(extend(RuleId::NegChild, vec![*q, p], vec![plain(neg(NodeExpr::data(l, *pol, c.clone(), r.clone())))]));
        }
    }

    fn copy_target(&self, i: Nominal, j: Nominal) -> bool {
        j < i && self.is_root_nominal(j)
    }

    /// Rule instances having the label at `p` among their premises, joined
    /// against the indexed labels.
    pub(crate) fn instances_at(&self, p: Pos) -> Vec<RuleInstance> {
        let l = &self.labels[p as usize];
        let e = l.expr.clone();
        let mut out = Vec::new();
        match &*e {
            NodeExpr::At(i, phi) => self.at_instances(p, *i, phi, l.access, &mut out),
            _ => {
                if let Some((negated, left, pol, c, right)) = as_cmp(&e) {
                    self.cmp_instances(p, negated, left, pol, c, right, &mut out);
                }
            }
        }
        out
    }

    fn at_instances(&self, p: Pos, i: Nominal, phi: &Node, access: bool, out: &mut Vec<RuleInstance>) {
        let ix = &self.idx;
        if phi.as_nominal().is_none() {
            for &(j, q) in get(&ix.eq_out, &i) {
                if self.copy_target(i, j) {
                    out.push(extend(RuleId::Copy, vec![p, q], vec![Conclusion { expr: at(j, phi.clone()), access }]));
                }
            }
        }
        match &**phi {
            NodeExpr::Neg(x) => match &**x {
                NodeExpr::Neg(y) => out.push(extend(RuleId::NegNeg, vec![p], vec![plain(at(i, y.clone()))])),
                NodeExpr::And(a, b) => out.push(RuleInstance {
                    rule: RuleId::NegAnd,
                    premises: vec![p],
                    action: Action::Split(vec![plain(at(i, neg(a.clone())))], vec![plain(at(i, neg(b.clone())))]),
                }),
                NodeExpr::Diamond(a, y) => {
                    for &(j, q) in get(&ix.acc_out, &(i, a.clone())) {
                        out.push(extend(RuleId::NegDia, vec![p, q], vec![plain(at(j, neg(y.clone())))]));
                    }
                }
                NodeExpr::At(j, y) => out.push(extend(RuleId::NegNom, vec![p], vec![plain(at(*j, neg(y.clone())))])),
                NodeExpr::DataCmp(l, pol, c, r) => {
                    let d = NodeExpr::data(jumped(i, Some(l)), *pol, c.clone(), jumped(i, Some(r)));
                    out.push(extend(RuleId::Int2, vec![p], vec![plain(neg(d))]));
                }
                NodeExpr::Prop(_) | NodeExpr::Nom(_) => {}
            },
            NodeExpr::And(a, b) => {
                out.push(extend(RuleId::And, vec![p], vec![plain(at(i, a.clone())), plain(at(i, b.clone()))]))
            }
            NodeExpr::Diamond(a, y) => {
                let is_plus = &**a == PLUS;
                if !access && !is_plus {
                    out.push(RuleInstance {
                        rule: RuleId::Dia,
                        premises: vec![p],
                        action: Action::Generate(Generate::Diamond { at: i, rel: a.clone(), body: y.clone() }),
                    });
                }
                if let Some(j) = y.as_nominal() {
                    self.edge_instances(p, i, a, j, access, out);
                }
            }
            NodeExpr::At(j, y) => out.push(extend(RuleId::Nom, vec![p], vec![plain(at(*j, y.clone()))])),
            NodeExpr::DataCmp(l, pol, c, r) => {
                let d = NodeExpr::data(jumped(i, Some(l)), *pol, c.clone(), jumped(i, Some(r)));
                out.push(extend(RuleId::Int1, vec![p], vec![plain(d)]));
            }
            NodeExpr::Nom(j) => self.eq_instances(p, i, *j, out),
            NodeExpr::Prop(_) => {}
        }
    }

    fn edge_instances(&self, p: Pos, i: Nominal, a: &Sym, j: Nominal, access: bool, out: &mut Vec<RuleInstance>) {
        let ix = &self.idx;
        let calc = &self.ctx.calculus;
        let is_plus = &**a == PLUS;
        if access && !is_plus {
            self.access_joins(p, i, a, j, out);
        }
        if calc.frame_rules() {
            let plus = sym(PLUS);
            if is_plus {
                for &(k, q) in get(&ix.plus_out, &j) {
                    out.push(extend(RuleId::PlusTrans, vec![p, q], vec![plain(edge(i, &plus, k))]));
                }
                for &(h, q) in get(&ix.plus_in, &i) {
                    out.push(extend(RuleId::PlusTrans, vec![q, p], vec![plain(edge(h, &plus, j))]));
                }
            } else {
                out.push(extend(RuleId::PlusIntro, vec![p], vec![plain(edge(i, &plus, j))]));
                for &(k, q) in get(&ix.eq_out, &j) {
                    out.push(extend(RuleId::PlusCopy, vec![p, q], vec![plain(edge(i, &plus, k))]));
                }
            }
        }
        if calc.copy_variants && !is_plus {
            for &(r, q) in get(&ix.eq_out, &j) {
                if self.copy_target(j, r) {
                    out.push(extend(RuleId::Copy0, vec![p, q], vec![Conclusion { expr: edge(i, a, r), access }]));
                }
            }
        }
    }

    fn eq_instances(&self, p: Pos, i: Nominal, j: Nominal, out: &mut Vec<RuleInstance>) {
        let ix = &self.idx;
        let calc = &self.ctx.calculus;
        out.push(extend(RuleId::Sym, vec![p], vec![plain(at(j, nom(i)))]));
        // trans: i:k, i:l, m:l ⊢ m:k, with this label in each of the three roles.
        for &(l, q) in get(&ix.eq_out, &i) {
            for &(m, q2) in get(&ix.eq_in, &l) {
                out.push(extend(RuleId::Trans, vec![p, q, q2], vec![plain(at(m, nom(j)))]));
            }
        }
        for &(k, q) in get(&ix.eq_out, &i) {
            for &(m, q2) in get(&ix.eq_in, &j) {
                out.push(extend(RuleId::Trans, vec![q, p, q2], vec![plain(at(m, nom(k)))]));
            }
        }
        for &(h, q) in get(&ix.eq_in, &j) {
            for &(k, q2) in get(&ix.eq_out, &h) {
                out.push(extend(RuleId::Trans, vec![q2, q, p], vec![plain(at(i, nom(k)))]));
            }
        }
        for c in &self.ctx.cmps {
            out.push(extend(RuleId::DRef, vec![p], vec![plain(bare(i, Polarity::Eq, c, j))]));
        }
        if self.copy_target(i, j) {
            for &q in get(&ix.by_prefix, &i) {
                let lq = &self.labels[q as usize];
                let NodeExpr::At(_, body) = &*lq.expr else { continue };
                out.push(extend(RuleId::Copy, vec![q, p], vec![Conclusion { expr: at(j, body.clone()), access: lq.access }]));
            }
            if calc.copy_variants {
                for (h, a, q) in get(&ix.edges_in, &i) {
                    let access = self.labels[*q as usize].access;
                    out.push(extend(RuleId::Copy0, vec![*q, p], vec![Conclusion { expr: edge(*h, a, j), access }]));
                }
                for &q in get(&ix.cmp_left, &i) {
                    if let Some(r) = self.copy1(q, j) {
                        out.push(extend(r.0, vec![q, p], vec![plain(r.1)]));
                    }
                }
            }
        }
        if calc.frame_rules() {
            let plus = sym(PLUS);
            for (h, _, q) in get(&ix.edges_in, &i) {
                out.push(extend(RuleId::PlusCopy, vec![*q, p], vec![plain(edge(*h, &plus, j))]));
            }
        }
    }

    /// copy₁/copy₂: the comparison at `q` with its leading `@i` replaced by `@j`.
    fn copy1(&self, q: Pos, j: Nominal) -> Option<(RuleId, Node)> {
        let e = &self.labels[q as usize].expr;
        let (negated, l, pol, c, r) = as_cmp(e)?;
        let (_, rest) = PathExpr::leading_jump(l)?;
        let d = NodeExpr::data(jumped(j, rest), pol, c.clone(), r.clone());
        Some(if negated { (RuleId::Copy2, neg(d)) } else { (RuleId::Copy1, d) })
    }

    #[allow(clippy::too_many_arguments)]
    fn cmp_instances(
        &self,
        p: Pos,
        negated: bool,
        left: &Path,
        pol: Polarity,
        c: &Sym,
        right: &Path,
        out: &mut Vec<RuleInstance>,
    ) {
        let Some((i, rest)) = PathExpr::leading_jump(left) else { return };
        let ix = &self.idx;
        let data = |l: Path, r: Path| NodeExpr::data(l, pol, c.clone(), r);
        if self.ctx.calculus.copy_variants {
            for &(j, q) in get(&ix.eq_out, &i) {
                if self.copy_target(i, j) {
                    let rule = if negated { RuleId::Copy2 } else { RuleId::Copy1 };
                    let d = data(jumped(j, rest), right.clone());
                    out.push(extend(rule, vec![p, q], vec![plain(maybe_neg(negated, d))]));
                }
            }
        }
        match rest {
            None => {
                let rule = if negated { RuleId::Com2 } else { RuleId::Com1 };
                out.push(extend(rule, vec![p], vec![plain(maybe_neg(negated, data(right.clone(), left.clone())))]));
                if let PathExpr::Jump(j) = &**right {
                    let j = *j;
                    if negated {
                        out.push(extend(RuleId::NegCmp, vec![p], vec![plain(bare(i, pol.dual(), c, j))]));
                    } else if pol == Polarity::Eq {
                        for &(k, q) in get(&ix.deq, &(c.clone(), j)) {
                            out.push(extend(RuleId::DTrans, vec![p, q], vec![plain(bare(i, pol, c, k))]));
                        }
                        for &(h, q) in get(&ix.deq_in, &(c.clone(), i)) {
                            out.push(extend(RuleId::DTrans, vec![q, p], vec![plain(bare(h, pol, c, j))]));
                        }
                    }
                }
            }
            Some(rest) => {
                let (h, t) = PathExpr::head(rest);
                match &**h {
                    PathExpr::Jump(_) => {
                        let rule = if negated { RuleId::NegJump } else { RuleId::Jump };
                        out.push(extend(rule, vec![p], vec![plain(maybe_neg(negated, data(rest.clone(), right.clone())))]));
                    }
                    PathExpr::Axis(a) => {
                        if negated {
                            for &(j, q) in get(&ix.acc_out, &(i, a.clone())) {
                                let d = data(jumped(j, t), right.clone());
                                out.push(extend(RuleId::NegChild, vec![p, q], vec![plain(neg(d))]));
                            }
                        } else {
                            out.push(RuleInstance {
                                rule: RuleId::Child,
                                premises: vec![p],
                                action: Action::Generate(Generate::Child {
                                    at: i,
                                    rel: a.clone(),
                                    rest: t.cloned(),
                                    pol,
                                    cmp: c.clone(),
                                    right: right.clone(),
                                }),
                            });
                        }
                    }
                    PathExpr::Test(psi) => {
                        let d = data(jumped(i, t), right.clone());
                        if negated {
                            out.push(RuleInstance {
                                rule: RuleId::NegTest,
                                premises: vec![p],
                                action: Action::Split(vec![plain(at(i, neg(psi.clone())))], vec![plain(neg(d))]),
                            });
                        } else {
                            out.push(extend(RuleId::Test, vec![p], vec![plain(at(i, psi.clone())), plain(d)]));
                        }
                    }
                    PathExpr::Union(x, y) => {
                        let dx = data(jumped(i, Some(&PathExpr::prepend(x.clone(), t))), right.clone());
                        let dy = data(jumped(i, Some(&PathExpr::prepend(y.clone(), t))), right.clone());
                        if negated {
                            out.push(extend(RuleId::NegUnion, vec![p], vec![plain(neg(dx)), plain(neg(dy))]));
                        } else {
                            out.push(RuleInstance {
                                rule: RuleId::Union,
                                premises: vec![p],
                                action: Action::Split(vec![plain(dx)], vec![plain(dy)]),
                            });
                        }
                    }
                    PathExpr::Concat(..) => unreachable!("concat heads are normalized away"),
                }
            }
        }
    }
}

/// Tuples of length `len` over `known ∪ {n}` that mention `n`.
fn tuples_with(known: &[Nominal], n: Nominal, len: usize) -> Vec<Vec<Nominal>> {
    let mut pool: Vec<Nominal> = known.to_vec();
    if !pool.contains(&n) {
        pool.push(n);
    }
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(len);
    fn rec(pool: &[Nominal], n: Nominal, len: usize, cur: &mut Vec<Nominal>, out: &mut Vec<Vec<Nominal>>) {
        if cur.len() == len {
            if cur.contains(&n) {
                out.push(cur.clone());
            }
            return;
        }
        for &m in pool {
            cur.push(m);
            rec(pool, n, len, cur, out);
            cur.pop();
        }
    }
    rec(&pool, n, len, &mut cur, &mut out);
    out
}
