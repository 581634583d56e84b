use std::collections::BTreeSet;
use std::sync::Arc;

/// Interned-by-refcount identifier for propositions, relations and comparisons.
pub type Sym = Arc<str>;
pub type Node = Arc<NodeExpr>;
pub type Path = Arc<PathExpr>;

/// Nominals are natural numbers; fresh ones always exceed every nominal seen so far.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Nominal(pub u32);

impl std::fmt::Display for Nominal {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Polarity {
    Eq,
    Neq,
}

impl Polarity {
    pub fn dual(self) -> Polarity {
        match self {
            Polarity::Eq => Polarity::Neq,
            Polarity::Neq => Polarity::Eq,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Polarity::Eq => "=",
            Polarity::Neq => "!=",
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum NodeExpr {
    Prop(Sym),
    Nom(Nominal),
    Neg(Node),
    And(Node, Node),
    At(Nominal, Node),
    Diamond(Sym, Node),
    DataCmp(Path, Polarity, Sym, Path),
}

/// `Concat` is kept as a right-nested spine: the left child is never a `Concat`.
/// Build it through [`PathExpr::concat`] so that invariant holds.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum PathExpr {
    Axis(Sym),
    Jump(Nominal),
    Test(Node),
    Concat(Path, Path),
    Union(Path, Path),
}

pub fn sym(s: &str) -> Sym {
    Arc::from(s)
}

impl NodeExpr {
    pub fn prop(p: &str) -> Node {
        Arc::new(NodeExpr::Prop(sym(p)))
    }

    pub fn nom(i: u32) -> Node {
        Arc::new(NodeExpr::Nom(Nominal(i)))
    }

    pub fn neg(e: Node) -> Node {
        Arc::new(NodeExpr::Neg(e))
    }

    pub fn and(l: Node, r: Node) -> Node {
        Arc::new(NodeExpr::And(l, r))
    }

    pub fn or(l: Node, r: Node) -> Node {
        Self::neg(Self::and(Self::neg(l), Self::neg(r)))
    }

    pub fn implies(l: Node, r: Node) -> Node {
        Self::neg(Self::and(l, Self::neg(r)))
    }

    pub fn at(i: Nominal, e: Node) -> Node {
        Arc::new(NodeExpr::At(i, e))
    }

    pub fn diamond(rel: &str, e: Node) -> Node {
        Arc::new(NodeExpr::Diamond(sym(rel), e))
    }

    pub fn cmp(l: Path, pol: Polarity, c: &str, r: Path) -> Node {
        Arc::new(NodeExpr::DataCmp(l, pol, sym(c), r))
    }

    pub fn data(l: Path, pol: Polarity, c: Sym, r: Path) -> Node {
        Arc::new(NodeExpr::DataCmp(l, pol, c, r))
    }

    /// Splits off one leading negation.
    pub fn strip_neg(&self) -> (bool, &NodeExpr) {
        match self {
            NodeExpr::Neg(e) => (true, e),
            e => (false, e),
        }
    }

    pub fn as_nominal(&self) -> Option<Nominal> {
        match self {
            NodeExpr::Nom(i) => Some(*i),
            _ => None,
        }
    }

    /// Largest nominal occurring anywhere in the expression.
    pub fn max_nominal(&self) -> Option<Nominal> {
        let mut noms = BTreeSet::new();
        collect_node(self, &mut noms, &mut Signature::default());
        noms.into_iter().next_back()
    }

    pub fn nominals(&self) -> BTreeSet<Nominal> {
        let mut noms = BTreeSet::new();
        collect_node(self, &mut noms, &mut Signature::default());
        noms
    }

    pub fn signature(&self) -> Signature {
        let mut sig = Signature::default();
        let mut noms = BTreeSet::new();
        collect_node(self, &mut noms, &mut sig);
        sig.nominals = noms;
        sig
    }

    /// Nesting depth of diamonds and axis steps.
    pub fn modal_depth(&self) -> usize {
        match self {
            NodeExpr::Prop(_) | NodeExpr::Nom(_) => 0,
            NodeExpr::Neg(e) | NodeExpr::At(_, e) => e.modal_depth(),
            NodeExpr::And(l, r) => l.modal_depth().max(r.modal_depth()),
            NodeExpr::Diamond(_, e) => 1 + e.modal_depth(),
            NodeExpr::DataCmp(l, _, _, r) => l.modal_depth().max(r.modal_depth()),
        }
    }

    /// Replaces nominals according to `f`, leaving unmapped ones alone.
    pub fn rename(e: &Node, f: &dyn Fn(Nominal) -> Option<Nominal>) -> Node {
        match &**e {
            NodeExpr::Prop(_) => e.clone(),
            NodeExpr::Nom(i) => match f(*i) {
                Some(j) => Arc::new(NodeExpr::Nom(j)),
                None => e.clone(),
            },
            NodeExpr::Neg(x) => Self::neg(Self::rename(x, f)),
            NodeExpr::And(l, r) => Self::and(Self::rename(l, f), Self::rename(r, f)),
            NodeExpr::At(i, x) => Self::at(f(*i).unwrap_or(*i), Self::rename(x, f)),
            NodeExpr::Diamond(a, x) => Arc::new(NodeExpr::Diamond(a.clone(), Self::rename(x, f))),
            NodeExpr::DataCmp(l, p, c, r) => Arc::new(NodeExpr::DataCmp(
                PathExpr::rename(l, f),
                *p,
                c.clone(),
                PathExpr::rename(r, f),
            )),
        }
    }
}

impl PathExpr {
    pub fn axis(a: &str) -> Path {
        Arc::new(PathExpr::Axis(sym(a)))
    }

    pub fn jump(i: u32) -> Path {
        Arc::new(PathExpr::Jump(Nominal(i)))
    }

    pub fn test(e: Node) -> Path {
        Arc::new(PathExpr::Test(e))
    }

    pub fn union(l: Path, r: Path) -> Path {
        Arc::new(PathExpr::Union(l, r))
    }

    /// Concatenation, renormalized onto the right spine.
    pub fn concat(l: Path, r: Path) -> Path {
        match &*l {
            PathExpr::Concat(x, y) => Self::concat(x.clone(), Self::concat(y.clone(), r)),
            _ => Arc::new(PathExpr::Concat(l, r)),
        }
    }

    /// `step` followed by an optional remainder.
    pub fn prepend(step: Path, rest: Option<&Path>) -> Path {
        match rest {
            Some(r) => Self::concat(step, r.clone()),
            None => step,
        }
    }

    /// Leading step (atomic or a union) and the remainder, if any.
    pub fn head(p: &Path) -> (&Path, Option<&Path>) {
        match &**p {
            PathExpr::Concat(h, t) => (h, Some(t)),
            _ => (p, None),
        }
    }

    pub fn is_atomic(&self) -> bool {
        matches!(self, PathExpr::Axis(_) | PathExpr::Jump(_) | PathExpr::Test(_))
    }

    /// Steps of the spine, in order.
    pub fn steps(p: &Path) -> Vec<&Path> {
        let mut out = Vec::new();
        let mut cur = p;
        loop {
            match &**cur {
                PathExpr::Concat(h, t) => {
                    out.push(h);
                    cur = t;
                }
                _ => {
                    out.push(cur);
                    return out;
                }
            }
        }
    }

    pub fn leading_jump(p: &Path) -> Option<(Nominal, Option<&Path>)> {
        let (h, rest) = Self::head(p);
        match &**h {
            PathExpr::Jump(i) => Some((*i, rest)),
            _ => None,
        }
    }

    pub fn modal_depth(&self) -> usize {
        match self {
            PathExpr::Axis(_) => 1,
            PathExpr::Jump(_) => 0,
            PathExpr::Test(e) => e.modal_depth(),
            PathExpr::Concat(l, r) => l.modal_depth() + r.modal_depth(),
            PathExpr::Union(l, r) => l.modal_depth().max(r.modal_depth()),
        }
    }

    pub fn rename(p: &Path, f: &dyn Fn(Nominal) -> Option<Nominal>) -> Path {
        match &**p {
            PathExpr::Axis(_) => p.clone(),
            PathExpr::Jump(i) => match f(*i) {
                Some(j) => Arc::new(PathExpr::Jump(j)),
                None => p.clone(),
            },
            PathExpr::Test(e) => Self::test(NodeExpr::rename(e, f)),
            PathExpr::Concat(l, r) => Self::concat(Self::rename(l, f), Self::rename(r, f)),
            PathExpr::Union(l, r) => Self::union(Self::rename(l, f), Self::rename(r, f)),
        }
    }
}

/// Symbols occurring in an expression (or declared for a problem instance).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Signature {
    pub props: BTreeSet<Sym>,
    pub rels: BTreeSet<Sym>,
    pub cmps: BTreeSet<Sym>,
    pub nominals: BTreeSet<Nominal>,
}

impl Signature {
    pub fn merge(&mut self, other: &Signature) {
        self.props.extend(other.props.iter().cloned());
        self.rels.extend(other.rels.iter().cloned());
        self.cmps.extend(other.cmps.iter().cloned());
        self.nominals.extend(other.nominals.iter().copied());
    }
}

fn collect_node(e: &NodeExpr, noms: &mut BTreeSet<Nominal>, sig: &mut Signature) {
    match e {
        NodeExpr::Prop(p) => {
            sig.props.insert(p.clone());
        }
        NodeExpr::Nom(i) => {
            noms.insert(*i);
        }
        NodeExpr::Neg(x) => collect_node(x, noms, sig),
        NodeExpr::And(l, r) => {
            collect_node(l, noms, sig);
            collect_node(r, noms, sig);
        }
        NodeExpr::At(i, x) => {
            noms.insert(*i);
            collect_node(x, noms, sig);
        }
        NodeExpr::Diamond(a, x) => {
            sig.rels.insert(a.clone());
            collect_node(x, noms, sig);
        }
        NodeExpr::DataCmp(l, _, c, r) => {
            sig.cmps.insert(c.clone());
            collect_path(l, noms, sig);
            collect_path(r, noms, sig);
        }
    }
}

fn collect_path(p: &PathExpr, noms: &mut BTreeSet<Nominal>, sig: &mut Signature) {
    match p {
        PathExpr::Axis(a) => {
            sig.rels.insert(a.clone());
        }
        PathExpr::Jump(i) => {
            noms.insert(*i);
        }
        PathExpr::Test(e) => collect_node(e, noms, sig),
        PathExpr::Concat(l, r) | PathExpr::Union(l, r) => {
            collect_path(l, noms, sig);
            collect_path(r, noms, sig);
        }
    }
}
