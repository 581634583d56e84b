use std::collections::BTreeMap;

use thiserror::Error;

use crate::syntax::{
    parse_node_with, Node, NodeExpr, Nominal, ParseError, ParseOptions, PathExpr, Signature,
    PLACEHOLDER_BASE,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AxiomError {
    #[error("line {line}: {source}")]
    Parse { line: usize, source: ParseError },
    #[error("line {line}: axiom is not pure, it mentions proposition '{prop}'")]
    NotPure { line: usize, prop: String },
    #[error("line {line}: malformed node-creating rule: {msg}")]
    MalformedRule { line: usize, msg: String },
}

/// A pure axiom over placeholder nominals.
///
/// `template` is always label-shaped once instantiated: either a satisfaction
/// statement `x:ψ` or a global formula (all parts prefixed) that the engine
/// asserts at the root nominal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PureAxiom {
    pub name: String,
    pub template: Node,
    pub placeholders: Vec<Nominal>,
    pub global: bool,
}

/// `forall x₁…xₗ exists y₁…yₘ . matrix`
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NodeCreatingRule {
    pub name: String,
    pub universals: Vec<Nominal>,
    pub existentials: Vec<Nominal>,
    pub matrix: Node,
}

/// True when the truth value of `e` does not depend on the evaluation node.
pub fn is_global(e: &NodeExpr) -> bool {
    match e {
        NodeExpr::Neg(x) => is_global(x),
        NodeExpr::And(l, r) => is_global(l) && is_global(r),
        NodeExpr::At(..) => true,
        NodeExpr::DataCmp(l, _, _, r) => {
            PathExpr::leading_jump(l).is_some() && PathExpr::leading_jump(r).is_some()
        }
        _ => false,
    }
}

fn substitute(e: &Node, map: &BTreeMap<Nominal, Nominal>) -> Node {
    NodeExpr::rename(e, &|i| map.get(&i).copied())
}

impl PureAxiom {
    /// Builds a pure axiom from a parsed template. Non-prefixed templates get an
    /// extra outermost placeholder `x` and become `x:template`, which defines the
    /// same frame class.
    pub fn new(name: &str, template: Node, mut placeholders: Vec<Nominal>) -> Result<PureAxiom, String> {
        if let Some(p) = template.signature().props.into_iter().next() {
            return Err(p.to_string());
        }
        let global = is_global(&template);
        let template = if global || matches!(&*template, NodeExpr::At(..)) {
            template
        } else {
            let x = Nominal(PLACEHOLDER_BASE + placeholders.len() as u32);
            placeholders.push(x);
            NodeExpr::at(x, template)
        };
        let global = global || !matches!(&*template, NodeExpr::At(..));
        Ok(PureAxiom { name: name.to_string(), template, placeholders, global })
    }

    pub fn parse(text: &str) -> Result<PureAxiom, AxiomError> {
        parse_axiom_line(text, 1)
    }

    /// The instance for `tuple`, ready to be added at root nominal `root`.
    pub fn instantiate(&self, tuple: &[Nominal], root: Nominal) -> Node {
        let map: BTreeMap<Nominal, Nominal> = self.placeholders.iter().copied().zip(tuple.iter().copied()).collect();
        let e = substitute(&self.template, &map);
        if self.global && !matches!(&*e, NodeExpr::At(..)) {
            NodeExpr::at(root, e)
        } else {
            e
        }
    }

    pub fn signature(&self) -> Signature {
        let mut s = self.template.signature();
        s.nominals.retain(|n| n.0 < PLACEHOLDER_BASE);
        s
    }
}

impl NodeCreatingRule {
    pub fn instantiate(&self, tuple: &[Nominal], fresh: &[Nominal], root: Nominal) -> Node {
        let map: BTreeMap<Nominal, Nominal> = self
            .universals
            .iter()
            .copied()
            .zip(tuple.iter().copied())
            .chain(self.existentials.iter().copied().zip(fresh.iter().copied()))
            .collect();
        let e = substitute(&self.matrix, &map);
        if matches!(&*e, NodeExpr::At(..)) {
            e
        } else {
            NodeExpr::at(root, e)
        }
    }

    pub fn parse(text: &str) -> Result<NodeCreatingRule, AxiomError> {
        parse_rule_line(text, 1)
    }

    pub fn signature(&self) -> Signature {
        let mut s = self.matrix.signature();
        s.nominals.retain(|n| n.0 < PLACEHOLDER_BASE);
        s
    }
}

fn opts() -> ParseOptions {
    ParseOptions { signature: None, placeholders: true }
}

fn parse_axiom_line(text: &str, line: usize) -> Result<PureAxiom, AxiomError> {
    let parsed = parse_node_with(text, &opts()).map_err(|source| AxiomError::Parse { line, source })?;
    let holes = (0..parsed.placeholders.len()).map(|k| Nominal(PLACEHOLDER_BASE + k as u32)).collect();
    PureAxiom::new(text.trim(), parsed.expr, holes).map_err(|prop| AxiomError::NotPure { line, prop })
}

fn parse_vars(s: &str, line: usize) -> Result<Vec<String>, AxiomError> {
    s.split(',')
        .map(|v| {
            let v = v.trim();
            match v.strip_prefix('$') {
                Some(name) if !name.is_empty() && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') => {
                    Ok(name.to_string())
                }
                _ => Err(AxiomError::MalformedRule { line, msg: format!("bad variable '{v}'") }),
            }
        })
        .collect()
}

fn parse_rule_line(text: &str, line: usize) -> Result<NodeCreatingRule, AxiomError> {
    let malformed = |msg: &str| AxiomError::MalformedRule { line, msg: msg.to_string() };
    let t = text.trim();
    let rest = t.strip_prefix("forall").ok_or_else(|| malformed("expected 'forall'"))?;
    let (univ, rest) = rest.split_once("exists").ok_or_else(|| malformed("expected 'exists'"))?;
    let (exist, matrix) = rest.split_once('.').ok_or_else(|| malformed("expected '.' before the matrix"))?;
    let univ = if univ.trim().is_empty() { Vec::new() } else { parse_vars(univ, line)? };
    let exist = parse_vars(exist, line)?;
    let parsed = parse_node_with(matrix, &opts()).map_err(|source| AxiomError::Parse { line, source })?;
    let lookup = |name: &String| {
        parsed.placeholder_nominal(name).unwrap_or(Nominal(PLACEHOLDER_BASE + parsed.placeholders.len() as u32))
    };
    for name in &parsed.placeholders {
        if !univ.contains(name) && !exist.contains(name) {
            return Err(malformed(&format!("placeholder ${name} is not quantified")));
        }
    }
    Ok(NodeCreatingRule {
        name: t.to_string(),
        universals: univ.iter().map(lookup).collect(),
        existentials: exist.iter().map(lookup).collect(),
        matrix: parsed.expr,
    })
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(n, raw)| {
        let line = raw.split('#').next().unwrap_or("").trim();
        (!line.is_empty()).then_some((n + 1, line))
    })
}

/// One pure axiom per line; `#` starts a comment.
pub fn parse_axiom_file(text: &str) -> Result<Vec<PureAxiom>, AxiomError> {
    content_lines(text).map(|(n, l)| parse_axiom_line(l, n)).collect()
}

/// One node-creating rule per line; `#` starts a comment.
pub fn parse_rule_file(text: &str) -> Result<Vec<NodeCreatingRule>, AxiomError> {
    content_lines(text).map(|(n, l)| parse_rule_line(l, n)).collect()
}

fn axiom(text: &str) -> PureAxiom {
    PureAxiom::parse(text).expect("built-in axiom parses")
}

/// Inverse, Sibling and SibIrreflexivity for each relation `a`, with the
/// converse written `a_inv` and the sibling relation `sib`.
pub fn builtin_axiom_sets(rels: &[&str]) -> BTreeMap<&'static str, Vec<PureAxiom>> {
    let mut inverse = Vec::new();
    let mut sibling_extra = Vec::new();
    for a in rels {
        inverse.push(axiom(&format!("$i:($j -> [{a}]<{a}_inv>$j)")));
        inverse.push(axiom(&format!("$i:($j -> [{a}_inv]<{a}>$j)")));
        sibling_extra.push(axiom(&format!("$i:(<sib>$j -> <{a}_inv><{a}>$j)")));
        sibling_extra.push(axiom(&format!("$i:(<{a}_inv><{a}>$j -> ($j | <sib>$j))")));
    }
    sibling_extra.push(axiom("$i:!<sib>$i"));
    let mut sibling = inverse.clone();
    sibling.extend(sibling_extra);
    let mut irreflexive = sibling.clone();
    irreflexive.push(axiom("$i:(<sib>$j -> <@$i !=_sib @$j>)"));
    let mut out = BTreeMap::new();
    out.insert("Inverse", inverse);
    out.insert("Sibling", sibling);
    out.insert("SibIrreflexivity", irreflexive);
    out
}

/// Named example axioms for frame conditions.
pub fn example_axioms() -> BTreeMap<&'static str, PureAxiom> {
    let mut out = BTreeMap::new();
    out.insert("Irreflexivity", axiom("$i:!<a>$i"));
    out.insert("Transitivity", axiom("$i:(<a><a>$j -> <a>$j)"));
    out.insert("Trichotomy", axiom("$i:<a>$j | $i:$j | $j:<a>$i"));
    out.insert("DataUniqueness", axiom("<@$i =c @$j> -> $i:$j"));
    out
}
