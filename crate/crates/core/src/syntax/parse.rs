use std::collections::BTreeMap;
use std::sync::Arc;

use thiserror::Error;

use super::ast::{sym, Node, NodeExpr, Nominal, Path, PathExpr, Polarity, Signature, Sym};

/// Proposition used to desugar `true`.
pub const TOP_PROP: &str = "_t";
/// Comparison used to desugar general path diamonds when none is declared.
pub const DESIGNATED_CMP: &str = "_d";
/// Placeholder nominals (`$x`) are mapped above this value.
pub const PLACEHOLDER_BASE: u32 = 1 << 30;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("{line}:{col}: {msg}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Nat(u32),
    Placeholder(String),
    Bang,
    Amp,
    Bar,
    Arrow,
    Iff,
    Colon,
    Lt,
    Gt,
    LBrack,
    RBrack,
    LParen,
    RParen,
    Quest,
    AtSign,
    EqOp,
    NeqOp,
    End,
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(text: &str) -> Result<Vec<Spanned>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        let (l0, c0) = (line, col);
        let err = |msg: String| ParseError { line: l0, col: c0, msg };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        let peek = chars.get(i + 1).copied();
        let (tok, len) = match c {
            '!' if peek == Some('=') => (Tok::NeqOp, 2),
            '!' => (Tok::Bang, 1),
            '&' => (Tok::Amp, 1),
            '|' => (Tok::Bar, 1),
            '-' if peek == Some('>') => (Tok::Arrow, 2),
            '<' if peek == Some('-') && chars.get(i + 2) == Some(&'>') => (Tok::Iff, 3),
            ':' => (Tok::Colon, 1),
            '<' => (Tok::Lt, 1),
            '>' => (Tok::Gt, 1),
            '[' => (Tok::LBrack, 1),
            ']' => (Tok::RBrack, 1),
            '(' => (Tok::LParen, 1),
            ')' => (Tok::RParen, 1),
            '?' => (Tok::Quest, 1),
            '@' => (Tok::AtSign, 1),
            '=' => (Tok::EqOp, 1),
            '$' => {
                let n = ident_len(&chars[i + 1..]);
                if n == 0 {
                    return Err(err("expected placeholder name after '$'".into()));
                }
                (Tok::Placeholder(chars[i + 1..i + 1 + n].iter().collect()), n + 1)
            }
            d if d.is_ascii_digit() => {
                let n = chars[i..].iter().take_while(|c| c.is_ascii_digit()).count();
                let s: String = chars[i..i + n].iter().collect();
                let v = s.parse::<u32>().map_err(|_| err(format!("nominal {s} out of range")))?;
                if v >= PLACEHOLDER_BASE {
                    return Err(err(format!("nominal {s} out of range")));
                }
                (Tok::Nat(v), n)
            }
            a if a.is_ascii_alphabetic() || a == '_' => {
                let n = ident_len(&chars[i..]);
                (Tok::Ident(chars[i..i + n].iter().collect()), n)
            }
            other => return Err(err(format!("unexpected character '{other}'"))),
        };
        out.push(Spanned { tok, line: l0, col: c0 });
        i += len;
        col += len;
    }
    out.push(Spanned { tok: Tok::End, line, col });
    Ok(out)
}

fn ident_len(chars: &[char]) -> usize {
    match chars.first() {
        Some(c) if c.is_ascii_alphabetic() || *c == '_' => {
            chars.iter().take_while(|c| c.is_ascii_alphanumeric() || **c == '_').count()
        }
        _ => 0,
    }
}

/// Parser configuration.
#[derive(Debug, Clone, Default)]
pub struct ParseOptions {
    /// When set, relations and comparisons must be declared here.
    pub signature: Option<Signature>,
    /// Accept `$x` placeholder nominals.
    pub placeholders: bool,
}

/// A parsed formula together with the placeholder names it used, in order of first use.
#[derive(Debug, Clone)]
pub struct Parsed {
    pub expr: Node,
    pub placeholders: Vec<String>,
}

impl Parsed {
    pub fn placeholder_nominal(&self, name: &str) -> Option<Nominal> {
        self.placeholders
            .iter()
            .position(|p| p == name)
            .map(|k| Nominal(PLACEHOLDER_BASE + k as u32))
    }
}

pub fn parse_node(text: &str) -> Result<Node, ParseError> {
    parse_node_with(text, &ParseOptions::default()).map(|p| p.expr)
}

pub fn parse_node_with(text: &str, opts: &ParseOptions) -> Result<Parsed, ParseError> {
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0, opts, holes: BTreeMap::new(), order: Vec::new() };
    let expr = p.imp()?;
    p.expect(&Tok::End, "end of input")?;
    Ok(Parsed { expr, placeholders: p.order })
}

pub fn parse_path(text: &str) -> Result<Path, ParseError> {
    let toks = lex(text)?;
    let opts = ParseOptions::default();
    let mut p = Parser { toks, pos: 0, opts: &opts, holes: BTreeMap::new(), order: Vec::new() };
    let path = p.path()?;
    p.expect(&Tok::End, "end of input")?;
    Ok(path)
}

/// Parses a file body: one formula per line, `#` starts a comment.
pub fn parse_lines(text: &str) -> Result<Vec<Node>, ParseError> {
    let mut out = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        out.push(parse_node(line).map_err(|e| ParseError { line: n + 1, ..e })?);
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<Spanned>,
    pos: usize,
    opts: &'a ParseOptions,
    holes: BTreeMap<String, Nominal>,
    order: Vec<String>,
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if t != Tok::End {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == t {
            self.bump();
            true
        } else {
            false
        }
    }

    fn error(&self, msg: impl Into<String>) -> ParseError {
        let s = &self.toks[self.pos];
        ParseError { line: s.line, col: s.col, msg: msg.into() }
    }

    fn expect(&mut self, t: &Tok, what: &str) -> Result<(), ParseError> {
        if self.eat(t) {
            Ok(())
        } else {
            Err(self.error(format!("expected {what}, found {}", describe(self.peek()))))
        }
    }

    fn imp(&mut self) -> Result<Node, ParseError> {
        let l = self.or()?;
        if self.eat(&Tok::Arrow) {
            let r = self.imp()?;
            return Ok(NodeExpr::implies(l, r));
        }
        if self.eat(&Tok::Iff) {
            let r = self.imp()?;
            return Ok(NodeExpr::and(NodeExpr::implies(l.clone(), r.clone()), NodeExpr::implies(r, l)));
        }
        Ok(l)
    }

    fn or(&mut self) -> Result<Node, ParseError> {
        let mut l = self.and()?;
        while self.eat(&Tok::Bar) {
            let r = self.and()?;
            l = NodeExpr::or(l, r);
        }
        Ok(l)
    }

    fn and(&mut self) -> Result<Node, ParseError> {
        let mut l = self.unary()?;
        while self.eat(&Tok::Amp) {
            let r = self.unary()?;
            l = NodeExpr::and(l, r);
        }
        Ok(l)
    }

    fn nominal(&mut self) -> Result<Option<Nominal>, ParseError> {
        match self.peek().clone() {
            Tok::Nat(n) => {
                self.bump();
                Ok(Some(Nominal(n)))
            }
            Tok::Placeholder(name) => {
                if !self.opts.placeholders {
                    return Err(self.error(format!("placeholder ${name} not allowed here")));
                }
                self.bump();
                let next = Nominal(PLACEHOLDER_BASE + self.holes.len() as u32);
                let nom = *self.holes.entry(name.clone()).or_insert_with(|| next);
                if nom == next {
                    self.order.push(name);
                }
                Ok(Some(nom))
            }
            _ => Ok(None),
        }
    }

    fn unary(&mut self) -> Result<Node, ParseError> {
        if let Some(i) = self.nominal()? {
            if self.eat(&Tok::Colon) {
                let e = self.unary()?;
                return Ok(NodeExpr::at(i, e));
            }
            return Ok(Arc::new(NodeExpr::Nom(i)));
        }
        match self.peek().clone() {
            Tok::Bang => {
                self.bump();
                Ok(NodeExpr::neg(self.unary()?))
            }
            Tok::LParen => {
                self.bump();
                let e = self.imp()?;
                self.expect(&Tok::RParen, "')'")?;
                Ok(e)
            }
            Tok::Lt => {
                self.bump();
                let alpha = self.path()?;
                if self.eat(&Tok::Gt) {
                    let body = self.unary()?;
                    return Ok(self.path_diamond(alpha, body));
                }
                let (pol, c, beta) = self.comparison_tail()?;
                self.expect(&Tok::Gt, "'>'")?;
                Ok(NodeExpr::data(alpha, pol, c, beta))
            }
            Tok::LBrack => {
                self.bump();
                let alpha = self.path()?;
                if self.eat(&Tok::RBrack) {
                    let body = self.unary()?;
                    let inner = self.path_diamond(alpha, NodeExpr::neg(body));
                    return Ok(NodeExpr::neg(inner));
                }
                let (pol, c, beta) = self.comparison_tail()?;
                self.expect(&Tok::RBrack, "']'")?;
                Ok(NodeExpr::neg(NodeExpr::data(alpha, pol.dual(), c, beta)))
            }
            Tok::Ident(name) => {
                self.bump();
                match name.as_str() {
                    "true" => Ok(top()),
                    "false" => Ok(NodeExpr::neg(top())),
                    "U" => Err(self.error("'U' is reserved for path union")),
                    _ => Ok(Arc::new(NodeExpr::Prop(sym(&name)))),
                }
            }
            other => Err(self.error(format!("expected a node expression, found {}", describe(&other)))),
        }
    }

    fn comparison_tail(&mut self) -> Result<(Polarity, Sym, Path), ParseError> {
        let pol = match self.peek() {
            Tok::EqOp => Polarity::Eq,
            Tok::NeqOp => Polarity::Neq,
            other => {
                return Err(self.error(format!(
                    "expected '>' or a comparison operator, found {}",
                    describe(other)
                )))
            }
        };
        self.bump();
        let c = match self.peek() {
            Tok::Ident(c) => c.clone(),
            other => return Err(self.error(format!("expected comparison symbol, found {}", describe(other)))),
        };
        if let Some(sig) = &self.opts.signature {
            if !sig.cmps.contains(c.as_str()) {
                return Err(self.error(format!("unknown comparison symbol '{c}'")));
            }
        }
        self.bump();
        let beta = self.path()?;
        Ok((pol, sym(&c), beta))
    }

    fn designated_cmp(&self) -> Sym {
        self.opts
            .signature
            .as_ref()
            .and_then(|s| s.cmps.iter().next().cloned())
            .unwrap_or_else(|| sym(DESIGNATED_CMP))
    }

    fn path_diamond(&self, alpha: Path, body: Node) -> Node {
        match &*alpha {
            PathExpr::Axis(a) => Arc::new(NodeExpr::Diamond(a.clone(), body)),
            _ => {
                let p = PathExpr::concat(alpha, PathExpr::test(body));
                NodeExpr::data(p.clone(), Polarity::Eq, self.designated_cmp(), p)
            }
        }
    }

    fn path(&mut self) -> Result<Path, ParseError> {
        let mut l = self.seq()?;
        while matches!(self.peek(), Tok::Ident(u) if u == "U") {
            self.bump();
            let r = self.seq()?;
            l = PathExpr::union(l, r);
        }
        Ok(l)
    }

    fn starts_step(&self) -> bool {
        match self.peek() {
            Tok::Ident(u) => u != "U",
            Tok::AtSign | Tok::LParen => true,
            _ => false,
        }
    }

    fn seq(&mut self) -> Result<Path, ParseError> {
        let mut steps = vec![self.step()?];
        while self.starts_step() {
            steps.push(self.step()?);
        }
        let mut acc = steps.pop().expect("at least one step");
        while let Some(s) = steps.pop() {
            acc = PathExpr::concat(s, acc);
        }
        Ok(acc)
    }

    fn step(&mut self) -> Result<Path, ParseError> {
        match self.peek().clone() {
            Tok::Ident(a) if a != "U" => {
                if let Some(sig) = &self.opts.signature {
                    if !sig.rels.contains(a.as_str()) {
                        return Err(self.error(format!("unknown relation symbol '{a}'")));
                    }
                }
                self.bump();
                Ok(Arc::new(PathExpr::Axis(sym(&a))))
            }
            Tok::AtSign => {
                self.bump();
                match self.nominal()? {
                    Some(i) => Ok(Arc::new(PathExpr::Jump(i))),
                    None => Err(self.error("expected a nominal after '@'")),
                }
            }
            Tok::LParen => {
                // `(node)?` is a test, `(path)` a group; try the test reading first.
                let save = (self.pos, self.holes.clone(), self.order.clone());
                self.bump();
                if let Ok(e) = self.imp() {
                    if self.eat(&Tok::RParen) && self.eat(&Tok::Quest) {
                        return Ok(PathExpr::test(e));
                    }
                }
                (self.pos, self.holes, self.order) = save;
                self.bump();
                let p = self.path()?;
                self.expect(&Tok::RParen, "')'")?;
                Ok(p)
            }
            other => Err(self.error(format!("expected a path, found {}", describe(&other)))),
        }
    }
}

fn top() -> Node {
    let p = NodeExpr::prop(TOP_PROP);
    NodeExpr::or(p.clone(), NodeExpr::neg(p))
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(s) => format!("'{s}'"),
        Tok::Nat(n) => format!("'{n}'"),
        Tok::Placeholder(s) => format!("'${s}'"),
        Tok::Bang => "'!'".into(),
        Tok::Amp => "'&'".into(),
        Tok::Bar => "'|'".into(),
        Tok::Arrow => "'->'".into(),
        Tok::Iff => "'<->'".into(),
        Tok::Colon => "':'".into(),
        Tok::Lt => "'<'".into(),
        Tok::Gt => "'>'".into(),
        Tok::LBrack => "'['".into(),
        Tok::RBrack => "']'".into(),
        Tok::LParen => "'('".into(),
        Tok::RParen => "')'".into(),
        Tok::Quest => "'?'".into(),
        Tok::AtSign => "'@'".into(),
        Tok::EqOp => "'='".into(),
        Tok::NeqOp => "'!='".into(),
        Tok::End => "end of input".into(),
    }
}
