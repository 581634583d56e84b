use std::fmt::{self, Display, Formatter};

use super::ast::{NodeExpr, PathExpr};

// Levels: 0 = conjunction operand on the left, 1 = unary operand.
fn node(e: &NodeExpr, level: u8, f: &mut Formatter<'_>) -> fmt::Result {
    match e {
        NodeExpr::Prop(p) => write!(f, "{p}"),
        NodeExpr::Nom(i) => write!(f, "{i}"),
        NodeExpr::Neg(x) => {
            f.write_str("!")?;
            node(x, 1, f)
        }
        NodeExpr::And(l, r) => {
            if level > 0 {
                f.write_str("(")?;
            }
            node(l, 0, f)?;
            f.write_str(" & ")?;
            node(r, 1, f)?;
            if level > 0 {
                f.write_str(")")?;
            }
            Ok(())
        }
        NodeExpr::At(i, x) => {
            write!(f, "{i}:")?;
            node(x, 1, f)
        }
        NodeExpr::Diamond(a, x) => {
            write!(f, "<{a}>")?;
            node(x, 1, f)
        }
        NodeExpr::DataCmp(l, pol, c, r) => {
            f.write_str("<")?;
            path(l, 0, f)?;
            write!(f, " {}{c} ", pol.symbol())?;
            path(r, 0, f)?;
            f.write_str(">")
        }
    }
}

// Levels: 0 = union operand on the left, 1 = right union operand, 2 = concat step.
fn path(p: &PathExpr, level: u8, f: &mut Formatter<'_>) -> fmt::Result {
    match p {
        PathExpr::Axis(a) => write!(f, "{a}"),
        PathExpr::Jump(i) => write!(f, "@{i}"),
        PathExpr::Test(e) => {
            f.write_str("(")?;
            node(e, 0, f)?;
            f.write_str(")?")
        }
        PathExpr::Concat(h, t) => {
            if level > 1 {
                f.write_str("(")?;
            }
            path(h, 2, f)?;
            f.write_str(" ")?;
            path(t, 1, f)?;
            if level > 1 {
                f.write_str(")")?;
            }
            Ok(())
        }
        PathExpr::Union(l, r) => {
            if level > 0 {
                f.write_str("(")?;
            }
            path(l, 0, f)?;
            f.write_str(" U ")?;
            path(r, 1, f)?;
            if level > 0 {
                f.write_str(")")?;
            }
            Ok(())
        }
    }
}

impl Display for NodeExpr {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        node(self, 0, f)
    }
}

impl Display for PathExpr {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        path(self, 0, f)
    }
}

pub fn print_node(e: &NodeExpr) -> String {
    e.to_string()
}

pub fn print_path(p: &PathExpr) -> String {
    p.to_string()
}
