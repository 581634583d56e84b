//! Abstract syntax, concrete grammar, printing and structural measures.

mod ast;
mod measure;
mod parse;
mod print;

pub use ast::{sym, Node, NodeExpr, Nominal, Path, PathExpr, Polarity, Signature, Sym};
pub use measure::{is_quasi_subcomponent, size_node, size_path, subcomponents, QsubIndex};
pub use parse::{
    parse_lines, parse_node, parse_node_with, parse_path, ParseError, ParseOptions, Parsed, DESIGNATED_CMP,
    PLACEHOLDER_BASE, TOP_PROP,
};
pub use print::{print_node, print_path};
