//! Satisfiability checking and model building for hybrid XPath with data
//! comparisons: an internalized tableau calculus, a polynomial-space search,
//! frame-class extensions and a bounded brute-force oracle.

pub mod frames;
pub mod oracle;
pub mod pspace;
pub mod semantics;
pub mod syntax;
pub mod tableau;

pub use syntax::{parse_node, print_node, Node, NodeExpr, Nominal, Path, PathExpr, Polarity, Signature, Sym};
