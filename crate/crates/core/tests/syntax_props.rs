mod common;

use common::{arb_node, arb_path};
use hxpath_core::syntax::{parse_node, print_node, size_node, subcomponents, sym, NodeExpr, Nominal, PathExpr, Polarity};
use proptest::prelude::*;

proptest! {
    #[test]
    fn print_then_parse_is_identity(e in arb_node(30)) {
        let text = print_node(&e);
        prop_assert_eq!(parse_node(&text).unwrap(), e, "{}", text);
    }

    #[test]
    fn subcomponents_are_linear(e in arb_node(30)) {
        prop_assert!(subcomponents(&e).len() <= 2 * size_node(&e));
    }

    #[test]
    fn rule_conclusions_shrink(e in arb_node(20), a in arb_path(8), b in arb_path(8), eq in any::<bool>()) {
        let i = Nominal(1);
        prop_assert!(size_node(&NodeExpr::neg(NodeExpr::neg(e.clone()))) > size_node(&e));
        let pol = if eq { Polarity::Eq } else { Polarity::Neq };
        let c = sym("c");
        let outer = NodeExpr::at(i, NodeExpr::neg(NodeExpr::data(a.clone(), pol, c.clone(), b.clone())));
        let jumped = |p| PathExpr::concat(PathExpr::jump(1), p);
        let inner = NodeExpr::neg(NodeExpr::data(jumped(a.clone()), pol, c.clone(), jumped(b.clone())));
        prop_assert!(size_node(&inner) < size_node(&outer));
        let outer = NodeExpr::at(i, NodeExpr::data(a.clone(), pol, c.clone(), b.clone()));
        let inner = NodeExpr::data(jumped(a), pol, c, jumped(b));
        prop_assert!(size_node(&inner) < size_node(&outer));
    }
}
