use super::*;
use crate::semantics::{check_node, frame_of};
use crate::syntax::{parse_node, NodeExpr, Nominal};
use crate::tableau::{saturate_branch, Branch, ClashKind, Recorder, PLUS};

fn node(s: &str) -> Node {
    let e = parse_node(&s.replace("<+>", "<plus>")).unwrap();
    match &*e {
        NodeExpr::At(i, d) => match &**d {
            NodeExpr::Diamond(a, j) if &**a == "plus" => NodeExpr::at(*i, NodeExpr::diamond(PLUS, j.clone())),
            _ => e,
        },
        _ => e,
    }
}

const SEC6: &str = "<@0 a (0)? =c (p)?>";

fn raw(labels: &[&str], frame: FrameClass) -> Branch {
    let ls: Vec<(Node, bool)> = labels.iter().map(|s| (node(s), true)).collect();
    Branch::from_labels(&node("p"), &ls, Calculus::with_frame(frame))
}

fn closed(labels: &[&str]) -> Branch {
    let mut b = raw(labels, FrameClass::Forest);
    saturate_branch(&mut b, &mut Recorder::default()).unwrap();
    b
}

#[test]
fn reachability_rules() {
    assert!(closed(&["0:<a>2"]).contains(&node("0:<+>2")));
    let b = closed(&["0:<a>2", "2:0"]);
    assert!(b.contains(&node("0:<+>0")));
    assert_eq!(b.clash().map(|c| c.kind), Some(ClashKind::LoopClash));
    assert!(closed(&["1:<+>2", "2:<+>3"]).contains(&node("1:<+>3")));
    assert!(!raw(&["0:<a>2"], FrameClass::All).labels().iter().any(|l| l.is_transitivity() && l.origin != crate::tableau::RuleId::Root));
}

#[test]
fn two_parent_clash() {
    let b = raw(&["1:<+>3", "2:<+>3"], FrameClass::Forest);
    assert_eq!(frame_clash(&b).map(|c| c.kind), Some(ClashKind::TwoParentClash));
    let b = raw(&["1:<+>3", "2:<+>3", "1:<+>2"], FrameClass::Forest);
    assert_eq!(frame_clash(&b), None);
    let b = raw(&["1:<+>3", "2:<+>3", "2:<+>1"], FrameClass::Forest);
    assert_eq!(frame_clash(&b), None);
    let mut strict = Calculus::with_frame(FrameClass::Forest);
    strict.strict_two_parent = true;
    let ls: Vec<(Node, bool)> = ["1:<+>3", "2:<+>3", "2:<+>1"].iter().map(|s| (node(s), true)).collect();
    let b = Branch::from_labels(&node("p"), &ls, strict);
    assert_eq!(frame_clash(&b).map(|c| c.kind), Some(ClashKind::TwoParentClash));
}

#[test]
fn connectedness() {
    let v = saturate_with(&node("p"), Calculus::with_frame(FrameClass::Tree), false).verdict;
    assert!(is_connected(v.branch().unwrap(), Nominal(0)));
    let v = saturate_with(&node("<a>p & <a>q"), Calculus::with_frame(FrameClass::Forest), false).verdict;
    let b = v.branch().unwrap();
    assert!(b.contains(&node("0:<+>1")) && b.contains(&node("0:<+>2")));
    assert!(is_connected(b, b.root()));
    let v = saturate_with(&node("1:p"), Calculus::with_frame(FrameClass::Forest), false).verdict;
    let b = v.branch().unwrap();
    assert!(!is_connected(b, b.root()));
}

#[test]
fn section6_example() {
    let v = decide_with_frame(&node(SEC6), FrameClass::All);
    let m = v.model().expect("sat on all frames");
    let zero = m.naming[&Nominal(0)];
    assert!(m.edges["a"].contains(&(zero, zero)));
    assert!(decide_with_frame(&node(SEC6), FrameClass::Forest).is_unsat());
    let run = saturate_with(&node(SEC6), Calculus::with_frame(FrameClass::Tree), false);
    assert!(run.verdict.is_unsat());
    let (c, shown) = run.last_clash.unwrap();
    assert_eq!(c.kind, ClashKind::LoopClash);
    assert_eq!(shown, vec!["0:<+>0"]);
    let v = decide_with_frame(&node("p"), FrameClass::Tree);
    assert_eq!(v.model().unwrap().len(), 1);
}

#[test]
fn tree_mode_rejects_disconnected_branches() {
    assert!(decide_with_frame(&node("1:p"), FrameClass::Forest).is_sat());
    assert!(decide_with_frame(&node("1:p & <a>(1 & <b>2)"), FrameClass::Tree).is_sat());
    // Nothing reaches 1 from the root. A tree model naming the root 1 exists,
    // but the calculus never identifies nominals, so the branch is rejected.
    assert!(decide_with_frame(&node("1:p"), FrameClass::Tree).is_unsat());
    let v = decide_with_frame(&node("1:p & [a]!1 & 1:[a]!2"), FrameClass::Tree);
    assert!(v.is_unsat(), "{v:?}");
    let v = decide_with_frame(&node("1 & <a>p"), FrameClass::Tree);
    let m = v.model().unwrap();
    assert!(frame_of(m).is_tree());
}

#[test]
fn frame_models_have_the_frame_shape() {
    for f in ["<a>p & <a><b>q", "<a =c b> & <a !=c b>", "1:<a>2 & 2:<a>3", "<a>1 & <b>1"] {
        for frame in [FrameClass::Forest, FrameClass::Tree] {
            let v = decide_with_frame(&node(f), frame);
            if let Some(m) = v.model() {
                let b = v.branch().unwrap();
                assert!(frame_of(m).admits(frame), "{f} {frame}");
                assert!(check_node(m, m.naming[&b.root()], &node(f)).unwrap(), "{f}");
            }
        }
    }
    assert!(decide_with_frame(&node("<a>1 & <b>1"), FrameClass::Forest).is_sat());
    assert!(decide_with_frame(&node("<a>1 & 2:<a>1 & !2"), FrameClass::Forest).is_unsat());
}

#[test]
fn frame_rules_never_identify_nominals() {
    // A forest model exists with 2 naming the evaluation node, but the calculus
    // has no rule that guesses 2:3, so the two parents of 1 clash.
    assert!(decide_with_frame(&node("<a>1 & 2:<a>1"), FrameClass::Forest).is_unsat());
    assert!(decide_with_frame(&node("<a>1 & 2:<a>1 & 2"), FrameClass::Forest).is_sat());
}

#[test]
fn pure_axioms() {
    let irr = &example_axioms()["Irreflexivity"];
    let b = Branch::init(
        &node("4:p"),
        Calculus { axioms: vec![irr.clone()], ..Calculus::default() },
        &mut Recorder::default(),
    );
    assert!(b.contains(&node("4:!<a>4")));
    let du = example_axioms()["DataUniqueness"].clone();
    let phi = node("<@1 =c @2> & 1:!2");
    assert!(crate::tableau::saturate(&phi).is_sat());
    let v = decide_with_extensions(&phi, FrameClass::All, vec![du.clone()], vec![], 100);
    assert!(v.is_unsat());
    let b = Branch::init(&node("1:2"), Calculus { axioms: vec![du], ..Calculus::default() }, &mut Recorder::default());
    assert!(b.labels().iter().any(|l| l.expr == node("3:(!<@1 =c @2> | 1:2)") || l.expr == node("3:(<@1 =c @2> -> 1:2)")));
    assert!(matches!(PureAxiom::parse("$i:p"), Err(AxiomError::NotPure { .. })));
}

#[test]
fn axioms_hold_in_extracted_models() {
    let ax = vec![example_axioms()["Irreflexivity"].clone(), example_axioms()["Transitivity"].clone()];
    let phi = node("<a><a>p & [a]!p | <a>q");
    let v = decide_with_extensions(&phi, FrameClass::All, ax.clone(), vec![], 100);
    let m = v.model().unwrap();
    for a in &ax {
        let noms: Vec<Nominal> = m.naming.keys().copied().collect();
        for &x in &noms {
            for &y in &noms {
                let inst = a.instantiate(&[x, y][..a.placeholders.len()], x);
                assert!(check_node(m, 0, &inst).unwrap());
            }
        }
    }
}

#[test]
fn node_creating_rules() {
    let right_directed = NodeCreatingRule::parse("forall $i,$j exists $k . $i:<a>$k & $j:<a>$k").unwrap();
    assert_eq!(right_directed.universals.len(), 2);
    assert_eq!(right_directed.existentials.len(), 1);
    let v = decide_with_extensions(&node("1:p & 2:q"), FrameClass::All, vec![], vec![right_directed.clone()], 100);
    assert!(matches!(v, Verdict::Unknown(ref s) if s.contains("budget")), "{v:?}");
    let v = decide_with_extensions(&node("p"), FrameClass::All, vec![], vec![right_directed], 0);
    assert!(matches!(v, Verdict::Unknown(_)));
    let fresh = NodeCreatingRule::parse("forall $i exists $k . <@$i !=c @$k>").unwrap();
    let inst = fresh.instantiate(&[Nominal(1)], &[Nominal(5)], Nominal(0));
    assert_eq!(inst, node("0:<@1 !=c @5>"));
    assert!(NodeCreatingRule::parse("forall $i exists $k . $q:p").is_err());
}

#[test]
fn builtin_sets() {
    let sets = builtin_axiom_sets(&["a"]);
    assert_eq!(sets["Inverse"].len(), 2);
    assert_eq!(sets["Sibling"].len(), 5);
    assert_eq!(sets["SibIrreflexivity"].len(), 6);
    let v = decide_with_extensions(&node("<a>1 & 1:!<a_inv>0"), FrameClass::All, vec![], vec![], 100);
    assert!(v.is_sat());
    let v = decide_with_extensions(&node("0 & <a>1 & 1:!<a_inv>0"), FrameClass::All, sets["Inverse"].clone(), vec![], 100);
    assert!(v.is_unsat());
}

#[test]
fn parses_axiom_files() {
    let axioms = parse_axiom_file("# frame conditions\n$i:!<a>$i\n\n<@$i =c @$j> -> $i:$j  # uniqueness\n").unwrap();
    assert_eq!(axioms.len(), 2);
    let err = parse_axiom_file("$i:!<a>$i\n$i:p\n").unwrap_err();
    assert!(matches!(err, AxiomError::NotPure { line: 2, .. }));
    let rules = parse_rule_file("forall $i exists $k . $i:<a>$k\n").unwrap();
    assert_eq!(rules.len(), 1);
}
