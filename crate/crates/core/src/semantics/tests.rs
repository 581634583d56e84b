use super::*;
use crate::syntax::{parse_node, parse_path, Nominal};

fn fig1() -> DataModel {
    let json = r#"{
        "nodes": ["x","y","z","u","v","w"],
        "edges": {"e": [["x","y"],["x","z"],["y","u"],["y","v"],["y","w"]]},
        "data": {"price": [["u","v","z"],["w"],["x"],["y"]]},
        "naming": {"1": "x"}
    }"#;
    DataModel::from_json_str(json).unwrap()
}

#[test]
fn fig1_comparisons() {
    let m = fig1();
    let x = m.index_of("x").unwrap();
    assert!(check_node(&m, x, &parse_node("<e =price e e>").unwrap()).unwrap());
    assert!(check_node(&m, x, &parse_node("<e e !=price e e>").unwrap()).unwrap());
    let y = m.index_of("y").unwrap();
    assert!(!check_node(&m, y, &parse_node("<e =price @1>").unwrap()).unwrap());
}

#[test]
fn nominal_and_path_clauses() {
    let m = fig1();
    let x = m.index_of("x").unwrap();
    let u = m.index_of("u").unwrap();
    assert!(check_node(&m, x, &parse_node("1").unwrap()).unwrap());
    assert!(check_path(&m, x, u, &parse_path("e e").unwrap()).unwrap());
    for n in 0..m.len() {
        assert!(check_path(&m, n, x, &parse_path("@1").unwrap()).unwrap());
    }
    assert!(check_path(&m, x, x, &parse_path("(1)?").unwrap()).unwrap());
    assert_eq!(check_node(&m, x, &parse_node("2").unwrap()), Err(EvalError::UnnamedNominal(Nominal(2))));
    assert!(matches!(check_node(&m, x, &parse_node("<f>p").unwrap()), Err(EvalError::UnknownRel(_))));
}

#[test]
fn brute_force_concat() {
    let m = fig1();
    let p = parse_path("e e").unwrap();
    for a in 0..m.len() {
        for b in 0..m.len() {
            let direct = m.edges["e"].iter().any(|&(s, z)| s == a && m.edges["e"].contains(&(z, b)));
            assert_eq!(check_path(&m, a, b, &p).unwrap(), direct);
        }
    }
}

#[test]
fn validation() {
    assert!(validate_model(&fig1()).is_empty());
    let bad = DataModel::from_json_str(
        r#"{"nodes":["x","v"],"data":{"price":[["v"],["v","x"]]},"edges":{"e":[["x","ghost"]]}}"#,
    )
    .unwrap();
    let v = validate_model(&bad);
    assert!(v.contains(&Violation::Partition { cmp: "price".into(), node: "v".into() }));
    assert!(v.iter().any(|e| matches!(e, Violation::EdgeRange { to, .. } if to == "ghost")));
    let mut closed = bad.clone();
    closed.normalize();
    assert_eq!(closed.data["price"], vec![vec![0, 1]]);
}

#[test]
fn frames() {
    let shape = frame_of(&fig1());
    assert!(shape.is_forest);
    assert_eq!(shape.tree_root, Some(0));
    let looped = DataModel::from_json_str(r#"{"nodes":["n"],"edges":{"a":[["n","n"]]}}"#).unwrap();
    assert!(!frame_of(&looped).is_forest);
    let chains =
        DataModel::from_json_str(r#"{"nodes":["a","b","c","d"],"edges":{"r":[["a","b"],["c","d"]]}}"#).unwrap();
    let s = frame_of(&chains);
    assert!(s.is_forest && !s.is_tree());
}

#[test]
fn json_round_trip() {
    let m = fig1();
    let back = DataModel::from_json_str(&m.to_json().to_string()).unwrap();
    assert_eq!(back, m);
    assert!(m.to_dot().contains("style=dashed"));
}

#[test]
fn relational_agrees_on_fig1() {
    let m = fig1();
    let rel = RelModel::from_model(&m).unwrap();
    for f in ["<e =price e e>", "<e e !=price e e>", "<e>(<e>true)", "1:<e e =price e>", "<(1)? e U e e =price e>"] {
        let e = parse_node(f).unwrap();
        let expected = satisfying_nodes(&m, &e).unwrap();
        let mask = rel.denote_node(&e).unwrap();
        let got: Vec<usize> = (0..m.len()).filter(|&v| mask >> v & 1 == 1).collect();
        assert_eq!(got, expected, "{f}");
    }
}
