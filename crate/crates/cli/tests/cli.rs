use std::process::{Command, Output};

const FIG2: &str = "<a><@2 b (2)? =c b ((q & 3))?>";
const SEC5: &str = "<a ((1 & p))? =c b> & <c @1 (!p)? =c b> & !<b !=c @1>";
const SEC6: &str = "<@0 a (0)? =c (p)?>";

fn hxtab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hxtab"))
        .args(args)
        .env_remove("HXTAB_ENGINE")
        .env_remove("HXTAB_FRAME")
        .env_remove("HXTAB_FORMAT")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).expect("single JSON document")
}

#[test]
fn exit_codes() {
    let o = hxtab(&["sat", "p"]);
    assert_eq!(code(&o), 10);
    assert!(stdout(&o).starts_with("SAT\n"));
    assert_eq!(code(&hxtab(&["sat", "p & !p"])), 20);
    let o = hxtab(&["sat", "p +"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("1:3"));
    assert_eq!(code(&hxtab(&["sat"])), 1);
    assert_eq!(code(&hxtab(&["sat", "--max-steps", "3", "<a>p & <a>q"])), 30);
}

#[test]
fn paper_examples() {
    let o = hxtab(&["sat", "-e", "pspace", SEC5]);
    assert_eq!((code(&o), stdout(&o).trim()), (20, "UNSAT"));
    assert_eq!(code(&hxtab(&["sat", "--frame", "tree", SEC6])), 20);
    assert_eq!(code(&hxtab(&["sat", "--frame", "forest", SEC6])), 20);
    assert_eq!(code(&hxtab(&["sat", SEC6])), 10);
    let one = json(&hxtab(&["sat", "--format", "json", "p"]));
    assert_eq!(one["results"][0]["model"]["nodes"].as_array().unwrap().len(), 1);
}

#[test]
fn engines_agree() {
    for f in ["p", "p & !p", FIG2, SEC5, SEC6, "<a>p & [a]!p", "<a =c b> & !<a !=c a>", "1:<a>(2 & p) & 2:!p | <a>1"] {
        for frame in ["all", "forest", "tree"] {
            let naive = code(&hxtab(&["sat", "--frame", frame, "-e", "naive", f]));
            let pspace = code(&hxtab(&["sat", "--frame", frame, "-e", "pspace", f]));
            assert_eq!(naive, pspace, "{f} under {frame}");
        }
    }
}

#[test]
fn environment_and_flag_precedence() {
    let run = |env: &str, args: &[&str]| {
        Command::new(env!("CARGO_BIN_EXE_hxtab")).args(args).env("HXTAB_FRAME", env).output().unwrap()
    };
    assert_eq!(code(&run("tree", &["sat", SEC6])), 20);
    assert_eq!(code(&run("tree", &["sat", "--frame", "all", SEC6])), 10);
}

#[test]
fn model_then_check() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fig2.json");
    let p = path.to_str().unwrap();
    assert_eq!(code(&hxtab(&["model", "--format", "json", "-o", p, FIG2])), 10);
    let m: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(m["nodes"].as_array().unwrap().len(), 4);
    let o = hxtab(&["check", p, FIG2, "--at", "4"]);
    assert_eq!((code(&o), stdout(&o).trim()), (10, "true"));
    assert_eq!(code(&hxtab(&["check", p, "!q", "--at", "3"])), 20);
    let dot = stdout(&hxtab(&["model", "--format", "dot", FIG2]));
    assert!(dot.starts_with("digraph") && dot.contains("style=dashed"));
    assert_eq!(code(&hxtab(&["check", "/nonexistent/model.json", "p"])), 1);
}

#[test]
fn oracle_command() {
    let o = hxtab(&["oracle", "p & !p", "--bound", "3"]);
    assert_eq!((code(&o), stdout(&o).trim()), (20, "NoModelUpTo(3)"));
    let o = hxtab(&["oracle", "--format", "json", SEC6, "--bound", "2"]);
    assert_eq!(code(&o), 10);
    assert_eq!(json(&o)["model"]["edges"]["a"], serde_json::json!([["0", "0"]]));
}

#[test]
fn trace_command() {
    let o = hxtab(&["trace", "--format", "json", "p & !p"]);
    assert_eq!(code(&o), 20);
    let doc = json(&o);
    let trace = doc["trace"].as_array().unwrap();
    assert_eq!(trace[0]["rule"], "root");
    assert!(trace.iter().any(|e| e.get("clash").is_some()));
    let text = stdout(&hxtab(&["trace", "-e", "pspace", SEC5]));
    assert!(text.contains("CLASH"));
}

#[test]
fn formula_files_and_extensions() {
    let dir = tempfile::tempdir().unwrap();
    let write = |name: &str, body: &str| {
        let p = dir.path().join(name);
        std::fs::write(&p, body).unwrap();
        p
    };
    let all_sat = write("sat.txt", "# corpus\np\n<a>q\n");
    let mixed = write("mixed.txt", "p\np & !p\n");
    assert_eq!(code(&hxtab(&["sat", "-f", all_sat.to_str().unwrap()])), 10);
    let o = hxtab(&["sat", "--format", "json", "-f", mixed.to_str().unwrap()]);
    assert_eq!(code(&o), 20);
    assert_eq!(json(&o)["results"].as_array().unwrap().len(), 2);
    let bad = write("bad.txt", "p\n<a\n");
    let o = hxtab(&["sat", "-f", bad.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("2:"));

    let axioms = write("du.ax", "<@$i =c @$j> -> $i:$j\n");
    let ax = axioms.to_str().unwrap();
    let phi = "<@1 =c @2> & 1:!2";
    assert_eq!(code(&hxtab(&["sat", phi])), 10);
    assert_eq!(code(&hxtab(&["sat", "--axioms", ax, phi])), 20);
    assert_eq!(code(&hxtab(&["sat", "-e", "pspace", "--axioms", ax, phi])), 20);
    let rules = write("rd.rules", "forall $i,$j exists $k . $i:<a>$k & $j:<a>$k\n");
    let o = hxtab(&["sat", "--node-rules", rules.to_str().unwrap(), "--node-rule-budget", "5", "1:p & 2:q"]);
    assert_eq!(code(&o), 30);
}
