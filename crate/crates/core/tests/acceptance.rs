//! Acceptance run: one PASS/FAIL line per criterion, tolerances pinned below.

mod common;

use std::time::{Duration, Instant};

use hxpath_core::frames::{decide_with_extensions, decide_with_frame, example_axioms};
use hxpath_core::oracle::{bounded_sat, Bound, OracleAnswer};
use hxpath_core::pspace::{self, PspaceOptions};
use hxpath_core::semantics::{check_node, frame_of, FrameClass};
use hxpath_core::syntax::{parse_node, size_node, Nominal};
use hxpath_core::tableau::{metrics, saturate_with, urfather, Calculus, ClashKind, Verdict};
use hxpath_core::Node;

const FIG2: &str = "<a><@2 b (2)? =c b ((q & 3))?>";
const SEC5: &str = "<a ((1 & p))? =c b> & <c @1 (!p)? =c b> & !<b !=c @1>";
const SEC6: &str = "<@0 a (0)? =c (p)?>";

const SEED: u64 = 0x5eed_2024;
const CORPUS: usize = 1000;
const MAX_SIZE: usize = 25;
const PAPER_LIMIT: Duration = Duration::from_secs(1);
const AGREEMENT_LIMIT: Duration = Duration::from_secs(300);
const ORACLE_LIMIT: Duration = Duration::from_secs(600);
const ORACLE_BOUND: usize = 3;
const BRANCH_FACTOR: usize = 4;
const FRAME_SAMPLE: usize = 200;

struct Report {
    failed: usize,
}

impl Report {
    fn line(&mut self, id: usize, name: &str, ok: bool, detail: String) {
        if !ok {
            self.failed += 1;
        }
        println!("[{}] {id:>2}. {name}: {detail}", if ok { "PASS" } else { "FAIL" });
    }
}

fn node(s: &str) -> Node {
    parse_node(s).expect("fixed formulas parse")
}

fn sound(v: &Verdict, phi: &Node) -> bool {
    match (v.model(), v.branch()) {
        (Some(m), Some(b)) => m.naming.get(&b.root()).is_some_and(|&n| check_node(m, n, phi).unwrap_or(false)),
        _ => true,
    }
}

fn fig2(r: &mut Report, soundness: &mut Vec<String>) {
    let t = Instant::now();
    let phi = node(FIG2);
    let v = saturate_with(&phi, Calculus::default(), false).verdict;
    let elapsed = t.elapsed();
    let ok = (|| {
        let (m, b) = (v.model()?, v.branch()?);
        let id = |s: &str| m.index_of(s);
        let mut bs = m.edges.get("b")?.clone();
        bs.sort();
        let classes: Vec<&Vec<usize>> = m.data.get("c")?.iter().filter(|c| c.len() > 1).collect();
        Some(
            m.nodes == ["2", "3", "4", "5"]
                && m.edges.get("a")? == &vec![(id("4")?, id("5")?)]
                && bs == vec![(id("2")?, id("2")?), (id("5")?, id("3")?)]
                && classes == vec![&vec![id("2")?, id("3")?]]
                && m.valuation.get("q")? == &vec![id("3")?]
                && urfather(b, Nominal(7)) == Some(Nominal(3))
                && urfather(b, Nominal(6)) == Some(Nominal(2)),
        )
    })()
    .unwrap_or(false);
    if !sound(&v, &phi) {
        soundness.push(FIG2.into());
    }
    r.line(1, "Fig. 2 extracted model", ok && elapsed < PAPER_LIMIT, format!("exact shape match={ok}, {elapsed:?} (limit {PAPER_LIMIT:?})"));
}

fn sec5(r: &mut Report) {
    let t = Instant::now();
    let run = pspace::run(&node(SEC5), PspaceOptions { trace: true, ..PspaceOptions::default() });
    let elapsed = t.elapsed();
    let mut clash = run.last_clash.as_ref().map(|c| c.1.clone()).unwrap_or_default();
    clash.sort();
    let noms: Vec<u32> = run.calls.iter().map(|c| c.nominal).collect();
    let trace = run.trace.unwrap_or_default();
    let root_is_2 = trace.first().is_some_and(|e| e.conclusions.first().is_some_and(|c| c.starts_with("2:")));
    // The first call's nominal is merged with root nominal 1 before 4 is allocated.
    let mentions_4 = |c: &String| parse_node(c).is_ok_and(|e| e.nominals().contains(&Nominal(4)));
    let merged = trace
        .iter()
        .take_while(|e| !e.conclusions.iter().any(mentions_4))
        .any(|e| e.conclusions.iter().any(|c| c == "3:1"));
    let ok = run.verdict.is_unsat() && clash == ["1:!p", "1:p"] && noms == [3, 4, 5] && root_is_2 && merged;
    r.line(
        2,
        "pspace walkthrough",
        ok && elapsed < PAPER_LIMIT,
        format!(
            "verdict={} clash={clash:?} allocations={noms:?} root 2={root_is_2} 3:1 before 4={merged}, {elapsed:?}",
            run.verdict.word()
        ),
    );
}

fn sec6(r: &mut Report, soundness: &mut Vec<String>) {
    let t = Instant::now();
    let phi = node(SEC6);
    let all = decide_with_frame(&phi, FrameClass::All);
    let loop_at_0 = all.model().is_some_and(|m| {
        let z = m.naming[&Nominal(0)];
        m.edges.get("a").is_some_and(|es| es.contains(&(z, z)))
    });
    if !sound(&all, &phi) {
        soundness.push(SEC6.into());
    }
    let mut closed = Vec::new();
    for frame in [FrameClass::Forest, FrameClass::Tree] {
        let run = saturate_with(&phi, Calculus::with_frame(frame), false);
        let c = run.last_clash.clone();
        closed.push(
            run.verdict.is_unsat()
                && c.is_some_and(|(k, shown)| k.kind == ClashKind::LoopClash && shown == ["0:<+>0"]),
        );
    }
    let elapsed = t.elapsed();
    let ok = loop_at_0 && closed.iter().all(|&c| c);
    r.line(3, "frame example", ok && elapsed < PAPER_LIMIT, format!("All self-loop={loop_at_0} Forest/Tree LoopClash 0:<+>0={closed:?}, {elapsed:?}"));
}

struct CorpusRun {
    phi: Node,
    naive: Verdict,
    space: Verdict,
    space_metrics: pspace::SpaceMetrics,
}

fn main() {
    let mut r = Report { failed: 0 };
    let mut soundness: Vec<String> = Vec::new();
    println!("acceptance run: seed {SEED:#x}, {CORPUS} formulas of size <= {MAX_SIZE}");
    fig2(&mut r, &mut soundness);
    sec5(&mut r);
    sec6(&mut r, &mut soundness);

    let corpus = common::corpus(SEED, CORPUS, MAX_SIZE);
    let t = Instant::now();
    let runs: Vec<CorpusRun> = corpus
        .iter()
        .map(|phi| {
            let naive = saturate_with(phi, Calculus::default(), false).verdict;
            let sp = pspace::run(phi, PspaceOptions::default());
            CorpusRun { phi: phi.clone(), naive, space: sp.verdict, space_metrics: sp.metrics }
        })
        .collect();
    let elapsed = t.elapsed();
    let disagree = runs.iter().filter(|c| c.naive.is_sat() != c.space.is_sat() || c.naive.is_unsat() != c.space.is_unsat()).count();
    let sats = runs.iter().filter(|c| c.naive.is_sat()).count();
    r.line(
        4,
        "engine agreement",
        disagree == 0 && elapsed < AGREEMENT_LIMIT,
        format!("{disagree} disagreements on {} formulas ({sats} SAT), {elapsed:?} (limit {AGREEMENT_LIMIT:?})", runs.len()),
    );

    for c in &runs {
        for v in [&c.naive, &c.space] {
            if !sound(v, &c.phi) {
                soundness.push(hxpath_core::print_node(&c.phi));
            }
        }
    }
    let checked = 2 + 2 * runs.iter().filter(|c| c.naive.is_sat()).count();
    r.line(5, "soundness of extracted models", soundness.is_empty(), format!("{} failures over {checked} SAT verdicts {soundness:?}", soundness.len()));

    let t = Instant::now();
    let mut confirmed = 0;
    let mut witnesses = Vec::new();
    let mut timeouts = 0;
    for c in runs.iter().filter(|c| c.naive.is_unsat()) {
        let sig = c.phi.signature();
        if c.phi.nominals().len() > 2 || sig.rels.len() > 1 || sig.cmps.len() > 1 {
            continue;
        }
        match bounded_sat(&c.phi, Bound { max_nodes: ORACLE_BOUND, max_seconds: ORACLE_LIMIT }) {
            OracleAnswer::NoModelUpTo(_) => confirmed += 1,
            OracleAnswer::Witness(..) => witnesses.push(hxpath_core::print_node(&c.phi)),
            OracleAnswer::TimedOut => timeouts += 1,
        }
    }
    let elapsed = t.elapsed();
    r.line(
        6,
        "oracle confirms UNSAT",
        witnesses.is_empty() && timeouts == 0 && elapsed < ORACLE_LIMIT,
        format!("{confirmed} confirmed at bound {ORACLE_BOUND}, {} witnesses {witnesses:?}, {timeouts} timeouts, {elapsed:?}", witnesses.len()),
    );

    let mut term = 0;
    let mut budget = 0;
    for c in &runs {
        for v in [&c.naive, &c.space] {
            if matches!(v, Verdict::Unknown(_)) {
                budget += 1;
            }
            if let Some(b) = v.branch() {
                term += metrics::termination_violations(b).len();
            }
        }
    }
    r.line(7, "termination instrumentation", term == 0 && budget == 0, format!("{term} maxsize violations, {budget} budget hits"));

    let mut worst_len = 0.0f64;
    let mut depth_bad = 0;
    for c in &runs {
        let size = size_node(&c.phi);
        let m = &c.space_metrics;
        worst_len = worst_len.max(m.max_branch_len as f64 / (size * size) as f64);
        if m.max_recursion_depth > size {
            depth_bad += 1;
        }
    }
    r.line(
        8,
        "space metrics",
        worst_len <= BRANCH_FACTOR as f64 && depth_bad == 0,
        format!("max branch_len/size^2 = {worst_len:.2} (limit {BRANCH_FACTOR}), {depth_bad} depth > size"),
    );

    let mut frame_fail = Vec::new();
    let mut sampled = [0usize; 2];
    for (k, frame) in [FrameClass::Forest, FrameClass::Tree].into_iter().enumerate() {
        for phi in &corpus {
            if sampled[k] == FRAME_SAMPLE {
                break;
            }
            let v = decide_with_frame(phi, frame);
            let Some(m) = v.model() else { continue };
            sampled[k] += 1;
            let shape = frame_of(m);
            let ok = match frame {
                FrameClass::Tree => shape.tree_root == v.branch().map(|b| m.naming[&b.root()]),
                _ => shape.is_forest,
            };
            if !ok || !sound(&v, phi) {
                frame_fail.push(format!("{frame}: {}", hxpath_core::print_node(phi)));
            }
        }
    }
    r.line(
        9,
        "frame soundness",
        frame_fail.is_empty() && sampled == [FRAME_SAMPLE; 2],
        format!("{} failures over {} forest and {} tree models {frame_fail:?}", frame_fail.len(), sampled[0], sampled[1]),
    );

    let phi = node("<@1 =c @2> & 1:!2");
    let du = example_axioms()["DataUniqueness"].clone();
    let with = decide_with_extensions(&phi, FrameClass::All, vec![du], vec![], 100);
    let without = decide_with_extensions(&phi, FrameClass::All, vec![], vec![], 100);
    r.line(
        10,
        "data uniqueness axiom",
        with.is_unsat() && without.is_sat(),
        format!("with axiom {}, without {}", with.word(), without.word()),
    );

    println!("{} of 10 criteria passed", 10 - r.failed);
    if r.failed > 0 {
        std::process::exit(1);
    }
}
