use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const CN: &str = "#show vertex/1, in/2.\ndef r/2 {\n  r(X,Y) :- in(X,Y).\n  r(X,Y) :- r(X,Z), r(Z,Y).\n}\ndef { :- not r(X,Y), vertex(X), vertex(Y). }\n";
const CN_ALT: &str =
    "#show vertex/1, in/2.\ndef ra/1 {\n  ra(Y) :- in(a,Y).\n  ra(Y) :- in(X,Y), ra(X).\n}\ndef { :- not ra(Y), vertex(Y). }\n";

fn corpus(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("corpus").join(name)
}

fn masp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_masp")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn solve_prints_the_cycle() {
    let o = masp(&["solve", path(&corpus("hc.masp")), "--instance", path(&corpus("g1.facts"))]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "Answer: 1\nin(a,b) in(b,c) in(c,d) in(d,a)\nSATISFIABLE\n");
}

#[test]
fn solve_json_and_naive_strategy() {
    let (hc, g1) = (corpus("hc.masp"), corpus("g1.facts"));
    let o = masp(&["solve", path(&hc), "--instance", path(&g1), "--format", "json"]);
    assert_eq!(stdout(&o).trim(), r#"[["in(a,b)","in(b,c)","in(c,d)","in(d,a)"]]"#);
    let dir = tempfile::tempdir().unwrap();
    let small = dir.path().join("k2.facts");
    std::fs::write(&small, "edge(a,b). edge(b,a).").unwrap();
    let o = masp(&["solve", path(&hc), "--instance", path(&small), "--naive", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), r#"[["in(a,b)","in(b,a)"]]"#);
}

#[test]
fn unsatisfiable_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let facts = dir.path().join("line.facts");
    std::fs::write(&facts, "edge(a,b).").unwrap();
    let o = masp(&["solve", path(&corpus("hc.masp")), "--instance", path(&facts)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("UNSATISFIABLE"));
}

#[test]
fn parse_error_exits_2_with_position() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.masp");
    std::fs::write(&bad, "p(X :- q(X).").unwrap();
    let o = masp(&["solve", path(&bad)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("1:"));
}

#[test]
fn check_reports_coherence_and_tightness() {
    let o = masp(&["check", path(&corpus("hc.masp")), "--instance", path(&corpus("g1.facts"))]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "coherent: yes; tight modules: M1 M2 M_E; non-tight: M3");
    let o = masp(&["check", path(&corpus("hc.masp")), "--seed", "4", "--trials", "3"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("seed 4: 3 trials, 0 failures"));
}

#[test]
fn depgraph_dot_has_the_expected_edges() {
    let o = masp(&["depgraph", path(&corpus("hc.masp")), "--instance", path(&corpus("g1.facts")), "--format", "dot"]);
    let dot = stdout(&o);
    for e in ["\"in\" -> \"edge\"", "\"r\" -> \"in\"", "\"r\" -> \"r\"", "\"vertex\" -> \"edge\""] {
        assert!(dot.contains(e), "{e} missing from\n{dot}");
    }
}

#[test]
fn reduce_prints_the_choice_formula() {
    let o = masp(&["reduce", path(&corpus("hc.masp")), "--module", "M2", "--kind", "choice"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "forall X Y (in(X,Y) -> edge(X,Y))");
}

#[test]
fn equiv_finds_the_counterexample_and_the_guarded_equivalence() {
    let (a, b) = (corpus("hc_sub.masp"), corpus("hc_sub_alt.masp"));
    let o = masp(&["equiv", path(&a), path(&b), "--domain-bound", "a,b"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("in(a,a) in(b,a)"));
    let dir = tempfile::tempdir().unwrap();
    let ctx = dir.path().join("ctx.masp");
    std::fs::write(&ctx, "vertex(a).\n:- in(X,Y), not vertex(X).\n:- in(X,Y), not vertex(Y).\n").unwrap();
    let o = masp(&["equiv", path(&a), path(&b), "--context", path(&ctx), "--domain-bound", "a,b", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(v["verdict"], "equivalent_up_to_bound");
}

#[test]
fn replace_swaps_the_cycle_check() {
    let dir = tempfile::tempdir().unwrap();
    let (old, new) = (dir.path().join("cn.masp"), dir.path().join("cn_alt.masp"));
    std::fs::write(&old, CN).unwrap();
    std::fs::write(&new, CN_ALT).unwrap();
    let o = masp(&["replace", path(&corpus("hc.masp")), path(&old), path(&new)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.contains("ra(Y)") && !text.contains("r(X,Z)"));
    let replaced = dir.path().join("replaced.masp");
    std::fs::write(&replaced, text).unwrap();
    let s = masp(&["solve", path(&replaced), "--instance", path(&corpus("g1.facts"))]);
    assert_eq!(stdout(&s), "Answer: 1\nin(a,b) in(b,c) in(c,d) in(d,a)\nSATISFIABLE\n");
    let missing = masp(&["replace", path(&corpus("hc.masp")), path(&new), path(&old)]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn smf_and_flatten_run() {
    let o = masp(&["smf", path(&corpus("hc_sub.masp"))]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("existsP"));
    let o = masp(&["flatten", path(&corpus("hc.masp"))]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).matches("def ").count(), 5);
}
