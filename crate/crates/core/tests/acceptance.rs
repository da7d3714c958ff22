//! Acceptance run: one PASS/FAIL line per criterion. Exits 1 if any fails.
//!
//! Tolerances: every comparison is exact set equality; time limits are
//! wall-clock on the built test profile.

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use masp::analysis::{self, dependency_graph, is_coherent, is_tight, sccs};
use masp::ast::{Constant, DefModule, Member, ModularProgram, PredicateSymbol};
use masp::checks;
use masp::corpus;
use masp::equivalence::{strong_equiv_bounded, verify_counterexample, EquivOptions, EquivVerdict};
use masp::eval::{self, answer_sets, join, naive_stable_models, Domain, Interpretation, SolveOptions, Strategy};
use masp::gen::{self, ProgramShape};
use masp::oracle::{hamiltonian_cycles, transitive_closure, Edge, Graph};
use masp::parser::{parse_instance, parse_program, print_program};
use masp::reductions;
use masp::sm;
use masp::{cli, Result};

const LIMIT_SOLVE: Duration = Duration::from_secs(5);
const LIMIT_ALT_GRAPHS: Duration = Duration::from_secs(300);
const LIMIT_EQUIV: Duration = Duration::from_secs(600);
const MAX_BRANCH: u64 = eval::DEFAULT_MAX_BRANCH;

const SEED_GRAPHS: u64 = 3;
const SEED_FLATTEN: u64 = 5;
const SEED_RELATIONS: u64 = 8;
const SEED_DENIALS: u64 = 9;
const SEED_ROUND_TRIP: u64 = 11;

type Outcome = Result<(bool, String)>;
type Criterion = (&'static str, fn() -> Outcome);

fn corpus_path(name: &str) -> String {
    let mut p = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    p.push("corpus");
    p.push(name);
    p.to_string_lossy().into_owned()
}

fn in_sym() -> PredicateSymbol {
    PredicateSymbol::new("in", 2)
}

fn cycle_text(cycle: &BTreeSet<Edge>) -> String {
    cycle.iter().map(|(a, b)| format!("in({a},{b})")).collect::<Vec<_>>().join(" ")
}

fn graph_answers(program: &ModularProgram, g: &Graph) -> Result<Vec<String>> {
    let e = parse_instance(&corpus::edge_facts(g.edges.iter().map(|(a, b)| (a.as_str(), b.as_str()))))?;
    match answer_sets(&join(program, &e, None), &SolveOptions::default()) {
        Ok(v) => Ok(v.iter().map(|i| i.to_string()).collect()),
        Err(masp::Error::Domain(_)) if g.edges.is_empty() => Ok(vec![]),
        Err(e) => Err(e),
    }
}

fn labelled(p: &ModularProgram, label: &str) -> DefModule {
    p.defmods()
        .into_iter()
        .zip(analysis::labels(p))
        .find(|(_, l)| l == label)
        .map(|(d, _)| d.clone())
        .unwrap_or_else(|| panic!("no module {label}"))
}

fn pi1_e() -> ModularProgram {
    join(&corpus::hc(), &corpus::g1(), None)
}

fn c1_solve() -> Outcome {
    let args = ["masp", "solve", &corpus_path("hc.masp"), "--instance", &corpus_path("g1.facts")];
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let t = Instant::now();
    let code = cli::run(args, &mut out, &mut err);
    let took = t.elapsed();
    let text = String::from_utf8_lossy(&out).into_owned();
    let want = "Answer: 1\nin(a,b) in(b,c) in(c,d) in(d,a)\nSATISFIABLE\n";
    let ok = code == 0 && text == want && took < LIMIT_SOLVE;
    Ok((ok, format!("one answer set {:?}, exit {code}, {took:.2?}", text.lines().nth(1).unwrap_or(""))))
}

fn c2_alternative() -> Outcome {
    let t = Instant::now();
    let alt = answer_sets(&join(&corpus::hc_alt(), &corpus::g1(), None), &SolveOptions::default())?;
    let g1_ok = alt.len() == 1 && alt[0].to_string() == "in(a,b) in(b,c) in(c,d) in(d,a)";
    let (hc, hc_alt) = (corpus::hc(), corpus::hc_alt());
    let mut compared = 0;
    let mut differ = Vec::new();
    for g in gen::all_graphs(3) {
        if !g.edges.iter().any(|(x, y)| x == "a" || y == "a") {
            continue;
        }
        compared += 1;
        if graph_answers(&hc, &g)? != graph_answers(&hc_alt, &g)? {
            differ.push(format!("{:?}", g.edges));
        }
    }
    let took = t.elapsed();
    let ok = g1_ok && differ.is_empty() && took < LIMIT_ALT_GRAPHS;
    Ok((ok, format!("g1 single answer {g1_ok}; {compared} graphs with a, {} differ; {took:.2?}", differ.len())))
}

fn c3_oracle() -> Outcome {
    let hc = corpus::hc();
    let mut rng = gen::rng(SEED_GRAPHS);
    let mut bad = 0;
    for k in 0..200 {
        let g = gen::random_graph(&mut rng, 1 + k % 4, 0.5);
        let mut want: Vec<String> = hamiltonian_cycles(&g).iter().map(cycle_text).collect();
        want.sort();
        if graph_answers(&hc, &g)? != want {
            bad += 1;
        }
    }
    Ok((bad == 0, format!("200 graphs on 1..4 vertices, seed {SEED_GRAPHS}, {bad} mismatches")))
}

const DOMAIN_GUARDS: &str = "vertex(a).\n:- in(X,Y), not vertex(X).\n:- in(X,Y), not vertex(Y).\n";

fn c4_strong_equivalence() -> Outcome {
    let t = Instant::now();
    let a = corpus::program(corpus::HC_SUB)?;
    let b = corpus::program(corpus::HC_SUB_ALT)?;
    let opts = EquivOptions::default();
    let abc = Domain::from_names(&["a", "b", "c"]);
    let gamma = cli::context_formulas(&corpus::program(corpus::CTX_VERTEX_A)?)?;
    let with_gamma = strong_equiv_bounded(&a, &b, &gamma, &abc, &opts)?;
    let empty = strong_equiv_bounded(&a, &b, &[], &abc, &opts)?;
    let empty_ok = match &empty {
        EquivVerdict::Counterexample { interpretation, .. } => verify_counterexample(&a, &b, &[], &abc, interpretation)?,
        EquivVerdict::EquivalentUpToBound { .. } => false,
    };
    let guards = cli::context_formulas(&parse_program(DOMAIN_GUARDS)?.0)?;
    let guarded = strong_equiv_bounded(&a, &b, &guards, &abc, &opts)?;
    let took = t.elapsed();
    let ok = with_gamma.is_equivalent() && empty_ok && took < LIMIT_EQUIV;
    Ok((
        ok,
        format!(
            "with {{vertex(a)}}: {with_gamma}; with no context: {empty} (re-evaluated: {empty_ok}); \
             with vertex(a) and in/2 restricted to vertex/1: {guarded}; {took:.2?}"
        ),
    ))
}

fn c5_flatten() -> Outcome {
    let abcd = Domain::from_names(&["a", "b", "c", "d"]);
    let main = checks::flatten_agrees(&pi1_e(), &abcd, MAX_BRANCH)?;
    let shape = ProgramShape::default();
    let dom = Domain::from_names(&["a", "b"]);
    let mut rng = gen::rng(SEED_FLATTEN);
    let mut bad = 0;
    for _ in 0..20 {
        let p = gen::random_program(&mut rng, &shape);
        if !is_coherent(&p).coherent || !checks::flatten_agrees(&p, &dom, MAX_BRANCH)? {
            bad += 1;
        }
    }
    Ok((main && bad == 0, format!("g1 program at {{a,b,c,d}}: {main}; 20 random programs, seed {SEED_FLATTEN}, {bad} failures")))
}

fn c6_collapse() -> Outcome {
    let e = parse_instance(&corpus::edge_facts([("a", "a"), ("a", "b"), ("b", "a"), ("b", "b")]))?;
    let p = join(&corpus::hc(), &e, None);
    let dom = Domain::from_names(&["a", "b"]);
    let opts = SolveOptions { domain_override: Some(dom.clone()), strategy: Strategy::Splitting, max_branch: MAX_BRANCH };
    let split = answer_sets(&p, &opts)?;
    let f = sm::rules_conjunction(&p)?;
    let show = BTreeSet::from([in_sym()]);
    let mut naive: Vec<Interpretation> =
        naive_stable_models(&f, &p.intensional(), &dom, &Interpretation::new())?.iter().map(|i| i.project(&show)).collect();
    eval::sort_canonical(&mut naive);
    naive.dedup();
    let shown: Vec<String> = split.iter().map(|i| i.to_string()).collect();
    Ok((split == naive, format!("splitting {shown:?}; naive {} answer sets", naive.len())))
}

fn c7_completion() -> Outcome {
    let p = pi1_e();
    let abc = Domain::from_names(&["a", "b", "c"]);
    let mut parts = Vec::new();
    let mut ok = true;
    for label in ["M1", "M2", "M_E"] {
        let d = labelled(&p, label);
        let dom = abc.union(&Domain::new(d.constants()));
        let agree = checks::completion_agrees(&d, &dom, MAX_BRANCH)?;
        ok &= agree == Some(true);
        parts.push(format!("{label} {agree:?}"));
    }
    let choice = reductions::reduce_choice(&labelled(&p, "M2")).residual.map(|f| f.to_string()).unwrap_or_default();
    ok &= choice == "forall X Y (in(X,Y) -> edge(X,Y))";
    Ok((ok, format!("{}; M2 choice: {choice}", parts.join(", "))))
}

fn c8_circumscription() -> Outcome {
    let m3 = labelled(&pi1_e(), "M3");
    let f = m3.rules_formula()?;
    let r = BTreeSet::from([PredicateSymbol::new("r", 2)]);
    let mut rng = gen::rng(SEED_RELATIONS);
    let mut bad = 0;
    for k in 0..50 {
        let dom = Domain::new(gen::vertex_names(1 + k % 4).iter().map(|c| Constant::new(c.as_str())));
        let rel = gen::random_relation(&mut rng, dom.constants(), 0.35);
        let mut fixed = Interpretation::new();
        fixed.set_extent(&in_sym(), rel.iter().map(|(a, b)| vec![Constant::new(a.as_str()), Constant::new(b.as_str())]).collect());
        let mut want = Interpretation::new();
        want.set_extent(
            &PredicateSymbol::new("r", 2),
            transitive_closure(&rel).iter().map(|(a, b)| vec![Constant::new(a.as_str()), Constant::new(b.as_str())]).collect(),
        );
        let circ: Vec<Interpretation> = reductions::circumscribe(&m3, &dom, &fixed)?.iter().map(|i| i.project(&r)).collect();
        let naive: Vec<Interpretation> = naive_stable_models(&f, &r, &dom, &fixed)?.iter().map(|i| i.project(&r)).collect();
        if circ != vec![want.clone()] || naive != vec![want] {
            bad += 1;
        }
    }
    Ok((bad == 0, format!("50 relations on 1..4 constants, seed {SEED_RELATIONS}, {bad} mismatches")))
}

fn c9_denials() -> Outcome {
    let dom = Domain::from_names(&["a", "b"]);
    let sub = corpus::program(corpus::HC_SUB)?;
    let cn = sub
        .members
        .iter()
        .find_map(|m| match m {
            Member::Program(q) if q.name() == Some("cn") => Some(q.clone()),
            _ => None,
        })
        .expect("module cn");
    let mods = cn.defmods();
    let merged = DefModule::new(
        mods.iter().flat_map(|d| d.intensional.iter().cloned()).collect::<Vec<_>>(),
        mods.iter().flat_map(|d| d.rules.iter().cloned()).collect(),
    );
    let main = checks::denials_agree(&merged, &dom, MAX_BRANCH)?;
    let shape = ProgramShape::default();
    let mut rng = gen::rng(SEED_DENIALS);
    let mut bad = 0;
    for _ in 0..20 {
        let d = gen::random_defmod_with_denials(&mut rng, &shape);
        if !checks::denials_agree(&d, &dom, MAX_BRANCH)? {
            bad += 1;
        }
    }
    Ok((main && bad == 0, format!("cn module at {{a,b}}: {main}; 20 random modules, seed {SEED_DENIALS}, {bad} failures")))
}

fn c10_structure() -> Outcome {
    let p = pi1_e();
    let comps = sccs(&dependency_graph(&p));
    let singletons = comps.iter().all(|c| c.len() == 1);
    let coherent = is_coherent(&p).coherent;
    let tight: Vec<bool> = ["M1", "M2", "M3"].iter().map(|l| is_tight(&labelled(&p, l))).collect();
    let ok = comps.len() == 4 && singletons && coherent && tight == [true, true, false];
    Ok((ok, format!("{} components, singletons {singletons}; coherent {coherent}; tight M1 M2 M3 {tight:?}", comps.len())))
}

fn round_trip(p: &ModularProgram) -> Result<bool> {
    let q = parse_program(&print_program(p))?.0;
    let r = parse_program(&print_program(&q))?.0;
    Ok(q == r && sm::phi(p)?.alpha_eq(&sm::phi(&q)?))
}

fn c11_round_trip() -> Outcome {
    let mut bad = Vec::new();
    for (name, src) in corpus::FILES {
        if !round_trip(&parse_program(src)?.0)? {
            bad.push(name.to_string());
        }
    }
    let shape = ProgramShape::default();
    let mut rng = gen::rng(SEED_ROUND_TRIP);
    for k in 0..100 {
        if !round_trip(&gen::random_program(&mut rng, &shape))? {
            bad.push(format!("random #{k}"));
        }
    }
    Ok((bad.is_empty(), format!("{} corpus files and 100 random programs, seed {SEED_ROUND_TRIP}; failing {bad:?}", corpus::FILES.len())))
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("end-to-end Hamiltonian cycle on g1", c1_solve),
        ("alternative encoding agreement", c2_alternative),
        ("answer sets match the cycle oracle", c3_oracle),
        ("strong equivalence of the cycle checks", c4_strong_equivalence),
        ("flattening preserves models", c5_flatten),
        ("coherent collapse", c6_collapse),
        ("completion", c7_completion),
        ("circumscription and transitive closure", c8_circumscription),
        ("denial extraction", c9_denials),
        ("structural facts", c10_structure),
        ("parser round trip", c11_round_trip),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let (ok, detail) = match run() {
            Ok(x) => x,
            Err(e) => (false, format!("error: {e}")),
        };
        if !ok {
            failed += 1;
        }
        let detail = detail.replace('\n', " ");
        println!("criterion {}: {} {name}: {detail} [{:.2?}]", k + 1, if ok { "PASS" } else { "FAIL" }, t.elapsed());
    }
    println!("{} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
