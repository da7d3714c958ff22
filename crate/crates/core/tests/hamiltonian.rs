use std::collections::BTreeSet;

use masp::corpus;
use masp::eval::{answer_sets, join, SolveOptions, Strategy};
use masp::gen;
use masp::oracle::{hamiltonian_cycles, Edge, Graph};
use masp::parser::parse_instance;

fn cycle_text(cycle: &BTreeSet<Edge>) -> String {
    cycle.iter().map(|(a, b)| format!("in({a},{b})")).collect::<Vec<_>>().join(" ")
}

fn solve(program: &masp::ast::ModularProgram, g: &Graph, strategy: Strategy) -> Vec<String> {
    let facts = corpus::edge_facts(g.edges.iter().map(|(a, b)| (a.as_str(), b.as_str())));
    let e = parse_instance(&facts).unwrap();
    let opts = SolveOptions { strategy, ..SolveOptions::default() };
    let j = join(program, &e, None);
    match answer_sets(&j, &opts) {
        Ok(v) => v.iter().map(|i| i.to_string()).collect(),
        Err(masp::Error::Domain(_)) => vec![],
        Err(e) => panic!("{e}"),
    }
}

#[test]
fn g1_has_the_listed_cycle() {
    let j = join(&corpus::hc(), &corpus::g1(), None);
    let ans = answer_sets(&j, &SolveOptions::default()).unwrap();
    assert_eq!(ans.len(), 1);
    assert_eq!(ans[0].to_string(), "in(a,b) in(b,c) in(c,d) in(d,a)");
}

#[test]
fn alternative_encoding_on_g1() {
    let j = join(&corpus::hc_alt(), &corpus::g1(), None);
    let ans = answer_sets(&j, &SolveOptions::default()).unwrap();
    assert_eq!(ans.len(), 1);
    assert_eq!(ans[0].to_string(), "in(a,b) in(b,c) in(c,d) in(d,a)");
}

#[test]
fn edge_without_cycle_has_no_answer() {
    let g = Graph::from_edges([("a", "b")]);
    assert!(solve(&corpus::hc(), &g, Strategy::Splitting).is_empty());
}

#[test]
fn random_graphs_match_the_oracle() {
    let hc = corpus::hc();
    let mut rng = gen::rng(11);
    for n in 1..=4 {
        for _ in 0..10 {
            let g = gen::random_graph(&mut rng, n, 0.5);
            let mut want: Vec<String> = hamiltonian_cycles(&g).iter().map(cycle_text).collect();
            want.sort();
            assert_eq!(solve(&hc, &g, Strategy::Splitting), want, "{g:?}");
        }
    }
}

#[test]
fn naive_agrees_on_small_graphs() {
    let hc = corpus::hc();
    for g in gen::all_graphs(2) {
        assert_eq!(solve(&hc, &g, Strategy::Naive), solve(&hc, &g, Strategy::Splitting), "{g:?}");
    }
}
