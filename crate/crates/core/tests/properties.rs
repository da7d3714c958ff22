use proptest::prelude::*;

use masp::analysis::{alpha_nf_check, alpha_normalize, flatten, is_coherent};
use masp::ast::{Atom, DefModule, Member, ModularProgram, Rule, Term};
use masp::checks;
use masp::equivalence::{replace, strong_equiv_bounded, verify_counterexample, EquivOptions, EquivVerdict};
use masp::eval::{all_interpretations, answer_sets, defmod_stable_models, Domain, SolveOptions, Strategy, DEFAULT_MAX_BRANCH};
use masp::gen::{self, ProgramShape};
use masp::oracle::{hamiltonian_cycles, transitive_closure};
use masp::parser::{parse_program, print_program};

fn program(seed: u64) -> ModularProgram {
    gen::random_program(&mut gen::rng(seed), &ProgramShape::default())
}

fn ab() -> Domain {
    Domain::from_names(&["a", "b"])
}

fn solve(p: &ModularProgram, strategy: Strategy) -> Vec<String> {
    let opts = SolveOptions { domain_override: Some(ab()), strategy, max_branch: DEFAULT_MAX_BRANCH };
    answer_sets(p, &opts).unwrap().iter().map(|i| i.to_string()).collect()
}

/// The first def-module of `p` wrapped in its own sub-program.
fn wrap_first(p: &ModularProgram) -> Option<(ModularProgram, ModularProgram)> {
    let k = p.members.iter().position(|m| matches!(m, Member::Def(d) if !d.intensional.is_empty()))?;
    let Member::Def(d) = &p.members[k] else { return None };
    let sub = ModularProgram::new(d.free_predicates(), vec![Member::Def(d.clone())]);
    let mut host = p.clone();
    host.members[k] = Member::Program(sub.clone());
    Some((host, sub))
}

/// Adds `h(X..) :- h(X..)` for the first intensional symbol: a rule
/// that never changes the stable models.
fn with_redundant_rule(sub: &ModularProgram) -> ModularProgram {
    let Member::Def(d) = &sub.members[0] else { unreachable!() };
    let h = d.intensional.iter().next().unwrap().clone();
    let vars: Vec<Term> = (0..h.arity).map(|i| Term::var(["X", "Y"][i])).collect();
    let head = Atom { pred: h.clone(), args: vars.clone() };
    let r = Rule { head: vec![head.clone()], pos: vec![head], ..Rule::default() };
    let mut rules = d.rules.clone();
    rules.push(r);
    ModularProgram::new(sub.public.clone(), vec![Member::Def(DefModule::new(d.intensional.clone(), rules))])
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, ..ProptestConfig::default() })]

    #[test]
    fn print_parse_round_trip(seed in any::<u64>()) {
        let p = program(seed);
        let q = parse_program(&print_program(&p)).unwrap().0;
        prop_assert_eq!(&p, &q);
        prop_assert_eq!(print_program(&p), print_program(&q));
    }

    #[test]
    fn generated_programs_are_coherent(seed in any::<u64>()) {
        let p = program(seed);
        prop_assert!(is_coherent(&p).coherent);
    }

    #[test]
    fn alpha_normalize_is_idempotent_and_normal(seed in any::<u64>()) {
        let p = program(seed);
        let n = alpha_normalize(&p);
        prop_assert!(alpha_nf_check(&n).unwrap());
        prop_assert_eq!(alpha_normalize(&n), n);
    }

    #[test]
    fn flattening_is_idempotent(seed in any::<u64>()) {
        let f = flatten(&program(seed)).0;
        prop_assert_eq!(flatten(&f).0, f);
    }

    #[test]
    fn solving_is_deterministic(seed in any::<u64>()) {
        let p = program(seed);
        prop_assert_eq!(solve(&p, Strategy::Splitting), solve(&p, Strategy::Splitting));
    }

    #[test]
    fn splitting_agrees_with_naive(seed in any::<u64>()) {
        let p = program(seed);
        prop_assert_eq!(solve(&p, Strategy::Splitting), solve(&p, Strategy::Naive));
    }

    #[test]
    fn flattening_keeps_models(seed in any::<u64>()) {
        prop_assert!(checks::flatten_agrees(&program(seed), &ab(), DEFAULT_MAX_BRANCH).unwrap());
    }

    #[test]
    fn reductions_agree_where_they_apply(seed in any::<u64>()) {
        for d in program(seed).defmods() {
            prop_assert_ne!(checks::completion_agrees(d, &ab(), DEFAULT_MAX_BRANCH).unwrap(), Some(false));
            prop_assert_ne!(checks::circumscription_agrees(d, &ab(), DEFAULT_MAX_BRANCH).unwrap(), Some(false));
        }
    }

    #[test]
    fn denials_can_be_extracted(seed in any::<u64>()) {
        let d = gen::random_defmod_with_denials(&mut gen::rng(seed), &ProgramShape::default());
        prop_assert!(checks::denials_agree(&d, &ab(), DEFAULT_MAX_BRANCH).unwrap());
    }

    #[test]
    fn positive_modules_have_one_stable_model_per_input(seed in any::<u64>()) {
        for d in program(seed).defmods() {
            if d.rules.iter().any(|r| r.choice || r.head.len() != 1 || !r.neg.is_empty() || !r.dneg.is_empty()) {
                continue;
            }
            let ext: Vec<_> = d.free_predicates().difference(&d.intensional).cloned().collect();
            for fixed in all_interpretations(&ext, &ab(), DEFAULT_MAX_BRANCH).unwrap() {
                prop_assert_eq!(defmod_stable_models(d, &ab(), &fixed, DEFAULT_MAX_BRANCH).unwrap().len(), 1);
            }
        }
    }

    #[test]
    fn counterexamples_re_evaluate(seed in any::<u64>()) {
        let x = program(seed);
        let sig = x.free_predicates();
        prop_assume!(sig.iter().map(|p| 1usize << (2 * p.arity)).sum::<usize>() <= 16);
        let Some(p) = sig.iter().next().cloned() else { return Ok(()) };
        let args: Vec<Term> = (0..p.arity).map(|i| Term::var(["X", "Y"][i])).collect();
        let denial = Rule { pos: vec![Atom { pred: p, args }], ..Rule::default() };
        let mut y = x.clone();
        y.members.push(Member::Def(DefModule::new([], vec![denial])));
        let v = strong_equiv_bounded(&x, &y, &[], &ab(), &EquivOptions::default()).unwrap();
        if let EquivVerdict::Counterexample { interpretation, .. } = v {
            prop_assert!(verify_counterexample(&x, &y, &[], &ab(), &interpretation).unwrap());
        }
    }

    #[test]
    fn replacing_by_an_equivalent_module_keeps_answer_sets(seed in any::<u64>()) {
        let p = program(seed);
        let Some((host, old)) = wrap_first(&p) else { return Ok(()) };
        let new = with_redundant_rule(&old);
        let v = strong_equiv_bounded(&old, &new, &[], &ab(), &EquivOptions::default());
        prop_assume!(v.is_ok());
        prop_assert!(v.unwrap().is_equivalent());
        let replaced = replace(&host, &old, &new).unwrap();
        prop_assert_eq!(solve(&host, Strategy::Splitting), solve(&replaced, Strategy::Splitting));
        prop_assert_eq!(solve(&host, Strategy::Splitting), solve(&p, Strategy::Splitting));
    }

    #[test]
    fn transitive_closure_is_closed_and_minimal(seed in any::<u64>(), n in 1usize..5) {
        let cs: Vec<masp::ast::Constant> = gen::vertex_names(n).iter().map(|c| masp::ast::Constant::new(c.as_str())).collect();
        let rel = gen::random_relation(&mut gen::rng(seed), &cs, 0.3);
        let tc = transitive_closure(&rel);
        prop_assert!(rel.is_subset(&tc));
        for (a, b) in &tc {
            for (c, d) in &tc {
                if b == c {
                    prop_assert!(tc.contains(&(a.clone(), d.clone())));
                }
            }
        }
        prop_assert_eq!(transitive_closure(&tc), tc);
    }

    #[test]
    fn oracle_cycles_visit_every_vertex_once(seed in any::<u64>(), n in 1usize..5) {
        let g = gen::random_graph(&mut gen::rng(seed), n, 0.5);
        for c in hamiltonian_cycles(&g) {
            prop_assert_eq!(c.len(), g.vertices.len());
            let outs: std::collections::BTreeSet<&String> = c.iter().map(|(a, _)| a).collect();
            let ins: std::collections::BTreeSet<&String> = c.iter().map(|(_, b)| b).collect();
            prop_assert_eq!(outs.len(), c.len());
            prop_assert_eq!(ins.len(), c.len());
        }
    }
}
