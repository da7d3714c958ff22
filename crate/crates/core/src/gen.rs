//! Seeded generators for programs, graphs and relations used by property
//! runs and the `check --seed` command.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::ast::{Atom, CmpOp, Comparison, Constant, DefModule, Member, ModularProgram, PredicateSymbol, Rule, Term};
use crate::oracle::{Edge, Graph};

pub use rand::SeedableRng;
pub type SeededRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Clone, Debug)]
pub struct ProgramShape {
    pub max_defmods: usize,
    pub max_depth: usize,
    pub max_arity: usize,
    pub constants: Vec<String>,
    pub max_rules: usize,
}

impl Default for ProgramShape {
    fn default() -> Self {
        ProgramShape { max_defmods: 3, max_depth: 2, max_arity: 2, constants: vec!["a".into(), "b".into()], max_rules: 3 }
    }
}

const NAMES: &[&str] = &["p", "q", "r", "s", "t", "u"];
const VARS: &[&str] = &["X", "Y"];

fn base_symbols() -> Vec<PredicateSymbol> {
    vec![PredicateSymbol::new("e", 1), PredicateSymbol::new("f", 2)]
}

fn term(rng: &mut SeededRng, shape: &ProgramShape) -> Term {
    if rng.gen_bool(0.8) {
        Term::var(VARS.choose(rng).expect("non-empty"))
    } else {
        Term::constant(shape.constants.choose(rng).expect("constants"))
    }
}

fn atom(rng: &mut SeededRng, p: &PredicateSymbol, shape: &ProgramShape) -> Atom {
    Atom { pred: p.clone(), args: (0..p.arity).map(|_| term(rng, shape)).collect() }
}

/// Adds base atoms until every variable occurs in a positive body atom.
fn make_safe(r: &mut Rule) {
    while let Some(v) = r.unsafe_variable() {
        r.pos.push(Atom { pred: PredicateSymbol::new("e", 1), args: vec![Term::Variable(v)] });
    }
}

/// A rule with the given head (none for a denial). Positive body atoms use
/// `positive`, negative ones `negative`.
fn rule(
    rng: &mut SeededRng,
    head: Option<&PredicateSymbol>,
    positive: &[PredicateSymbol],
    negative: &[PredicateSymbol],
    shape: &ProgramShape,
) -> Rule {
    let mut r = Rule::default();
    if let Some(h) = head {
        r.head.push(atom(rng, h, shape));
        r.choice = rng.gen_bool(0.2);
    }
    let n = rng.gen_range(if head.is_some() { 0..=2 } else { 1..=2 });
    for _ in 0..n {
        let p = positive.choose(rng).expect("base symbols");
        r.pos.push(atom(rng, p, shape));
    }
    if !negative.is_empty() && rng.gen_bool(0.4) {
        let p = negative.choose(rng).expect("non-empty");
        let a = atom(rng, p, shape);
        if rng.gen_bool(0.2) {
            r.dneg.push(a);
        } else {
            r.neg.push(a);
        }
    }
    if rng.gen_bool(0.15) {
        let op = if rng.gen_bool(0.5) { CmpOp::Eq } else { CmpOp::Neq };
        r.cmp.push(Comparison { left: Term::var("X"), op, right: term(rng, shape) });
    }
    make_safe(&mut r);
    r
}

/// A coherent program: intensional sets are disjoint, positive dependencies
/// only point to the same or an earlier def-module, and a hidden symbol is
/// used only below the node hiding it.
pub fn random_program(rng: &mut SeededRng, shape: &ProgramShape) -> ModularProgram {
    let k = rng.gen_range(1..=shape.max_defmods.max(1));
    let mut names: Vec<&str> = NAMES.to_vec();
    names.shuffle(rng);
    let mut next = names.into_iter();
    let mut defmods: Vec<DefModule> = Vec::new();
    let mut earlier: Vec<PredicateSymbol> = base_symbols();
    let mut all_int: Vec<PredicateSymbol> = Vec::new();
    for _ in 0..k {
        let denial_only = !all_int.is_empty() && rng.gen_bool(0.25);
        let own: Vec<PredicateSymbol> = if denial_only {
            vec![]
        } else {
            (0..rng.gen_range(1..=2))
                .filter_map(|_| next.next())
                .map(|n| PredicateSymbol::new(n, rng.gen_range(0..=shape.max_arity)))
                .collect()
        };
        let mut positive = earlier.clone();
        positive.extend(own.iter().cloned());
        let mut negative = positive.clone();
        negative.extend(all_int.iter().cloned());
        let mut rules = Vec::new();
        for h in &own {
            for _ in 0..rng.gen_range(1..=shape.max_rules) {
                rules.push(rule(rng, Some(h), &positive, &negative, shape));
            }
        }
        if denial_only || rng.gen_bool(0.2) {
            rules.push(rule(rng, None, &positive, &negative, shape));
        }
        earlier.extend(own.iter().cloned());
        all_int.extend(own.iter().cloned());
        defmods.push(DefModule::new(own, rules));
    }
    let members: Vec<Member> = defmods.into_iter().map(Member::Def).collect();
    let members = nest(rng, members, shape.max_depth, &BTreeSet::new());
    let used: BTreeSet<PredicateSymbol> = members.iter().flat_map(|m| m.free_predicates()).collect();
    let public: BTreeSet<PredicateSymbol> = used.iter().filter(|_| rng.gen_bool(0.7)).cloned().collect();
    ModularProgram::new(public, members)
}

/// Wraps a contiguous run of members into a sub-program, hiding some of
/// the symbols nothing outside the run mentions. `context` holds what the
/// enclosing levels mention.
fn nest(rng: &mut SeededRng, members: Vec<Member>, depth: usize, context: &BTreeSet<PredicateSymbol>) -> Vec<Member> {
    if depth == 0 || members.is_empty() || !rng.gen_bool(0.6) {
        return members;
    }
    let lo = rng.gen_range(0..members.len());
    let hi = rng.gen_range(lo + 1..=members.len());
    let mut members = members;
    let tail = members.split_off(hi);
    let inner: Vec<Member> = members.split_off(lo);
    let mut outside: BTreeSet<PredicateSymbol> = members.iter().chain(&tail).flat_map(|m| m.free_predicates()).collect();
    outside.extend(context.iter().cloned());
    let inner = nest(rng, inner, depth - 1, &outside);
    let inner_free: BTreeSet<PredicateSymbol> = inner.iter().flat_map(|m| m.free_predicates()).collect();
    let inner_int: BTreeSet<PredicateSymbol> = inner.iter().flat_map(|m| m.intensional()).collect();
    let public = inner_free.iter().filter(|s| outside.contains(*s) || !inner_int.contains(*s) || rng.gen_bool(0.5)).cloned();
    let sub = ModularProgram::new(public, inner);
    members.push(Member::Program(sub));
    members.extend(tail);
    members
}

/// One def-module over `p`, `q` with both rules and denials.
pub fn random_defmod_with_denials(rng: &mut SeededRng, shape: &ProgramShape) -> DefModule {
    let own = vec![PredicateSymbol::new("p", rng.gen_range(0..=shape.max_arity.min(1))), PredicateSymbol::new("q", 1)];
    let mut positive = base_symbols();
    positive.extend(own.iter().cloned());
    let mut rules = Vec::new();
    for h in &own {
        for _ in 0..rng.gen_range(1..=2) {
            rules.push(rule(rng, Some(h), &positive, &positive, shape));
        }
    }
    for _ in 0..rng.gen_range(1..=2) {
        rules.push(rule(rng, None, &positive, &positive, shape));
    }
    rules.shuffle(rng);
    DefModule::new(own, rules)
}

/// A directed graph over the first `n` of `a, b, c, d, ...`, each possible
/// edge (self-loops included) present with probability `density`.
pub fn random_graph(rng: &mut SeededRng, n: usize, density: f64) -> Graph {
    let vs = vertex_names(n);
    let mut edges = Vec::new();
    for a in &vs {
        for b in &vs {
            if rng.gen_bool(density) {
                edges.push((a.clone(), b.clone()));
            }
        }
    }
    Graph::from_edges(edges)
}

/// Every directed graph on `n` named vertices, in mask order.
pub fn all_graphs(n: usize) -> Vec<Graph> {
    let vs = vertex_names(n);
    let pairs: Vec<Edge> = vs.iter().flat_map(|a| vs.iter().map(move |b| (a.clone(), b.clone()))).collect();
    (0u64..1 << pairs.len())
        .map(|mask| Graph::from_edges(pairs.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, e)| e.clone())))
        .collect()
}

pub fn vertex_names(n: usize) -> Vec<String> {
    (0..n).map(|i| ((b'a' + i as u8) as char).to_string()).collect()
}

/// A random binary relation over the constants.
pub fn random_relation(rng: &mut SeededRng, constants: &[Constant], density: f64) -> BTreeSet<Edge> {
    let mut out = BTreeSet::new();
    for a in constants {
        for b in constants {
            if rng.gen_bool(density) {
                out.insert((a.0.clone(), b.0.clone()));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::is_coherent;

    #[test]
    fn generated_programs_are_coherent_and_safe() {
        let shape = ProgramShape::default();
        for seed in 0..200 {
            let p = random_program(&mut rng(seed), &shape);
            let report = is_coherent(&p);
            assert!(report.coherent, "seed {seed}: {:?}\n{}", report.violations, crate::parser::print_program(&p));
            assert!(p.rules().all(|r| r.check_safe().is_ok()));
        }
    }

    #[test]
    fn same_seed_same_program() {
        let shape = ProgramShape::default();
        assert_eq!(random_program(&mut rng(7), &shape), random_program(&mut rng(7), &shape));
    }

    #[test]
    fn three_vertices_give_512_graphs() {
        assert_eq!(all_graphs(3).len(), 512);
    }
}
