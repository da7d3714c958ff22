//! Dependency graphs, tightness, alpha-normal form, coherence and flattening.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use serde::Serialize;

use crate::ast::{DefModule, Formula, Member, ModularProgram, PredicateSymbol};
use crate::error::{Diagnostic, Result};
use crate::sm;

/// Nodes are the symbols of the rules and the intensional symbols; an edge
/// runs from a head symbol to each symbol of a positive body atom of the
/// same rule.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct DependencyGraph {
    pub nodes: BTreeSet<PredicateSymbol>,
    pub edges: BTreeSet<(PredicateSymbol, PredicateSymbol)>,
}

fn graph_of<'a>(defmods: impl IntoIterator<Item = &'a DefModule> + Clone) -> DependencyGraph {
    let nodes: BTreeSet<PredicateSymbol> = defmods.clone().into_iter().flat_map(|d| d.free_predicates()).collect();
    let mut edges = BTreeSet::new();
    for d in defmods {
        for r in &d.rules {
            for h in &r.head {
                for b in &r.pos {
                    edges.insert((h.pred.clone(), b.pred.clone()));
                }
            }
        }
    }
    DependencyGraph { nodes, edges }
}

pub fn dependency_graph(p: &ModularProgram) -> DependencyGraph {
    graph_of(p.defmods())
}

pub fn defmod_graph(d: &DefModule) -> DependencyGraph {
    graph_of([d])
}

/// Strongly connected components, dependencies before dependents.
pub fn sccs(g: &DependencyGraph) -> Vec<BTreeSet<PredicateSymbol>> {
    let mut pg = DiGraph::<PredicateSymbol, ()>::new();
    let ids: BTreeMap<&PredicateSymbol, _> = g.nodes.iter().map(|n| (n, pg.add_node(n.clone()))).collect();
    for (a, b) in &g.edges {
        pg.add_edge(ids[a], ids[b], ());
    }
    tarjan_scc(&pg).into_iter().map(|c| c.into_iter().map(|i| pg[i].clone()).collect()).collect()
}

fn has_cycle(g: &DependencyGraph) -> bool {
    g.edges.iter().any(|(a, b)| a == b) || sccs(g).iter().any(|c| c.len() > 1)
}

/// A def-module is tight when its own dependency graph is acyclic; a
/// self-loop counts as a cycle.
pub fn is_tight(d: &DefModule) -> bool {
    !has_cycle(&defmod_graph(d))
}

/// Every head symbol of every def-module is intensional in it.
pub fn is_simple(p: &ModularProgram) -> bool {
    p.defmods().iter().all(|d| d.rules.iter().all(|r| r.head_predicates().is_subset(&d.intensional)))
}

/// Whether every symbol of the program's formula is either free throughout
/// or bound by exactly one existential.
pub fn alpha_nf_check(p: &ModularProgram) -> Result<bool> {
    let f = sm::phi(p)?;
    Ok(alpha_nf_formula(&f))
}

pub(crate) fn alpha_nf_formula(f: &Formula) -> bool {
    let free = f.predicates();
    let mut binders: BTreeMap<PredicateSymbol, usize> = BTreeMap::new();
    f.walk(&mut |g| {
        if let Formula::ExistsSO(v, _) | Formula::ForallSO(v, _) = g {
            if let Some(o) = v.origin() {
                *binders.entry(o).or_default() += 1;
            }
        }
    });
    binders.iter().all(|(s, n)| *n == 1 && !free.contains(s))
}

fn collect_binders(p: &ModularProgram, out: &mut BTreeMap<PredicateSymbol, usize>) {
    for s in p.hidden() {
        *out.entry(s).or_default() += 1;
    }
    for m in &p.members {
        if let Member::Program(q) = m {
            collect_binders(q, out);
        }
    }
}

/// Renames hidden symbols that clash with another hiding or with a free
/// occurrence to fresh names `<name>__k`, innermost modules first.
pub fn alpha_normalize(p: &ModularProgram) -> ModularProgram {
    let mut binders = BTreeMap::new();
    collect_binders(p, &mut binders);
    let root_free = p.free_predicates();
    let clashing: BTreeSet<PredicateSymbol> =
        binders.into_iter().filter(|(s, n)| *n > 1 || root_free.contains(s)).map(|(s, _)| s).collect();
    if clashing.is_empty() {
        return p.clone();
    }
    let mut used: BTreeSet<String> = p.predicates().into_iter().map(|s| s.name).collect();
    rename_hidden(p, &clashing, &mut used)
}

fn rename_hidden(p: &ModularProgram, clashing: &BTreeSet<PredicateSymbol>, used: &mut BTreeSet<String>) -> ModularProgram {
    let mut node = ModularProgram {
        public: p.public.clone(),
        members: p
            .members
            .iter()
            .map(|m| match m {
                Member::Program(q) => Member::Program(rename_hidden(q, clashing, used)),
                d => d.clone(),
            })
            .collect(),
        meta: p.meta.clone(),
    };
    let mut map = BTreeMap::new();
    for s in node.hidden().intersection(clashing) {
        let name = (1..).map(|k| format!("{}__{k}", s.name)).find(|n| !used.contains(n)).expect("unbounded");
        used.insert(name.clone());
        map.insert(s.clone(), PredicateSymbol::new(name, s.arity));
    }
    if !map.is_empty() {
        node = node.rename_predicates(&map);
    }
    node
}

#[derive(Clone, Debug, Serialize)]
pub struct CoherenceReport {
    pub simple: bool,
    pub alpha_nf: bool,
    pub disjoint_intensional: bool,
    pub scc_covered: bool,
    pub coherent: bool,
    pub violations: Vec<Diagnostic>,
}

fn at(d: &DefModule, msg: String) -> Diagnostic {
    Diagnostic::error(d.meta.line, d.meta.column, msg)
}

/// Simple, in alpha-normal form, pairwise disjoint intensional sets, and
/// every strongly connected component inside one def-module.
pub fn is_coherent(p: &ModularProgram) -> CoherenceReport {
    let mut violations = Vec::new();
    let labels = labels(p);
    let defmods = p.defmods();
    let mut simple = true;
    for (d, l) in defmods.iter().zip(&labels) {
        for r in &d.rules {
            for h in r.head_predicates() {
                if !d.intensional.contains(&h) {
                    simple = false;
                    violations.push(at(d, format!("{l}: head symbol {h} is not intensional")));
                }
            }
        }
    }
    let alpha_nf = alpha_nf_check(p).unwrap_or(false);
    if !alpha_nf {
        violations.push(Diagnostic::error(0, 0, "a hidden symbol is hidden twice or also occurs free"));
    }
    let mut disjoint = true;
    let mut owner: BTreeMap<&PredicateSymbol, &str> = BTreeMap::new();
    for (d, l) in defmods.iter().zip(&labels) {
        for s in &d.intensional {
            if let Some(prev) = owner.insert(s, l) {
                disjoint = false;
                violations.push(at(d, format!("{s} is intensional in both {prev} and {l}")));
            }
        }
    }
    let mut covered = true;
    let intensional = p.intensional();
    for c in sccs(&dependency_graph(p)) {
        if c.is_disjoint(&intensional) {
            continue;
        }
        if !defmods.iter().any(|d| c.is_subset(&d.intensional)) {
            covered = false;
            let names: Vec<String> = c.iter().map(|s| s.to_string()).collect();
            violations.push(Diagnostic::error(0, 0, format!("component {{{}}} spans several def-modules", names.join(", "))));
        }
    }
    CoherenceReport {
        simple,
        alpha_nf,
        disjoint_intensional: disjoint,
        scc_covered: covered,
        coherent: simple && alpha_nf && disjoint && covered,
        violations,
    }
}

/// `<S, defmods>`. Meaningful for programs in alpha-normal form; otherwise a
/// warning is returned with the result.
pub fn flatten(p: &ModularProgram) -> (ModularProgram, Option<Diagnostic>) {
    let warn = match alpha_nf_check(p) {
        Ok(true) => None,
        _ => Some(Diagnostic::warning(0, 0, "flattening a program that is not in alpha-normal form may change its models")),
    };
    let mut flat = ModularProgram::new(p.public.clone(), p.defmods().into_iter().cloned().map(Member::Def).collect());
    flat.meta = p.meta.clone();
    (flat, warn)
}

/// Display names for the def-modules in pre-order: an explicit label, else
/// `M<k>` for modules with intensional symbols and `D<k>` for denial modules.
pub fn labels(p: &ModularProgram) -> Vec<String> {
    let (mut m, mut d) = (0, 0);
    p.defmods()
        .into_iter()
        .map(|x| match x.label() {
            Some(l) => l.to_string(),
            None if x.is_denial_only() => {
                d += 1;
                format!("D{d}")
            }
            None => {
                m += 1;
                format!("M{m}")
            }
        })
        .collect()
}

fn node_name(s: &PredicateSymbol, g: &DependencyGraph) -> String {
    if g.nodes.iter().filter(|n| n.name == s.name).count() > 1 {
        s.to_string()
    } else {
        s.name.clone()
    }
}

pub fn to_dot(g: &DependencyGraph) -> String {
    let mut out = String::from("digraph {\n");
    for n in &g.nodes {
        let _ = writeln!(out, "  \"{}\";", node_name(n, g));
    }
    for (a, b) in &g.edges {
        let _ = writeln!(out, "  \"{}\" -> \"{}\";", node_name(a, g), node_name(b, g));
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_program;

    fn sym(n: &str, a: usize) -> PredicateSymbol {
        PredicateSymbol::new(n, a)
    }

    #[test]
    fn comparisons_and_negation_add_no_edges() {
        let (p, _) = parse_program("def p/1 { p(X) :- q(X), not p(X), X != a. } def q/1 { q(a). }").unwrap();
        let g = dependency_graph(&p);
        assert_eq!(g.edges, BTreeSet::from([(sym("p", 1), sym("q", 1))]));
    }

    #[test]
    fn self_loop_is_not_tight() {
        let (p, _) = parse_program("def r/2 { r(X,Y) :- e(X,Y). r(X,Y) :- r(X,Z), r(Z,Y). }").unwrap();
        assert!(!is_tight(p.defmods()[0]));
        let (q, _) = parse_program("def v/1 { v(X) :- e(X,Y). }").unwrap();
        assert!(is_tight(q.defmods()[0]));
    }

    #[test]
    fn sibling_hiding_is_not_alpha_normal() {
        let src = "#show p/1. module a show p/1 { def r/1 { r(x). } def p/1 { p(X) :- r(X). } } module b show p/1 { def r/1 { r(y). } def { :- p(X), r(X). } }";
        let (p, _) = parse_program(src).unwrap();
        assert!(!alpha_nf_check(&p).unwrap());
        let n = alpha_normalize(&p);
        assert!(alpha_nf_check(&n).unwrap());
        let names: BTreeSet<String> = n.predicates().into_iter().map(|s| s.name).collect();
        assert!(names.contains("r__1") && names.contains("r__2"), "{names:?}");
        assert_eq!(alpha_normalize(&n), n);
    }

    #[test]
    fn hidden_symbol_free_elsewhere_is_renamed() {
        let src = "#show p/1, r/1. module a show p/1 { def r/1 { r(x). } def p/1 { p(X) :- r(X). } } def r/1 { r(y). }";
        let (p, _) = parse_program(src).unwrap();
        assert!(!alpha_nf_check(&p).unwrap());
        let n = alpha_normalize(&p);
        assert!(alpha_nf_check(&n).unwrap());
        assert!(n.public.contains(&sym("r", 1)));
    }

    #[test]
    fn overlapping_intensional_sets_are_incoherent() {
        let (p, _) = parse_program("def p/1 { p(a). } def p/1 { p(b). }").unwrap();
        let r = is_coherent(&p);
        assert!(!r.disjoint_intensional && !r.coherent);
        assert!(!r.violations.is_empty());
    }

    #[test]
    fn cycle_across_modules_is_incoherent() {
        let (p, _) = parse_program("def p/1 { p(X) :- q(X). } def q/1 { q(X) :- p(X). q(a). }").unwrap();
        let r = is_coherent(&p);
        assert!(!r.scc_covered);
    }

    #[test]
    fn dot_lists_nodes_and_edges() {
        let (p, _) = parse_program("def r/2 { r(X,Y) :- in(X,Y). } def in/2 { in(a,b). }").unwrap();
        let dot = to_dot(&dependency_graph(&p));
        assert!(dot.contains("\"r\" -> \"in\";"), "{dot}");
        assert!(dot.starts_with("digraph {"));
    }
}
