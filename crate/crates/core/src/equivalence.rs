//! Bounded checks of contextual strong equivalence and of equal answer sets.

use std::collections::BTreeSet;
use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use crate::ast::{Constant, Formula, Member, ModularProgram, PredicateSymbol};
use crate::error::{Error, Result};
use crate::eval::{self, evaluate, Domain, Interpretation, SOAssignment, SolveOptions};
use crate::sm;

/// Which program a counterexample satisfies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum EquivVerdict {
    EquivalentUpToBound {
        #[serde(serialize_with = "ser_domain")]
        domain: Domain,
    },
    Counterexample {
        #[serde(serialize_with = "ser_interpretation")]
        interpretation: Interpretation,
        holds_in: Side,
    },
}

fn ser_domain<S: serde::Serializer>(d: &Domain, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(d.constants().iter().map(|c| c.0.as_str()))
}

fn ser_interpretation<S: serde::Serializer>(i: &Interpretation, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(i.atom_strings())
}

impl EquivVerdict {
    pub fn is_equivalent(&self) -> bool {
        matches!(self, EquivVerdict::EquivalentUpToBound { .. })
    }
}

impl fmt::Display for EquivVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EquivVerdict::EquivalentUpToBound { domain } => write!(f, "equivalent up to bound {domain}"),
            EquivVerdict::Counterexample { interpretation, holds_in } => {
                let side = match holds_in {
                    Side::Left => "first",
                    Side::Right => "second",
                };
                write!(f, "counterexample (model of the {side} program only):\n{interpretation}")
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct EquivOptions {
    pub jobs: Option<usize>,
    pub max_branch: u64,
}

impl Default for EquivOptions {
    fn default() -> Self {
        EquivOptions { jobs: None, max_branch: eval::DEFAULT_MAX_BRANCH }
    }
}

/// The domain used when none is given: the programs' constants, or a single
/// fresh constant when they have none.
pub fn default_bound(programs: &[&ModularProgram]) -> Domain {
    let cs: BTreeSet<Constant> = programs.iter().flat_map(|p| p.constants()).collect();
    if cs.is_empty() {
        Domain::new([Constant::new("c1")])
    } else {
        Domain::new(cs)
    }
}

fn in_pool<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match jobs {
        None => Ok(f()),
        Some(n) => {
            let pool =
                rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build().map_err(|e| Error::Resource(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// Subsets of `0..n` with exactly `k` elements, in lexicographic order.
fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..k).collect();
    if k > n {
        return out;
    }
    loop {
        out.push(cur.clone());
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] != i + n - k {
                break;
            }
        }
        cur[i] += 1;
        for j in i + 1..k {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

/// Checks `Gamma |= Phi(a) <-> Phi(b)` over every interpretation of the
/// shared free symbols with the given domain. Interpretations are tried by
/// increasing size; within a size the canonically smallest witness wins.
pub fn strong_equiv_bounded(
    a: &ModularProgram,
    b: &ModularProgram,
    gamma: &[Formula],
    dom: &Domain,
    opts: &EquivOptions,
) -> Result<EquivVerdict> {
    if dom.is_empty() {
        return Err(Error::Domain("empty domain bound".into()));
    }
    let sig = a.free_predicates();
    let other = b.free_predicates();
    if sig != other {
        return Err(Error::Precondition(format!("public signatures differ: {} vs {}", sym_list(&sig), sym_list(&other))));
    }
    let dom = dom.union(&Domain::new(a.constants().into_iter().chain(b.constants())));
    for g in gamma {
        if let Some(p) = g.predicates().difference(&sig).next() {
            return Err(Error::Precondition(format!("context symbol {p} is not public in the programs")));
        }
    }
    let atoms: Vec<(PredicateSymbol, Vec<Constant>)> =
        sig.iter().flat_map(|p| dom.tuples(p.arity).into_iter().map(move |t| (p.clone(), t))).collect();
    if atoms.len() >= 63 || (1u64 << atoms.len()) > opts.max_branch {
        return Err(Error::Resource(format!("{} ground public atoms are too many to enumerate", atoms.len())));
    }
    let check = |pick: &[usize]| -> Result<Option<(Interpretation, Side)>> {
        let mut i = Interpretation::new();
        for &k in pick {
            i.insert(&atoms[k].0, atoms[k].1.clone());
        }
        for g in gamma {
            if !evaluate(g, &dom, &i, &SOAssignment::new())? {
                return Ok(None);
            }
        }
        let x = eval::is_model(a, &dom, &i, opts.max_branch)?;
        let y = eval::is_model(b, &dom, &i, opts.max_branch)?;
        Ok(match (x, y) {
            (true, false) => Some((i, Side::Left)),
            (false, true) => Some((i, Side::Right)),
            _ => None,
        })
    };
    in_pool(opts.jobs, || {
        for k in 0..=atoms.len() {
            let found: Vec<(Interpretation, Side)> =
                combinations(atoms.len(), k).par_iter().map(|c| check(c)).collect::<Result<Vec<_>>>()?.into_iter().flatten().collect();
            if let Some((i, side)) = found.into_iter().min_by_key(|(i, _)| i.atom_strings()) {
                return Ok(EquivVerdict::Counterexample { interpretation: i, holds_in: side });
            }
        }
        Ok(EquivVerdict::EquivalentUpToBound { domain: dom.clone() })
    })?
}

/// Re-checks a counterexample with the generic second-order evaluator: it
/// must satisfy the context and exactly one of the two program formulas.
pub fn verify_counterexample(a: &ModularProgram, b: &ModularProgram, gamma: &[Formula], dom: &Domain, i: &Interpretation) -> Result<bool> {
    let dom = dom.union(&Domain::new(a.constants().into_iter().chain(b.constants())));
    let so = SOAssignment::new();
    for g in gamma {
        if !evaluate(g, &dom, i, &so)? {
            return Ok(false);
        }
    }
    let x = evaluate(&sm::phi(a)?, &dom, i, &so)?;
    let y = evaluate(&sm::phi(b)?, &dom, i, &so)?;
    Ok(x != y)
}

/// Compares the answer sets of two programs.
pub fn same_answer_sets(a: &ModularProgram, b: &ModularProgram, opts: &SolveOptions) -> Result<EquivVerdict> {
    if a.public != b.public {
        return Err(Error::Precondition(format!("public sets differ: {} vs {}", sym_list(&a.public), sym_list(&b.public))));
    }
    let mut opts = opts.clone();
    if opts.domain_override.is_none() {
        opts.domain_override = Some(default_bound(&[a, b]));
    }
    let x = eval::answer_sets(a, &opts)?;
    let y = eval::answer_sets(b, &opts)?;
    let only_x = x.iter().find(|i| !y.contains(i)).map(|i| (i.clone(), Side::Left));
    let only_y = y.iter().find(|i| !x.contains(i)).map(|i| (i.clone(), Side::Right));
    let witness = [only_x, only_y].into_iter().flatten().min_by_key(|(i, _)| i.atom_strings());
    Ok(match witness {
        Some((i, side)) => EquivVerdict::Counterexample { interpretation: i, holds_in: side },
        None => EquivVerdict::EquivalentUpToBound { domain: opts.domain_override.expect("set above") },
    })
}

/// `host[old/new]`: every occurrence of `old` replaced by `new`.
pub fn replace(host: &ModularProgram, old: &ModularProgram, new: &ModularProgram) -> Result<ModularProgram> {
    if !host.contains(old) {
        return Err(Error::Precondition("the module to replace does not occur in the host program".into()));
    }
    Ok(host.replace(old, new))
}

/// The members of `host` outside `target` as one program whose public set
/// is everything they mention freely.
pub fn context_program(host: &ModularProgram, target: &ModularProgram) -> Result<ModularProgram> {
    fn collect(p: &ModularProgram, target: &ModularProgram, out: &mut Vec<Member>) {
        for m in &p.members {
            match m {
                Member::Program(q) if q == target => {}
                Member::Program(q) if q.contains(target) => collect(q, target, out),
                m => out.push(m.clone()),
            }
        }
    }
    if !host.contains(target) {
        return Err(Error::Precondition("target module does not occur in the host program".into()));
    }
    let mut members = Vec::new();
    if host != target {
        collect(host, target, &mut members);
    }
    let public: BTreeSet<PredicateSymbol> = members.iter().flat_map(|m| m.free_predicates()).collect();
    Ok(ModularProgram::new(public, members))
}

/// Whether `Phi(host - target) |= Gamma` holds over the domain.
pub fn context_entails(host: &ModularProgram, target: &ModularProgram, gamma: &[Formula], dom: &Domain, max_branch: u64) -> Result<bool> {
    let ctx = context_program(host, target)?;
    let extra: BTreeSet<PredicateSymbol> = gamma.iter().flat_map(|g| g.predicates()).filter(|p| !ctx.public.contains(p)).collect();
    let models = eval::models(&ctx, dom, &Interpretation::new(), &BTreeSet::new(), max_branch)?;
    let extra: Vec<PredicateSymbol> = extra.into_iter().collect();
    for m in models {
        for e in eval::all_interpretations(&extra, dom, max_branch)? {
            let i = m.merge(&e);
            for g in gamma {
                if !evaluate(g, dom, &i, &SOAssignment::new())? {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

fn sym_list(s: &BTreeSet<PredicateSymbol>) -> String {
    let v: Vec<String> = s.iter().map(|p| p.to_string()).collect();
    format!("{{{}}}", v.join(", "))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_program;

    fn prog(src: &str) -> ModularProgram {
        parse_program(src).unwrap().0
    }

    #[test]
    fn combinations_are_lexicographic() {
        assert_eq!(combinations(4, 2), vec![vec![0, 1], vec![0, 2], vec![0, 3], vec![1, 2], vec![1, 3], vec![2, 3]]);
        assert_eq!(combinations(3, 0), vec![Vec::<usize>::new()]);
        assert!(combinations(2, 3).is_empty());
    }

    #[test]
    fn program_is_equivalent_to_itself() {
        let p = prog("#show p/1, e/1. def p/1 { p(X) :- e(X), not q(X). } def q/1 { q(X) :- e(X), not p(X). }");
        let dom = Domain::from_names(&["a", "b"]);
        assert!(strong_equiv_bounded(&p, &p, &[], &dom, &EquivOptions::default()).unwrap().is_equivalent());
    }

    #[test]
    fn choice_differs_from_definition() {
        let a = prog("#show p/1, e/1. def p/1 { {p(X)} :- e(X). }");
        let b = prog("#show p/1, e/1. def p/1 { p(X) :- e(X). }");
        let dom = Domain::from_names(&["a"]);
        let v = strong_equiv_bounded(&a, &b, &[], &dom, &EquivOptions::default()).unwrap();
        match v {
            EquivVerdict::Counterexample { interpretation, holds_in } => {
                assert_eq!(interpretation.to_string(), "e(a)");
                assert_eq!(holds_in, Side::Left);
                assert!(verify_counterexample(&a, &b, &[], &dom, &interpretation).unwrap());
            }
            v => panic!("{v}"),
        }
    }

    #[test]
    fn signatures_must_match() {
        let a = prog("#show p/1. def p/1 { p(a). }");
        let b = prog("#show q/1. def q/1 { q(a). }");
        assert!(strong_equiv_bounded(&a, &b, &[], &Domain::from_names(&["a"]), &EquivOptions::default()).is_err());
    }

    #[test]
    fn replace_needs_occurrence() {
        let host = prog("module m show p/1 { def p/1 { p(a). } }");
        let Member::Program(old) = &host.members[0] else { panic!() };
        let new = prog("#show p/1. def p/1 { p(b). }");
        let r = replace(&host, old, &new).unwrap();
        assert!(r.contains(&new));
        assert!(replace(&new, old, &host).is_err());
    }
}
