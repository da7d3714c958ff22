//! The stable model operator and the second-order reading of modular programs.

use std::collections::{BTreeMap, BTreeSet};

use crate::ast::{Atom, DefModule, Formula, Member, ModularProgram, PredTarget, PredicateSymbol, PredicateVariable, Term, Variable};
use crate::error::{Error, Result};

/// `F*`: atoms of intensional symbols are replaced by their predicate
/// variable, and every implication `G -> H` becomes `(G* -> H*) & (G -> H)`.
pub fn star(f: &Formula, ctx: &BTreeMap<PredicateSymbol, PredicateVariable>) -> Formula {
    let rec = |g: &Formula| Box::new(star(g, ctx));
    match f {
        Formula::Atom(a) => match ctx.get(&a.pred) {
            Some(u) => Formula::PredVarAtom(u.clone(), a.args.clone()),
            None => f.clone(),
        },
        Formula::Bottom | Formula::PredVarAtom(..) | Formula::Equal(..) => f.clone(),
        Formula::And(a, b) => Formula::And(rec(a), rec(b)),
        Formula::Or(a, b) => Formula::Or(rec(a), rec(b)),
        Formula::Implies(a, b) => Formula::and(Formula::Implies(rec(a), rec(b)), f.clone()),
        Formula::ForallFO(v, b) => Formula::ForallFO(v.clone(), rec(b)),
        Formula::ExistsFO(v, b) => Formula::ExistsFO(v.clone(), rec(b)),
        Formula::ForallSO(v, b) => Formula::ForallSO(v.clone(), rec(b)),
        Formula::ExistsSO(v, b) => Formula::ExistsSO(v.clone(), rec(b)),
    }
}

fn arg_vars(n: usize) -> Vec<Variable> {
    (1..=n).map(|i| Variable(format!("X{i}"))).collect()
}

fn pred_formula(p: &PredTarget, args: &[Variable]) -> Formula {
    let terms: Vec<Term> = args.iter().cloned().map(Term::Variable).collect();
    match p {
        PredTarget::Symbol(s) => Formula::Atom(Atom { pred: s.clone(), args: terms }),
        PredTarget::Var(v) => Formula::PredVarAtom(v.clone(), terms),
    }
}

/// `forall x (a(x) -> b(x))`.
pub fn subset_formula(a: &PredTarget, b: &PredTarget, arity: usize) -> Formula {
    let xs = arg_vars(arity);
    Formula::forall_all(&xs, Formula::implies(pred_formula(a, &xs), pred_formula(b, &xs)))
}

/// `(U <= p) & not (p <= U)` componentwise over the tuples.
pub fn strictly_below(us: &[PredicateVariable], ps: &[PredicateSymbol]) -> Formula {
    let le =
        Formula::conj(us.iter().zip(ps).map(|(u, p)| subset_formula(&PredTarget::Var(u.clone()), &PredTarget::Symbol(p.clone()), p.arity)));
    let ge =
        Formula::conj(us.iter().zip(ps).map(|(u, p)| subset_formula(&PredTarget::Symbol(p.clone()), &PredTarget::Var(u.clone()), p.arity)));
    Formula::and(le, Formula::neg(ge))
}

/// Predicate variables `U1..Un` standing for the intensional symbols.
pub fn star_variables(p: &BTreeSet<PredicateSymbol>) -> BTreeMap<PredicateSymbol, PredicateVariable> {
    p.iter().enumerate().map(|(i, s)| (s.clone(), PredicateVariable::new(format!("U{}", i + 1), s.arity))).collect()
}

/// `SM_p[F] = F & not exists U ((U < p) & F*(U))`; `F` itself when `p` is empty.
pub fn sm(p: &BTreeSet<PredicateSymbol>, f: &Formula) -> Result<Formula> {
    if !f.is_first_order() {
        return Err(Error::Precondition("the stable model operator expects a first-order formula".into()));
    }
    if p.is_empty() {
        return Ok(f.clone());
    }
    let ctx = star_variables(p);
    let ps: Vec<PredicateSymbol> = ctx.keys().cloned().collect();
    let us: Vec<PredicateVariable> = ctx.values().cloned().collect();
    let body = Formula::and(strictly_below(&us, &ps), star(f, &ctx));
    let ex = us.iter().rev().fold(body, |b, u| Formula::ExistsSO(u.clone(), Box::new(b)));
    Ok(Formula::and(f.clone(), Formula::neg(ex)))
}

/// Replaces each symbol of `h` by a fresh predicate variable `<name>__k` and
/// binds it existentially, first symbol outermost.
pub fn hide(h: &BTreeSet<PredicateSymbol>, f: &Formula) -> Result<Formula> {
    let mut used: BTreeSet<String> = f.predicate_variables().into_iter().map(|v| v.name).collect();
    let mut map = BTreeMap::new();
    let mut vars = Vec::new();
    for s in h {
        let name = (1..).map(|k| format!("{}__{k}", s.name)).find(|n| !used.contains(n)).expect("unbounded range");
        used.insert(name.clone());
        let v = PredicateVariable::new(name, s.arity);
        map.insert(s.clone(), PredTarget::Var(v.clone()));
        vars.push(v);
    }
    let body = f.rename_predicates(&map)?;
    Ok(vars.into_iter().rev().fold(body, |b, v| Formula::ExistsSO(v, Box::new(b))))
}

/// The formula of a def-module: `SM_p[rules]`.
pub fn phi_def(d: &DefModule) -> Result<Formula> {
    sm(&d.intensional, &d.rules_formula()?)
}

/// The second-order formula of a program. A def-module contributes its
/// stable model formula; a program node hides what it does not make public.
pub fn phi(p: &ModularProgram) -> Result<Formula> {
    let conj = Formula::conj(p.members.iter().map(phi_member).collect::<Result<Vec<_>>>()?);
    hide(&p.hidden(), &conj)
}

pub fn phi_member(m: &Member) -> Result<Formula> {
    match m {
        Member::Def(d) => phi_def(d),
        Member::Program(p) => phi(p),
    }
}

/// The conjunction of the formulas of all members outside `target`,
/// descending into members that contain it.
pub fn phi_minus(p: &ModularProgram, target: &ModularProgram) -> Result<Formula> {
    if p == target {
        return Ok(Formula::top());
    }
    if !p.contains(target) {
        return Err(Error::Precondition("target module does not occur in the host program".into()));
    }
    fn collect(p: &ModularProgram, target: &ModularProgram, out: &mut Vec<Formula>) -> Result<()> {
        for m in &p.members {
            match m {
                Member::Program(q) if q == target => {}
                Member::Program(q) if q.contains(target) => collect(q, target, out)?,
                m => out.push(phi_member(m)?),
            }
        }
        Ok(())
    }
    let mut out = Vec::new();
    collect(p, target, &mut out)?;
    Ok(Formula::conj(out))
}

/// `F(Pi)`: the conjunction of every rule formula in every def-module.
pub fn rules_conjunction(p: &ModularProgram) -> Result<Formula> {
    Ok(Formula::conj(p.defmods().into_iter().map(|d| d.rules_formula().map_err(Error::from)).collect::<Result<Vec<_>>>()?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_program;

    fn sym(n: &str, a: usize) -> PredicateSymbol {
        PredicateSymbol::new(n, a)
    }

    #[test]
    fn star_leaves_extensional_atoms() {
        let (p, _) = parse_program("def in/2 { {in(X,Y)} :- edge(X,Y). }").unwrap();
        let f = p.defmods()[0].rules_formula().unwrap();
        let ctx = star_variables(&BTreeSet::from([sym("in", 2)]));
        let s = star(&f, &ctx);
        assert!(s.predicates().contains(&sym("edge", 2)));
        assert!(s.free_predicate_variables().contains(&PredicateVariable::new("U1", 2)));
    }

    #[test]
    fn sm_with_no_intensional_symbols_is_identity() {
        let f = Formula::Atom(Atom::new("p", vec![]));
        assert_eq!(sm(&BTreeSet::new(), &f).unwrap(), f);
    }

    #[test]
    fn sm_rejects_second_order_input() {
        let u = PredicateVariable::new("R", 0);
        let f = Formula::ExistsSO(u.clone(), Box::new(Formula::PredVarAtom(u, vec![])));
        assert!(sm(&BTreeSet::from([sym("p", 0)]), &f).is_err());
    }

    #[test]
    fn sm_free_predicates_are_formula_and_intensional() {
        let f = Formula::Atom(Atom::new("q", vec![]));
        let g = sm(&BTreeSet::from([sym("p", 0)]), &f).unwrap();
        assert_eq!(g.predicates(), BTreeSet::from([sym("p", 0), sym("q", 0)]));
        assert!(g.free_predicate_variables().is_empty());
    }

    #[test]
    fn hiding_uses_indexed_variable_names() {
        let (p, _) =
            parse_program("module cn show vertex/1, in/2 { def r/2 { r(X,Y) :- in(X,Y). } def { :- not r(X,Y), vertex(X), vertex(Y). } }")
                .unwrap();
        let Member::Program(cn) = &p.members[0] else { panic!() };
        let f = phi(cn).unwrap();
        match &f {
            Formula::ExistsSO(v, _) => assert_eq!(v.name, "r__1"),
            other => panic!("{other}"),
        }
        assert_eq!(f.predicates(), BTreeSet::from([sym("in", 2), sym("vertex", 1)]));
    }

    #[test]
    fn phi_minus_of_whole_program_is_top() {
        let (p, _) = parse_program("p(a).").unwrap();
        assert!(phi_minus(&p, &p).unwrap().is_top());
        let (q, _) = parse_program("module x show q/1 { q(a). }").unwrap();
        let Member::Program(inner) = &q.members[0] else { panic!() };
        assert!(phi_minus(&p, inner).is_err());
    }
}
