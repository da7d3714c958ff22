//! Rewritings of def-modules into first-order or circumscriptive form.

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use crate::analysis;
use crate::ast::{Atom, DefModule, Formula, PredTarget, PredicateSymbol, Rule, Term, Variable};
use crate::error::{Error, Result};
use crate::eval::{self, Domain, Interpretation};
use crate::sm;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ReductionKind {
    Denials,
    Completion,
    Choice,
    Circumscription,
}

impl fmt::Display for ReductionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReductionKind::Denials => "denials",
            ReductionKind::Completion => "completion",
            ReductionKind::Choice => "choice",
            ReductionKind::Circumscription => "circumscription",
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ReductionResult {
    pub kind: ReductionKind,
    pub applicable: bool,
    #[serde(serialize_with = "ser_formula")]
    pub residual: Option<Formula>,
    pub reason: Option<String>,
}

fn ser_formula<S: serde::Serializer>(f: &Option<Formula>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match f {
        Some(f) => s.serialize_some(&f.to_string()),
        None => s.serialize_none(),
    }
}

impl ReductionResult {
    fn ok(kind: ReductionKind, residual: Formula) -> Self {
        ReductionResult { kind, applicable: true, residual: Some(residual), reason: None }
    }

    fn no(kind: ReductionKind, reason: impl Into<String>) -> Self {
        ReductionResult { kind, applicable: false, residual: None, reason: Some(reason.into()) }
    }
}

/// Splits off the denials: the module without them, and their conjunction
/// as closed first-order formulas.
pub fn extract_denials(m: &DefModule) -> Result<(DefModule, Formula)> {
    let (denials, rest): (Vec<&Rule>, Vec<&Rule>) = m.rules.iter().partition(|r| r.is_denial());
    let f = Formula::conj(denials.into_iter().map(Rule::to_formula).collect::<std::result::Result<Vec<_>, _>>()?);
    let mut kept = m.clone();
    kept.rules = rest.into_iter().cloned().collect();
    Ok((kept, f))
}

fn fresh_args(m: &DefModule, arity: usize) -> Vec<Variable> {
    let used: BTreeSet<Variable> = m.rules.iter().flat_map(|r| r.variables()).collect();
    let mut out = Vec::new();
    let mut k = 1;
    while out.len() < arity {
        let v = Variable(format!("X{k}"));
        if !used.contains(&v) {
            out.push(v);
        }
        k += 1;
    }
    out
}

fn head_atom(p: &PredicateSymbol, xs: &[Variable]) -> Formula {
    Formula::Atom(Atom { pred: p.clone(), args: xs.iter().cloned().map(Term::Variable).collect() })
}

/// `exists vars (body & x1 = t1 & ... )` for a rule with head `p(t)`.
fn rule_disjunct(r: &Rule, xs: &[Variable], body: Vec<Formula>) -> Formula {
    let eqs = xs.iter().zip(&r.head[0].args).map(|(x, t)| Formula::Equal(Term::Variable(x.clone()), t.clone()));
    let parts: Vec<Formula> = body.into_iter().chain(eqs).collect();
    Formula::exists_all(&r.variables(), Formula::conj(parts))
}

fn check_normal(m: &DefModule) -> Result<()> {
    if let Some(r) = m.rules.iter().find(|r| r.is_disjunctive()) {
        return Err(Error::Precondition(format!("rule `{r}` has a disjunctive head")));
    }
    for r in &m.rules {
        r.check_safe()?;
        if let Some(h) = r.head.first() {
            if !m.intensional.contains(&h.pred) {
                return Err(Error::Precondition(format!("head symbol {} of `{r}` is not intensional", h.pred)));
            }
        }
    }
    Ok(())
}

fn definitions(m: &DefModule) -> Vec<(PredicateSymbol, Vec<Variable>, Formula)> {
    m.intensional
        .iter()
        .map(|p| {
            let xs = fresh_args(m, p.arity);
            let g = Formula::disj(
                m.rules.iter().filter(|r| r.head.first().is_some_and(|h| h.pred == *p)).map(|r| rule_disjunct(r, &xs, r.body_formulas())),
            );
            (p.clone(), xs, g)
        })
        .collect()
}

/// One implication `forall x (G_p -> p(x))` per intensional symbol, followed
/// by the module's denials.
pub fn clark_normal_form(m: &DefModule) -> Result<Formula> {
    check_normal(m)?;
    let (_, denials) = extract_denials(m)?;
    let mut parts: Vec<Formula> =
        definitions(m).into_iter().map(|(p, xs, g)| Formula::forall_all(&xs, Formula::implies(g, head_atom(&p, &xs)))).collect();
    if !denials.is_top() {
        parts.push(denials);
    }
    Ok(Formula::conj(parts))
}

/// Completion: each implication of the Clark normal form strengthened to an
/// equivalence. Applicable to tight modules.
pub fn completion(m: &DefModule) -> ReductionResult {
    let kind = ReductionKind::Completion;
    if let Err(e) = check_normal(m) {
        return ReductionResult::no(kind, e.to_string());
    }
    if !analysis::is_tight(m) {
        return ReductionResult::no(kind, "module is not tight");
    }
    let denials = match extract_denials(m) {
        Ok((_, d)) => d,
        Err(e) => return ReductionResult::no(kind, e.to_string()),
    };
    let mut parts: Vec<Formula> =
        definitions(m).into_iter().map(|(p, xs, g)| Formula::forall_all(&xs, Formula::iff(g, head_atom(&p, &xs)))).collect();
    if !denials.is_top() {
        parts.push(denials);
    }
    ReductionResult::ok(kind, Formula::conj(parts))
}

fn distinct_variables(args: &[Term]) -> Option<Vec<Variable>> {
    let vars: Vec<Variable> = args.iter().filter_map(|t| t.as_variable().cloned()).collect();
    let set: BTreeSet<&Variable> = vars.iter().collect();
    (vars.len() == args.len() && set.len() == vars.len()).then_some(vars)
}

/// For a module of choice rules: `forall x (p(x) -> G)` per intensional symbol.
pub fn reduce_choice(m: &DefModule) -> ReductionResult {
    let kind = ReductionKind::Choice;
    if !m.rules.iter().any(|r| r.choice) {
        return ReductionResult::no(kind, "module has no choice rules");
    }
    if let Some(r) = m.rules.iter().find(|r| !r.is_denial() && !r.choice) {
        return ReductionResult::no(kind, format!("rule `{r}` is not a choice rule"));
    }
    if let Err(e) = check_normal(m) {
        return ReductionResult::no(kind, e.to_string());
    }
    let mut parts = Vec::new();
    for p in &m.intensional {
        let rules: Vec<&Rule> = m.rules.iter().filter(|r| r.head.first().is_some_and(|h| h.pred == *p)).collect();
        let body = |r: &Rule| {
            let mut c = r.clone();
            c.choice = false;
            c.body_formulas()
        };
        let single = match rules.as_slice() {
            [r] => distinct_variables(&r.head[0].args).map(|xs| (r, xs)),
            _ => None,
        };
        let f = match single {
            Some((r, xs)) => {
                let inner: Vec<Variable> = r.variables().into_iter().filter(|v| !xs.contains(v)).collect();
                let g = Formula::exists_all(&inner, Formula::conj(body(r)));
                Formula::forall_all(&xs, Formula::implies(head_atom(p, &xs), g))
            }
            None => {
                let xs = fresh_args(m, p.arity);
                let g = Formula::disj(rules.iter().map(|r| rule_disjunct(r, &xs, body(r))));
                Formula::forall_all(&xs, Formula::implies(head_atom(p, &xs), g))
            }
        };
        parts.push(f);
    }
    match extract_denials(m) {
        Ok((_, d)) if !d.is_top() => parts.push(d),
        Ok(_) => {}
        Err(e) => return ReductionResult::no(kind, e.to_string()),
    }
    ReductionResult::ok(kind, Formula::conj(parts))
}

/// `CIRC_p[F] = F & not exists U ((U < p) & F(U))`.
pub fn circ_formula(p: &BTreeSet<PredicateSymbol>, f: &Formula) -> Result<Formula> {
    if p.is_empty() {
        return Ok(f.clone());
    }
    let ctx = sm::star_variables(p);
    let map = ctx.iter().map(|(s, u)| (s.clone(), PredTarget::Var(u.clone()))).collect();
    let renamed = f.rename_predicates(&map)?;
    let ps: Vec<PredicateSymbol> = ctx.keys().cloned().collect();
    let us: Vec<_> = ctx.values().cloned().collect();
    let body = Formula::and(sm::strictly_below(&us, &ps), renamed);
    let ex = us.iter().rev().fold(body, |b, u| Formula::ExistsSO(u.clone(), Box::new(b)));
    Ok(Formula::and(f.clone(), Formula::neg(ex)))
}

fn negation_free(m: &DefModule) -> std::result::Result<(), String> {
    match m.rules.iter().find(|r| !r.is_negation_free()) {
        Some(r) => Err(format!("rule `{r}` uses negation")),
        None => Ok(()),
    }
}

/// The circumscription formula of a negation-free module.
pub fn circumscription(m: &DefModule) -> ReductionResult {
    let kind = ReductionKind::Circumscription;
    if let Err(e) = negation_free(m) {
        return ReductionResult::no(kind, e);
    }
    match m.rules_formula().map_err(Error::from).and_then(|f| circ_formula(&m.intensional, &f)) {
        Ok(f) => ReductionResult::ok(kind, f),
        Err(e) => ReductionResult::no(kind, e.to_string()),
    }
}

/// Minimal models of a negation-free module over the domain, extending
/// `fixed` on its extensional symbols. Found by direct enumeration.
pub fn circumscribe(m: &DefModule, dom: &Domain, fixed: &Interpretation) -> Result<Vec<Interpretation>> {
    negation_free(m).map_err(Error::Precondition)?;
    eval::minimal_models(m, dom, fixed, eval::DEFAULT_MAX_BRANCH)
}

pub fn denials(m: &DefModule) -> ReductionResult {
    let kind = ReductionKind::Denials;
    match extract_denials(m) {
        Ok((_, f)) if f.is_top() => ReductionResult::no(kind, "module has no denials"),
        Ok((_, f)) => ReductionResult::ok(kind, f),
        Err(e) => ReductionResult::no(kind, e.to_string()),
    }
}

/// Every reduction, applicable or not.
pub fn all_reductions(m: &DefModule) -> Vec<ReductionResult> {
    vec![denials(m), completion(m), reduce_choice(m), circumscription(m)]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_program;

    fn module(src: &str) -> DefModule {
        parse_program(src).unwrap().0.defmods()[0].clone()
    }

    #[test]
    fn choice_residual_uses_rule_variables() {
        let m = module("def in/2 { {in(X,Y)} :- edge(X,Y). }");
        let r = reduce_choice(&m);
        assert!(r.applicable);
        assert_eq!(r.residual.unwrap().to_string(), "forall X Y (in(X,Y) -> edge(X,Y))");
    }

    #[test]
    fn choice_is_inapplicable_to_plain_rules() {
        let m = module("def v/1 { v(X) :- e(X,Y). }");
        assert!(!reduce_choice(&m).applicable);
    }

    #[test]
    fn denial_free_module_gives_top() {
        let m = module("def v/1 { v(X) :- e(X,Y). }");
        let (kept, d) = extract_denials(&m).unwrap();
        assert_eq!(kept, m);
        assert!(d.is_top());
    }

    #[test]
    fn denial_only_module_keeps_no_rules() {
        let m = module("def { :- p(X), q(X). }");
        let (kept, d) = extract_denials(&m).unwrap();
        assert!(kept.rules.is_empty());
        assert!(d.is_closed());
    }

    #[test]
    fn symbol_without_rules_completes_to_bottom() {
        let m = module("def p/1, q/1 { p(X) :- e(X). }");
        let f = clark_normal_form(&m).unwrap();
        assert!(f.to_string().contains("bot -> q(X1)"), "{f}");
    }

    #[test]
    fn completion_requires_tightness() {
        let m = module("def r/2 { r(X,Y) :- in(X,Y). r(X,Y) :- r(X,Z), r(Z,Y). }");
        let c = completion(&m);
        assert!(!c.applicable);
        assert!(c.reason.unwrap().contains("tight"));
    }

    #[test]
    fn completion_of_facts_lists_equalities() {
        let m = module("def edge/2 { edge(a,b). edge(b,c). }");
        let c = completion(&m).residual.unwrap();
        assert_eq!(c.to_string(), "forall X1 X2 (X1 = a & X2 = b | X1 = b & X2 = c <-> edge(X1,X2))");
    }

    #[test]
    fn disjunctive_head_has_no_clark_form() {
        let m = module("def p/0, q/0 { p ; q. }");
        assert!(clark_normal_form(&m).is_err());
    }

    #[test]
    fn circumscription_rejects_negation() {
        let m = module("def p/1 { p(X) :- e(X), not q(X). }");
        let dom = Domain::from_names(&["a"]);
        let err = circumscribe(&m, &dom, &Interpretation::new()).unwrap_err();
        assert!(err.to_string().contains("negation"));
    }
}
