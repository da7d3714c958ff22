//! Terms, formulas, rules and modular programs.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::hash::{Hash, Hasher};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AstError {
    #[error("unsafe rule `{rule}`: variable {var} does not occur in a positive body atom")]
    UnsafeRule { rule: String, var: String },
    #[error("arity mismatch renaming {from}: target has arity {to}")]
    ArityMismatch { from: String, to: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Constant(pub String);

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Variable(pub String);

impl Constant {
    pub fn new(name: impl Into<String>) -> Self {
        Constant(name.into())
    }
}

impl Variable {
    pub fn new(name: impl Into<String>) -> Self {
        Variable(name.into())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Term {
    Constant(Constant),
    Variable(Variable),
}

impl Term {
    pub fn constant(name: &str) -> Self {
        Term::Constant(Constant::new(name))
    }

    pub fn var(name: &str) -> Self {
        Term::Variable(Variable::new(name))
    }

    pub fn as_variable(&self) -> Option<&Variable> {
        match self {
            Term::Variable(v) => Some(v),
            Term::Constant(_) => None,
        }
    }
}

/// A predicate symbol. Ordering is by name, then arity.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PredicateSymbol {
    pub name: String,
    pub arity: usize,
}

impl PredicateSymbol {
    pub fn new(name: impl Into<String>, arity: usize) -> Self {
        PredicateSymbol { name: name.into(), arity }
    }
}

/// Second-order variable ranging over relations of the given arity.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PredicateVariable {
    pub name: String,
    pub arity: usize,
}

impl PredicateVariable {
    pub fn new(name: impl Into<String>, arity: usize) -> Self {
        PredicateVariable { name: name.into(), arity }
    }

    /// The predicate symbol this variable was generated from by hiding, if any.
    pub fn origin(&self) -> Option<PredicateSymbol> {
        let (base, k) = self.name.rsplit_once("__")?;
        if base.is_empty() || k.is_empty() || !k.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        Some(PredicateSymbol::new(base, self.arity))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Atom {
    pub pred: PredicateSymbol,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn new(name: &str, args: Vec<Term>) -> Self {
        Atom { pred: PredicateSymbol::new(name, args.len()), args }
    }

    pub fn is_ground(&self) -> bool {
        self.args.iter().all(|t| matches!(t, Term::Constant(_)))
    }
}

/// First- and second-order formulas. Negation and truth are derived forms.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Formula {
    Bottom,
    Atom(Atom),
    PredVarAtom(PredicateVariable, Vec<Term>),
    Equal(Term, Term),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    ForallFO(Variable, Box<Formula>),
    ExistsFO(Variable, Box<Formula>),
    ForallSO(PredicateVariable, Box<Formula>),
    ExistsSO(PredicateVariable, Box<Formula>),
}

/// Target of a predicate renaming.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PredTarget {
    Symbol(PredicateSymbol),
    Var(PredicateVariable),
}

impl Formula {
    pub fn top() -> Formula {
        Formula::implies(Formula::Bottom, Formula::Bottom)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn neg(f: Formula) -> Formula {
        Formula::implies(f, Formula::Bottom)
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn iff(a: Formula, b: Formula) -> Formula {
        Formula::and(Formula::implies(a.clone(), b.clone()), Formula::implies(b, a))
    }

    pub fn atom(a: Atom) -> Formula {
        Formula::Atom(a)
    }

    /// Left-nested conjunction; the empty conjunction is truth.
    pub fn conj(items: impl IntoIterator<Item = Formula>) -> Formula {
        items.into_iter().reduce(Formula::and).unwrap_or_else(Formula::top)
    }

    /// Left-nested disjunction; the empty disjunction is falsity.
    pub fn disj(items: impl IntoIterator<Item = Formula>) -> Formula {
        items.into_iter().reduce(Formula::or).unwrap_or(Formula::Bottom)
    }

    pub fn forall_all(vars: &[Variable], body: Formula) -> Formula {
        vars.iter().rev().fold(body, |f, v| Formula::ForallFO(v.clone(), Box::new(f)))
    }

    pub fn exists_all(vars: &[Variable], body: Formula) -> Formula {
        vars.iter().rev().fold(body, |f, v| Formula::ExistsFO(v.clone(), Box::new(f)))
    }

    pub fn is_top(&self) -> bool {
        matches!(self, Formula::Implies(a, b) if **a == Formula::Bottom && **b == Formula::Bottom)
    }

    /// `Some(g)` if the formula is `g -> bot`.
    pub fn as_negation(&self) -> Option<&Formula> {
        match self {
            Formula::Implies(a, b) if **b == Formula::Bottom => Some(a),
            _ => None,
        }
    }

    pub fn conjuncts(&self) -> Vec<&Formula> {
        match self {
            Formula::And(a, b) => {
                let mut v = a.conjuncts();
                v.extend(b.conjuncts());
                v
            }
            f => vec![f],
        }
    }

    /// Predicate symbols occurring in the formula. Symbols are never bound,
    /// so every occurrence is free.
    pub fn predicates(&self) -> BTreeSet<PredicateSymbol> {
        let mut out = BTreeSet::new();
        self.walk(&mut |f| {
            if let Formula::Atom(a) = f {
                out.insert(a.pred.clone());
            }
        });
        out
    }

    pub fn is_first_order(&self) -> bool {
        let mut fo = true;
        self.walk(&mut |f| {
            if matches!(f, Formula::PredVarAtom(..) | Formula::ForallSO(..) | Formula::ExistsSO(..)) {
                fo = false;
            }
        });
        fo
    }

    /// Predicate variables occurring anywhere, bound or free.
    pub fn predicate_variables(&self) -> BTreeSet<PredicateVariable> {
        let mut out = BTreeSet::new();
        self.walk(&mut |f| match f {
            Formula::PredVarAtom(v, _) | Formula::ForallSO(v, _) | Formula::ExistsSO(v, _) => {
                out.insert(v.clone());
            }
            _ => {}
        });
        out
    }

    pub fn free_predicate_variables(&self) -> BTreeSet<PredicateVariable> {
        fn go(f: &Formula, bound: &mut Vec<PredicateVariable>, out: &mut BTreeSet<PredicateVariable>) {
            match f {
                Formula::PredVarAtom(v, _) => {
                    if !bound.contains(v) {
                        out.insert(v.clone());
                    }
                }
                Formula::ForallSO(v, b) | Formula::ExistsSO(v, b) => {
                    bound.push(v.clone());
                    go(b, bound, out);
                    bound.pop();
                }
                Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                    go(a, bound, out);
                    go(b, bound, out);
                }
                Formula::ForallFO(_, b) | Formula::ExistsFO(_, b) => go(b, bound, out),
                _ => {}
            }
        }
        let mut out = BTreeSet::new();
        go(self, &mut Vec::new(), &mut out);
        out
    }

    pub fn free_variables(&self) -> BTreeSet<Variable> {
        fn term(t: &Term, bound: &[Variable], out: &mut BTreeSet<Variable>) {
            if let Term::Variable(v) = t {
                if !bound.contains(v) {
                    out.insert(v.clone());
                }
            }
        }
        fn go(f: &Formula, bound: &mut Vec<Variable>, out: &mut BTreeSet<Variable>) {
            match f {
                Formula::Bottom => {}
                Formula::Atom(a) => a.args.iter().for_each(|t| term(t, bound, out)),
                Formula::PredVarAtom(_, args) => args.iter().for_each(|t| term(t, bound, out)),
                Formula::Equal(s, t) => {
                    term(s, bound, out);
                    term(t, bound, out);
                }
                Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                    go(a, bound, out);
                    go(b, bound, out);
                }
                Formula::ForallFO(v, b) | Formula::ExistsFO(v, b) => {
                    bound.push(v.clone());
                    go(b, bound, out);
                    bound.pop();
                }
                Formula::ForallSO(_, b) | Formula::ExistsSO(_, b) => go(b, bound, out),
            }
        }
        let mut out = BTreeSet::new();
        go(self, &mut Vec::new(), &mut out);
        out
    }

    pub fn is_closed(&self) -> bool {
        self.free_variables().is_empty()
    }

    /// Pre-order traversal.
    pub fn walk(&self, visit: &mut impl FnMut(&Formula)) {
        visit(self);
        match self {
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.walk(visit);
                b.walk(visit);
            }
            Formula::ForallFO(_, b) | Formula::ExistsFO(_, b) | Formula::ForallSO(_, b) | Formula::ExistsSO(_, b) => b.walk(visit),
            _ => {}
        }
    }

    /// Replaces predicate symbols according to `map`. Bound predicate
    /// variables that would capture a target variable are renamed apart.
    pub fn rename_predicates(&self, map: &BTreeMap<PredicateSymbol, PredTarget>) -> Result<Formula, AstError> {
        for (from, to) in map {
            let arity = match to {
                PredTarget::Symbol(s) => s.arity,
                PredTarget::Var(v) => v.arity,
            };
            if arity != from.arity {
                return Err(AstError::ArityMismatch { from: from.to_string(), to: arity });
            }
        }
        let targets: BTreeSet<&PredicateVariable> = map
            .values()
            .filter_map(|t| match t {
                PredTarget::Var(v) => Some(v),
                PredTarget::Symbol(_) => None,
            })
            .collect();
        let mut used: BTreeSet<String> = self.predicate_variables().into_iter().map(|v| v.name).collect();
        used.extend(targets.iter().map(|v| v.name.clone()));
        Ok(self.rename_inner(map, &targets, &mut used))
    }

    fn rename_inner(
        &self,
        map: &BTreeMap<PredicateSymbol, PredTarget>,
        targets: &BTreeSet<&PredicateVariable>,
        used: &mut BTreeSet<String>,
    ) -> Formula {
        let rec = |f: &Formula, used: &mut BTreeSet<String>| Box::new(f.rename_inner(map, targets, used));
        match self {
            Formula::Atom(a) => match map.get(&a.pred) {
                Some(PredTarget::Symbol(s)) => Formula::Atom(Atom { pred: s.clone(), args: a.args.clone() }),
                Some(PredTarget::Var(v)) => Formula::PredVarAtom(v.clone(), a.args.clone()),
                None => self.clone(),
            },
            Formula::Bottom | Formula::PredVarAtom(..) | Formula::Equal(..) => self.clone(),
            Formula::And(a, b) => Formula::And(rec(a, used), rec(b, used)),
            Formula::Or(a, b) => Formula::Or(rec(a, used), rec(b, used)),
            Formula::Implies(a, b) => Formula::Implies(rec(a, used), rec(b, used)),
            Formula::ForallFO(v, b) => Formula::ForallFO(v.clone(), rec(b, used)),
            Formula::ExistsFO(v, b) => Formula::ExistsFO(v.clone(), rec(b, used)),
            Formula::ForallSO(v, b) | Formula::ExistsSO(v, b) => {
                let (v2, body) = if targets.contains(v) {
                    let fresh = fresh_variable_name(&v.name, used);
                    used.insert(fresh.clone());
                    let nv = PredicateVariable::new(fresh, v.arity);
                    (nv.clone(), b.substitute_pred_var(v, &nv))
                } else {
                    (v.clone(), (**b).clone())
                };
                let body = Box::new(body.rename_inner(map, targets, used));
                if matches!(self, Formula::ForallSO(..)) {
                    Formula::ForallSO(v2, body)
                } else {
                    Formula::ExistsSO(v2, body)
                }
            }
        }
    }

    /// Replaces free occurrences of the predicate variable `from` by `to`.
    pub fn substitute_pred_var(&self, from: &PredicateVariable, to: &PredicateVariable) -> Formula {
        let rec = |f: &Formula| Box::new(f.substitute_pred_var(from, to));
        match self {
            Formula::PredVarAtom(v, args) if v == from => Formula::PredVarAtom(to.clone(), args.clone()),
            Formula::Bottom | Formula::Atom(_) | Formula::PredVarAtom(..) | Formula::Equal(..) => self.clone(),
            Formula::And(a, b) => Formula::And(rec(a), rec(b)),
            Formula::Or(a, b) => Formula::Or(rec(a), rec(b)),
            Formula::Implies(a, b) => Formula::Implies(rec(a), rec(b)),
            Formula::ForallFO(v, b) => Formula::ForallFO(v.clone(), rec(b)),
            Formula::ExistsFO(v, b) => Formula::ExistsFO(v.clone(), rec(b)),
            Formula::ForallSO(v, _) | Formula::ExistsSO(v, _) if v == from => self.clone(),
            Formula::ForallSO(v, b) => Formula::ForallSO(v.clone(), rec(b)),
            Formula::ExistsSO(v, b) => Formula::ExistsSO(v.clone(), rec(b)),
        }
    }

    /// Renames all bound variables (first- and second-order) to canonical
    /// names in binding order, so that alpha-equivalent formulas compare equal.
    pub fn alpha_canonical(&self) -> Formula {
        fn term(t: &Term, fo: &[(Variable, Variable)]) -> Term {
            match t {
                Term::Variable(v) => match fo.iter().rev().find(|(a, _)| a == v) {
                    Some((_, b)) => Term::Variable(b.clone()),
                    None => t.clone(),
                },
                c => c.clone(),
            }
        }
        fn go(
            f: &Formula,
            fo: &mut Vec<(Variable, Variable)>,
            so: &mut Vec<(PredicateVariable, PredicateVariable)>,
            n: &mut usize,
        ) -> Formula {
            match f {
                Formula::Bottom => Formula::Bottom,
                Formula::Atom(a) => Formula::Atom(Atom { pred: a.pred.clone(), args: a.args.iter().map(|t| term(t, fo)).collect() }),
                Formula::PredVarAtom(v, args) => {
                    let v2 = so.iter().rev().find(|(a, _)| a == v).map(|(_, b)| b.clone()).unwrap_or(v.clone());
                    Formula::PredVarAtom(v2, args.iter().map(|t| term(t, fo)).collect())
                }
                Formula::Equal(s, t) => Formula::Equal(term(s, fo), term(t, fo)),
                Formula::And(a, b) => Formula::and(go(a, fo, so, n), go(b, fo, so, n)),
                Formula::Or(a, b) => Formula::or(go(a, fo, so, n), go(b, fo, so, n)),
                Formula::Implies(a, b) => Formula::implies(go(a, fo, so, n), go(b, fo, so, n)),
                Formula::ForallFO(v, b) | Formula::ExistsFO(v, b) => {
                    *n += 1;
                    fo.push((v.clone(), Variable(format!("V#{n}"))));
                    let nv = fo.last().unwrap().1.clone();
                    let body = Box::new(go(b, fo, so, n));
                    fo.pop();
                    if matches!(f, Formula::ForallFO(..)) {
                        Formula::ForallFO(nv, body)
                    } else {
                        Formula::ExistsFO(nv, body)
                    }
                }
                Formula::ForallSO(v, b) | Formula::ExistsSO(v, b) => {
                    *n += 1;
                    let nv = PredicateVariable::new(format!("P#{n}"), v.arity);
                    so.push((v.clone(), nv.clone()));
                    let body = Box::new(go(b, fo, so, n));
                    so.pop();
                    if matches!(f, Formula::ForallSO(..)) {
                        Formula::ForallSO(nv, body)
                    } else {
                        Formula::ExistsSO(nv, body)
                    }
                }
            }
        }
        go(self, &mut Vec::new(), &mut Vec::new(), &mut 0)
    }

    pub fn alpha_eq(&self, other: &Formula) -> bool {
        self.alpha_canonical() == other.alpha_canonical()
    }

    /// Number of nodes.
    pub fn size(&self) -> usize {
        let mut n = 0;
        self.walk(&mut |_| n += 1);
        n
    }
}

/// Picks `<base>__k` with the smallest k >= 1 not in `used`.
pub fn fresh_variable_name(base: &str, used: &BTreeSet<String>) -> String {
    let base = match base.rsplit_once("__") {
        Some((b, k)) if !b.is_empty() && !k.is_empty() && k.bytes().all(|c| c.is_ascii_digit()) => b,
        _ => base,
    };
    (1..).map(|k| format!("{base}__{k}")).find(|n| !used.contains(n)).expect("unbounded range")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum CmpOp {
    Eq,
    Neq,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Comparison {
    pub left: Term,
    pub op: CmpOp,
    pub right: Term,
}

/// A rule `head :- body.` The head is a disjunction (empty means falsity);
/// a choice rule has exactly one head atom.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Rule {
    pub head: Vec<Atom>,
    pub choice: bool,
    pub pos: Vec<Atom>,
    pub neg: Vec<Atom>,
    pub dneg: Vec<Atom>,
    pub cmp: Vec<Comparison>,
}

impl Rule {
    pub fn fact(a: Atom) -> Rule {
        Rule { head: vec![a], ..Rule::default() }
    }

    pub fn is_denial(&self) -> bool {
        self.head.is_empty()
    }

    pub fn is_fact(&self) -> bool {
        !self.choice && self.head.len() == 1 && self.pos.is_empty() && self.neg.is_empty() && self.dneg.is_empty() && self.cmp.is_empty()
    }

    pub fn is_disjunctive(&self) -> bool {
        self.head.len() > 1
    }

    /// No default negation, including the implicit double negation of a choice head.
    pub fn is_negation_free(&self) -> bool {
        !self.choice && self.neg.is_empty() && self.dneg.is_empty()
    }

    pub fn body_atoms(&self) -> impl Iterator<Item = &Atom> {
        self.pos.iter().chain(&self.neg).chain(&self.dneg)
    }

    pub fn atoms(&self) -> impl Iterator<Item = &Atom> {
        self.head.iter().chain(self.body_atoms())
    }

    pub fn predicates(&self) -> BTreeSet<PredicateSymbol> {
        self.atoms().map(|a| a.pred.clone()).collect()
    }

    pub fn head_predicates(&self) -> BTreeSet<PredicateSymbol> {
        self.head.iter().map(|a| a.pred.clone()).collect()
    }

    /// Variables in order of first occurrence: head, positive, negative and
    /// double-negated body, comparisons.
    pub fn variables(&self) -> Vec<Variable> {
        let mut out: Vec<Variable> = Vec::new();
        let mut push = |t: &Term| {
            if let Term::Variable(v) = t {
                if !out.contains(v) {
                    out.push(v.clone());
                }
            }
        };
        for a in self.atoms() {
            a.args.iter().for_each(&mut push);
        }
        for c in &self.cmp {
            push(&c.left);
            push(&c.right);
        }
        out
    }

    pub fn constants(&self) -> BTreeSet<Constant> {
        let mut out = BTreeSet::new();
        let terms = self.atoms().flat_map(|a| a.args.iter()).chain(self.cmp.iter().flat_map(|c| [&c.left, &c.right]));
        for t in terms {
            if let Term::Constant(c) = t {
                out.insert(c.clone());
            }
        }
        out
    }

    /// First variable that does not occur in a positive body atom.
    pub fn unsafe_variable(&self) -> Option<Variable> {
        let safe: BTreeSet<&Variable> = self.pos.iter().flat_map(|a| a.args.iter()).filter_map(Term::as_variable).collect();
        self.variables().into_iter().find(|v| !safe.contains(v))
    }

    pub fn check_safe(&self) -> Result<(), AstError> {
        match self.unsafe_variable() {
            Some(v) => Err(AstError::UnsafeRule { rule: self.to_string(), var: v.0 }),
            None => Ok(()),
        }
    }

    /// Body literals as formulas, in canonical order. A choice rule's
    /// double-negated head comes first.
    pub fn body_formulas(&self) -> Vec<Formula> {
        let mut lits = Vec::new();
        if self.choice {
            lits.extend(self.head.iter().map(|a| Formula::neg(Formula::neg(Formula::Atom(a.clone())))));
        }
        lits.extend(self.pos.iter().map(|a| Formula::Atom(a.clone())));
        lits.extend(self.neg.iter().map(|a| Formula::neg(Formula::Atom(a.clone()))));
        lits.extend(self.dneg.iter().map(|a| Formula::neg(Formula::neg(Formula::Atom(a.clone())))));
        for c in &self.cmp {
            let eq = Formula::Equal(c.left.clone(), c.right.clone());
            lits.push(match c.op {
                CmpOp::Eq => eq,
                CmpOp::Neq => Formula::neg(eq),
            });
        }
        lits
    }

    /// The formula `forall V (body -> head)` read off the rule; a fact is its atom.
    pub fn to_formula(&self) -> Result<Formula, AstError> {
        self.check_safe()?;
        Ok(self.to_formula_unchecked())
    }

    pub(crate) fn to_formula_unchecked(&self) -> Formula {
        let head = Formula::disj(self.head.iter().cloned().map(Formula::Atom));
        let body = self.body_formulas();
        let matrix = if body.is_empty() { head } else { Formula::implies(Formula::conj(body), head) };
        Formula::forall_all(&self.variables(), matrix)
    }

    pub fn rename_predicates(&self, map: &BTreeMap<PredicateSymbol, PredicateSymbol>) -> Rule {
        let ren = |atoms: &[Atom]| -> Vec<Atom> {
            atoms.iter().map(|a| Atom { pred: map.get(&a.pred).cloned().unwrap_or_else(|| a.pred.clone()), args: a.args.clone() }).collect()
        };
        Rule {
            head: ren(&self.head),
            choice: self.choice,
            pos: ren(&self.pos),
            neg: ren(&self.neg),
            dneg: ren(&self.dneg),
            cmp: self.cmp.clone(),
        }
    }
}

/// Bookkeeping that takes no part in structural identity: source position
/// and a display label (module name, or `M_E` for an instance).
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct Meta {
    pub label: Option<String>,
    pub line: usize,
    pub column: usize,
}

impl PartialEq for Meta {
    fn eq(&self, _: &Meta) -> bool {
        true
    }
}

impl Eq for Meta {}

impl Hash for Meta {
    fn hash<H: Hasher>(&self, _: &mut H) {}
}

impl Meta {
    pub fn labelled(label: impl Into<String>) -> Meta {
        Meta { label: Some(label.into()), ..Meta::default() }
    }

    pub fn at(line: usize, column: usize) -> Meta {
        Meta { label: None, line, column }
    }
}

/// A def-module `(p : F)` with `F` a conjunction of rules.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DefModule {
    pub intensional: BTreeSet<PredicateSymbol>,
    pub rules: Vec<Rule>,
    pub meta: Meta,
}

impl DefModule {
    pub fn new(intensional: impl IntoIterator<Item = PredicateSymbol>, rules: Vec<Rule>) -> Self {
        DefModule { intensional: intensional.into_iter().collect(), rules, meta: Meta::default() }
    }

    /// Symbols occurring in the rules.
    pub fn rule_predicates(&self) -> BTreeSet<PredicateSymbol> {
        self.rules.iter().flat_map(|r| r.predicates()).collect()
    }

    /// Free predicates of the module's formula: the rule symbols plus the intensional ones.
    pub fn free_predicates(&self) -> BTreeSet<PredicateSymbol> {
        let mut s = self.rule_predicates();
        s.extend(self.intensional.iter().cloned());
        s
    }

    pub fn is_denial_only(&self) -> bool {
        self.intensional.is_empty()
    }

    pub fn rules_formula(&self) -> Result<Formula, AstError> {
        Ok(Formula::conj(self.rules.iter().map(Rule::to_formula).collect::<Result<Vec<_>, _>>()?))
    }

    pub fn constants(&self) -> BTreeSet<Constant> {
        self.rules.iter().flat_map(|r| r.constants()).collect()
    }

    pub fn rename_predicates(&self, map: &BTreeMap<PredicateSymbol, PredicateSymbol>) -> DefModule {
        DefModule {
            intensional: self.intensional.iter().map(|p| map.get(p).cloned().unwrap_or_else(|| p.clone())).collect(),
            rules: self.rules.iter().map(|r| r.rename_predicates(map)).collect(),
            meta: self.meta.clone(),
        }
    }

    pub fn label(&self) -> Option<&str> {
        self.meta.label.as_deref()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Member {
    Def(DefModule),
    Program(ModularProgram),
}

impl Member {
    pub fn free_predicates(&self) -> BTreeSet<PredicateSymbol> {
        match self {
            Member::Def(d) => d.free_predicates(),
            Member::Program(p) => p.free_predicates(),
        }
    }

    /// Symbols intensional in some def-module below this member.
    pub fn intensional(&self) -> BTreeSet<PredicateSymbol> {
        match self {
            Member::Def(d) => d.intensional.clone(),
            Member::Program(p) => p.intensional(),
        }
    }

    pub fn rename_predicates(&self, map: &BTreeMap<PredicateSymbol, PredicateSymbol>) -> Member {
        match self {
            Member::Def(d) => Member::Def(d.rename_predicates(map)),
            Member::Program(p) => Member::Program(p.rename_predicates(map)),
        }
    }
}

/// A modular program `<S, M>`: public symbols and an ordered member list.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModularProgram {
    pub public: BTreeSet<PredicateSymbol>,
    pub members: Vec<Member>,
    pub meta: Meta,
}

impl ModularProgram {
    pub fn new(public: impl IntoIterator<Item = PredicateSymbol>, members: Vec<Member>) -> Self {
        ModularProgram { public: public.into_iter().collect(), members, meta: Meta::default() }
    }

    /// All def-modules, in pre-order.
    pub fn defmods(&self) -> Vec<&DefModule> {
        let mut out = Vec::new();
        for m in &self.members {
            match m {
                Member::Def(d) => out.push(d),
                Member::Program(p) => out.extend(p.defmods()),
            }
        }
        out
    }

    pub fn intensional(&self) -> BTreeSet<PredicateSymbol> {
        self.defmods().into_iter().flat_map(|d| d.intensional.iter().cloned()).collect()
    }

    /// Every symbol occurring anywhere, hidden ones included.
    pub fn predicates(&self) -> BTreeSet<PredicateSymbol> {
        let mut s: BTreeSet<PredicateSymbol> = self.defmods().into_iter().flat_map(|d| d.free_predicates()).collect();
        let mut stack = vec![self];
        while let Some(p) = stack.pop() {
            s.extend(p.public.iter().cloned());
            for m in &p.members {
                if let Member::Program(q) = m {
                    stack.push(q);
                }
            }
        }
        s
    }

    /// Free predicates of the program's formula: public symbols that occur free in some member.
    pub fn free_predicates(&self) -> BTreeSet<PredicateSymbol> {
        self.members_free().intersection(&self.public).cloned().collect()
    }

    /// Symbols hidden at this node.
    pub fn hidden(&self) -> BTreeSet<PredicateSymbol> {
        self.members_free().difference(&self.public).cloned().collect()
    }

    fn members_free(&self) -> BTreeSet<PredicateSymbol> {
        self.members.iter().flat_map(|m| m.free_predicates()).collect()
    }

    pub fn constants(&self) -> BTreeSet<Constant> {
        self.defmods().into_iter().flat_map(|d| d.constants()).collect()
    }

    pub fn rules(&self) -> impl Iterator<Item = &Rule> {
        self.defmods().into_iter().flat_map(|d| d.rules.iter())
    }

    /// True if `target` is this program or occurs as a member somewhere below it.
    pub fn contains(&self, target: &ModularProgram) -> bool {
        self == target
            || self.members.iter().any(|m| match m {
                Member::Program(p) => p.contains(target),
                Member::Def(_) => false,
            })
    }

    /// Structural replacement of every occurrence of `old` by `new`.
    pub fn replace(&self, old: &ModularProgram, new: &ModularProgram) -> ModularProgram {
        if self == old {
            let mut r = new.clone();
            if r.meta.label.is_none() {
                r.meta = self.meta.clone();
            }
            return r;
        }
        ModularProgram {
            public: self.public.clone(),
            members: self
                .members
                .iter()
                .map(|m| match m {
                    Member::Program(p) => Member::Program(p.replace(old, new)),
                    d => d.clone(),
                })
                .collect(),
            meta: self.meta.clone(),
        }
    }

    pub fn rename_predicates(&self, map: &BTreeMap<PredicateSymbol, PredicateSymbol>) -> ModularProgram {
        ModularProgram {
            public: self.public.iter().map(|p| map.get(p).cloned().unwrap_or_else(|| p.clone())).collect(),
            members: self.members.iter().map(|m| m.rename_predicates(map)).collect(),
            meta: self.meta.clone(),
        }
    }

    pub fn name(&self) -> Option<&str> {
        self.meta.label.as_deref()
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Constant(c) => f.write_str(&c.0),
            Term::Variable(v) => f.write_str(&v.0),
        }
    }
}

impl fmt::Display for Constant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for PredicateSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.name, self.arity)
    }
}

impl fmt::Display for PredicateVariable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.name, self.arity)
    }
}

fn write_args(f: &mut fmt::Formatter<'_>, name: &str, args: &[Term]) -> fmt::Result {
    f.write_str(name)?;
    if !args.is_empty() {
        f.write_str("(")?;
        for (i, t) in args.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{t}")?;
        }
        f.write_str(")")?;
    }
    Ok(())
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_args(f, &self.pred.name, &self.args)
    }
}

impl fmt::Display for Comparison {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let op = match self.op {
            CmpOp::Eq => "=",
            CmpOp::Neq => "!=",
        };
        write!(f, "{} {} {}", self.left, op, self.right)
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.choice {
            write!(f, "{{ {} }}", self.head[0])?;
        } else {
            for (i, a) in self.head.iter().enumerate() {
                if i > 0 {
                    f.write_str("; ")?;
                }
                write!(f, "{a}")?;
            }
        }
        let mut body: Vec<String> = self.pos.iter().map(|a| a.to_string()).collect();
        body.extend(self.neg.iter().map(|a| format!("not {a}")));
        body.extend(self.dneg.iter().map(|a| format!("not not {a}")));
        body.extend(self.cmp.iter().map(|c| c.to_string()));
        if !body.is_empty() {
            if !self.head.is_empty() {
                f.write_str(" ")?;
            }
            write!(f, ":- {}", body.join(", "))?;
        }
        f.write_str(".")
    }
}

impl Formula {
    /// Binding strength for printing: atoms, negations and quantifiers bind
    /// tightest, then `&`, `|`, `->`, `<->`.
    fn precedence(&self) -> u8 {
        match self {
            Formula::And(..) if self.iff_parts().is_some() => 0,
            Formula::And(..) => 3,
            Formula::Or(..) => 2,
            Formula::Implies(..) if self.is_top() => 4,
            Formula::Implies(..) if self.as_negation().is_some_and(|g| g.precedence() == 4) => 4,
            Formula::Implies(..) => 1,
            _ => 4,
        }
    }

    fn iff_parts(&self) -> Option<(&Formula, &Formula)> {
        if let Formula::And(l, r) = self {
            if let (Formula::Implies(a, b), Formula::Implies(c, d)) = (&**l, &**r) {
                if a == d && b == c && **b != Formula::Bottom && **d != Formula::Bottom {
                    return Some((a, b));
                }
            }
        }
        None
    }

    fn fmt_operand(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        if self.precedence() >= min {
            write!(f, "{self}")
        } else {
            write!(f, "({self})")
        }
    }

    fn fmt_quantifier(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::ForallFO(..) | Formula::ExistsFO(..) => {
                let forall = matches!(self, Formula::ForallFO(..));
                let mut vars = Vec::new();
                let mut cur = self;
                while let (Formula::ForallFO(v, b), true) | (Formula::ExistsFO(v, b), false) = (cur, forall) {
                    vars.push(v.0.as_str());
                    cur = b;
                }
                write!(f, "{} {} ({cur})", if forall { "forall" } else { "exists" }, vars.join(" "))
            }
            Formula::ForallSO(v, b) => write!(f, "forallP {v} ({b})"),
            Formula::ExistsSO(v, b) => write!(f, "existsP {v} ({b})"),
            _ => unreachable!(),
        }
    }
}

/// ASCII rendering: `forall X (...)`, `existsP R/2 (...)`, `&`, `|`, `->`,
/// `<->`, `not`, `bot`.
impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Bottom => f.write_str("bot"),
            Formula::Atom(a) => write!(f, "{a}"),
            Formula::PredVarAtom(v, args) => write_args(f, &v.name, args),
            Formula::Equal(s, t) => write!(f, "{s} = {t}"),
            Formula::And(a, b) => {
                if let Some((a, b)) = self.iff_parts() {
                    a.fmt_operand(f, 2)?;
                    f.write_str(" <-> ")?;
                    b.fmt_operand(f, 2)
                } else {
                    a.fmt_operand(f, 3)?;
                    f.write_str(" & ")?;
                    b.fmt_operand(f, 3)
                }
            }
            Formula::Or(a, b) => {
                a.fmt_operand(f, 2)?;
                f.write_str(" | ")?;
                b.fmt_operand(f, 2)
            }
            Formula::Implies(a, b) => {
                if self.is_top() {
                    f.write_str("not bot")
                } else if let Some(g) = self.as_negation().filter(|g| g.precedence() == 4) {
                    if let Formula::Equal(s, t) = g {
                        write!(f, "{s} != {t}")
                    } else {
                        f.write_str("not ")?;
                        g.fmt_operand(f, 4)
                    }
                } else {
                    a.fmt_operand(f, 2)?;
                    f.write_str(" -> ")?;
                    b.fmt_operand(f, 2)
                }
            }
            _ => self.fmt_quantifier(f),
        }
    }
}
