//! Agreement checks between independent routes to the same models. Used by
//! `masp check --seed` and by the test suites.

use std::collections::BTreeSet;

use crate::analysis;
use crate::ast::{DefModule, Member, ModularProgram, PredicateSymbol};
use crate::error::Result;
use crate::eval::{self, naive_stable_models, Domain, Interpretation, SolveOptions, Strategy};
use crate::gen::{self, ProgramShape};
use crate::reductions;

fn single(d: &DefModule) -> ModularProgram {
    ModularProgram::new(d.free_predicates(), vec![Member::Def(d.clone())])
}

fn ext_symbols(d: &DefModule) -> Vec<PredicateSymbol> {
    d.free_predicates().difference(&d.intensional).cloned().collect()
}

/// Every model of a program's formula over its free symbols.
pub fn program_models(p: &ModularProgram, dom: &Domain, max_branch: u64) -> Result<Vec<Interpretation>> {
    eval::models(p, dom, &Interpretation::new(), &BTreeSet::new(), max_branch)
}

/// Models of `SM_p[F]` for one def-module over its free symbols.
pub fn sm_models(d: &DefModule, dom: &Domain, max_branch: u64) -> Result<Vec<Interpretation>> {
    program_models(&single(d), dom, max_branch)
}

/// The same models through the formula-level search: every extensional
/// extent, then every intensional extent checked against the star formula.
pub fn sm_models_naive(d: &DefModule, dom: &Domain, max_branch: u64) -> Result<Vec<Interpretation>> {
    let f = d.rules_formula()?;
    let mut out = Vec::new();
    for fixed in eval::all_interpretations(&ext_symbols(d), dom, max_branch)? {
        out.extend(naive_stable_models(&f, &d.intensional, dom, &fixed)?);
    }
    eval::sort_canonical(&mut out);
    Ok(out)
}

/// Models of a program equal those of its flattening.
pub fn flatten_agrees(p: &ModularProgram, dom: &Domain, max_branch: u64) -> Result<bool> {
    let flat = analysis::flatten(p).0;
    Ok(program_models(p, dom, max_branch)? == program_models(&flat, dom, max_branch)?)
}

/// Splitting and naive answer sets coincide.
pub fn strategies_agree(p: &ModularProgram, dom: &Domain, max_branch: u64) -> Result<bool> {
    let opts = SolveOptions { domain_override: Some(dom.clone()), strategy: Strategy::Splitting, max_branch };
    let a = eval::answer_sets(p, &opts)?;
    let b = eval::answer_sets(p, &SolveOptions { strategy: Strategy::Naive, ..opts })?;
    Ok(a == b)
}

/// For a tight module, stable models equal classical models of the completion.
/// `None` when completion does not apply.
pub fn completion_agrees(d: &DefModule, dom: &Domain, max_branch: u64) -> Result<Option<bool>> {
    let r = reductions::completion(d);
    let Some(comp) = r.residual else { return Ok(None) };
    let syms: Vec<PredicateSymbol> = d.free_predicates().into_iter().collect();
    let classical = eval::classical_models(&[comp], &syms, dom, max_branch)?;
    Ok(Some(classical == sm_models(d, dom, max_branch)?))
}

/// For a negation-free module, minimal models equal stable models for every
/// extensional extent. `None` when circumscription does not apply.
pub fn circumscription_agrees(d: &DefModule, dom: &Domain, max_branch: u64) -> Result<Option<bool>> {
    if !reductions::circumscription(d).applicable {
        return Ok(None);
    }
    let ext = ext_symbols(d);
    for fixed in eval::all_interpretations(&ext, dom, max_branch)? {
        let circ = reductions::circumscribe(d, dom, &fixed)?;
        let stable = eval::defmod_stable_models(d, dom, &fixed, max_branch)?;
        if circ != stable {
            return Ok(Some(false));
        }
    }
    Ok(Some(true))
}

/// Stable models of a module equal the stable models of its rules without
/// denials that satisfy the denials classically.
pub fn denials_agree(d: &DefModule, dom: &Domain, max_branch: u64) -> Result<bool> {
    let (rest, g) = reductions::extract_denials(d)?;
    let syms: Vec<PredicateSymbol> = d.free_predicates().into_iter().collect();
    let mut filtered = Vec::new();
    for ext in eval::all_interpretations(&ext_symbols(d), dom, max_branch)? {
        for m in eval::defmod_stable_models(&rest, dom, &ext, max_branch)? {
            let full = m.merge(&ext);
            if eval::evaluate(&g, dom, &full, &eval::SOAssignment::new())? {
                filtered.push(full.project(&syms.iter().cloned().collect()));
            }
        }
    }
    eval::sort_canonical(&mut filtered);
    Ok(filtered == sm_models(d, dom, max_branch)?)
}

#[derive(Clone, Debug, Default, PartialEq, Eq, serde::Serialize)]
pub struct TrialReport {
    pub seed: u64,
    pub trials: usize,
    pub failures: Vec<String>,
}

/// Random programs from `seed`: flattening, splitting against naive, and
/// completion and circumscription on every module where they apply.
pub fn random_trials(seed: u64, trials: usize, max_branch: u64) -> Result<TrialReport> {
    let shape = ProgramShape::default();
    let dom = Domain::new(shape.constants.iter().map(|c| crate::ast::Constant::new(c.as_str())));
    let mut rng = gen::rng(seed);
    let mut failures = Vec::new();
    for t in 0..trials {
        let p = gen::random_program(&mut rng, &shape);
        if !flatten_agrees(&p, &dom, max_branch)? {
            failures.push(format!("trial {t}: flattening changes the models"));
        }
        if !strategies_agree(&p, &dom, max_branch)? {
            failures.push(format!("trial {t}: splitting and naive answer sets differ"));
        }
        for d in p.defmods() {
            if completion_agrees(d, &dom, max_branch)? == Some(false) {
                failures.push(format!("trial {t}: completion differs on a module"));
            }
            if circumscription_agrees(d, &dom, max_branch)? == Some(false) {
                failures.push(format!("trial {t}: circumscription differs on a module"));
            }
        }
    }
    Ok(TrialReport { seed, trials, failures })
}
