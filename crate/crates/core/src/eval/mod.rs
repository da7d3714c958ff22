//! Bounded evaluation: Herbrand domains, interpretations, second-order
//! formula evaluation, the naive stable-model search and answer sets.

mod engine;
mod formula;
mod ground;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::analysis;
use crate::ast::{Atom, Constant, DefModule, Member, ModularProgram, PredicateSymbol, PredicateVariable, Term};
use crate::error::{Error, Result};
use crate::sm;

pub use formula::{evaluate, naive_stable_models};

/// Default cap on the number of candidate extents tried for one module.
pub const DEFAULT_MAX_BRANCH: u64 = 1 << 22;

/// A finite set of constants in canonical order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Domain {
    constants: Vec<Constant>,
}

impl Domain {
    pub fn new(constants: impl IntoIterator<Item = Constant>) -> Domain {
        let set: BTreeSet<Constant> = constants.into_iter().collect();
        Domain { constants: set.into_iter().collect() }
    }

    pub fn from_names(names: &[&str]) -> Domain {
        Domain::new(names.iter().map(|n| Constant::new(*n)))
    }

    pub fn constants(&self) -> &[Constant] {
        &self.constants
    }

    pub fn len(&self) -> usize {
        self.constants.len()
    }

    pub fn is_empty(&self) -> bool {
        self.constants.is_empty()
    }

    pub fn index_of(&self, c: &Constant) -> Option<usize> {
        self.constants.binary_search(c).ok()
    }

    pub fn union(&self, other: &Domain) -> Domain {
        Domain::new(self.constants.iter().chain(&other.constants).cloned())
    }

    /// All tuples of the given arity, in lexicographic order.
    pub fn tuples(&self, arity: usize) -> Vec<Vec<Constant>> {
        let n = self.len();
        let count = n.checked_pow(arity as u32).unwrap_or(usize::MAX);
        (0..count)
            .map(|mut r| {
                let mut t = vec![Constant::new(""); arity];
                for slot in t.iter_mut().rev() {
                    *slot = self.constants[r % n].clone();
                    r /= n;
                }
                t
            })
            .collect()
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = self.constants.iter().map(|c| c.0.as_str()).collect();
        write!(f, "{{{}}}", names.join(","))
    }
}

/// Constants occurring in the program. Fails if there are none.
pub fn herbrand_universe(p: &ModularProgram) -> Result<Domain> {
    let d = Domain::new(p.constants());
    if d.is_empty() {
        return Err(Error::Domain("the program mentions no constants; supply a domain bound".into()));
    }
    Ok(d)
}

pub type Extent = BTreeSet<Vec<Constant>>;

/// Extents of predicate symbols; a symbol without an entry is empty.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Interpretation {
    extents: BTreeMap<PredicateSymbol, Extent>,
}

/// Extents of free predicate variables.
pub type SOAssignment = BTreeMap<PredicateVariable, Extent>;

impl Interpretation {
    pub fn new() -> Interpretation {
        Interpretation::default()
    }

    pub fn from_atoms(atoms: impl IntoIterator<Item = Atom>) -> Interpretation {
        let mut i = Interpretation::new();
        for a in atoms {
            i.insert_atom(&a);
        }
        i
    }

    pub fn insert(&mut self, p: &PredicateSymbol, tuple: Vec<Constant>) {
        self.extents.entry(p.clone()).or_default().insert(tuple);
    }

    /// Inserts a ground atom; non-ground atoms are ignored.
    pub fn insert_atom(&mut self, a: &Atom) {
        let tuple: Option<Vec<Constant>> = a
            .args
            .iter()
            .map(|t| match t {
                Term::Constant(c) => Some(c.clone()),
                Term::Variable(_) => None,
            })
            .collect();
        if let Some(t) = tuple {
            self.insert(&a.pred, t);
        }
    }

    pub fn set_extent(&mut self, p: &PredicateSymbol, e: Extent) {
        if e.is_empty() {
            self.extents.remove(p);
        } else {
            self.extents.insert(p.clone(), e);
        }
    }

    pub fn extent(&self, p: &PredicateSymbol) -> Option<&Extent> {
        self.extents.get(p)
    }

    pub fn holds(&self, p: &PredicateSymbol, tuple: &[Constant]) -> bool {
        self.extents.get(p).is_some_and(|e| e.contains(tuple))
    }

    pub fn symbols(&self) -> impl Iterator<Item = &PredicateSymbol> {
        self.extents.keys()
    }

    pub fn len(&self) -> usize {
        self.extents.values().map(|e| e.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.extents.is_empty()
    }

    /// Restriction to the given symbols.
    pub fn project(&self, s: &BTreeSet<PredicateSymbol>) -> Interpretation {
        Interpretation { extents: self.extents.iter().filter(|(p, _)| s.contains(*p)).map(|(p, e)| (p.clone(), e.clone())).collect() }
    }

    /// Union of two interpretations.
    pub fn merge(&self, other: &Interpretation) -> Interpretation {
        let mut out = self.clone();
        for (p, e) in &other.extents {
            out.extents.entry(p.clone()).or_default().extend(e.iter().cloned());
        }
        out
    }

    /// Ground atoms in canonical order.
    pub fn atoms(&self) -> Vec<Atom> {
        self.extents
            .iter()
            .flat_map(|(p, e)| e.iter().map(move |t| Atom { pred: p.clone(), args: t.iter().cloned().map(Term::Constant).collect() }))
            .collect()
    }

    pub fn atom_strings(&self) -> Vec<String> {
        self.atoms().iter().map(|a| a.to_string()).collect()
    }

    /// True if every extent of `self` is contained in the one of `other`.
    pub fn is_subset(&self, other: &Interpretation) -> bool {
        self.extents.iter().all(|(p, e)| other.extents.get(p).is_some_and(|o| e.is_subset(o)))
    }
}

impl fmt::Display for Interpretation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.atom_strings().join(" "))
    }
}

/// Sorts by canonical atom text and removes duplicates.
pub fn sort_canonical(v: &mut Vec<Interpretation>) {
    v.sort_by_cached_key(|i| i.atom_strings());
    v.dedup();
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    /// Module-by-module search; requires a coherent program.
    Splitting,
    /// Stable models of the whole rule conjunction by exhaustive search.
    Naive,
}

#[derive(Clone, Debug)]
pub struct SolveOptions {
    pub domain_override: Option<Domain>,
    pub strategy: Strategy,
    pub max_branch: u64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { domain_override: None, strategy: Strategy::Splitting, max_branch: DEFAULT_MAX_BRANCH }
    }
}

/// Combines a program with an instance as `<show, {program, instance}>`.
/// The program's public set is widened by the instance symbols it uses, so
/// the facts reach the program; `show` defaults to the program's public set.
pub fn join(program: &ModularProgram, instance: &DefModule, show: Option<BTreeSet<PredicateSymbol>>) -> ModularProgram {
    let outer = show.unwrap_or_else(|| program.public.clone());
    let used = program.predicates();
    let mut inner = program.clone();
    inner.public.extend(instance.intensional.iter().filter(|p| used.contains(*p)).cloned());
    let mut joined = ModularProgram::new(outer, vec![Member::Program(inner), Member::Def(instance.clone())]);
    joined.meta = program.meta.clone();
    joined
}

fn domain_for(p: &ModularProgram, opts: &SolveOptions) -> Result<Domain> {
    match &opts.domain_override {
        Some(d) => {
            let d = d.union(&Domain::new(p.constants()));
            if d.is_empty() {
                return Err(Error::Domain("empty domain".into()));
            }
            Ok(d)
        }
        None => herbrand_universe(p),
    }
}

/// Answer sets of a program projected onto its public symbols, in canonical order.
pub fn answer_sets(p: &ModularProgram, opts: &SolveOptions) -> Result<Vec<Interpretation>> {
    let dom = domain_for(p, opts)?;
    let mut out = match opts.strategy {
        Strategy::Splitting => {
            let report = analysis::is_coherent(p);
            if !report.coherent {
                let why: Vec<String> = report.violations.iter().map(|d| d.message.clone()).collect();
                return Err(Error::Precondition(format!("program is not coherent ({}); use --naive", why.join("; "))));
            }
            let flat = analysis::flatten(&analysis::alpha_normalize(p)).0;
            engine::models(&flat, &dom, &Interpretation::new(), &BTreeSet::new(), None, opts.max_branch)?
        }
        Strategy::Naive => naive_answer_sets(p, &dom, opts.max_branch)?,
    };
    for i in out.iter_mut() {
        *i = i.project(&p.public);
    }
    sort_canonical(&mut out);
    Ok(out)
}

fn naive_answer_sets(p: &ModularProgram, dom: &Domain, max_branch: u64) -> Result<Vec<Interpretation>> {
    let f = sm::rules_conjunction(p)?;
    let int = p.intensional();
    let ext: Vec<PredicateSymbol> = f.predicates().difference(&int).cloned().collect();
    let mut out = Vec::new();
    for fixed in all_interpretations(&ext, dom, max_branch)? {
        out.extend(naive_stable_models(&f, &int, dom, &fixed)?);
    }
    Ok(out)
}

/// Every interpretation of the given symbols over the domain.
pub fn all_interpretations(syms: &[PredicateSymbol], dom: &Domain, max_branch: u64) -> Result<Vec<Interpretation>> {
    let atoms: Vec<(PredicateSymbol, Vec<Constant>)> =
        syms.iter().flat_map(|p| dom.tuples(p.arity).into_iter().map(move |t| (p.clone(), t))).collect();
    if atoms.len() >= 63 || (1u64 << atoms.len()) > max_branch {
        return Err(Error::Resource(format!("{} ground atoms are too many to enumerate", atoms.len())));
    }
    Ok((0u64..1 << atoms.len())
        .map(|mask| {
            let mut i = Interpretation::new();
            for (k, (p, t)) in atoms.iter().enumerate() {
                if mask >> k & 1 == 1 {
                    i.insert(p, t.clone());
                }
            }
            i
        })
        .collect())
}

/// All interpretations of the program's free symbols satisfying its formula,
/// extending `fixed` on the symbols in `determined`.
pub fn models(
    p: &ModularProgram,
    dom: &Domain,
    fixed: &Interpretation,
    determined: &BTreeSet<PredicateSymbol>,
    max_branch: u64,
) -> Result<Vec<Interpretation>> {
    let mut out = engine::models(p, dom, fixed, determined, None, max_branch)?;
    sort_canonical(&mut out);
    Ok(out)
}

/// Whether `i` (read on the program's free symbols) satisfies the program's formula.
pub fn is_model(p: &ModularProgram, dom: &Domain, i: &Interpretation, max_branch: u64) -> Result<bool> {
    let free = p.free_predicates();
    Ok(!engine::models(p, dom, &i.project(&free), &free, Some(1), max_branch)?.is_empty())
}

/// Stable extents of one def-module extending `fixed` on its extensional symbols.
pub fn defmod_stable_models(d: &DefModule, dom: &Domain, fixed: &Interpretation, max_branch: u64) -> Result<Vec<Interpretation>> {
    let p = ModularProgram::new(d.free_predicates(), vec![Member::Def(d.clone())]);
    let ext: BTreeSet<PredicateSymbol> = d.free_predicates().difference(&d.intensional).cloned().collect();
    models(&p, dom, &fixed.project(&ext), &ext, max_branch)
}

/// Interpretations of a classical theory: those of `syms` satisfying every formula.
pub fn classical_models(
    fs: &[crate::ast::Formula],
    syms: &[PredicateSymbol],
    dom: &Domain,
    max_branch: u64,
) -> Result<Vec<Interpretation>> {
    formula::classical_models(&crate::ast::Formula::conj(fs.iter().cloned()), syms, dom, max_branch)
}

/// Models of the module's rules extending `fixed` whose intensional
/// extents are minimal, found by trying every intensional extent.
pub(crate) fn minimal_models(d: &DefModule, dom: &Domain, fixed: &Interpretation, max_branch: u64) -> Result<Vec<Interpretation>> {
    let index = ground::AtomIndex::new(dom, d.free_predicates())?;
    let rules = ground::ground_rules(&d.rules, dom, &index)?;
    let ext: BTreeSet<PredicateSymbol> = d.free_predicates().difference(&d.intensional).cloned().collect();
    let mut base = fixedbitset::FixedBitSet::with_capacity(index.total());
    index.load(&fixed.project(&ext), dom, &mut base);
    let atoms: Vec<usize> = d.intensional.iter().flat_map(|p| index.range(p)).collect();
    if atoms.len() >= 63 || (1u64 << atoms.len()) > max_branch {
        return Err(Error::Resource(format!("{} intensional ground atoms are too many to enumerate", atoms.len())));
    }
    let mut found: Vec<(u64, fixedbitset::FixedBitSet)> = Vec::new();
    for mask in 0u64..1u64 << atoms.len() {
        let mut j = base.clone();
        for (b, &a) in atoms.iter().enumerate() {
            if mask >> b & 1 == 1 {
                j.insert(a);
            }
        }
        if ground::satisfies(&rules, &j) {
            found.push((mask, j));
        }
    }
    let minimal: Vec<&fixedbitset::FixedBitSet> =
        found.iter().filter(|(m, _)| !found.iter().any(|(o, _)| o != m && o & m == *o)).map(|(_, j)| j).collect();
    let mut out: Vec<Interpretation> = minimal.into_iter().map(|j| index.to_interpretation(j, dom).merge(fixed)).collect();
    sort_canonical(&mut out);
    Ok(out)
}
