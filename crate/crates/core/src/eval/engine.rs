//! Model search over the module tree.
//!
//! A program node is satisfied by an interpretation of its free symbols when
//! some extension to its hidden symbols satisfies every member. Members are
//! processed one at a time: a member whose symbols are all decided is checked,
//! a member whose undecided symbols it defines itself enumerates their
//! possible values, and otherwise the extent of one undecided symbol is
//! guessed outright. Hidden symbols of a sub-program never leave it.

use std::collections::{BTreeSet, HashMap, HashSet};

use fixedbitset::FixedBitSet;

use super::ground::{self, AtomIndex, GroundRule};
use super::{Domain, Interpretation};
use crate::ast::{DefModule, Member, ModularProgram, PredicateSymbol};
use crate::error::{Error, Result};

type Syms = BTreeSet<PredicateSymbol>;

struct Engine<'a> {
    dom: &'a Domain,
    index: AtomIndex,
    max_branch: u64,
    grounded: HashMap<usize, Vec<GroundRule>>,
}

struct Info {
    free: Syms,
    generates: Syms,
}

fn info(m: &Member) -> Info {
    match m {
        Member::Def(d) => Info { free: d.free_predicates(), generates: d.intensional.clone() },
        Member::Program(p) => {
            let free = p.free_predicates();
            let generates = free.intersection(&p.intensional()).cloned().collect();
            Info { free, generates }
        }
    }
}

impl Engine<'_> {
    fn rules(&mut self, d: &DefModule) -> Result<&[GroundRule]> {
        let key = d as *const DefModule as usize;
        if !self.grounded.contains_key(&key) {
            let g = ground::ground_rules(&d.rules, self.dom, &self.index)?;
            self.grounded.insert(key, g);
        }
        Ok(&self.grounded[&key])
    }

    fn branch_limit(&self, atoms: usize, what: &str) -> Result<()> {
        if atoms >= 63 || (1u64 << atoms) > self.max_branch {
            return Err(Error::Resource(format!("{what}: 2^{atoms} candidate extents exceed the branch limit {}", self.max_branch)));
        }
        Ok(())
    }

    /// Interpretations of the free symbols of `p` extending `j` on `det`.
    fn node(&mut self, p: &ModularProgram, j: &FixedBitSet, det: &Syms, limit: Option<usize>) -> Result<Vec<FixedBitSet>> {
        let infos: Vec<Info> = p.members.iter().map(info).collect();
        let free_mask = self.index.mask(&p.free_predicates());
        let mut out = HashSet::new();
        let pending: Vec<usize> = (0..p.members.len()).collect();
        self.step(p, &infos, pending, j.clone(), det.clone(), &free_mask, &mut out, limit)?;
        Ok(out.into_iter().collect())
    }

    #[allow(clippy::too_many_arguments)]
    fn step(
        &mut self,
        p: &ModularProgram,
        infos: &[Info],
        mut pending: Vec<usize>,
        j: FixedBitSet,
        det: Syms,
        free_mask: &FixedBitSet,
        out: &mut HashSet<FixedBitSet>,
        limit: Option<usize>,
    ) -> Result<()> {
        if limit.is_some_and(|l| out.len() >= l) {
            return Ok(());
        }
        let mut k = 0;
        while k < pending.len() {
            let idx = pending[k];
            if infos[idx].free.is_subset(&det) {
                if !self.check(&p.members[idx], &infos[idx], &j)? {
                    return Ok(());
                }
                pending.remove(k);
            } else {
                k += 1;
            }
        }
        if pending.is_empty() {
            let mut r = j;
            r.intersect_with(free_mask);
            out.insert(r);
            return Ok(());
        }
        let ready = pending.iter().position(|&idx| {
            let i = &infos[idx];
            i.free.difference(&det).all(|s| i.generates.contains(s))
        });
        if let Some(pos) = ready {
            let idx = pending.remove(pos);
            let exts = self.extend(&p.members[idx], &infos[idx], &j, &det)?;
            let mut det2 = det.clone();
            det2.extend(infos[idx].free.iter().cloned());
            for e in exts {
                self.step(p, infos, pending.clone(), e, det2.clone(), free_mask, out, limit)?;
                if limit.is_some_and(|l| out.len() >= l) {
                    break;
                }
            }
            return Ok(());
        }
        // guess the extent of one undecided symbol, preferring one no pending member defines
        let undecided: Vec<&PredicateSymbol> =
            pending.iter().flat_map(|&i| infos[i].free.difference(&det)).collect::<BTreeSet<_>>().into_iter().collect();
        let defined: Syms = pending.iter().flat_map(|&i| infos[i].generates.iter().cloned()).collect();
        let q = undecided.iter().find(|s| !defined.contains(**s)).copied().unwrap_or(undecided[0]).clone();
        let range = self.index.range(&q);
        self.branch_limit(range.len(), &format!("guessing {q}"))?;
        let mut det2 = det.clone();
        det2.insert(q.clone());
        for mask in 0u64..1u64 << range.len() {
            let mut e = j.clone();
            for (b, a) in range.clone().enumerate() {
                e.set(a, mask >> b & 1 == 1);
            }
            self.step(p, infos, pending.clone(), e, det2.clone(), free_mask, out, limit)?;
            if limit.is_some_and(|l| out.len() >= l) {
                break;
            }
        }
        Ok(())
    }

    fn check(&mut self, m: &Member, i: &Info, j: &FixedBitSet) -> Result<bool> {
        match m {
            Member::Def(d) => {
                let int = self.index.mask(&d.intensional);
                let rules = self.rules(d)?;
                ground::is_stable(rules, &int, j)
            }
            Member::Program(s) => {
                let mut sub = j.clone();
                sub.intersect_with(&self.index.mask(&i.free));
                Ok(!self.node(s, &sub, &i.free, Some(1))?.is_empty())
            }
        }
    }

    /// Every extension of `j` to the undecided free symbols of `m` satisfying it.
    fn extend(&mut self, m: &Member, i: &Info, j: &FixedBitSet, det: &Syms) -> Result<Vec<FixedBitSet>> {
        let open_syms: Syms = i.free.difference(det).cloned().collect();
        let open = self.index.mask(&open_syms);
        let mut base = j.clone();
        base.difference_with(&open);
        match m {
            Member::Def(d) => {
                let int = self.index.mask(&d.intensional);
                let fresh = d.intensional.is_disjoint(det);
                let branch_ok = |n: usize, eng: &Self| eng.branch_limit(n, &format!("module defining {}", sym_list(&d.intensional)));
                let rules = self.rules(d)?.to_vec();
                if fresh && ground::definite_on(&rules, &open) {
                    let m = ground::least_extension(&rules, &open, &base);
                    return Ok(if ground::satisfies(&rules, &m) { vec![m] } else { vec![] });
                }
                let cands: Vec<usize> = ground::possible_atoms(&rules, &open, &base).ones().collect();
                branch_ok(cands.len(), self)?;
                let mut out = Vec::new();
                for mask in 0u64..1u64 << cands.len() {
                    let mut e = base.clone();
                    for (b, &a) in cands.iter().enumerate() {
                        if mask >> b & 1 == 1 {
                            e.insert(a);
                        }
                    }
                    if ground::is_stable(&rules, &int, &e)? {
                        out.push(e);
                    }
                }
                Ok(out)
            }
            Member::Program(s) => {
                let sub_det: Syms = i.free.intersection(det).cloned().collect();
                let mut sub = j.clone();
                sub.intersect_with(&self.index.mask(&sub_det));
                let results = self.node(s, &sub, &sub_det, None)?;
                Ok(results
                    .into_iter()
                    .map(|r| {
                        let mut e = base.clone();
                        e.union_with(&r);
                        e
                    })
                    .collect())
            }
        }
    }
}

fn sym_list(s: &Syms) -> String {
    s.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(", ")
}

/// Interpretations of the free symbols of `p` satisfying its formula and
/// agreeing with `fixed` on `determined`. At most `limit` are produced.
pub(crate) fn models(
    p: &ModularProgram,
    dom: &Domain,
    fixed: &Interpretation,
    determined: &Syms,
    limit: Option<usize>,
    max_branch: u64,
) -> Result<Vec<Interpretation>> {
    let mut syms = p.predicates();
    syms.extend(determined.iter().cloned());
    let index = AtomIndex::new(dom, syms)?;
    let mut j = FixedBitSet::with_capacity(index.total());
    index.load(&fixed.project(determined), dom, &mut j);
    let mut eng = Engine { dom, index, max_branch, grounded: HashMap::new() };
    let res = eng.node(p, &j, determined, limit)?;
    let free = p.free_predicates();
    Ok(res.iter().map(|r| eng.index.to_interpretation(r, dom).project(&free)).collect())
}
