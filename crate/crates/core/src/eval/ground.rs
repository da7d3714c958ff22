//! Ground rules over a dense numbering of ground atoms.

use std::collections::{BTreeMap, BTreeSet};

use fixedbitset::FixedBitSet;

use super::{Domain, Interpretation};
use crate::ast::{Atom, CmpOp, Constant, PredicateSymbol, Rule, Term};
use crate::error::{Error, Result};

/// Numbers every ground atom of a signature: the atoms of one symbol occupy
/// a contiguous range in lexicographic tuple order.
pub(crate) struct AtomIndex {
    n: usize,
    ranges: BTreeMap<PredicateSymbol, (usize, usize)>,
    total: usize,
}

impl AtomIndex {
    pub(crate) fn new(dom: &Domain, syms: impl IntoIterator<Item = PredicateSymbol>) -> Result<AtomIndex> {
        let n = dom.len();
        let mut ranges = BTreeMap::new();
        let mut total = 0usize;
        for s in syms.into_iter().collect::<BTreeSet<_>>() {
            let w = n
                .checked_pow(s.arity as u32)
                .filter(|w| total.checked_add(*w).is_some_and(|t| t <= 1 << 24))
                .ok_or_else(|| Error::Resource(format!("too many ground atoms for {s}")))?;
            ranges.insert(s, (total, w));
            total += w;
        }
        Ok(AtomIndex { n, ranges, total })
    }

    pub(crate) fn total(&self) -> usize {
        self.total
    }

    pub(crate) fn range(&self, p: &PredicateSymbol) -> std::ops::Range<usize> {
        match self.ranges.get(p) {
            Some(&(b, w)) => b..b + w,
            None => 0..0,
        }
    }

    pub(crate) fn mask(&self, syms: &BTreeSet<PredicateSymbol>) -> FixedBitSet {
        let mut m = FixedBitSet::with_capacity(self.total);
        for s in syms {
            let r = self.range(s);
            m.insert_range(r);
        }
        m
    }

    fn id(&self, p: &PredicateSymbol, tuple: &[usize]) -> usize {
        let (b, _) = self.ranges[p];
        b + tuple.iter().fold(0, |r, c| r * self.n + c)
    }

    pub(crate) fn decode(&self, id: usize, dom: &Domain) -> (PredicateSymbol, Vec<Constant>) {
        for (p, &(b, w)) in &self.ranges {
            if id >= b && id < b + w {
                let mut r = id - b;
                let mut t = vec![Constant::new(""); p.arity];
                for slot in t.iter_mut().rev() {
                    *slot = dom.constants()[r % self.n].clone();
                    r /= self.n;
                }
                return (p.clone(), t);
            }
        }
        unreachable!("atom id out of range")
    }

    pub(crate) fn load(&self, i: &Interpretation, dom: &Domain, bits: &mut FixedBitSet) {
        for p in i.symbols() {
            if !self.ranges.contains_key(p) {
                continue;
            }
            for t in i.extent(p).into_iter().flatten() {
                let idx: Option<Vec<usize>> = t.iter().map(|c| dom.index_of(c)).collect();
                if let Some(idx) = idx {
                    bits.insert(self.id(p, &idx));
                }
            }
        }
    }

    pub(crate) fn to_interpretation(&self, bits: &FixedBitSet, dom: &Domain) -> Interpretation {
        let mut i = Interpretation::new();
        for id in bits.ones() {
            let (p, t) = self.decode(id, dom);
            i.insert(&p, t);
        }
        i
    }
}

/// A ground rule. A choice head also appears among the double-negated atoms.
#[derive(Clone, Debug)]
pub(crate) struct GroundRule {
    pub head: Vec<usize>,
    pub pos: Vec<usize>,
    pub neg: Vec<usize>,
    pub dneg: Vec<usize>,
}

fn ground_atom(a: &Atom, env: &BTreeMap<&str, usize>, dom: &Domain, index: &AtomIndex) -> Result<usize> {
    let tuple: Vec<usize> = a
        .args
        .iter()
        .map(|t| match t {
            Term::Constant(c) => dom.index_of(c).ok_or_else(|| Error::Domain(format!("constant {c} is not in the domain {dom}"))),
            Term::Variable(v) => Ok(env[v.0.as_str()]),
        })
        .collect::<Result<_>>()?;
    Ok(index.id(&a.pred, &tuple))
}

fn term_value(t: &Term, env: &BTreeMap<&str, usize>, dom: &Domain) -> Result<usize> {
    match t {
        Term::Constant(c) => dom.index_of(c).ok_or_else(|| Error::Domain(format!("constant {c} is not in the domain {dom}"))),
        Term::Variable(v) => Ok(env[v.0.as_str()]),
    }
}

/// All ground instances over the domain, with comparisons decided.
pub(crate) fn ground_rules(rules: &[Rule], dom: &Domain, index: &AtomIndex) -> Result<Vec<GroundRule>> {
    let mut out = Vec::new();
    for r in rules {
        r.check_safe()?;
        let vars = r.variables();
        let n = dom.len();
        let count = n
            .checked_pow(vars.len() as u32)
            .filter(|c| *c <= 1 << 24)
            .ok_or_else(|| Error::Resource(format!("rule `{r}` has too many ground instances")))?;
        for mut k in 0..count {
            let mut env = BTreeMap::new();
            for v in vars.iter().rev() {
                env.insert(v.0.as_str(), k % n);
                k /= n;
            }
            let mut keep = true;
            for c in &r.cmp {
                let eq = term_value(&c.left, &env, dom)? == term_value(&c.right, &env, dom)?;
                if eq != (c.op == CmpOp::Eq) {
                    keep = false;
                    break;
                }
            }
            if !keep {
                continue;
            }
            let g = |atoms: &[Atom]| -> Result<Vec<usize>> { atoms.iter().map(|a| ground_atom(a, &env, dom, index)).collect() };
            let head = g(&r.head)?;
            let mut dneg = g(&r.dneg)?;
            if r.choice {
                dneg.extend(head.iter().copied());
            }
            out.push(GroundRule { head, pos: g(&r.pos)?, neg: g(&r.neg)?, dneg });
        }
    }
    Ok(out)
}

/// Classical satisfaction of every ground rule.
pub(crate) fn satisfies(rules: &[GroundRule], j: &FixedBitSet) -> bool {
    rules.iter().all(|r| {
        let body = r.pos.iter().all(|&a| j[a]) && r.neg.iter().all(|&a| !j[a]) && r.dneg.iter().all(|&a| j[a]);
        !body || r.head.iter().any(|&a| j[a])
    })
}

/// Reduct of the rules relative to `j` over the atoms of `int`: for each
/// rule whose negative part holds in `j`, the positive `int` atoms of its
/// body and the `int` atoms of its head. Rules already satisfied by `j`
/// outside `int`, or blocked by it, are dropped.
fn reduct(rules: &[GroundRule], int: &FixedBitSet, j: &FixedBitSet) -> Vec<(Vec<usize>, Vec<usize>)> {
    let mut out = Vec::new();
    for r in rules {
        if r.neg.iter().any(|&a| j[a]) || r.dneg.iter().any(|&a| !j[a]) {
            continue;
        }
        if r.pos.iter().any(|&a| !int[a] && !j[a]) {
            continue;
        }
        if r.head.iter().any(|&a| !int[a] && j[a]) {
            continue;
        }
        let body: Vec<usize> = r.pos.iter().copied().filter(|&a| int[a]).collect();
        let head: Vec<usize> = r.head.iter().copied().filter(|&a| int[a]).collect();
        out.push((body, head));
    }
    out
}

fn least_model(red: &[(Vec<usize>, Vec<usize>)], size: usize) -> FixedBitSet {
    let mut m = FixedBitSet::with_capacity(size);
    let mut changed = true;
    while changed {
        changed = false;
        for (body, head) in red {
            if head.len() == 1 && !m[head[0]] && body.iter().all(|&a| m[a]) {
                m.insert(head[0]);
                changed = true;
            }
        }
    }
    m
}

/// Whether `j` is a stable model of the rules for the atoms in `int`:
/// a classical model whose `int` part is minimal among models of the reduct.
pub(crate) fn is_stable(rules: &[GroundRule], int: &FixedBitSet, j: &FixedBitSet) -> Result<bool> {
    if !satisfies(rules, j) {
        return Ok(false);
    }
    let red = reduct(rules, int, j);
    let mut jp = j.clone();
    jp.intersect_with(int);
    if red.iter().all(|(_, h)| h.len() <= 1) {
        return Ok(least_model(&red, j.len()) == jp);
    }
    // disjunctive heads: look for a proper subset of j's int part modelling the reduct
    let ones: Vec<usize> = jp.ones().collect();
    if ones.len() > 24 {
        return Err(Error::Resource("disjunctive minimality check over more than 24 atoms".into()));
    }
    for mask in 0u64..(1u64 << ones.len()) - 1 {
        let mut k = FixedBitSet::with_capacity(j.len());
        for (b, &a) in ones.iter().enumerate() {
            if mask >> b & 1 == 1 {
                k.insert(a);
            }
        }
        let model = red.iter().all(|(body, head)| !body.iter().all(|&a| k[a]) || head.iter().any(|&a| k[a]));
        if model {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Over-approximation of the atoms of `open` that can become true: the
/// least fixpoint treating every literal over `open` atoms other than
/// positive ones as satisfiable.
pub(crate) fn possible_atoms(rules: &[GroundRule], open: &FixedBitSet, j: &FixedBitSet) -> FixedBitSet {
    let mut c = FixedBitSet::with_capacity(j.len());
    let mut changed = true;
    while changed {
        changed = false;
        for r in rules {
            let ok = r.pos.iter().all(|&a| if open[a] { c[a] } else { j[a] })
                && r.neg.iter().all(|&a| open[a] || !j[a])
                && r.dneg.iter().all(|&a| open[a] || j[a]);
            if !ok {
                continue;
            }
            for &h in &r.head {
                if open[h] && !c[h] {
                    c.insert(h);
                    changed = true;
                }
            }
        }
    }
    c
}

/// True when, on the `open` atoms, the rules are definite: no negation over
/// open atoms and at most one open head atom per rule.
pub(crate) fn definite_on(rules: &[GroundRule], open: &FixedBitSet) -> bool {
    rules.iter().all(|r| r.neg.iter().chain(&r.dneg).all(|&a| !open[a]) && r.head.iter().filter(|&&a| open[a]).count() <= 1)
}

/// Least extension of `j` on the `open` atoms closed under the rules, which
/// must be definite on them.
pub(crate) fn least_extension(rules: &[GroundRule], open: &FixedBitSet, j: &FixedBitSet) -> FixedBitSet {
    let mut m = j.clone();
    m.difference_with(open);
    let mut changed = true;
    while changed {
        changed = false;
        for r in rules {
            let fires = r.pos.iter().all(|&a| m[a]) && r.neg.iter().all(|&a| !m[a]) && r.dneg.iter().all(|&a| m[a]);
            if !fires {
                continue;
            }
            if r.head.iter().any(|&h| !open[h] && m[h]) {
                continue;
            }
            for &h in &r.head {
                if open[h] && !m[h] {
                    m.insert(h);
                    changed = true;
                }
            }
        }
    }
    m
}
