//! Evaluation of first- and second-order formulas over a finite domain.
//!
//! Formulas are compiled once: variables become slots, predicate symbols
//! become indices into a table of extents, and each extent is a bitmask over
//! the tuples of the domain. Relations therefore have at most 64 tuples.

use std::collections::BTreeSet;

use rayon::prelude::*;

use super::{Domain, Interpretation, SOAssignment};
use crate::ast::{Formula, PredicateSymbol, PredicateVariable, Term, Variable};
use crate::error::{Error, Result};
use crate::sm;

/// Largest number of tuples a quantified relation may range over.
const MAX_SO_BITS: usize = 24;

#[derive(Clone, Copy, Debug)]
enum Arg {
    Const(u32),
    Var(usize),
}

#[derive(Clone, Copy, Debug)]
enum Rel {
    Sym(usize),
    So(usize),
}

#[derive(Debug)]
enum Node {
    Bot,
    Atom(Rel, Vec<Arg>),
    Eq(Arg, Arg),
    And(Box<Node>, Box<Node>),
    Or(Box<Node>, Box<Node>),
    Implies(Box<Node>, Box<Node>),
    Forall(usize, Box<Node>),
    Exists(usize, Box<Node>),
    ForallSo { slot: usize, width: usize, body: Box<Node> },
    ExistsSo { slot: usize, width: usize, bound: Option<Rel>, body: Box<Node> },
}

impl Node {
    fn has_so(&self) -> bool {
        match self {
            Node::ForallSo { .. } | Node::ExistsSo { .. } => true,
            Node::And(a, b) | Node::Or(a, b) | Node::Implies(a, b) => a.has_so() || b.has_so(),
            Node::Forall(_, b) | Node::Exists(_, b) => b.has_so(),
            _ => false,
        }
    }
}

pub(crate) struct Compiled {
    node: Node,
    n: u32,
    syms: Vec<PredicateSymbol>,
    fo_slots: usize,
    so_slots: usize,
}

struct Compiler<'a> {
    dom: &'a Domain,
    syms: Vec<PredicateSymbol>,
    fo: Vec<Variable>,
    so: Vec<PredicateVariable>,
    fo_max: usize,
    so_max: usize,
}

fn width(n: usize, arity: usize) -> Result<usize> {
    match n.checked_pow(arity as u32) {
        Some(w) if w <= 64 => Ok(w),
        _ => Err(Error::Resource(format!("relations of arity {arity} over {n} constants exceed 64 tuples"))),
    }
}

impl Compiler<'_> {
    fn sym(&mut self, p: &PredicateSymbol) -> Result<usize> {
        width(self.dom.len(), p.arity)?;
        Ok(match self.syms.iter().position(|s| s == p) {
            Some(i) => i,
            None => {
                self.syms.push(p.clone());
                self.syms.len() - 1
            }
        })
    }

    fn arg(&self, t: &Term) -> Result<Arg> {
        match t {
            Term::Constant(c) => self
                .dom
                .index_of(c)
                .map(|i| Arg::Const(i as u32))
                .ok_or_else(|| Error::Domain(format!("constant {c} is not in the domain {}", self.dom))),
            Term::Variable(v) => self
                .fo
                .iter()
                .rposition(|w| w == v)
                .map(Arg::Var)
                .ok_or_else(|| Error::Domain(format!("free variable {v} in evaluated formula"))),
        }
    }

    fn so_rel(&self, v: &PredicateVariable) -> Result<Rel> {
        self.so.iter().rposition(|w| w == v).map(Rel::So).ok_or_else(|| Error::Precondition(format!("predicate variable {v} has no value")))
    }

    fn compile(&mut self, f: &Formula) -> Result<Node> {
        Ok(match f {
            Formula::Bottom => Node::Bot,
            Formula::Atom(a) => {
                let s = self.sym(&a.pred)?;
                Node::Atom(Rel::Sym(s), a.args.iter().map(|t| self.arg(t)).collect::<Result<_>>()?)
            }
            Formula::PredVarAtom(v, args) => Node::Atom(self.so_rel(v)?, args.iter().map(|t| self.arg(t)).collect::<Result<_>>()?),
            Formula::Equal(s, t) => Node::Eq(self.arg(s)?, self.arg(t)?),
            Formula::And(a, b) => {
                let (a, b) = (self.compile(a)?, self.compile(b)?);
                // cheap side first; conjunction is commutative
                if a.has_so() && !b.has_so() {
                    Node::And(Box::new(b), Box::new(a))
                } else {
                    Node::And(Box::new(a), Box::new(b))
                }
            }
            Formula::Or(a, b) => Node::Or(Box::new(self.compile(a)?), Box::new(self.compile(b)?)),
            Formula::Implies(a, b) => Node::Implies(Box::new(self.compile(a)?), Box::new(self.compile(b)?)),
            Formula::ForallFO(v, b) | Formula::ExistsFO(v, b) => {
                self.fo.push(v.clone());
                let slot = self.fo.len() - 1;
                self.fo_max = self.fo_max.max(self.fo.len());
                let body = Box::new(self.compile(b)?);
                self.fo.pop();
                if matches!(f, Formula::ForallFO(..)) {
                    Node::Forall(slot, body)
                } else {
                    Node::Exists(slot, body)
                }
            }
            Formula::ForallSO(v, b) | Formula::ExistsSO(v, b) => {
                let w = width(self.dom.len(), v.arity)?;
                let bound = if matches!(f, Formula::ExistsSO(..)) { self.subset_bound(v, b) } else { None };
                if bound.is_none() && w > MAX_SO_BITS {
                    return Err(Error::Resource(format!("quantifying over {v} ranges over 2^{w} relations")));
                }
                self.so.push(v.clone());
                let slot = self.so.len() - 1;
                self.so_max = self.so_max.max(self.so.len());
                let body = Box::new(self.compile(b)?);
                self.so.pop();
                if matches!(f, Formula::ForallSO(..)) {
                    Node::ForallSo { slot, width: w, body }
                } else {
                    Node::ExistsSo { slot, width: w, bound, body }
                }
            }
        })
    }

    /// Finds a conjunct `forall x (V(x) -> q(x))` below the binder of `v`,
    /// possibly under further existential binders. Then only subsets of `q`
    /// can make the body true.
    fn subset_bound(&mut self, v: &PredicateVariable, body: &Formula) -> Option<Rel> {
        let mut cur = body;
        let mut inner: Vec<&PredicateVariable> = Vec::new();
        while let Formula::ExistsSO(w, b) = cur {
            if w == v {
                return None;
            }
            inner.push(w);
            cur = b;
        }
        for c in cur.conjuncts() {
            let mut g = c;
            let mut vars = Vec::new();
            while let Formula::ForallFO(x, b) = g {
                vars.push(Term::Variable(x.clone()));
                g = b;
            }
            let Formula::Implies(l, r) = g else { continue };
            let Formula::PredVarAtom(lv, largs) = &**l else { continue };
            if lv != v || *largs != vars {
                continue;
            }
            let distinct: BTreeSet<&Term> = vars.iter().collect();
            if distinct.len() != vars.len() {
                continue;
            }
            match &**r {
                Formula::Atom(a) if a.args == vars => {
                    return self.sym(&a.pred).ok().map(Rel::Sym);
                }
                Formula::PredVarAtom(q, args) if *args == vars && !inner.contains(&q) && q != v => {
                    return self.so_rel(q).ok();
                }
                _ => {}
            }
        }
        None
    }
}

struct State<'a> {
    n: u32,
    syms: &'a [u64],
    so: Vec<u64>,
    fo: Vec<u32>,
}

impl State<'_> {
    #[inline]
    fn val(&self, a: Arg) -> u32 {
        match a {
            Arg::Const(c) => c,
            Arg::Var(s) => self.fo[s],
        }
    }

    #[inline]
    fn rel(&self, r: Rel) -> u64 {
        match r {
            Rel::Sym(i) => self.syms[i],
            Rel::So(i) => self.so[i],
        }
    }

    fn eval(&mut self, node: &Node) -> bool {
        match node {
            Node::Bot => false,
            Node::Atom(r, args) => {
                let mut rank = 0u32;
                for a in args {
                    rank = rank * self.n + self.val(*a);
                }
                self.rel(*r) >> rank & 1 == 1
            }
            Node::Eq(a, b) => self.val(*a) == self.val(*b),
            Node::And(a, b) => self.eval(a) && self.eval(b),
            Node::Or(a, b) => self.eval(a) || self.eval(b),
            Node::Implies(a, b) => !self.eval(a) || self.eval(b),
            Node::Forall(slot, b) => (0..self.n).all(|c| {
                self.fo[*slot] = c;
                self.eval(b)
            }),
            Node::Exists(slot, b) => (0..self.n).any(|c| {
                self.fo[*slot] = c;
                self.eval(b)
            }),
            Node::ForallSo { slot, width, body } => {
                let all = if *width == 64 { u64::MAX } else { (1u64 << width) - 1 };
                !self.gray(*slot, all, body, false)
            }
            Node::ExistsSo { slot, width, bound, body } => {
                let all = if *width == 64 { u64::MAX } else { (1u64 << width) - 1 };
                let mask = match bound {
                    Some(r) => self.rel(*r) & all,
                    None => all,
                };
                self.gray(*slot, mask, body, true)
            }
        }
    }

    /// Runs through the subsets of `mask` in Gray-code order and stops at the
    /// first one where the body evaluates to `want`.
    fn gray(&mut self, slot: usize, mask: u64, body: &Node, want: bool) -> bool {
        let bits: Vec<u32> = (0..64).filter(|b| mask >> b & 1 == 1).collect();
        let mut cur = 0u64;
        self.so[slot] = cur;
        if self.eval(body) == want {
            return true;
        }
        for i in 1u64..1u64 << bits.len() {
            cur ^= 1 << bits[i.trailing_zeros() as usize];
            self.so[slot] = cur;
            if self.eval(body) == want {
                return true;
            }
        }
        false
    }
}

impl Compiled {
    pub(crate) fn new(f: &Formula, dom: &Domain, free_so: &[PredicateVariable]) -> Result<Compiled> {
        if dom.is_empty() {
            return Err(Error::Domain("empty domain".into()));
        }
        for v in free_so {
            width(dom.len(), v.arity)?;
        }
        let mut c = Compiler { dom, syms: Vec::new(), fo: Vec::new(), so: free_so.to_vec(), fo_max: 0, so_max: free_so.len() };
        let node = c.compile(f)?;
        Ok(Compiled { node, n: dom.len() as u32, syms: c.syms, fo_slots: c.fo_max, so_slots: c.so_max })
    }

    pub(crate) fn symbols(&self) -> &[PredicateSymbol] {
        &self.syms
    }

    /// `syms` holds one mask per compiled symbol, `so` one per free predicate variable.
    pub(crate) fn eval(&self, syms: &[u64], so: &[u64]) -> bool {
        let mut st = State { n: self.n, syms, so: vec![0; self.so_slots], fo: vec![0; self.fo_slots] };
        st.so[..so.len()].copy_from_slice(so);
        st.eval(&self.node)
    }
}

pub(crate) fn extent_mask(dom: &Domain, e: Option<&super::Extent>) -> u64 {
    let n = dom.len();
    let mut m = 0u64;
    for t in e.into_iter().flatten() {
        let mut rank = 0usize;
        let mut ok = true;
        for c in t {
            match dom.index_of(c) {
                Some(i) => rank = rank * n + i,
                None => ok = false,
            }
        }
        if ok && rank < 64 {
            m |= 1 << rank;
        }
    }
    m
}

pub(crate) fn mask_extent(dom: &Domain, arity: usize, mask: u64) -> super::Extent {
    let tuples = dom.tuples(arity);
    (0..tuples.len()).filter(|r| mask >> r & 1 == 1).map(|r| tuples[r].clone()).collect()
}

/// Truth of a closed formula under `i`, with free predicate variables read from `so`.
pub fn evaluate(f: &Formula, dom: &Domain, i: &Interpretation, so: &SOAssignment) -> Result<bool> {
    if let Some(v) = f.free_variables().into_iter().next() {
        return Err(Error::Domain(format!("free variable {v} in evaluated formula")));
    }
    let free: Vec<PredicateVariable> = f.free_predicate_variables().into_iter().collect();
    for v in &free {
        if !so.contains_key(v) {
            return Err(Error::Precondition(format!("predicate variable {v} has no value")));
        }
    }
    let c = Compiled::new(f, dom, &free)?;
    let syms: Vec<u64> = c.symbols().iter().map(|p| extent_mask(dom, i.extent(p))).collect();
    let so_masks: Vec<u64> = free.iter().map(|v| extent_mask(dom, so.get(v))).collect();
    Ok(c.eval(&syms, &so_masks))
}

/// Interpretations `I` extending `fixed` on the extensional symbols with
/// `I |= f` such that no `J` strictly below `I` on `p` satisfies `f*`.
/// Every extent of `p` is tried.
pub fn naive_stable_models(
    f: &Formula,
    p: &BTreeSet<PredicateSymbol>,
    dom: &Domain,
    fixed: &Interpretation,
) -> Result<Vec<Interpretation>> {
    let ctx = sm::star_variables(p);
    let us: Vec<PredicateVariable> = ctx.values().cloned().collect();
    let plain = Compiled::new(f, dom, &[])?;
    let starred = Compiled::new(&sm::star(f, &ctx), dom, &us)?;
    let ps: Vec<PredicateSymbol> = p.iter().cloned().collect();
    let mut offsets = Vec::new();
    let mut total = 0usize;
    for s in &ps {
        let w = width(dom.len(), s.arity)?;
        offsets.push((total, w));
        total += w;
    }
    if total > MAX_SO_BITS + 2 {
        return Err(Error::Resource(format!("{total} intensional ground atoms are too many for the naive search")));
    }
    let split =
        |mask: u64| -> Vec<u64> { offsets.iter().map(|&(o, w)| (mask >> o) & if w == 64 { u64::MAX } else { (1 << w) - 1 }).collect() };
    let base = |c: &Compiled| -> Vec<Option<usize>> { c.symbols().iter().map(|s| ps.iter().position(|q| q == s)).collect() };
    let fixed_masks = |c: &Compiled| -> Vec<u64> { c.symbols().iter().map(|s| extent_mask(dom, fixed.extent(s))).collect() };
    let (plain_pos, starred_pos) = (base(&plain), base(&starred));
    let (plain_fixed, starred_fixed) = (fixed_masks(&plain), fixed_masks(&starred));
    let fill = |pos: &[Option<usize>], fixed: &[u64], parts: &[u64]| -> Vec<u64> {
        pos.iter().zip(fixed).map(|(p, f)| p.map_or(*f, |k| parts[k])).collect()
    };

    let stable: Vec<u64> = (0u64..1u64 << total)
        .into_par_iter()
        .filter(|&mask| {
            let parts = split(mask);
            if !plain.eval(&fill(&plain_pos, &plain_fixed, &parts), &[]) {
                return false;
            }
            let syms = fill(&starred_pos, &starred_fixed, &parts);
            let mut sub = mask;
            while sub != 0 {
                sub = (sub - 1) & mask;
                if starred.eval(&syms, &split(sub)) {
                    return false;
                }
            }
            true
        })
        .collect();

    let mut out = Vec::with_capacity(stable.len());
    for mask in stable {
        let mut i = fixed.clone();
        for (k, s) in ps.iter().enumerate() {
            i.set_extent(s, mask_extent(dom, s.arity, split(mask)[k]));
        }
        out.push(i);
    }
    super::sort_canonical(&mut out);
    Ok(out)
}

/// Every interpretation of `syms` (which must cover the symbols of `f`)
/// satisfying the closed formula `f`.
pub(crate) fn classical_models(f: &Formula, syms: &[PredicateSymbol], dom: &Domain, max_branch: u64) -> Result<Vec<Interpretation>> {
    if let Some(v) = f.free_variables().into_iter().next() {
        return Err(Error::Domain(format!("free variable {v} in evaluated formula")));
    }
    if let Some(v) = f.free_predicate_variables().into_iter().next() {
        return Err(Error::Precondition(format!("predicate variable {v} has no value")));
    }
    let c = Compiled::new(f, dom, &[])?;
    let mut offsets = Vec::new();
    let mut total = 0usize;
    for s in syms {
        let w = width(dom.len(), s.arity)?;
        offsets.push((total, w));
        total += w;
    }
    if total >= 63 || (1u64 << total) > max_branch {
        return Err(Error::Resource(format!("{total} ground atoms are too many to enumerate")));
    }
    let pos: Vec<Option<usize>> = c.symbols().iter().map(|s| syms.iter().position(|q| q == s)).collect();
    let split = |mask: u64| -> Vec<u64> { offsets.iter().map(|&(o, w)| (mask >> o) & ((1u64 << w) - 1)).collect() };
    let found: Vec<u64> = (0u64..1u64 << total)
        .into_par_iter()
        .filter(|&mask| {
            let parts = split(mask);
            let masks: Vec<u64> = pos.iter().map(|p| p.map_or(0, |k| parts[k])).collect();
            c.eval(&masks, &[])
        })
        .collect();
    let mut out: Vec<Interpretation> = found
        .into_iter()
        .map(|mask| {
            let parts = split(mask);
            let mut i = Interpretation::new();
            for (k, s) in syms.iter().enumerate() {
                i.set_extent(s, mask_extent(dom, s.arity, parts[k]));
            }
            i
        })
        .collect();
    super::sort_canonical(&mut out);
    Ok(out)
}
