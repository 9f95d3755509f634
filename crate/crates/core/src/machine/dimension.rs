use std::collections::BTreeSet;

use crate::syntax::{Location, Name, SubstMap, Term};

use super::Memory;

/// `[S].*` for the minimal memory `S` of dimension `d` over `locs`.
pub fn dimension_term(d: usize, locs: &[Location]) -> Term {
    if d == 0 {
        return Term::Skip;
    }
    let item = dimension_term(d - 1, locs);
    let mut t = Term::Skip;
    for a in locs.iter().rev() {
        for _ in 0..d {
            t = Term::push(item.clone(), a.clone(), t);
        }
    }
    t
}

/// `d` items of dimension `d - 1` on each listed location.
pub fn dimension_memory(d: usize, locs: &[Location]) -> Memory {
    if d == 0 {
        return Memory::new();
    }
    let item = dimension_term(d - 1, locs);
    Memory::from_stacks(locs.iter().map(|a| (a.clone(), vec![item.clone(); d])))
}

pub fn dimension_subst(d: usize, locs: &[Location], vars: &BTreeSet<Name>) -> SubstMap {
    let t = dimension_term(d, locs);
    vars.iter().map(|x| (x.clone(), t.clone())).collect()
}

/// The dimension sufficient for a spine normal form to run: pops raise it by
/// one, everything else passes it through. Returns `None` off the grammar.
pub fn spine_dimension(w: &Term) -> Option<usize> {
    fn wf(t: &Term) -> Option<usize> {
        match t {
            Term::Pop(_, _, m) => wf(m).map(|d| d + 1),
            _ => vf(t),
        }
    }
    fn vf(t: &Term) -> Option<usize> {
        match t {
            Term::Skip | Term::Var(_) => Some(0),
            Term::Push(_, _, v) => vf(v),
            Term::Seq(x, w) if matches!(**x, Term::Var(_)) => wf(w),
            _ => None,
        }
    }
    wf(w)
}
