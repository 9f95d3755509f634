use std::collections::{BTreeMap, BTreeSet};

use super::{FreeVarMemo, Location, Name, Term};

/// A simultaneous substitution.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SubstMap(BTreeMap<Name, Term>);

impl SubstMap {
    pub fn new() -> SubstMap {
        SubstMap(BTreeMap::new())
    }

    pub fn single(x: Name, n: Term) -> SubstMap {
        let mut m = SubstMap::new();
        m.insert(x, n);
        m
    }

    pub fn insert(&mut self, x: Name, n: Term) {
        self.0.insert(x, n);
    }

    pub fn get(&self, x: &Name) -> Option<&Term> {
        self.0.get(x)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Name, &Term)> {
        self.0.iter()
    }

    pub fn apply(&self, t: &Term) -> Term {
        if self.is_empty() {
            return t.clone();
        }
        apply(&self.0, t, &mut FreeVarMemo::new())
    }
}

impl FromIterator<(Name, Term)> for SubstMap {
    fn from_iter<I: IntoIterator<Item = (Name, Term)>>(iter: I) -> SubstMap {
        SubstMap(iter.into_iter().collect())
    }
}

fn apply(map: &BTreeMap<Name, Term>, t: &Term, memo: &mut FreeVarMemo) -> Term {
    let fv = t.free_vars_memo(memo);
    if !map.keys().any(|k| fv.contains(k)) {
        return t.clone();
    }
    match t {
        Term::Var(x) => map.get(x).cloned().unwrap_or_else(|| t.clone()),
        Term::Skip => Term::Skip,
        Term::Push(n, a, m) => Term::push(apply(map, n, memo), a.clone(), apply(map, m, memo)),
        Term::Seq(n, m) => Term::seq(apply(map, n, memo), apply(map, m, memo)),
        Term::Pop(a, y, body) => {
            let live: BTreeMap<Name, Term> =
                map.iter().filter(|(k, _)| *k != y && fv.contains(*k)).map(|(k, v)| (k.clone(), v.clone())).collect();
            let mut range_fv = BTreeSet::new();
            for v in live.values() {
                range_fv.extend(v.free_vars_memo(memo).iter().cloned());
            }
            if range_fv.contains(y) {
                let mut avoid = range_fv;
                avoid.extend(body.free_vars_memo(memo).iter().cloned());
                avoid.extend(live.keys().cloned());
                let y2 = fresh_name(y, &avoid);
                let mut inner = live;
                inner.insert(y.clone(), Term::Var(y2.clone()));
                Term::pop(a.clone(), y2, apply(&inner, body, memo))
            } else {
                Term::pop(a.clone(), y.clone(), apply(&live, body, memo))
            }
        }
    }
}

/// `{n/x}m`, renaming binders of `m` that would capture free variables of `n`.
pub fn substitute(n: &Term, x: &Name, m: &Term) -> Term {
    SubstMap::single(x.clone(), n.clone()).apply(m)
}

pub fn apply_subst_map(sigma: &SubstMap, t: &Term) -> Term {
    sigma.apply(t)
}

/// A variant of `base` (trailing digits replaced by a counter) not in `avoid`.
pub fn fresh_name(base: &Name, avoid: &BTreeSet<Name>) -> Name {
    let stem = base.as_str().trim_end_matches(|c: char| c.is_ascii_digit());
    (1..).map(|k| Name::from(format!("{stem}{k}"))).find(|cand| !avoid.contains(cand)).expect("an unused name exists")
}

pub(super) fn alpha_eq(s: &Term, t: &Term) -> bool {
    fn go<'a>(s: &'a Term, t: &'a Term, ls: &mut Vec<&'a Name>, rs: &mut Vec<&'a Name>) -> bool {
        match (s, t) {
            (Term::Var(x), Term::Var(y)) => {
                let i = ls.iter().rposition(|b| *b == x);
                let j = rs.iter().rposition(|b| *b == y);
                match (i, j) {
                    (None, None) => x == y,
                    (Some(i), Some(j)) => i == j,
                    _ => false,
                }
            }
            (Term::Skip, Term::Skip) => true,
            (Term::Pop(a, x, m), Term::Pop(b, y, n)) => {
                if a != b {
                    return false;
                }
                ls.push(x);
                rs.push(y);
                let ok = go(m, n, ls, rs);
                ls.pop();
                rs.pop();
                ok
            }
            (Term::Push(n1, a, m1), Term::Push(n2, b, m2)) => a == b && go(n1, n2, ls, rs) && go(m1, m2, ls, rs),
            (Term::Seq(n1, m1), Term::Seq(n2, m2)) => go(n1, n2, ls, rs) && go(m1, m2, ls, rs),
            _ => false,
        }
    }
    go(s, t, &mut Vec::new(), &mut Vec::new())
}

/// De Bruijn form used as a hash key for alpha-classes.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Nameless {
    Bound(usize),
    Free(Name),
    Pop(Location, Box<Nameless>),
    Push(Box<Nameless>, Location, Box<Nameless>),
    Skip,
    Seq(Box<Nameless>, Box<Nameless>),
}

impl Nameless {
    pub(super) fn of(t: &Term) -> Nameless {
        fn go(t: &Term, env: &mut Vec<Name>) -> Nameless {
            match t {
                Term::Var(x) => match env.iter().rev().position(|b| b == x) {
                    Some(i) => Nameless::Bound(i),
                    None => Nameless::Free(x.clone()),
                },
                Term::Skip => Nameless::Skip,
                Term::Pop(a, x, m) => {
                    env.push(x.clone());
                    let body = go(m, env);
                    env.pop();
                    Nameless::Pop(a.clone(), Box::new(body))
                }
                Term::Push(n, a, m) => Nameless::Push(Box::new(go(n, env)), a.clone(), Box::new(go(m, env))),
                Term::Seq(n, m) => Nameless::Seq(Box::new(go(n, env)), Box::new(go(m, env))),
            }
        }
        go(t, &mut Vec::new())
    }
}
