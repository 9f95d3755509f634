//! Terms of the calculus: variables, located pops and pushes, skip and
//! sequencing, together with positions, substitution and the text format.

mod enumerate;
mod parse;
mod pretty;
mod subst;

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

pub use enumerate::{enumerate_terms, random_closed_term};
pub use parse::{parse, ParseError, ParseErrorKind};
pub use subst::{apply_subst_map, fresh_name, substitute, Nameless, SubstMap};

/// A variable name.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Name(Arc<str>);

/// Free-variable sets keyed by the address of a shared child. Only valid
/// while the terms it was filled from are alive.
pub(crate) type FreeVarMemo = std::collections::HashMap<*const Term, Arc<BTreeSet<Name>>>;

impl Name {
    pub fn new(s: &str) -> Name {
        Name(Arc::from(s))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// Binders introduced by `_` in the source text.
    pub fn is_wildcard(&self) -> bool {
        self.0.starts_with('_')
    }
}

impl From<&str> for Name {
    fn from(s: &str) -> Name {
        Name::new(s)
    }
}

impl From<String> for Name {
    fn from(s: String) -> Name {
        Name(Arc::from(s))
    }
}

impl fmt::Display for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A stack location. `lam` is the default location.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Location(Arc<str>);

impl Location {
    pub const DEFAULT: &'static str = "lam";

    pub fn new(s: &str) -> Location {
        Location(Arc::from(s))
    }

    pub fn lam() -> Location {
        Location::new(Self::DEFAULT)
    }

    pub fn is_default(&self) -> bool {
        &*self.0 == Self::DEFAULT
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl From<&str> for Location {
    fn from(s: &str) -> Location {
        Location::new(s)
    }
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A term. `PartialEq` is alpha-equivalence; use [`Term::syntactic_eq`]
/// when binder names matter.
#[derive(Clone)]
pub enum Term {
    Var(Name),
    Pop(Location, Name, Arc<Term>),
    Push(Arc<Term>, Location, Arc<Term>),
    Skip,
    Seq(Arc<Term>, Arc<Term>),
}

impl Term {
    pub fn var(x: impl Into<Name>) -> Term {
        Term::Var(x.into())
    }

    pub fn pop(loc: Location, x: impl Into<Name>, body: Term) -> Term {
        Term::Pop(loc, x.into(), Arc::new(body))
    }

    pub fn push(arg: Term, loc: Location, body: Term) -> Term {
        Term::Push(Arc::new(arg), loc, Arc::new(body))
    }

    pub fn seq(left: Term, right: Term) -> Term {
        Term::Seq(Arc::new(left), Arc::new(right))
    }

    pub fn size(&self) -> usize {
        match self {
            Term::Var(_) | Term::Skip => 1,
            Term::Pop(_, _, m) => 1 + m.size(),
            Term::Push(n, _, m) => 1 + n.size() + m.size(),
            Term::Seq(m, n) => 1 + m.size() + n.size(),
        }
    }

    /// Height of the syntax tree; leaves have height 1.
    pub fn height(&self) -> usize {
        match self {
            Term::Var(_) | Term::Skip => 1,
            Term::Pop(_, _, m) => 1 + m.height(),
            Term::Push(n, _, m) | Term::Seq(n, m) => 1 + n.height().max(m.height()),
        }
    }

    pub fn free_vars(&self) -> BTreeSet<Name> {
        Arc::unwrap_or_clone(self.free_vars_memo(&mut FreeVarMemo::new()))
    }

    /// Free variables, computed once per shared child node.
    pub(crate) fn free_vars_memo(&self, memo: &mut FreeVarMemo) -> Arc<BTreeSet<Name>> {
        fn child(c: &Arc<Term>, memo: &mut FreeVarMemo) -> Arc<BTreeSet<Name>> {
            let key = Arc::as_ptr(c);
            if let Some(fv) = memo.get(&key) {
                return fv.clone();
            }
            let fv = c.free_vars_memo(memo);
            memo.insert(key, fv.clone());
            fv
        }
        match self {
            Term::Var(x) => Arc::new(BTreeSet::from([x.clone()])),
            Term::Skip => Arc::new(BTreeSet::new()),
            Term::Pop(_, x, m) => {
                let inner = child(m, memo);
                if inner.contains(x) {
                    let mut out = (*inner).clone();
                    out.remove(x);
                    Arc::new(out)
                } else {
                    inner
                }
            }
            Term::Push(n, _, m) | Term::Seq(n, m) => {
                let (l, r) = (child(n, memo), child(m, memo));
                if r.is_empty() || Arc::ptr_eq(&l, &r) {
                    l
                } else if l.is_empty() {
                    r
                } else {
                    Arc::new(l.union(&r).cloned().collect())
                }
            }
        }
    }

    pub fn has_free(&self, x: &Name) -> bool {
        match self {
            Term::Var(y) => x == y,
            Term::Pop(_, y, m) => x != y && m.has_free(x),
            Term::Push(n, _, m) | Term::Seq(n, m) => n.has_free(x) || m.has_free(x),
            Term::Skip => false,
        }
    }

    /// Positions of the free occurrences of `x`, left to right.
    pub fn free_occurrences(&self, x: &Name) -> Vec<Position> {
        fn go(t: &Term, x: &Name, path: &mut Vec<Selector>, out: &mut Vec<Position>) {
            match t {
                Term::Var(y) if y == x => out.push(Position(path.clone())),
                Term::Var(_) | Term::Skip => {}
                Term::Pop(_, y, m) => {
                    if y != x {
                        path.push(Selector::PopBody);
                        go(m, x, path, out);
                        path.pop();
                    }
                }
                Term::Push(n, _, m) => {
                    path.push(Selector::PushArg);
                    go(n, x, path, out);
                    path.pop();
                    path.push(Selector::PushBody);
                    go(m, x, path, out);
                    path.pop();
                }
                Term::Seq(n, m) => {
                    path.push(Selector::SeqLeft);
                    go(n, x, path, out);
                    path.pop();
                    path.push(Selector::SeqRight);
                    go(m, x, path, out);
                    path.pop();
                }
            }
        }
        let mut out = Vec::new();
        go(self, x, &mut Vec::new(), &mut out);
        out
    }

    /// Locations occurring anywhere in the term.
    pub fn locations(&self) -> BTreeSet<Location> {
        let mut out = BTreeSet::new();
        let mut todo = vec![self];
        while let Some(t) = todo.pop() {
            match t {
                Term::Var(_) | Term::Skip => {}
                Term::Pop(a, _, m) => {
                    out.insert(a.clone());
                    todo.push(m);
                }
                Term::Push(n, a, m) => {
                    out.insert(a.clone());
                    todo.push(n);
                    todo.push(m);
                }
                Term::Seq(n, m) => {
                    todo.push(n);
                    todo.push(m);
                }
            }
        }
        out
    }

    /// Nesting depth of pops.
    pub fn pop_depth(&self) -> usize {
        match self {
            Term::Var(_) | Term::Skip => 0,
            Term::Pop(_, _, m) => 1 + m.pop_depth(),
            Term::Push(n, _, m) | Term::Seq(n, m) => n.pop_depth().max(m.pop_depth()),
        }
    }

    pub fn alpha_eq(&self, other: &Term) -> bool {
        subst::alpha_eq(self, other)
    }

    /// Equality including binder names.
    pub fn syntactic_eq(&self, other: &Term) -> bool {
        match (self, other) {
            (Term::Var(x), Term::Var(y)) => x == y,
            (Term::Skip, Term::Skip) => true,
            (Term::Pop(a, x, m), Term::Pop(b, y, n)) => a == b && x == y && m.syntactic_eq(n),
            (Term::Push(n1, a, m1), Term::Push(n2, b, m2)) => a == b && n1.syntactic_eq(n2) && m1.syntactic_eq(m2),
            (Term::Seq(n1, m1), Term::Seq(n2, m2)) => n1.syntactic_eq(n2) && m1.syntactic_eq(m2),
            _ => false,
        }
    }

    /// A nameless rendering: two terms have equal keys iff they are alpha-equivalent.
    pub fn alpha_key(&self) -> Nameless {
        Nameless::of(self)
    }

    pub fn subterm(&self, pos: &Position) -> Option<&Term> {
        pos.0.iter().try_fold(self, |t, sel| t.child(*sel))
    }

    pub fn child(&self, sel: Selector) -> Option<&Term> {
        match (self, sel) {
            (Term::Pop(_, _, m), Selector::PopBody) => Some(m),
            (Term::Push(n, _, _), Selector::PushArg) => Some(n),
            (Term::Push(_, _, m), Selector::PushBody) => Some(m),
            (Term::Seq(n, _), Selector::SeqLeft) => Some(n),
            (Term::Seq(_, m), Selector::SeqRight) => Some(m),
            _ => None,
        }
    }

    fn child_mut(&mut self, sel: Selector) -> Option<&mut Term> {
        match (self, sel) {
            (Term::Pop(_, _, m), Selector::PopBody) => Some(Arc::make_mut(m)),
            (Term::Push(n, _, _), Selector::PushArg) => Some(Arc::make_mut(n)),
            (Term::Push(_, _, m), Selector::PushBody) => Some(Arc::make_mut(m)),
            (Term::Seq(n, _), Selector::SeqLeft) => Some(Arc::make_mut(n)),
            (Term::Seq(_, m), Selector::SeqRight) => Some(Arc::make_mut(m)),
            _ => None,
        }
    }

    pub fn subterm_mut(&mut self, pos: &Position) -> Option<&mut Term> {
        pos.0.iter().try_fold(self, |t, sel| t.child_mut(*sel))
    }

    /// Replace the subterm at `pos`, returning the old one.
    pub fn replace_at(&mut self, pos: &Position, new: Term) -> Option<Term> {
        self.subterm_mut(pos).map(|slot| std::mem::replace(slot, new))
    }
}

impl PartialEq for Term {
    fn eq(&self, other: &Term) -> bool {
        self.alpha_eq(other)
    }
}

impl Eq for Term {}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "`{self}`")
    }
}

impl std::str::FromStr for Term {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Term, ParseError> {
        parse(s)
    }
}

/// One step of a path into a term.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Selector {
    PopBody,
    PushArg,
    PushBody,
    SeqLeft,
    SeqRight,
}

impl Selector {
    pub fn name(self) -> &'static str {
        match self {
            Selector::PopBody => "pop_body",
            Selector::PushArg => "push_arg",
            Selector::PushBody => "push_body",
            Selector::SeqLeft => "seq_left",
            Selector::SeqRight => "seq_right",
        }
    }
}

/// A path from the root of a term. The empty path is the root.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Position(pub Vec<Selector>);

impl Position {
    pub fn root() -> Position {
        Position(Vec::new())
    }

    pub fn child(&self, sel: Selector) -> Position {
        let mut p = self.0.clone();
        p.push(sel);
        Position(p)
    }

    pub fn join(&self, tail: &Position) -> Position {
        Position(self.0.iter().chain(tail.0.iter()).copied().collect())
    }

    pub fn is_spine(&self) -> bool {
        !self.0.contains(&Selector::PushArg)
    }

    pub fn is_valid_for(&self, t: &Term) -> bool {
        t.subterm(self).is_some()
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = self.0.iter().map(|s| s.name()).collect();
        f.write_str(&names.join("/"))
    }
}
