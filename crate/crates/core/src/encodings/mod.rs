//! Translations into the calculus: call-by-name and weak open call-by-value
//! λ-terms, and a monadic calculus with higher-order store.

mod parse;

use std::fmt;

use crate::rewrite::{apply_redex, first_redex, ReductionTrace, Step};
use crate::syntax::{Location, Name, Term};

pub use parse::{parse_lambda, parse_store, EncodingParseError};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LambdaTerm {
    Var(Name),
    Lam(Name, Box<LambdaTerm>),
    App(Box<LambdaTerm>, Box<LambdaTerm>),
}

impl LambdaTerm {
    pub fn var(x: &str) -> LambdaTerm {
        LambdaTerm::Var(Name::new(x))
    }

    pub fn lam(x: &str, body: LambdaTerm) -> LambdaTerm {
        LambdaTerm::Lam(Name::new(x), Box::new(body))
    }

    pub fn app(f: LambdaTerm, a: LambdaTerm) -> LambdaTerm {
        LambdaTerm::App(Box::new(f), Box::new(a))
    }

    pub fn is_value(&self) -> bool {
        !matches!(self, LambdaTerm::App(..))
    }
}

impl fmt::Display for LambdaTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LambdaTerm::Var(x) => write!(f, "{x}"),
            LambdaTerm::Lam(x, b) => write!(f, "\\{x}. {b}"),
            LambdaTerm::App(m, n) => {
                match **m {
                    LambdaTerm::Lam(..) => write!(f, "({m})")?,
                    _ => write!(f, "{m}")?,
                }
                match **n {
                    LambdaTerm::Var(_) => write!(f, " {n}"),
                    _ => write!(f, " ({n})"),
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StoreValue {
    Var(Name),
    Lam(Name, Box<StoreTerm>),
}

/// Computations of the store calculus. The bound operand is always a value.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StoreTerm {
    Ret(StoreValue),
    Bind(Box<StoreTerm>, StoreValue),
    Get(Location, Name, Box<StoreTerm>),
    Set(Location, StoreValue, Box<StoreTerm>),
}

impl fmt::Display for StoreValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StoreValue::Var(x) => write!(f, "{x}"),
            StoreValue::Lam(x, m) => write!(f, "(\\{x}. {m})"),
        }
    }
}

impl fmt::Display for StoreTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StoreTerm::Ret(v) => write!(f, "ret {v}"),
            StoreTerm::Bind(m, v) => match **m {
                StoreTerm::Set(..) => write!(f, "({m}) >>= {v}"),
                _ => write!(f, "{m} >>= {v}"),
            },
            StoreTerm::Get(a, x, m) => write!(f, "get {a} (\\{x}. {m})"),
            StoreTerm::Set(a, v, m) => write!(f, "set {a} {v} {m}"),
        }
    }
}

/// `λx.M` to `<x>.M` and `M N` to `[N].M`.
pub fn encode_cbn(t: &LambdaTerm) -> Term {
    match t {
        LambdaTerm::Var(x) => Term::Var(x.clone()),
        LambdaTerm::Lam(x, b) => Term::pop(Location::lam(), x.clone(), encode_cbn(b)),
        LambdaTerm::App(m, n) => Term::push(encode_cbn(n), Location::lam(), encode_cbn(m)),
    }
}

fn cbv_value(t: &LambdaTerm) -> Term {
    match t {
        LambdaTerm::Var(x) => Term::Var(x.clone()),
        LambdaTerm::Lam(x, b) => Term::pop(Location::lam(), x.clone(), encode_cbv(b)),
        LambdaTerm::App(..) => unreachable!("not a value"),
    }
}

/// Values return themselves as `[v].*`; `v t` is `t;v`. An application whose
/// function is not a value evaluates the argument, then the function, then
/// applies: `t;(s;<f>.f)`.
pub fn encode_cbv(t: &LambdaTerm) -> Term {
    match t {
        LambdaTerm::App(s, u) if s.is_value() => Term::seq(encode_cbv(u), cbv_value(s)),
        LambdaTerm::App(s, u) => {
            let apply = Term::pop(Location::lam(), "f", Term::var("f"));
            Term::seq(encode_cbv(u), Term::seq(encode_cbv(s), apply))
        }
        v => Term::push(cbv_value(v), Location::lam(), Term::Skip),
    }
}

pub fn encode_store_value(v: &StoreValue) -> Term {
    match v {
        StoreValue::Var(x) => Term::Var(x.clone()),
        StoreValue::Lam(x, m) => Term::pop(Location::lam(), x.clone(), encode_store(m)),
    }
}

pub fn encode_store(t: &StoreTerm) -> Term {
    match t {
        StoreTerm::Ret(v) => Term::push(encode_store_value(v), Location::lam(), Term::Skip),
        StoreTerm::Bind(m, v) => Term::seq(encode_store(m), encode_store_value(v)),
        StoreTerm::Get(a, x, m) => {
            Term::pop(a.clone(), x.clone(), Term::push(Term::Var(x.clone()), a.clone(), encode_store(m)))
        }
        StoreTerm::Set(a, v, m) => {
            Term::pop(a.clone(), "_", Term::push(encode_store_value(v), a.clone(), encode_store(m)))
        }
    }
}

/// Sugared forms whose standard interpretation simplifies by spine reduction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DerivedForm {
    /// `a := V ; M`
    Update { loc: Location, value: Term, rest: Term },
    /// `!a`
    Lookup { loc: Location },
    /// `let x = !a in M`
    LetGet { loc: Location, x: Name, body: Term },
    /// Value application `V W`.
    Apply { fun: Term, arg: Term },
}

impl DerivedForm {
    pub fn kind(&self) -> &'static str {
        match self {
            DerivedForm::Update { .. } => "update",
            DerivedForm::Lookup { .. } => "lookup",
            DerivedForm::LetGet { .. } => "let-get",
            DerivedForm::Apply { .. } => "apply",
        }
    }

    fn read(loc: &Location, x: &Name) -> Term {
        let ret = Term::push(Term::Var(x.clone()), Location::lam(), Term::Skip);
        Term::pop(loc.clone(), x.clone(), Term::push(Term::Var(x.clone()), loc.clone(), ret))
    }

    /// The interpretation before simplification.
    pub fn unsimplified(&self) -> Term {
        match self {
            DerivedForm::Update { loc, value, rest } => {
                Term::seq(Term::pop(loc.clone(), "_", Term::push(value.clone(), loc.clone(), Term::Skip)), rest.clone())
            }
            DerivedForm::Lookup { loc } => DerivedForm::read(loc, &Name::new("x")),
            DerivedForm::LetGet { loc, x, body } => {
                Term::seq(DerivedForm::read(loc, x), Term::pop(Location::lam(), x.clone(), body.clone()))
            }
            DerivedForm::Apply { fun, arg } => {
                Term::seq(Term::push(arg.clone(), Location::lam(), Term::Skip), fun.clone())
            }
        }
    }

    pub fn simplified(&self) -> Term {
        match self {
            DerivedForm::Update { loc, value, rest } => {
                Term::pop(loc.clone(), "_", Term::push(value.clone(), loc.clone(), rest.clone()))
            }
            DerivedForm::Lookup { loc } => DerivedForm::read(loc, &Name::new("x")),
            DerivedForm::LetGet { loc, x, body } => {
                Term::pop(loc.clone(), x.clone(), Term::push(Term::Var(x.clone()), loc.clone(), body.clone()))
            }
            DerivedForm::Apply { fun, arg } => Term::push(arg.clone(), Location::lam(), fun.clone()),
        }
    }

    /// The spine steps from the unsimplified to the simplified form.
    pub fn simplification(&self, fuel: usize) -> Option<ReductionTrace> {
        reduces_to(&self.unsimplified(), &self.simplified(), fuel)
    }
}

/// Leftmost spine steps from `from` until a term alpha-equivalent to `to`.
pub fn reduces_to(from: &Term, to: &Term, fuel: usize) -> Option<ReductionTrace> {
    let mut trace = ReductionTrace::new(from.clone());
    for _ in 0..=fuel {
        if trace.result().alpha_eq(to) {
            return Some(trace);
        }
        let redex = first_redex(trace.result(), true)?;
        let (result, beta) = apply_redex(trace.result(), &redex).ok()?;
        trace.steps.push(Step { redex, result, beta });
    }
    None
}
