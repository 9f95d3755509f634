use crate::rewrite::{Redex, Rule};
use crate::syntax::{Position, Selector, Term};

use super::derivation::{Derivation, TypeError, TypingRule};
use super::transform::{retarget, split_substitution};
use super::System;

fn shape<T>(msg: impl Into<String>) -> Result<T, TypeError> {
    Err(TypeError::Shape(msg.into()))
}

/// Applies `f` to the sub-derivation at `path` and rebuilds the ancestors.
pub(crate) fn rebuild_along(
    d: &Derivation,
    path: &[Selector],
    f: &mut dyn FnMut(&Derivation) -> Result<Derivation, TypeError>,
) -> Result<Derivation, TypeError> {
    let Some((&sel, rest)) = path.split_first() else {
        return f(d);
    };
    let ch = &d.children;
    let loc = || match d.term() {
        Some(Term::Pop(a, _, _) | Term::Push(_, a, _)) => a.clone(),
        _ => unreachable!("guarded by the rule"),
    };
    match (&d.rule, sel) {
        (TypingRule::Weakening, _) => {
            let extra = d.context.minus(&ch[0].context).unwrap_or_default();
            Ok(Derivation::weakening(rebuild_along(&ch[0], path, f)?, extra))
        }
        (TypingRule::Abs, Selector::PopBody) => {
            let Some(Term::Pop(_, x, _)) = d.term() else { unreachable!() };
            Derivation::abs(loc(), x.clone(), rebuild_along(&ch[0], rest, f)?)
        }
        (TypingRule::AppWeak, Selector::PushBody) => {
            Derivation::app_weak(loc(), ch[0].clone(), rebuild_along(&ch[1], rest, f)?)
        }
        (TypingRule::AppStrong, Selector::PushBody) => {
            Derivation::app_strong(loc(), ch[0].clone(), rebuild_along(&ch[1], rest, f)?, ch[2].clone())
        }
        (TypingRule::Seq, Selector::SeqLeft) => Derivation::seq(rebuild_along(&ch[0], rest, f)?, ch[1].clone()),
        (TypingRule::Seq, Selector::SeqRight) => Derivation::seq(ch[0].clone(), rebuild_along(&ch[1], rest, f)?),
        (rule, sel) => shape(format!("cannot descend into {} through {}", rule, sel.name())),
    }
}

fn app(d: &Derivation) -> Result<(), TypeError> {
    match d.rule {
        TypingRule::AppWeak | TypingRule::AppStrong => Ok(()),
        _ => shape(format!("expected an application, found {}", d.rule)),
    }
}

fn rebuild_app(
    like: &Derivation,
    loc: crate::syntax::Location,
    arg: Derivation,
    body: Derivation,
) -> Result<Derivation, TypeError> {
    if like.rule == TypingRule::AppStrong {
        Derivation::app_strong(loc, arg, body, like.children[2].clone())
    } else {
        Derivation::app_weak(loc, arg, body)
    }
}

/// Turns a derivation of the contractum of `pre` under `rule` into one of
/// `pre`. Beta is only expanded in the weak system.
pub(crate) fn expand_local(d: &Derivation, pre: &Term, rule: Rule, system: System) -> Result<Derivation, TypeError> {
    let built = match (rule, pre) {
        (Rule::Beta, Term::Push(n, a, inner)) => {
            if system != System::Weak {
                return shape("Beta expansion needs a witness in the strong system");
            }
            let Term::Pop(_, x, m) = &**inner else { return shape("Beta redex without abstraction") };
            let (arg, body) = split_substitution(d, m, x, n, system)?;
            let abs = Derivation::abs(a.clone(), x.clone(), body)?;
            Derivation::app_weak(a.clone(), arg, abs)?
        }
        (Rule::Passage, Term::Push(_, b, inner)) => {
            let Term::Pop(a, _, _) = &**inner else { return shape("Passage redex without abstraction") };
            let (TypingRule::Abs, Some(Term::Pop(_, x2, _))) = (&d.rule, d.term()) else {
                return shape(format!("Passage expects an abstraction, found {}", d.rule));
            };
            let pushed = &d.children[0];
            app(pushed)?;
            let abs = Derivation::abs(a.clone(), x2.clone(), pushed.children[1].clone())?;
            rebuild_app(pushed, b.clone(), pushed.children[0].clone(), abs)?
        }
        (Rule::Next, Term::Seq(..)) => {
            let t = d.comp_type().ok_or_else(|| TypeError::Shape("Next expects a term".into()))?;
            Derivation::seq(Derivation::unit(t.input.clone()), d.clone())?
        }
        (Rule::PrefixPop, Term::Seq(l, _)) => {
            let Term::Pop(a, _, _) = &**l else { return shape("PrefixPop redex without abstraction") };
            let (TypingRule::Abs, Some(Term::Pop(_, x2, _))) = (&d.rule, d.term()) else {
                return shape(format!("PrefixPop expects an abstraction, found {}", d.rule));
            };
            let s = &d.children[0];
            if s.rule != TypingRule::Seq {
                return shape(format!("PrefixPop expects a sequence, found {}", s.rule));
            }
            let abs = Derivation::abs(a.clone(), x2.clone(), s.children[0].clone())?;
            Derivation::seq(abs, s.children[1].clone())?
        }
        (Rule::PrefixPush, Term::Seq(l, _)) => {
            let Term::Push(_, a, _) = &**l else { return shape("PrefixPush redex without application") };
            app(d)?;
            let s = &d.children[1];
            if s.rule != TypingRule::Seq {
                return shape(format!("PrefixPush expects a sequence, found {}", s.rule));
            }
            let left = rebuild_app(d, a.clone(), d.children[0].clone(), s.children[0].clone())?;
            Derivation::seq(left, s.children[1].clone())?
        }
        (Rule::Associate, Term::Seq(..)) => {
            if d.rule != TypingRule::Seq || d.children[1].rule != TypingRule::Seq {
                return shape("Associate expects nested sequences");
            }
            let inner = &d.children[1];
            let left = Derivation::seq(d.children[0].clone(), inner.children[0].clone())?;
            Derivation::seq(left, inner.children[1].clone())?
        }
        _ => return shape(format!("`{pre}` is not a {rule} redex")),
    };
    retarget(&built, pre)
}

/// Derivation of the term `before` from one of its reduct along a spine step.
pub fn expand_spine_step(d: &Derivation, before: &Term, redex: &Redex) -> Result<Derivation, TypeError> {
    if !redex.at.is_spine() {
        return shape(format!("step at {} is not on the spine", redex.at));
    }
    expand_at(d, before, &redex.at, redex.rule, System::Weak)
}

pub(crate) fn expand_at(
    d: &Derivation,
    before: &Term,
    at: &Position,
    rule: Rule,
    system: System,
) -> Result<Derivation, TypeError> {
    let pre = before.subterm(at).ok_or_else(|| TypeError::Shape(format!("no subterm at {at}")))?;
    rebuild_along(d, &at.0, &mut |sub| expand_local(sub, pre, rule, system))
}
