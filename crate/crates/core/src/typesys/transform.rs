use std::collections::BTreeSet;

use crate::syntax::{fresh_name, substitute, Name, Term};

use super::derivation::{Derivation, TypeError, TypingRule};
use super::System;

fn shape<T>(msg: impl Into<String>) -> Result<T, TypeError> {
    Err(TypeError::Shape(msg.into()))
}

/// Rebuilds `d` over `subject`, which must have the same shape as the
/// subject of `d` (typically an alpha-variant). Bound names follow `subject`.
pub fn retarget(d: &Derivation, subject: &Term) -> Result<Derivation, TypeError> {
    Retarget { env: Vec::new() }.go(d, subject)
}

/// As [`retarget`], with bound names already renamed in an enclosing scope.
fn retarget_renaming(d: &Derivation, subject: &Term, env: Vec<(Name, Name)>) -> Result<Derivation, TypeError> {
    Retarget { env }.go(d, subject)
}

struct Retarget {
    env: Vec<(Name, Name)>,
}

impl Retarget {
    fn rename(&self, x: &Name) -> Name {
        self.env.iter().rev().find(|(old, _)| old == x).map(|(_, new)| new.clone()).unwrap_or_else(|| x.clone())
    }

    fn go(&mut self, d: &Derivation, t: &Term) -> Result<Derivation, TypeError> {
        let old = d.term().ok_or_else(|| TypeError::Shape("retarget needs a term derivation".into()))?;
        let ch = &d.children;
        match (&d.rule, old, t) {
            (TypingRule::Var, Term::Var(_), Term::Var(y)) => {
                Ok(Derivation::var(y.clone(), d.comp_type().expect("var type").clone()))
            }
            (TypingRule::Unit, Term::Skip, Term::Skip) => {
                Ok(Derivation::unit(d.comp_type().expect("unit type").input.clone()))
            }
            (TypingRule::Abs, Term::Pop(a, x, _), Term::Pop(b, y, m)) if a == b => {
                self.env.push((x.clone(), y.clone()));
                let body = self.go(&ch[0], m);
                self.env.pop();
                Derivation::abs(b.clone(), y.clone(), body?)
            }
            (TypingRule::AppWeak, Term::Push(_, a, _), Term::Push(n, b, m)) if a == b => {
                Derivation::app_weak(b.clone(), self.go(&ch[0], n)?, self.go(&ch[1], m)?)
            }
            (TypingRule::AppStrong, Term::Push(_, a, _), Term::Push(n, b, m)) if a == b => {
                Derivation::app_strong(b.clone(), self.go(&ch[0], n)?, self.go(&ch[1], m)?, self.go(&ch[2], n)?)
            }
            (TypingRule::Seq, Term::Seq(..), Term::Seq(l, r)) => {
                Derivation::seq(self.go(&ch[0], l)?, self.go(&ch[1], r)?)
            }
            (TypingRule::Collection, _, _) => {
                let items = ch.iter().map(|c| self.go(c, t)).collect::<Result<Vec<_>, _>>()?;
                Derivation::collection(t.clone(), items)
            }
            (TypingRule::Weakening, _, _) => {
                let extra = d
                    .context
                    .minus(&ch[0].context)
                    .ok_or_else(|| TypeError::Shape("weakening shrinks its context".into()))?;
                let child = self.go(&ch[0], t)?;
                Ok(Derivation::weakening(child, extra.rename(|x| self.rename(x))))
            }
            _ => shape(format!("{} over `{old}` cannot be moved to `{t}`", d.rule)),
        }
    }
}

/// Splits a derivation of `{n/x}skeleton` into one for `n` (a Collection node
/// holding every copy of `n` that was typed) and one for `skeleton` itself.
pub fn split_substitution(
    d: &Derivation,
    skeleton: &Term,
    x: &Name,
    n: &Term,
    system: System,
) -> Result<(Derivation, Derivation), TypeError> {
    let mut harvested = Vec::new();
    let body = split(d, skeleton, x, n, system, &mut harvested)?;
    let arg = Derivation::collection(n.clone(), harvested)?;
    Ok((arg, retarget(&body, skeleton)?))
}

fn split(
    d: &Derivation,
    m: &Term,
    x: &Name,
    n: &Term,
    system: System,
    out: &mut Vec<Derivation>,
) -> Result<Derivation, TypeError> {
    if !m.has_free(x) {
        return retarget(d, m);
    }
    if d.rule == TypingRule::Weakening {
        if system != System::Strong {
            return shape("weakening outside the strong system");
        }
        let extra = d.context.minus(&d.children[0].context).unwrap_or_default();
        if !extra.get(x).is_empty() {
            return shape(format!("weakening introduces the substituted variable {x}"));
        }
        let child = split(&d.children[0], m, x, n, system, out)?;
        return Ok(Derivation::weakening(child, extra));
    }
    let ch = &d.children;
    match (m, &d.rule, d.term()) {
        (Term::Var(_), _, _) => {
            let t = d.comp_type().ok_or_else(|| TypeError::Shape("argument copy is not a term judgement".into()))?;
            out.push(d.clone());
            Ok(Derivation::var(x.clone(), t.clone()))
        }
        (Term::Pop(a, y, body), TypingRule::Abs, Some(Term::Pop(b, yd, _))) if a == b => {
            let child = &ch[0];
            if yd == y && !n.has_free(y) {
                let inner = split(child, body, x, n, system, out)?;
                return Derivation::abs(a.clone(), y.clone(), inner);
            }
            let subject = child.term().expect("abstraction body");
            let mut avoid: BTreeSet<Name> = n.free_vars();
            avoid.extend(body.free_vars());
            avoid.extend(subject.free_vars());
            avoid.extend([x.clone(), y.clone(), yd.clone()]);
            let z = fresh_name(y, &avoid);
            let zv = Term::Var(z.clone());
            let body_z = substitute(&zv, y, body);
            let child_z = retarget_renaming(child, &substitute(&zv, yd, subject), vec![(yd.clone(), z.clone())])?;
            let inner = split(&child_z, &body_z, x, n, system, out)?;
            Derivation::abs(a.clone(), z, inner)
        }
        (Term::Push(arg, a, body), TypingRule::AppWeak | TypingRule::AppStrong, _) => {
            let items =
                ch[0].children.iter().map(|c| split(c, arg, x, n, system, out)).collect::<Result<Vec<_>, _>>()?;
            let coll = Derivation::collection((**arg).clone(), items)?;
            let inner = split(&ch[1], body, x, n, system, out)?;
            if d.rule == TypingRule::AppWeak {
                Derivation::app_weak(a.clone(), coll, inner)
            } else {
                let witness = split(&ch[2], arg, x, n, system, out)?;
                Derivation::app_strong(a.clone(), coll, inner, witness)
            }
        }
        (Term::Seq(l, r), TypingRule::Seq, _) => {
            Derivation::seq(split(&ch[0], l, x, n, system, out)?, split(&ch[1], r, x, n, system, out)?)
        }
        _ => shape(format!("skeleton `{m}` does not match a {} node", d.rule)),
    }
}

/// Builds a derivation of `{n/x}M` from `Δ, x:ι ⊢ M` and derivations of `n`
/// making up `ι`; each is plugged in at a variable occurrence of its type.
pub fn eliminate_substitution(
    x: &Name,
    n: &Term,
    items: Vec<Derivation>,
    body: &Derivation,
) -> Result<Derivation, TypeError> {
    let m = body.term().ok_or_else(|| TypeError::Shape("substitution body is not a term".into()))?;
    let mut pool = items;
    let out = Eliminate { x, n }.go(body, &mut pool)?;
    if !pool.is_empty() {
        return shape(format!("{} argument derivations left unused", pool.len()));
    }
    retarget(&out, &substitute(n, x, m))
}

struct Eliminate<'a> {
    x: &'a Name,
    n: &'a Term,
}

impl Eliminate<'_> {
    fn take(&self, pool: &mut Vec<Derivation>, t: &super::CompType) -> Result<Derivation, TypeError> {
        match pool.iter().position(|p| p.comp_type() == Some(t)) {
            Some(i) => Ok(pool.swap_remove(i)),
            None => shape(format!("no argument derivation of type {t}")),
        }
    }

    fn go(&self, d: &Derivation, pool: &mut Vec<Derivation>) -> Result<Derivation, TypeError> {
        let m = d.term().ok_or_else(|| TypeError::Shape("expected a term derivation".into()))?;
        let ch = &d.children;
        match (&d.rule, m) {
            (TypingRule::Var, Term::Var(y)) if y == self.x => self.take(pool, d.comp_type().expect("var type")),
            (TypingRule::Var | TypingRule::Unit, _) => Ok(d.clone()),
            (TypingRule::Abs, Term::Pop(a, y, body)) => {
                if y == self.x {
                    return Ok(d.clone());
                }
                if !self.n.has_free(y) {
                    return Derivation::abs(a.clone(), y.clone(), self.go(&ch[0], pool)?);
                }
                let mut avoid = self.n.free_vars();
                avoid.extend(body.free_vars());
                avoid.insert(self.x.clone());
                let z = fresh_name(y, &avoid);
                let renamed = substitute(&Term::Var(z.clone()), y, body);
                let child = retarget_renaming(&ch[0], &renamed, vec![(y.clone(), z.clone())])?;
                Derivation::abs(a.clone(), z, self.go(&child, pool)?)
            }
            (TypingRule::AppWeak | TypingRule::AppStrong, Term::Push(arg, a, _)) => {
                let items = ch[0].children.iter().map(|c| self.go(c, pool)).collect::<Result<Vec<_>, _>>()?;
                let coll = Derivation::collection(substitute(self.n, self.x, arg), items)?;
                let inner = self.go(&ch[1], pool)?;
                if d.rule == TypingRule::AppWeak {
                    Derivation::app_weak(a.clone(), coll, inner)
                } else {
                    Derivation::app_strong(a.clone(), coll, inner, self.go(&ch[2], pool)?)
                }
            }
            (TypingRule::Seq, Term::Seq(..)) => Derivation::seq(self.go(&ch[0], pool)?, self.go(&ch[1], pool)?),
            (TypingRule::Weakening, _) => {
                let extra = d.context.minus(&ch[0].context).unwrap_or_default();
                let (erased, mut rest) = extra.without(self.x);
                for t in erased.iter() {
                    let gone = self.take(pool, t)?;
                    rest = rest.sum(&gone.context);
                }
                Ok(Derivation::weakening(self.go(&ch[0], pool)?, rest))
            }
            _ => shape(format!("cannot substitute through {}", d.rule)),
        }
    }
}

/// Replaces every SubstAdmissible node by a derivation without it.
pub fn eliminate_substitutions(d: &Derivation) -> Result<Derivation, TypeError> {
    let children = d.children.iter().map(eliminate_substitutions).collect::<Result<Vec<_>, _>>()?;
    if let TypingRule::SubstAdmissible(x) = &d.rule {
        let arg = &children[0];
        let n = arg.term().expect("collection subject");
        return eliminate_substitution(x, n, arg.children.clone(), &children[1]);
    }
    if children == d.children {
        return Ok(d.clone());
    }
    let mut out = d.clone();
    out.children = children;
    Ok(out)
}
