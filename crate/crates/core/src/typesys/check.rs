use crate::machine::{ContinuationStack, Memory};
use crate::syntax::{substitute, Term};

use super::context::TypingContext;
use super::derivation::{Derivation, Subject, Typed, TypingRule};
use super::types::{CollectionType, CompType, MemoryType};
use super::System;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckFailure {
    /// Child indices from the root to the offending node.
    pub path: Vec<usize>,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckResult {
    pub ok: bool,
    pub weight: usize,
    pub failure: Option<CheckFailure>,
}

/// Re-validates every node of `d` against its rule schema. This does not
/// reuse the constructors: conclusions are recomputed from the premises here.
pub fn check_derivation(d: &Derivation, system: System) -> CheckResult {
    let mut path = Vec::new();
    match walk(d, system, &mut path) {
        Ok(()) => CheckResult { ok: true, weight: d.weight(), failure: None },
        Err(reason) => CheckResult { ok: false, weight: d.weight(), failure: Some(CheckFailure { path, reason }) },
    }
}

fn walk(d: &Derivation, system: System, path: &mut Vec<usize>) -> Result<(), String> {
    node(d, system)?;
    for (i, c) in d.children.iter().enumerate() {
        path.push(i);
        walk(c, system, path)?;
        path.pop();
    }
    Ok(())
}

fn allowed(rule: &TypingRule, system: System) -> bool {
    use TypingRule::*;
    match rule {
        Var | Abs | Unit | Seq | Collection | SubstAdmissible(_) => true,
        AppWeak => system != System::Strong,
        AppStrong | Weakening => system == System::Strong,
        MemEmpty | MemPush | KontEmpty | KontPush | State => system == System::State,
    }
}

fn judgement(d: &Derivation) -> Result<(&Term, &CompType), String> {
    match (&d.rule, &d.subject, &d.ty) {
        (TypingRule::Collection, ..) => Err("expected a term premise, found a collection".into()),
        (_, Subject::Term(m), Typed::Comp(t)) => Ok((m, t)),
        _ => Err(format!("expected a term premise, found {}", d.rule)),
    }
}

fn coll_judgement(d: &Derivation) -> Result<(&Term, &CollectionType), String> {
    match (&d.rule, &d.subject, &d.ty) {
        (TypingRule::Collection, Subject::Term(n), Typed::Collection(c)) => Ok((n, c)),
        _ => Err(format!("expected a collection premise, found {}", d.rule)),
    }
}

fn arity(d: &Derivation, n: usize) -> Result<(), String> {
    if d.children.len() == n {
        Ok(())
    } else {
        Err(format!("{} expects {n} premises, has {}", d.rule, d.children.len()))
    }
}

fn same<T: PartialEq + std::fmt::Display>(what: &str, found: &T, expected: &T) -> Result<(), String> {
    if found == expected {
        Ok(())
    } else {
        Err(format!("{what} is `{found}`, expected `{expected}`"))
    }
}

fn subject_term(d: &Derivation) -> Result<(&Term, &CompType), String> {
    match (&d.subject, &d.ty) {
        (Subject::Term(m), Typed::Comp(t)) => Ok((m, t)),
        _ => Err(format!("{} must judge a term with a computation type", d.rule)),
    }
}

fn popped(m: &MemoryType, loc: &crate::syntax::Location) -> Option<(CollectionType, MemoryType)> {
    let mut rest = m.clone();
    let top = rest.pop(loc)?;
    Some((top, rest))
}

fn node(d: &Derivation, system: System) -> Result<(), String> {
    if !allowed(&d.rule, system) {
        return Err(format!("{} is not a rule of this system", d.rule));
    }
    let ch = &d.children;
    match &d.rule {
        TypingRule::Var => {
            arity(d, 0)?;
            let (m, t) = subject_term(d)?;
            let Term::Var(x) = m else { return Err("subject is not a variable".into()) };
            same("context", &d.context, &TypingContext::single(x.clone(), CollectionType(vec![t.clone()])))
        }
        TypingRule::Unit => {
            arity(d, 0)?;
            let (m, t) = subject_term(d)?;
            if *m != Term::Skip {
                return Err("subject is not `*`".into());
            }
            same("output", &t.output, &t.input)?;
            same("context", &d.context, &TypingContext::new())
        }
        TypingRule::Abs => {
            arity(d, 1)?;
            let (m, t) = subject_term(d)?;
            let Term::Pop(a, x, body) = m else { return Err("subject is not an abstraction".into()) };
            let (bm, bt) = judgement(&ch[0])?;
            if !bm.syntactic_eq(body) {
                return Err(format!("premise subject `{bm}` is not the body `{body}`"));
            }
            let (iota, rest) = ch[0].context.without(x);
            let mut input = bt.input.clone();
            input.push(a.clone(), iota);
            same("input", &t.input, &input)?;
            same("output", &t.output, &bt.output)?;
            same("context", &d.context, &rest)
        }
        TypingRule::AppWeak | TypingRule::AppStrong => {
            let strong = d.rule == TypingRule::AppStrong;
            arity(d, if strong { 3 } else { 2 })?;
            let (m, t) = subject_term(d)?;
            let Term::Push(n, a, body) = m else { return Err("subject is not an application".into()) };
            let (an, iota) = coll_judgement(&ch[0])?;
            let (bm, bt) = judgement(&ch[1])?;
            if !an.syntactic_eq(n) || !bm.syntactic_eq(body) {
                return Err("premise subjects do not reassemble the application".into());
            }
            let Some((top, rest)) = popped(&bt.input, a) else {
                return Err(format!("body input has nothing at {a}"));
            };
            same("popped collection", &top, iota)?;
            same("input", &t.input, &rest)?;
            same("output", &t.output, &bt.output)?;
            let mut ctx = ch[0].context.sum(&ch[1].context);
            if strong {
                let (w, _) = judgement(&ch[2])?;
                if !w.alpha_eq(n) {
                    return Err(format!("witness subject `{w}` is not the argument `{n}`"));
                }
                ctx = ctx.sum(&ch[2].context);
            }
            same("context", &d.context, &ctx)
        }
        TypingRule::Seq => {
            arity(d, 2)?;
            let (m, t) = subject_term(d)?;
            let Term::Seq(l, r) = m else { return Err("subject is not a sequence".into()) };
            let (lm, lt) = judgement(&ch[0])?;
            let (rm, rt) = judgement(&ch[1])?;
            if !lm.syntactic_eq(l) || !rm.syntactic_eq(r) {
                return Err("premise subjects do not reassemble the sequence".into());
            }
            same("middle type", &rt.input, &lt.output)?;
            same("input", &t.input, &lt.input)?;
            same("output", &t.output, &rt.output)?;
            same("context", &d.context, &ch[0].context.sum(&ch[1].context))
        }
        TypingRule::Collection => {
            let (n, c) = match (&d.subject, &d.ty) {
                (Subject::Term(n), Typed::Collection(c)) => (n, c),
                _ => return Err("collection must judge a term with a collection type".into()),
            };
            let mut elems = Vec::new();
            let mut ctx = TypingContext::new();
            for item in ch {
                let (m, t) = judgement(item)?;
                if !m.alpha_eq(n) {
                    return Err(format!("element subject `{m}` differs from `{n}`"));
                }
                elems.push(t.clone());
                ctx = ctx.sum(&item.context);
            }
            same("collection", c, &CollectionType(elems))?;
            same("context", &d.context, &ctx)
        }
        TypingRule::Weakening => {
            arity(d, 1)?;
            let (m, t) = subject_term(d)?;
            let (cm, ct) = judgement(&ch[0])?;
            if !cm.alpha_eq(m) {
                return Err("weakening changes the subject".into());
            }
            same("type", t, ct)?;
            d.context.minus(&ch[0].context).map(|_| ()).ok_or_else(|| "context does not extend the premise".into())
        }
        TypingRule::SubstAdmissible(x) => {
            arity(d, 2)?;
            let (m, t) = subject_term(d)?;
            let (n, iota) = coll_judgement(&ch[0])?;
            let (body, bt) = judgement(&ch[1])?;
            if !m.alpha_eq(&substitute(n, x, body)) {
                return Err("subject is not the substitution instance".into());
            }
            let (assumed, rest) = ch[1].context.without(x);
            same("substituted collection", &assumed, iota)?;
            same("type", t, bt)?;
            same("context", &d.context, &ch[0].context.sum(&rest))
        }
        TypingRule::MemEmpty => {
            arity(d, 0)?;
            match (&d.subject, &d.ty) {
                (Subject::Memory(m), Typed::Memory(mt)) if m.is_empty() && mt.is_empty() => Ok(()),
                _ => Err("empty memory must have the empty type".into()),
            }
        }
        TypingRule::MemPush => {
            arity(d, 2)?;
            let (Subject::Memory(mem), Typed::Memory(mt)) = (&d.subject, &d.ty) else {
                return Err("memory rule must judge a memory".into());
            };
            let (Subject::Memory(rest), Typed::Memory(rt)) = (&ch[0].subject, &ch[0].ty) else {
                return Err("first premise must judge a memory".into());
            };
            let (n, kappa) = coll_judgement(&ch[1])?;
            if !ch[1].context.is_empty() || !d.context.is_empty() {
                return Err("memory judgements have empty contexts".into());
            }
            let loc = mem
                .iter()
                .map(|(a, _)| a.clone())
                .find(|a| {
                    let mut m = rest.clone();
                    m.push(a.clone(), n.clone());
                    m == *mem
                })
                .ok_or_else(|| "memory is not the premise memory with one item pushed".to_string())?;
            let mut expected = rt.clone();
            expected.push(loc, kappa.clone());
            same("memory type", mt, &expected)
        }
        TypingRule::KontEmpty => {
            arity(d, 0)?;
            match (&d.subject, &d.ty) {
                (Subject::Kont(k), Typed::Comp(t)) if k.is_empty() => same("output", &t.output, &t.input),
                _ => Err("empty continuation must have an identity type".into()),
            }
        }
        TypingRule::KontPush => {
            arity(d, 2)?;
            let (Subject::Kont(k), Typed::Comp(t)) = (&d.subject, &d.ty) else {
                return Err("continuation rule must judge a continuation".into());
            };
            let (m, mt) = judgement(&ch[0])?;
            let (Subject::Kont(rest), Typed::Comp(rt)) = (&ch[1].subject, &ch[1].ty) else {
                return Err("second premise must judge a continuation".into());
            };
            let mut expected: ContinuationStack = rest.clone();
            expected.push(m.clone());
            if expected != *k {
                return Err("continuation is not the head followed by the premise".into());
            }
            if !ch[0].context.is_empty() || !d.context.is_empty() {
                return Err("continuation judgements have empty contexts".into());
            }
            same("middle type", &rt.input, &mt.output)?;
            same("input", &t.input, &mt.input)?;
            same("output", &t.output, &rt.output)
        }
        TypingRule::State => {
            arity(d, 3)?;
            let (Subject::State(s), Typed::Comp(t)) = (&d.subject, &d.ty) else {
                return Err("state rule must judge a state".into());
            };
            let (Subject::Memory(mem), Typed::Memory(memt)) = (&ch[0].subject, &ch[0].ty) else {
                return Err("first premise must judge a memory".into());
            };
            let (m, ft) = judgement(&ch[1])?;
            let (Subject::Kont(k), Typed::Comp(kt)) = (&ch[2].subject, &ch[2].ty) else {
                return Err("third premise must judge a continuation".into());
            };
            let memory: &Memory = mem;
            if *memory != s.memory || !m.syntactic_eq(&s.focus) || *k != s.kont {
                return Err("premises do not reassemble the state".into());
            }
            if !d.context.is_empty() || !ch[1].context.is_empty() {
                return Err("state judgements have empty contexts".into());
            }
            same("focus input", &ft.input, memt)?;
            same("continuation input", &kt.input, &ft.output)?;
            same("input", &t.input, &MemoryType::new())?;
            same("output", &t.output, &kt.output)
        }
    }
}
