use std::fmt;

use thiserror::Error;

use crate::machine::{ContinuationStack, MachineState, Memory};
use crate::syntax::{substitute, Location, Name, Term};

use super::context::TypingContext;
use super::types::{CollectionType, CompType, MemoryType};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum TypingRule {
    Var,
    Abs,
    AppWeak,
    Unit,
    Seq,
    Collection,
    MemEmpty,
    MemPush,
    KontEmpty,
    KontPush,
    State,
    AppStrong,
    Weakening,
    /// Admissible substitution of a collection for the named variable.
    SubstAdmissible(Name),
}

impl TypingRule {
    pub fn name(&self) -> &'static str {
        match self {
            TypingRule::Var => "Var",
            TypingRule::Abs => "Abs",
            TypingRule::AppWeak => "AppWeak",
            TypingRule::Unit => "Unit",
            TypingRule::Seq => "Seq",
            TypingRule::Collection => "Collection",
            TypingRule::MemEmpty => "MemEmpty",
            TypingRule::MemPush => "MemPush",
            TypingRule::KontEmpty => "KontEmpty",
            TypingRule::KontPush => "KontPush",
            TypingRule::State => "State",
            TypingRule::AppStrong => "AppStrong",
            TypingRule::Weakening => "Weakening",
            TypingRule::SubstAdmissible(_) => "SubstAdmissible",
        }
    }

    pub fn counts_weight(&self) -> bool {
        matches!(
            self,
            TypingRule::Abs | TypingRule::AppWeak | TypingRule::AppStrong | TypingRule::Seq | TypingRule::Unit
        )
    }
}

impl fmt::Display for TypingRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Subject {
    Term(Term),
    Memory(Memory),
    Kont(ContinuationStack),
    State(MachineState),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Typed {
    Comp(CompType),
    Collection(CollectionType),
    Memory(MemoryType),
}

impl fmt::Display for Typed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Typed::Comp(t) => t.fmt(f),
            Typed::Collection(c) => c.fmt(f),
            Typed::Memory(m) => m.fmt(f),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TypeError {
    #[error("{rule}: {reason}")]
    Rule { rule: &'static str, reason: String },
    #[error("derivation does not fit: {0}")]
    Shape(String),
    #[error("not a spine normal form: `{0}`")]
    NotSpineNormal(String),
}

fn rule_err<T>(rule: &'static str, reason: impl Into<String>) -> Result<T, TypeError> {
    Err(TypeError::Rule { rule, reason: reason.into() })
}

/// A typing derivation. Nodes are built through the constructors below,
/// which compute each conclusion from the premises.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Derivation {
    pub rule: TypingRule,
    pub context: TypingContext,
    pub subject: Subject,
    pub ty: Typed,
    pub children: Vec<Derivation>,
}

impl Derivation {
    pub fn weight(&self) -> usize {
        usize::from(self.rule.counts_weight()) + self.children.iter().map(Derivation::weight).sum::<usize>()
    }

    pub fn node_count(&self) -> usize {
        1 + self.children.iter().map(Derivation::node_count).sum::<usize>()
    }

    pub fn term(&self) -> Option<&Term> {
        match &self.subject {
            Subject::Term(t) => Some(t),
            _ => None,
        }
    }

    pub fn comp_type(&self) -> Option<&CompType> {
        match &self.ty {
            Typed::Comp(t) => Some(t),
            _ => None,
        }
    }

    pub fn collection_type(&self) -> Option<&CollectionType> {
        match &self.ty {
            Typed::Collection(c) => Some(c),
            _ => None,
        }
    }

    pub fn memory_type(&self) -> Option<&MemoryType> {
        match &self.ty {
            Typed::Memory(m) => Some(m),
            _ => None,
        }
    }

    pub fn at(&self, path: &[usize]) -> Option<&Derivation> {
        path.iter().try_fold(self, |d, &i| d.children.get(i))
    }

    fn leaf(rule: TypingRule, context: TypingContext, subject: Subject, ty: Typed) -> Derivation {
        Derivation { rule, context, subject, ty, children: Vec::new() }
    }

    pub fn var(x: Name, t: CompType) -> Derivation {
        let ctx = TypingContext::single(x.clone(), CollectionType::single(t.clone()));
        Derivation::leaf(TypingRule::Var, ctx, Subject::Term(Term::Var(x)), Typed::Comp(t))
    }

    pub fn unit(m: MemoryType) -> Derivation {
        Derivation::leaf(
            TypingRule::Unit,
            TypingContext::new(),
            Subject::Term(Term::Skip),
            Typed::Comp(CompType::new(m.clone(), m)),
        )
    }

    pub fn abs(loc: Location, x: Name, body: Derivation) -> Result<Derivation, TypeError> {
        let (m, t) = term_comp("Abs", &body)?;
        let (iota, ctx) = body.context.without(&x);
        let ty = CompType::new(t.input.with_pushed(loc.clone(), iota), t.output.clone());
        Ok(Derivation {
            rule: TypingRule::Abs,
            context: ctx,
            subject: Subject::Term(Term::pop(loc, x, m.clone())),
            ty: Typed::Comp(ty),
            children: vec![body],
        })
    }

    fn app_parts(
        rule: &'static str,
        loc: &Location,
        arg: &Derivation,
        body: &Derivation,
    ) -> Result<(Term, CompType), TypeError> {
        let (n, iota) = collection_of(rule, arg)?;
        let (m, t) = term_comp(rule, body)?;
        let mut input = t.input.clone();
        match input.pop(loc) {
            Some(top) if top == *iota => {}
            Some(top) => return rule_err(rule, format!("argument has {iota} but the body pops {top} at {loc}")),
            None => return rule_err(rule, format!("body does not pop at {loc}")),
        }
        Ok((Term::push(n.clone(), loc.clone(), m.clone()), CompType::new(input, t.output.clone())))
    }

    pub fn app_weak(loc: Location, arg: Derivation, body: Derivation) -> Result<Derivation, TypeError> {
        let (subject, ty) = Derivation::app_parts("AppWeak", &loc, &arg, &body)?;
        Ok(Derivation {
            rule: TypingRule::AppWeak,
            context: arg.context.sum(&body.context),
            subject: Subject::Term(subject),
            ty: Typed::Comp(ty),
            children: vec![arg, body],
        })
    }

    pub fn app_strong(
        loc: Location,
        arg: Derivation,
        body: Derivation,
        witness: Derivation,
    ) -> Result<Derivation, TypeError> {
        let (subject, ty) = Derivation::app_parts("AppStrong", &loc, &arg, &body)?;
        let (w, _) = term_comp("AppStrong", &witness)?;
        if !w.alpha_eq(arg.term().expect("collection subject")) {
            return rule_err("AppStrong", format!("witness `{w}` is not the argument"));
        }
        Ok(Derivation {
            rule: TypingRule::AppStrong,
            context: arg.context.sum(&body.context).sum(&witness.context),
            subject: Subject::Term(subject),
            ty: Typed::Comp(ty),
            children: vec![arg, body, witness],
        })
    }

    pub fn seq(left: Derivation, right: Derivation) -> Result<Derivation, TypeError> {
        let (n, s) = term_comp("Seq", &left)?;
        let (m, t) = term_comp("Seq", &right)?;
        if s.output != t.input {
            return rule_err("Seq", format!("left yields {} but right expects {}", s.output, t.input));
        }
        Ok(Derivation {
            rule: TypingRule::Seq,
            context: left.context.sum(&right.context),
            subject: Subject::Term(Term::seq(n.clone(), m.clone())),
            ty: Typed::Comp(CompType::new(s.input.clone(), t.output.clone())),
            children: vec![left, right],
        })
    }

    pub fn collection(term: Term, items: Vec<Derivation>) -> Result<Derivation, TypeError> {
        let mut ctx = TypingContext::new();
        let mut elems = Vec::new();
        for d in &items {
            let (m, t) = term_comp("Collection", d)?;
            if !m.alpha_eq(&term) {
                return rule_err("Collection", format!("element types `{m}`, expected `{term}`"));
            }
            ctx = ctx.sum(&d.context);
            elems.push(t.clone());
        }
        Ok(Derivation {
            rule: TypingRule::Collection,
            context: ctx,
            subject: Subject::Term(term),
            ty: Typed::Collection(CollectionType(elems)),
            children: items,
        })
    }

    pub fn weakening(child: Derivation, extra: TypingContext) -> Derivation {
        Derivation {
            rule: TypingRule::Weakening,
            context: child.context.sum(&extra),
            subject: child.subject.clone(),
            ty: child.ty.clone(),
            children: vec![child],
        }
    }

    /// `Γ+Δ ⊢ {N/x}M : τ` from `Γ ⊢ N : ι` and `Δ, x:ι ⊢ M : τ`.
    pub fn subst_admissible(x: Name, arg: Derivation, body: Derivation) -> Result<Derivation, TypeError> {
        let (n, iota) = collection_of("SubstAdmissible", &arg)?;
        let (m, t) = term_comp("SubstAdmissible", &body)?;
        let (assumed, rest) = body.context.without(&x);
        if assumed != *iota {
            return rule_err("SubstAdmissible", format!("body assumes {x}:{assumed}, argument has {iota}"));
        }
        Ok(Derivation {
            rule: TypingRule::SubstAdmissible(x.clone()),
            context: arg.context.sum(&rest),
            subject: Subject::Term(substitute(n, &x, m)),
            ty: Typed::Comp(t.clone()),
            children: vec![arg, body],
        })
    }

    pub fn mem_empty() -> Derivation {
        Derivation::leaf(
            TypingRule::MemEmpty,
            TypingContext::new(),
            Subject::Memory(Memory::new()),
            Typed::Memory(MemoryType::new()),
        )
    }

    pub fn mem_push(rest: Derivation, loc: Location, item: Derivation) -> Result<Derivation, TypeError> {
        let (Subject::Memory(mem), Typed::Memory(mt)) = (&rest.subject, &rest.ty) else {
            return rule_err("MemPush", "first premise is not a memory judgement");
        };
        let (n, kappa) = collection_of("MemPush", &item)?;
        if !item.context.is_empty() {
            return rule_err("MemPush", "memory items must be closed under the empty context");
        }
        let mut mem = mem.clone();
        mem.push(loc.clone(), n.clone());
        let ty = mt.with_pushed(loc, kappa.clone());
        Ok(Derivation {
            rule: TypingRule::MemPush,
            context: TypingContext::new(),
            subject: Subject::Memory(mem),
            ty: Typed::Memory(ty),
            children: vec![rest, item],
        })
    }

    pub fn kont_empty(m: MemoryType) -> Derivation {
        Derivation::leaf(
            TypingRule::KontEmpty,
            TypingContext::new(),
            Subject::Kont(ContinuationStack::new()),
            Typed::Comp(CompType::new(m.clone(), m)),
        )
    }

    pub fn kont_push(head: Derivation, rest: Derivation) -> Result<Derivation, TypeError> {
        let (m, s) = term_comp("KontPush", &head)?;
        let (Subject::Kont(k), Typed::Comp(t)) = (&rest.subject, &rest.ty) else {
            return rule_err("KontPush", "second premise is not a continuation judgement");
        };
        if !head.context.is_empty() {
            return rule_err("KontPush", "continuation items must be typed in the empty context");
        }
        if s.output != t.input {
            return rule_err("KontPush", format!("head yields {} but the rest expects {}", s.output, t.input));
        }
        let mut k = k.clone();
        k.push(m.clone());
        let ty = CompType::new(s.input.clone(), t.output.clone());
        Ok(Derivation {
            rule: TypingRule::KontPush,
            context: TypingContext::new(),
            subject: Subject::Kont(k),
            ty: Typed::Comp(ty),
            children: vec![head, rest],
        })
    }

    pub fn state(memory: Derivation, focus: Derivation, kont: Derivation) -> Result<Derivation, TypeError> {
        let (Subject::Memory(mem), Typed::Memory(mt)) = (&memory.subject, &memory.ty) else {
            return rule_err("State", "first premise is not a memory judgement");
        };
        let (m, s) = term_comp("State", &focus)?;
        let (Subject::Kont(k), Typed::Comp(t)) = (&kont.subject, &kont.ty) else {
            return rule_err("State", "third premise is not a continuation judgement");
        };
        if !focus.context.is_empty() {
            return rule_err("State", format!("focus has context {}", focus.context));
        }
        if *mt != s.input {
            return rule_err("State", format!("memory has {mt} but the focus expects {}", s.input));
        }
        if s.output != t.input {
            return rule_err("State", format!("focus yields {} but the continuation expects {}", s.output, t.input));
        }
        let state = MachineState { memory: mem.clone(), focus: m.clone(), kont: k.clone() };
        let ty = CompType::new(MemoryType::new(), t.output.clone());
        Ok(Derivation {
            rule: TypingRule::State,
            context: TypingContext::new(),
            subject: Subject::State(state),
            ty: Typed::Comp(ty),
            children: vec![memory, focus, kont],
        })
    }
}

fn term_comp<'a>(rule: &'static str, d: &'a Derivation) -> Result<(&'a Term, &'a CompType), TypeError> {
    match (&d.subject, &d.ty) {
        (Subject::Term(m), Typed::Comp(t)) if d.rule != TypingRule::Collection => Ok((m, t)),
        _ => rule_err(rule, format!("premise {} is not a term judgement", d.rule)),
    }
}

fn collection_of<'a>(rule: &'static str, d: &'a Derivation) -> Result<(&'a Term, &'a CollectionType), TypeError> {
    match (&d.rule, &d.subject, &d.ty) {
        (TypingRule::Collection, Subject::Term(n), Typed::Collection(c)) => Ok((n, c)),
        _ => rule_err(rule, format!("premise {} is not a collection judgement", d.rule)),
    }
}
