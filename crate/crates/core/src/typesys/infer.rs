use std::collections::BTreeMap;

use thiserror::Error;

use crate::machine::{run_state, step, transition_of, MachineState, Memory, RunOutcome, StepOutcome, Transition};
use crate::rewrite::spine_normalize;
use crate::syntax::{Location, Term};

use super::derivation::{Derivation, Subject, TypeError, TypingRule};
use super::expand::expand_spine_step;
use super::transform::{eliminate_substitution, split_substitution};
use super::types::{CompType, MemoryType};
use super::System;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InferError {
    #[error("fuel exhausted before a normal form or final state")]
    FuelExhausted,
    #[error("the machine fails: {0}")]
    Stuck(String),
    #[error("perpetual evaluation did not finish")]
    NoPerpetualEvaluation,
    #[error(transparent)]
    Type(#[from] TypeError),
}

/// Types a spine normal form with output `[]^f`, using empty collections for
/// every argument and `f = 0` below the leading abstractions.
pub fn type_spine_nf(w: &Term) -> Result<Derivation, TypeError> {
    match w {
        Term::Pop(a, x, body) => Derivation::abs(a.clone(), x.clone(), type_spine_nf(body)?),
        _ => type_v(w, &BTreeMap::new()),
    }
}

fn type_v(t: &Term, f: &BTreeMap<Location, usize>) -> Result<Derivation, TypeError> {
    let here = MemoryType::empties(f);
    match t {
        Term::Skip => Ok(Derivation::unit(here)),
        Term::Var(x) => Ok(Derivation::var(x.clone(), CompType::new(here, MemoryType::new()))),
        Term::Seq(head, w) => {
            let Term::Var(x) = &**head else { return Err(TypeError::NotSpineNormal(t.to_string())) };
            let dw = type_spine_nf(w)?;
            let input = dw.comp_type().expect("term judgement").input.clone();
            Derivation::seq(Derivation::var(x.clone(), CompType::new(here, input)), dw)
        }
        Term::Push(n, a, v) => {
            let mut g = f.clone();
            *g.entry(a.clone()).or_default() += 1;
            let dv = type_v(v, &g)?;
            Derivation::app_weak(a.clone(), Derivation::collection((**n).clone(), Vec::new())?, dv)
        }
        Term::Pop(..) => Err(TypeError::NotSpineNormal(t.to_string())),
    }
}

/// Spine-normalizes `t`, types the normal form and expands back over the trace.
pub fn infer_weak(t: &Term, fuel: usize) -> Result<Derivation, InferError> {
    let trace = spine_normalize(t, fuel).ok_or(InferError::FuelExhausted)?;
    let mut d = type_spine_nf(trace.result())?;
    for (i, s) in trace.steps.iter().enumerate().rev() {
        d = expand_spine_step(&d, trace.before(i), &s.redex)?;
    }
    Ok(d)
}

/// A state derivation taken apart: memory items as Collection nodes (top
/// last), the focus, and the continuation (head last).
#[derive(Clone, Debug)]
struct StateParts {
    memory: BTreeMap<Location, Vec<Derivation>>,
    focus: Derivation,
    kont: Vec<Derivation>,
}

impl StateParts {
    fn assemble(self) -> Result<Derivation, TypeError> {
        let mut mem = Derivation::mem_empty();
        for (a, items) in self.memory {
            for item in items {
                mem = Derivation::mem_push(mem, a.clone(), item)?;
            }
        }
        let out = match self.kont.first() {
            Some(bottom) => bottom.comp_type(),
            None => self.focus.comp_type(),
        }
        .expect("term judgement")
        .output
        .clone();
        let mut k = Derivation::kont_empty(out);
        for item in self.kont {
            k = Derivation::kont_push(item, k)?;
        }
        Derivation::state(mem, self.focus, k)
    }

    fn take_apart(d: &Derivation) -> Result<StateParts, TypeError> {
        if d.rule != TypingRule::State {
            return Err(TypeError::Shape(format!("expected a state derivation, found {}", d.rule)));
        }
        let mut memory: BTreeMap<Location, Vec<Derivation>> = BTreeMap::new();
        let mut node = &d.children[0];
        while node.rule == TypingRule::MemPush {
            let (Subject::Memory(m), Subject::Memory(rest)) = (&node.subject, &node.children[0].subject) else {
                unreachable!("memory judgements");
            };
            let a = pushed_location(m, rest).ok_or_else(|| TypeError::Shape("memory push is ambiguous".into()))?;
            memory.entry(a).or_default().insert(0, node.children[1].clone());
            node = &node.children[0];
        }
        let mut kont = Vec::new();
        let mut node = &d.children[2];
        while node.rule == TypingRule::KontPush {
            kont.insert(0, node.children[0].clone());
            node = &node.children[1];
        }
        Ok(StateParts { memory, focus: d.children[1].clone(), kont })
    }
}

fn pushed_location(m: &Memory, rest: &Memory) -> Option<Location> {
    m.iter().map(|(a, _)| a.clone()).find(|a| m.stack(a).len() == rest.stack(a).len() + 1)
}

fn final_parts(s: &MachineState) -> Result<StateParts, TypeError> {
    let mut memory: BTreeMap<Location, Vec<Derivation>> = BTreeMap::new();
    for (a, items) in s.memory.iter() {
        for n in items {
            memory.entry(a.clone()).or_default().push(Derivation::collection(n.clone(), Vec::new())?);
        }
    }
    let focus = Derivation::unit(MemoryType::empties(&s.memory.dims()));
    Ok(StateParts { memory, focus, kont: Vec::new() })
}

fn mismatch(what: &str) -> TypeError {
    TypeError::Shape(format!("derivation does not match the {what} transition"))
}

/// From a derivation of the successor of `pre` to one of `pre`.
fn expand_transition(mut p: StateParts, pre: &MachineState) -> Result<StateParts, TypeError> {
    match (transition_of(pre), &pre.focus) {
        (Some(Transition::Push), Term::Push(_, a, _)) => {
            let c = p.memory.get_mut(a).and_then(Vec::pop).ok_or_else(|| mismatch("push"))?;
            if p.memory.get(a).is_some_and(Vec::is_empty) {
                p.memory.remove(a);
            }
            p.focus = Derivation::app_weak(a.clone(), c, p.focus)?;
        }
        (Some(Transition::Pop), Term::Pop(a, x, m)) => {
            let n = pre.memory.top(a).ok_or_else(|| mismatch("pop"))?;
            let (arg, body) = split_substitution(&p.focus, m, x, n, System::Weak)?;
            p.memory.entry(a.clone()).or_default().push(arg);
            p.focus = Derivation::abs(a.clone(), x.clone(), body)?;
        }
        (Some(Transition::Seq), Term::Seq(..)) => {
            let k = p.kont.pop().ok_or_else(|| mismatch("sequence"))?;
            p.focus = Derivation::seq(p.focus, k)?;
        }
        (Some(Transition::Resume), Term::Skip) => {
            let input = p.focus.comp_type().expect("term judgement").input.clone();
            let resumed = std::mem::replace(&mut p.focus, Derivation::unit(input));
            p.kont.push(resumed);
        }
        _ => return Err(mismatch("missing")),
    }
    Ok(p)
}

/// Types every state along the run from `start`, last state first typed
/// with empty collections, then expanded backwards. Index `i` types the
/// `i`-th state of the run.
pub fn infer_state_ladder(start: &MachineState, fuel: usize) -> Result<Vec<Derivation>, InferError> {
    let r = run_state(start.clone(), fuel, true);
    match r.outcome {
        RunOutcome::Success { .. } => {}
        RunOutcome::Failed { kind, .. } => return Err(InferError::Stuck(format!("{kind:?}"))),
        RunOutcome::FuelExhausted { .. } => return Err(InferError::FuelExhausted),
    }
    let trace = r.trace.expect("trace was requested");
    let last = trace.last().expect("non-empty run");
    let mut parts = final_parts(last)?;
    let mut out = vec![parts.clone().assemble()?];
    for pre in trace.iter().rev().skip(1) {
        parts = expand_transition(parts, pre)?;
        out.push(parts.clone().assemble()?);
    }
    out.reverse();
    Ok(out)
}

pub fn infer_state(start: &MachineState, fuel: usize) -> Result<Derivation, InferError> {
    let mut ladder = infer_state_ladder(start, fuel)?;
    Ok(ladder.swap_remove(0))
}

/// Types the initial state `(mem, t, ε)`.
pub fn infer_weak_state(mem: &Memory, t: &Term, fuel: usize) -> Result<Derivation, InferError> {
    infer_state(&MachineState::new(mem.clone(), t.clone()), fuel)
}

/// One machine transition applied to a state derivation; a pop eliminates
/// the substitution, so the weight drops by exactly one.
pub fn reduce_state(d: &Derivation) -> Result<Derivation, TypeError> {
    let Subject::State(s) = &d.subject else {
        return Err(TypeError::Shape("expected a state derivation".into()));
    };
    let StepOutcome::Next(next) = step(s) else {
        return Err(TypeError::Shape(format!("state {s} has no transition")));
    };
    let mut p = StateParts::take_apart(d)?;
    let focus = p.focus.clone();
    match (&focus.rule, &s.focus) {
        (TypingRule::AppWeak, Term::Push(_, a, _)) => {
            p.memory.entry(a.clone()).or_default().push(focus.children[0].clone());
            p.focus = focus.children[1].clone();
        }
        (TypingRule::Abs, Term::Pop(a, x, _)) => {
            let stack = p.memory.get_mut(a).ok_or_else(|| mismatch("pop"))?;
            let c = stack.pop().ok_or_else(|| mismatch("pop"))?;
            if stack.is_empty() {
                p.memory.remove(a);
            }
            let n = c.term().expect("collection subject");
            p.focus = eliminate_substitution(x, n, c.children.clone(), &focus.children[0])?;
        }
        (TypingRule::Seq, Term::Seq(..)) => {
            p.kont.push(focus.children[1].clone());
            p.focus = focus.children[0].clone();
        }
        (TypingRule::Unit, Term::Skip) => {
            p.focus = p.kont.pop().ok_or_else(|| mismatch("resume"))?;
        }
        _ => return Err(mismatch("focus")),
    }
    let out = p.assemble()?;
    match &out.subject {
        Subject::State(t) if *t == next => Ok(out),
        _ => Err(TypeError::Shape("reduced derivation types the wrong state".into())),
    }
}

/// The type `[]^f` every weak inference result ends in.
pub fn output_dims(d: &Derivation) -> Option<BTreeMap<Location, usize>> {
    let t = d.comp_type()?;
    t.output.is_empties().then(|| t.output.dims())
}
