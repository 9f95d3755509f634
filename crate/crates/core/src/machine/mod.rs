//! The abstract machine over a memory of located stacks and a continuation
//! stack, plus the quantified big-step evaluator.

mod bigstep;
mod dimension;
mod record;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use thiserror::Error;

use crate::syntax::{parse, substitute, Location, ParseError, Term};

pub use bigstep::{check_agreement, eval_big, BigStep, EvalRule, EvalTree, Verdict};
pub use dimension::{dimension_memory, dimension_subst, dimension_term, spine_dimension};
pub(crate) use record::parse_term;
pub use record::{MemoryRecord, RecordError, StateRecord};

/// Located operand stacks. The top of each stack is its last element, and
/// empty stacks are never stored.
#[derive(Clone, Default, PartialEq, Eq)]
pub struct Memory(BTreeMap<Location, Vec<Term>>);

impl Memory {
    pub fn new() -> Memory {
        Memory::default()
    }

    pub fn push(&mut self, loc: Location, t: Term) {
        self.0.entry(loc).or_default().push(t);
    }

    pub fn pop(&mut self, loc: &Location) -> Option<Term> {
        let stack = self.0.get_mut(loc)?;
        let t = stack.pop();
        if stack.is_empty() {
            self.0.remove(loc);
        }
        t
    }

    pub fn top(&self, loc: &Location) -> Option<&Term> {
        self.0.get(loc).and_then(|s| s.last())
    }

    /// Bottom to top.
    pub fn stack(&self, loc: &Location) -> &[Term] {
        self.0.get(loc).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Number of items per location.
    pub fn dims(&self) -> BTreeMap<Location, usize> {
        self.0.iter().map(|(a, s)| (a.clone(), s.len())).collect()
    }

    pub fn len(&self) -> usize {
        self.0.values().map(Vec::len).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Location, &[Term])> {
        self.0.iter().map(|(a, s)| (a, s.as_slice()))
    }

    pub fn from_stacks(stacks: impl IntoIterator<Item = (Location, Vec<Term>)>) -> Memory {
        Memory(stacks.into_iter().filter(|(_, s)| !s.is_empty()).collect())
    }
}

impl fmt::Display for Memory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return f.write_str("ε");
        }
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|(a, s)| {
                let items: Vec<String> = s.iter().map(Term::to_string).collect();
                format!("{a}:[{}]", items.join(", "))
            })
            .collect();
        f.write_str(&parts.join(" "))
    }
}

impl fmt::Debug for Memory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

#[derive(Debug, Error)]
pub enum MemoryParseError {
    #[error("memory literal: {0}")]
    Malformed(String),
    #[error("memory literal item: {0}")]
    Term(#[from] ParseError),
}

/// Parses `a:[*, <x>.x] lam:[y]`; the top of each stack is written last.
/// `ε` or an empty string is the empty memory.
impl FromStr for Memory {
    type Err = MemoryParseError;

    fn from_str(s: &str) -> Result<Memory, MemoryParseError> {
        let mut mem = Memory::new();
        let text = s.trim();
        if text.is_empty() || text == "ε" {
            return Ok(mem);
        }
        let bad = |m: &str| MemoryParseError::Malformed(m.to_string());
        let chars: Vec<char> = text.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            while i < chars.len() && (chars[i].is_whitespace() || chars[i] == ',') {
                i += 1;
            }
            if i == chars.len() {
                break;
            }
            let start = i;
            while i < chars.len() && chars[i] != ':' {
                i += 1;
            }
            let loc: String = chars[start..i].iter().collect::<String>().trim().to_string();
            if loc.is_empty() || !loc.starts_with(|c: char| c.is_ascii_lowercase()) {
                return Err(bad("expected a location before `:`"));
            }
            i += 1;
            while i < chars.len() && chars[i].is_whitespace() {
                i += 1;
            }
            if chars.get(i) != Some(&'[') {
                return Err(bad("expected `[` after the location"));
            }
            i += 1;
            let mut depth = 0usize;
            let mut item = String::new();
            let mut items = Vec::new();
            loop {
                let c = *chars.get(i).ok_or_else(|| bad("unclosed `[`"))?;
                i += 1;
                match c {
                    '[' | '(' => depth += 1,
                    ')' => depth = depth.saturating_sub(1),
                    ']' if depth == 0 => break,
                    ']' => depth -= 1,
                    ',' if depth == 0 => {
                        items.push(std::mem::take(&mut item));
                        continue;
                    }
                    _ => {}
                }
                item.push(c);
            }
            if !item.trim().is_empty() || !items.is_empty() {
                items.push(item);
            }
            let loc = Location::new(&loc);
            for it in items {
                mem.push(loc.clone(), parse(&it)?);
            }
        }
        Ok(mem)
    }
}

/// Pending continuations; the head is the next term to run.
#[derive(Clone, Default, PartialEq, Eq)]
pub struct ContinuationStack(Vec<Term>);

impl ContinuationStack {
    pub fn new() -> ContinuationStack {
        ContinuationStack::default()
    }

    pub fn from_head_first(items: Vec<Term>) -> ContinuationStack {
        let mut v = items;
        v.reverse();
        ContinuationStack(v)
    }

    pub fn push(&mut self, t: Term) {
        self.0.push(t);
    }

    pub fn pop(&mut self) -> Option<Term> {
        self.0.pop()
    }

    pub fn head(&self) -> Option<&Term> {
        self.0.last()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    /// Items from the head onwards.
    pub fn iter(&self) -> impl Iterator<Item = &Term> {
        self.0.iter().rev()
    }
}

impl fmt::Display for ContinuationStack {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return f.write_str("ε");
        }
        let items: Vec<String> = self.iter().map(Term::to_string).collect();
        write!(f, "[{}]", items.join(", "))
    }
}

impl fmt::Debug for ContinuationStack {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

#[derive(Clone, PartialEq, Eq)]
pub struct MachineState {
    pub memory: Memory,
    pub focus: Term,
    pub kont: ContinuationStack,
}

impl MachineState {
    pub fn new(memory: Memory, focus: Term) -> MachineState {
        MachineState { memory, focus, kont: ContinuationStack::new() }
    }

    pub fn is_final(&self) -> bool {
        matches!(self.focus, Term::Skip) && self.kont.is_empty()
    }
}

impl fmt::Display for MachineState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.memory, self.focus, self.kont)
    }
}

impl fmt::Debug for MachineState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FailureKind {
    VarFocus,
    EmptyPop(Location),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StepOutcome {
    Next(MachineState),
    Final,
    Failure(FailureKind),
}

/// The transition a non-final, non-failed state takes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Transition {
    Push,
    Pop,
    Seq,
    Resume,
}

fn halted(s: &MachineState) -> Option<Result<(), FailureKind>> {
    match &s.focus {
        Term::Var(_) => Some(Err(FailureKind::VarFocus)),
        Term::Pop(a, _, _) if s.memory.top(a).is_none() => Some(Err(FailureKind::EmptyPop(a.clone()))),
        Term::Skip if s.kont.is_empty() => Some(Ok(())),
        _ => None,
    }
}

/// Performs one transition in place. The caller guarantees the state has not halted.
fn advance(s: &mut MachineState) -> Transition {
    match std::mem::replace(&mut s.focus, Term::Skip) {
        Term::Push(n, a, m) => {
            s.memory.push(a, Arc::unwrap_or_clone(n));
            s.focus = Arc::unwrap_or_clone(m);
            Transition::Push
        }
        Term::Pop(a, x, m) => {
            let n = s.memory.pop(&a).expect("pop on a non-empty stack");
            s.focus = substitute(&n, &x, &m);
            Transition::Pop
        }
        Term::Seq(m, n) => {
            s.kont.push(Arc::unwrap_or_clone(n));
            s.focus = Arc::unwrap_or_clone(m);
            Transition::Seq
        }
        Term::Skip => {
            s.focus = s.kont.pop().expect("non-empty continuation");
            Transition::Resume
        }
        Term::Var(_) => unreachable!("variables have no transition"),
    }
}

pub fn step(s: &MachineState) -> StepOutcome {
    match halted(s) {
        Some(Ok(())) => StepOutcome::Final,
        Some(Err(kind)) => StepOutcome::Failure(kind),
        None => {
            let mut next = s.clone();
            advance(&mut next);
            StepOutcome::Next(next)
        }
    }
}

/// Which transition `s` takes, if any.
pub fn transition_of(s: &MachineState) -> Option<Transition> {
    if halted(s).is_some() {
        return None;
    }
    Some(match s.focus {
        Term::Push(..) => Transition::Push,
        Term::Pop(..) => Transition::Pop,
        Term::Seq(..) => Transition::Seq,
        _ => Transition::Resume,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RunOutcome {
    Success { final_memory: Memory, length: usize },
    Failed { at: MachineState, kind: FailureKind, length: usize },
    FuelExhausted { at: MachineState },
}

#[derive(Clone, Debug)]
pub struct RunResult {
    pub outcome: RunOutcome,
    pub trace: Option<Vec<MachineState>>,
}

impl RunResult {
    pub fn length(&self) -> Option<usize> {
        match self.outcome {
            RunOutcome::Success { length, .. } => Some(length),
            _ => None,
        }
    }
}

/// Runs from `(mem, t, ε)`. `fuel` bounds the number of states traversed;
/// the reported length counts states, so `*` runs in length 1.
pub fn run(mem: Memory, t: Term, fuel: usize, record_trace: bool) -> RunResult {
    run_state(MachineState::new(mem, t), fuel, record_trace)
}

pub fn run_state(start: MachineState, fuel: usize, record_trace: bool) -> RunResult {
    let mut s = start;
    let mut trace = record_trace.then(Vec::new);
    let mut length = 1;
    let outcome = loop {
        if let Some(tr) = trace.as_mut() {
            tr.push(s.clone());
        }
        match halted(&s) {
            Some(Ok(())) => break RunOutcome::Success { final_memory: s.memory, length },
            Some(Err(kind)) => break RunOutcome::Failed { at: s, kind, length },
            None if length >= fuel => break RunOutcome::FuelExhausted { at: s },
            None => {
                advance(&mut s);
                length += 1;
            }
        }
    };
    RunResult { outcome, trace }
}
