//! Reduction: the six rules, redex discovery in full and spine contexts,
//! normalization with traces, normal-form grammars and the SN oracle.

mod normal;
mod sn;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::syntax::{fresh_name, substitute, Name, Position, Selector, Term};

pub use normal::{is_normal, is_spine_normal, non_beta_measure};
pub use sn::{bounded_sn_check, SnVerdict};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Rule {
    Beta,
    Passage,
    Next,
    PrefixPop,
    PrefixPush,
    Associate,
}

impl Rule {
    pub const ALL: [Rule; 6] =
        [Rule::Beta, Rule::Passage, Rule::Next, Rule::PrefixPop, Rule::PrefixPush, Rule::Associate];

    pub fn name(self) -> &'static str {
        match self {
            Rule::Beta => "Beta",
            Rule::Passage => "Passage",
            Rule::Next => "Next",
            Rule::PrefixPop => "PrefixPop",
            Rule::PrefixPush => "PrefixPush",
            Rule::Associate => "Associate",
        }
    }

    /// Beta and Next are the steps that cost weight.
    pub fn is_costly(self) -> bool {
        matches!(self, Rule::Beta | Rule::Next)
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Redex {
    pub at: Position,
    pub rule: Rule,
    pub spine: bool,
}

/// Where the argument of a Beta step was copied, relative to the rewritten subterm.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BetaPayload {
    pub binder: Name,
    pub argument: Term,
    pub occurrences: Vec<Position>,
}

#[derive(Clone, Debug)]
pub struct Step {
    pub redex: Redex,
    pub result: Term,
    pub beta: Option<BetaPayload>,
}

#[derive(Clone, Debug)]
pub struct ReductionTrace {
    pub start: Term,
    pub steps: Vec<Step>,
}

impl ReductionTrace {
    pub fn new(start: Term) -> ReductionTrace {
        ReductionTrace { start, steps: Vec::new() }
    }

    pub fn result(&self) -> &Term {
        self.steps.last().map(|s| &s.result).unwrap_or(&self.start)
    }

    /// The term before step `i`.
    pub fn before(&self, i: usize) -> &Term {
        if i == 0 {
            &self.start
        } else {
            &self.steps[i - 1].result
        }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn count(&self, pred: impl Fn(Rule) -> bool) -> usize {
        self.steps.iter().filter(|s| pred(s.redex.rule)).count()
    }

    /// Re-applies every step and checks the recorded results.
    pub fn validate(&self) -> Result<(), RewriteError> {
        let mut cur = self.start.clone();
        for (i, s) in self.steps.iter().enumerate() {
            let (next, _) = apply_redex(&cur, &s.redex)?;
            if next != s.result || s.redex.spine != s.redex.at.is_spine() {
                return Err(RewriteError::TraceMismatch(i));
            }
            cur = next;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepRecord {
    pub position: String,
    pub rule: String,
    pub result: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub start: String,
    pub steps: Vec<StepRecord>,
}

impl From<&ReductionTrace> for TraceRecord {
    fn from(t: &ReductionTrace) -> TraceRecord {
        TraceRecord {
            start: t.start.to_string(),
            steps: t
                .steps
                .iter()
                .map(|s| StepRecord {
                    position: s.redex.at.to_string(),
                    rule: s.redex.rule.to_string(),
                    result: s.result.to_string(),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RewriteError {
    #[error("no subterm at position `{0}`")]
    InvalidPosition(Position),
    #[error("{rule} does not match at `{at}`")]
    NoMatch { at: Position, rule: Rule },
    #[error("trace step {0} does not reproduce its recorded result")]
    TraceMismatch(usize),
}

/// The rule whose left-hand side matches at the root. Variable side
/// conditions are met by renaming when the rule is applied.
pub fn match_root(t: &Term) -> Option<Rule> {
    match t {
        Term::Push(_, b, m) => match &**m {
            Term::Pop(a, _, _) if a == b => Some(Rule::Beta),
            Term::Pop(..) => Some(Rule::Passage),
            _ => None,
        },
        Term::Seq(l, _) => match &**l {
            Term::Skip => Some(Rule::Next),
            Term::Pop(..) => Some(Rule::PrefixPop),
            Term::Push(..) => Some(Rule::PrefixPush),
            Term::Seq(..) => Some(Rule::Associate),
            Term::Var(_) => None,
        },
        _ => None,
    }
}

fn rename_binder(x: &Name, body: &Term, avoid_in: &Term) -> (Name, Term) {
    let mut avoid = avoid_in.free_vars();
    avoid.extend(body.free_vars());
    avoid.insert(x.clone());
    let y = fresh_name(x, &avoid);
    let renamed = substitute(&Term::Var(y.clone()), x, body);
    (y, renamed)
}

/// Rewrites `t` at its root by `rule`.
pub fn contract(t: &Term, rule: Rule) -> Option<(Term, Option<BetaPayload>)> {
    if match_root(t) != Some(rule) {
        return None;
    }
    let out = match (rule, t) {
        (Rule::Beta, Term::Push(n, _, m)) => {
            let Term::Pop(_, x, body) = &**m else { return None };
            let payload =
                BetaPayload { binder: x.clone(), argument: (**n).clone(), occurrences: body.free_occurrences(x) };
            (substitute(n, x, body), Some(payload))
        }
        (Rule::Passage, Term::Push(n, b, m)) => {
            let Term::Pop(a, x, body) = &**m else { return None };
            let (x, body) = if n.has_free(x) { rename_binder(x, body, n) } else { (x.clone(), (**body).clone()) };
            (Term::Pop(a.clone(), x, Arc::new(Term::push((**n).clone(), b.clone(), body))), None)
        }
        (Rule::Next, Term::Seq(_, m)) => ((**m).clone(), None),
        (Rule::PrefixPop, Term::Seq(l, m)) => {
            let Term::Pop(a, x, n) = &**l else { return None };
            let (x, n) = if m.has_free(x) { rename_binder(x, n, m) } else { (x.clone(), (**n).clone()) };
            (Term::Pop(a.clone(), x, Arc::new(Term::seq(n, (**m).clone()))), None)
        }
        (Rule::PrefixPush, Term::Seq(l, m)) => {
            let Term::Push(p, a, n) = &**l else { return None };
            (Term::push((**p).clone(), a.clone(), Term::seq((**n).clone(), (**m).clone())), None)
        }
        (Rule::Associate, Term::Seq(l, m)) => {
            let Term::Seq(p, n) = &**l else { return None };
            (Term::seq((**p).clone(), Term::seq((**n).clone(), (**m).clone())), None)
        }
        _ => return None,
    };
    Some(out)
}

fn children(t: &Term) -> Vec<(Selector, &Term)> {
    match t {
        Term::Var(_) | Term::Skip => Vec::new(),
        Term::Pop(_, _, m) => vec![(Selector::PopBody, m)],
        Term::Push(n, _, m) => vec![(Selector::PushArg, n), (Selector::PushBody, m)],
        Term::Seq(n, m) => vec![(Selector::SeqLeft, n), (Selector::SeqRight, m)],
    }
}

fn collect(t: &Term, spine_only: bool, path: &mut Vec<Selector>, out: &mut Vec<Redex>, first_only: bool) {
    if first_only && !out.is_empty() {
        return;
    }
    if let Some(rule) = match_root(t) {
        let at = Position(path.clone());
        let spine = at.is_spine();
        out.push(Redex { at, rule, spine });
        if first_only {
            return;
        }
    }
    for (sel, c) in children(t) {
        if spine_only && sel == Selector::PushArg {
            continue;
        }
        path.push(sel);
        collect(c, spine_only, path, out, first_only);
        path.pop();
    }
}

/// All redexes, leftmost-outermost first.
pub fn redexes(t: &Term, spine_only: bool) -> Vec<Redex> {
    let mut out = Vec::new();
    collect(t, spine_only, &mut Vec::new(), &mut out, false);
    out
}

pub fn first_redex(t: &Term, spine_only: bool) -> Option<Redex> {
    let mut out = Vec::new();
    collect(t, spine_only, &mut Vec::new(), &mut out, true);
    out.pop()
}

pub fn apply_redex(t: &Term, r: &Redex) -> Result<(Term, Option<BetaPayload>), RewriteError> {
    let sub = t.subterm(&r.at).ok_or_else(|| RewriteError::InvalidPosition(r.at.clone()))?;
    let (new, payload) =
        contract(sub, r.rule).ok_or_else(|| RewriteError::NoMatch { at: r.at.clone(), rule: r.rule })?;
    let mut out = t.clone();
    out.replace_at(&r.at, new);
    Ok((out, payload))
}

fn normalize(t: &Term, fuel: usize, spine_only: bool) -> Option<ReductionTrace> {
    let mut trace = ReductionTrace::new(t.clone());
    let mut cur = t.clone();
    while let Some(redex) = first_redex(&cur, spine_only) {
        if trace.len() >= fuel {
            return None;
        }
        let (next, beta) = apply_redex(&cur, &redex).expect("discovered redexes apply");
        trace.steps.push(Step { redex, result: next.clone(), beta });
        cur = next;
    }
    Some(trace)
}

/// Leftmost-outermost spine reduction to a spine normal form, within `fuel` steps.
pub fn spine_normalize(t: &Term, fuel: usize) -> Option<ReductionTrace> {
    normalize(t, fuel, true)
}

/// Leftmost-outermost reduction in all contexts, within `fuel` steps.
pub fn normalize_full(t: &Term, fuel: usize) -> Option<ReductionTrace> {
    normalize(t, fuel, false)
}
