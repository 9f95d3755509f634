//! Perpetual evaluation: a big-step relation that normalizes a term while
//! insisting on evaluating every argument it discards.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::machine::RecordError;
use crate::rewrite::{apply_redex, contract, is_normal, Redex, ReductionTrace, RewriteError, Rule, Step};
use crate::syntax::{Location, Position, Selector, Term};

/// `[N1]a1 ... [Nn]an.core` with the outermost push first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeakHeadSplit {
    pub pushes: Vec<(Term, Location)>,
    pub core: Term,
}

impl WeakHeadSplit {
    pub fn reassemble(&self) -> Term {
        wrap(self.pushes.iter().cloned(), self.core.clone())
    }
}

pub fn weak_head_split(t: &Term) -> WeakHeadSplit {
    let mut pushes = Vec::new();
    let mut cur = t;
    while let Term::Push(n, a, m) = cur {
        pushes.push(((**n).clone(), a.clone()));
        cur = m;
    }
    WeakHeadSplit { pushes, core: cur.clone() }
}

fn wrap(pushes: impl DoubleEndedIterator<Item = (Term, Location)>, core: Term) -> Term {
    pushes.rev().fold(core, |m, (n, a)| Term::push(n, a, m))
}

fn push_body_path(n: usize) -> Position {
    Position(vec![Selector::PushBody; n])
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PerpRule {
    Beta,
    Passage,
    Next,
    PrefixPop,
    PrefixPush,
    Associate,
    NormAbs,
    NormUnit,
    NormVar,
    NormSeq,
}

impl PerpRule {
    pub const ALL: [PerpRule; 10] = [
        PerpRule::Beta,
        PerpRule::Passage,
        PerpRule::Next,
        PerpRule::PrefixPop,
        PerpRule::PrefixPush,
        PerpRule::Associate,
        PerpRule::NormAbs,
        PerpRule::NormUnit,
        PerpRule::NormVar,
        PerpRule::NormSeq,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PerpRule::Beta => "Beta",
            PerpRule::Passage => "Passage",
            PerpRule::Next => "Next",
            PerpRule::PrefixPop => "PrefixPop",
            PerpRule::PrefixPush => "PrefixPush",
            PerpRule::Associate => "Associate",
            PerpRule::NormAbs => "NormAbs",
            PerpRule::NormUnit => "NormUnit",
            PerpRule::NormVar => "NormVar",
            PerpRule::NormSeq => "NormSeq",
        }
    }

    /// The reduction rule a head step of this node performs, if any.
    pub fn reduction(self) -> Option<Rule> {
        match self {
            PerpRule::Beta => Some(Rule::Beta),
            PerpRule::Passage => Some(Rule::Passage),
            PerpRule::Next => Some(Rule::Next),
            PerpRule::PrefixPop => Some(Rule::PrefixPop),
            PerpRule::PrefixPush => Some(Rule::PrefixPush),
            PerpRule::Associate => Some(Rule::Associate),
            _ => None,
        }
    }
}

impl fmt::Display for PerpRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for PerpRule {
    type Err = String;

    fn from_str(s: &str) -> Result<PerpRule, String> {
        PerpRule::ALL.into_iter().find(|r| r.name() == s).ok_or_else(|| format!("unknown rule `{s}`"))
    }
}

/// `subject ⇓ result`. Beta nodes hold the continuation then the argument.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PerpTree {
    pub rule: PerpRule,
    pub subject: Term,
    pub result: Term,
    pub children: Vec<PerpTree>,
}

impl PerpTree {
    pub fn size(&self) -> usize {
        1 + self.children.iter().map(PerpTree::size).sum::<usize>()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PerpStatus {
    Done,
    FuelExhausted,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PerpResult {
    pub tree: Option<PerpTree>,
    pub status: PerpStatus,
}

/// How a node is evaluated: its rule and the premises, in evaluation order.
fn plan(t: &Term) -> (PerpRule, Vec<Term>) {
    let split = weak_head_split(t);
    let n = split.pushes.len();
    let args = || split.pushes.iter().map(|(m, _)| m.clone()).collect::<Vec<_>>();
    let head_step = |rule: Rule| {
        let (pushes, core) = (&split.pushes, &split.core);
        let (redex, inner) = match rule {
            Rule::Beta | Rule::Passage => {
                let (arg, loc) = pushes.last().expect("a push meets the abstraction");
                (Term::push(arg.clone(), loc.clone(), core.clone()), n - 1)
            }
            _ => (core.clone(), n),
        };
        let (reduct, _) = contract(&redex, rule).expect("planned redex contracts");
        wrap(pushes[..inner].iter().cloned(), reduct)
    };
    match &split.core {
        Term::Skip => (PerpRule::NormUnit, args()),
        Term::Var(_) => (PerpRule::NormVar, args()),
        Term::Pop(a, _, body) => match split.pushes.last() {
            None => (PerpRule::NormAbs, vec![(**body).clone()]),
            Some((arg, b)) if a == b => (PerpRule::Beta, vec![arg.clone(), head_step(Rule::Beta)]),
            Some(_) => (PerpRule::Passage, vec![head_step(Rule::Passage)]),
        },
        Term::Seq(l, r) => match &**l {
            Term::Skip => (PerpRule::Next, vec![head_step(Rule::Next)]),
            Term::Pop(..) => (PerpRule::PrefixPop, vec![head_step(Rule::PrefixPop)]),
            Term::Push(..) => (PerpRule::PrefixPush, vec![head_step(Rule::PrefixPush)]),
            Term::Seq(..) => (PerpRule::Associate, vec![head_step(Rule::Associate)]),
            Term::Var(_) => {
                let mut ps = args();
                ps.push((**r).clone());
                (PerpRule::NormSeq, ps)
            }
        },
        Term::Push(..) => unreachable!("the core of a split is never a push"),
    }
}

fn conclude(rule: PerpRule, subject: Term, mut done: Vec<PerpTree>) -> PerpTree {
    let split = || weak_head_split(&subject);
    let rewrap = |results: &[PerpTree], core: Term| {
        let locs = split().pushes.into_iter().map(|(_, a)| a);
        wrap(results.iter().map(|p| p.result.clone()).zip(locs).collect::<Vec<_>>().into_iter(), core)
    };
    let result = match rule {
        PerpRule::Beta => {
            done.swap(0, 1);
            done[0].result.clone()
        }
        PerpRule::Passage | PerpRule::Next | PerpRule::PrefixPop | PerpRule::PrefixPush | PerpRule::Associate => {
            done[0].result.clone()
        }
        PerpRule::NormAbs => {
            let Term::Pop(a, x, _) = &subject else { unreachable!() };
            Term::pop(a.clone(), x.clone(), done[0].result.clone())
        }
        PerpRule::NormUnit | PerpRule::NormVar => rewrap(&done, split().core),
        PerpRule::NormSeq => {
            let s = split();
            let Term::Seq(x, _) = &s.core else { unreachable!() };
            let n = s.pushes.len();
            rewrap(&done[..n], Term::seq((**x).clone(), done[n].result.clone()))
        }
    };
    PerpTree { rule, subject, result, children: done }
}

struct Frame {
    rule: PerpRule,
    subject: Term,
    pending: std::vec::IntoIter<Term>,
    done: Vec<PerpTree>,
}

impl Frame {
    fn new(t: Term) -> Frame {
        let (rule, premises) = plan(&t);
        Frame { rule, subject: t, pending: premises.into_iter(), done: Vec::new() }
    }
}

/// Evaluates `t` perpetually; `fuel` bounds the number of rule instances.
pub fn perp_eval(t: &Term, fuel: usize) -> PerpResult {
    if fuel == 0 {
        return PerpResult { tree: None, status: PerpStatus::FuelExhausted };
    }
    let mut used = 1;
    let mut stack = vec![Frame::new(t.clone())];
    loop {
        let top = stack.last_mut().expect("non-empty stack");
        if let Some(next) = top.pending.next() {
            if used >= fuel {
                return PerpResult { tree: None, status: PerpStatus::FuelExhausted };
            }
            used += 1;
            stack.push(Frame::new(next));
            continue;
        }
        let f = stack.pop().expect("frame");
        let tree = conclude(f.rule, f.subject, f.done);
        match stack.last_mut() {
            Some(parent) => parent.done.push(tree),
            None => return PerpResult { tree: Some(tree), status: PerpStatus::Done },
        }
    }
}

/// Re-validates every node of `p` against its rule.
pub fn check_perp_tree(p: &PerpTree) -> bool {
    is_normal(&p.result) && check_node(p)
}

fn check_node(p: &PerpTree) -> bool {
    let split = weak_head_split(&p.subject);
    let n = split.pushes.len();
    let ch = &p.children;
    let results_normal = ch.iter().all(|c| is_normal(&c.result));
    let args_match = |k: usize| k <= ch.len() && split.pushes.iter().zip(ch).all(|((m, _), c)| c.subject.alpha_eq(m));
    let rewrapped = |core: Term| {
        wrap(
            ch.iter()
                .map(|c| c.result.clone())
                .zip(split.pushes.iter().map(|(_, a)| a.clone()))
                .collect::<Vec<_>>()
                .into_iter(),
            core,
        )
    };
    let ok = match p.rule {
        PerpRule::Beta => {
            let Some((arg, b)) = split.pushes.last() else { return false };
            ch.len() == 2
                && matches!(&split.core, Term::Pop(a, _, _) if a == b)
                && ch[1].subject.alpha_eq(arg)
                && head_reduct(&p.subject, n - 1, Rule::Beta).is_some_and(|r| r.alpha_eq(&ch[0].subject))
                && p.result.alpha_eq(&ch[0].result)
        }
        PerpRule::NormAbs => {
            n == 0
                && ch.len() == 1
                && matches!((&p.subject, &p.result), (Term::Pop(a, x, m), Term::Pop(b, y, r))
                    if a == b && x == y && ch[0].subject.syntactic_eq(m) && ch[0].result.syntactic_eq(r))
        }
        PerpRule::NormUnit | PerpRule::NormVar => {
            let core_ok = match p.rule {
                PerpRule::NormUnit => split.core == Term::Skip,
                _ => matches!(split.core, Term::Var(_)),
            };
            core_ok
                && ch.len() == n
                && results_normal
                && args_match(n)
                && p.result.syntactic_eq(&rewrapped(split.core.clone()))
        }
        PerpRule::NormSeq => {
            let Term::Seq(x, r) = &split.core else { return false };
            matches!(**x, Term::Var(_))
                && ch.len() == n + 1
                && results_normal
                && args_match(n)
                && ch[n].subject.syntactic_eq(r)
                && p.result.syntactic_eq(&rewrapped(Term::seq((**x).clone(), ch[n].result.clone())))
        }
        rule => {
            let rr = rule.reduction().expect("head step rule");
            let at = if rule == PerpRule::Passage { n.saturating_sub(1) } else { n };
            n >= usize::from(rule == PerpRule::Passage)
                && ch.len() == 1
                && head_reduct(&p.subject, at, rr).is_some_and(|r| r.alpha_eq(&ch[0].subject))
                && p.result.alpha_eq(&ch[0].result)
        }
    };
    ok && ch.iter().all(check_node)
}

/// The result of contracting the redex at `PushBody^k` by `rule`.
fn head_reduct(t: &Term, k: usize, rule: Rule) -> Option<Term> {
    let at = push_body_path(k);
    apply_redex(t, &Redex { spine: true, at, rule }).ok().map(|(r, _)| r)
}

/// The reduction `subject →* result` implied by a tree: each head step in
/// place, then the argument and tail evaluations from left to right.
pub fn replay(p: &PerpTree) -> Result<ReductionTrace, RewriteError> {
    let mut steps = Vec::new();
    collect_steps(p, &mut Vec::new(), &mut steps);
    let mut trace = ReductionTrace::new(p.subject.clone());
    let mut cur = p.subject.clone();
    for (at, rule) in steps {
        let redex = Redex { spine: at.is_spine(), at, rule };
        let (next, beta) = apply_redex(&cur, &redex)?;
        trace.steps.push(Step { redex, result: next.clone(), beta });
        cur = next;
    }
    if !cur.alpha_eq(&p.result) {
        return Err(RewriteError::TraceMismatch(trace.len()));
    }
    Ok(trace)
}

fn collect_steps(p: &PerpTree, prefix: &mut Vec<Selector>, out: &mut Vec<(Position, Rule)>) {
    let n = weak_head_split(&p.subject).pushes.len();
    let with = |prefix: &Vec<Selector>, tail: &[Selector]| {
        let mut v = prefix.clone();
        v.extend_from_slice(tail);
        v
    };
    match p.rule {
        PerpRule::NormAbs => {
            prefix.push(Selector::PopBody);
            collect_steps(&p.children[0], prefix, out);
            prefix.pop();
        }
        PerpRule::NormUnit | PerpRule::NormVar | PerpRule::NormSeq => {
            for (i, c) in p.children.iter().enumerate() {
                let mut tail = vec![Selector::PushBody; i];
                tail.push(if i < n { Selector::PushArg } else { Selector::SeqRight });
                let mut path = with(prefix, &tail);
                collect_steps(c, &mut path, out);
            }
        }
        rule => {
            let k = if matches!(rule, PerpRule::Beta | PerpRule::Passage) { n - 1 } else { n };
            out.push((Position(with(prefix, &vec![Selector::PushBody; k])), rule.reduction().expect("head step")));
            collect_steps(&p.children[0], prefix, out);
        }
    }
}

/// Serialized form: `{rule, subject, result, children}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PerpRecord {
    pub rule: String,
    pub subject: String,
    pub result: String,
    pub children: Vec<PerpRecord>,
}

impl From<&PerpTree> for PerpRecord {
    fn from(p: &PerpTree) -> PerpRecord {
        PerpRecord {
            rule: p.rule.name().to_string(),
            subject: p.subject.to_string(),
            result: p.result.to_string(),
            children: p.children.iter().map(PerpRecord::from).collect(),
        }
    }
}

impl TryFrom<&PerpRecord> for PerpTree {
    type Error = RecordError;

    fn try_from(r: &PerpRecord) -> Result<PerpTree, RecordError> {
        let rule = r.rule.parse().map_err(RecordError::Rule)?;
        Ok(PerpTree {
            rule,
            subject: crate::machine::parse_term(&r.subject)?,
            result: crate::machine::parse_term(&r.result)?,
            children: r.children.iter().map(PerpTree::try_from).collect::<Result<_, _>>()?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse;

    fn t(s: &str) -> Term {
        parse(s).unwrap()
    }

    #[test]
    fn splits() {
        assert_eq!(weak_head_split(&Term::Skip), WeakHeadSplit { pushes: vec![], core: Term::Skip });
        let s = weak_head_split(&t("[x]a.[y]b.*"));
        assert_eq!(s.pushes, vec![(t("x"), Location::new("a")), (t("y"), Location::new("b"))]);
        assert_eq!(s.reassemble(), t("[x]a.[y]b.*"));
        assert!(weak_head_split(&t("<z>.[x]a.*")).pushes.is_empty());
    }

    #[test]
    fn examples() {
        let r = perp_eval(&Term::Skip, 10);
        let p = r.tree.unwrap();
        assert_eq!((p.rule, p.result.clone()), (PerpRule::NormUnit, Term::Skip));
        let p = perp_eval(&t("[*].<x>.*"), 10).tree.unwrap();
        assert_eq!(p.rule, PerpRule::Beta);
        assert_eq!(p.result, Term::Skip);
        assert_eq!(p.children[1].subject, Term::Skip);
        assert!(check_perp_tree(&p));
        let omega = "[<x>.[x].x].<x>.[x].x";
        let r = perp_eval(&t(&format!("[{omega}].<x>.*")), 500);
        assert_eq!(r.status, PerpStatus::FuelExhausted);
        assert!(r.tree.is_none());
    }

    #[test]
    fn normal_forms_and_replay() {
        for s in ["[[*].<y>.y]a.x;<z>.(z;*)", "[*]b.<x>.[x]a.*;a<y>.y", "<x>.(*;x)", "([*].*;*);a<x>.x"] {
            let p = perp_eval(&t(s), 1000).tree.unwrap();
            assert!(check_perp_tree(&p), "{s}");
            assert!(is_normal(&p.result));
            let tr = replay(&p).unwrap();
            tr.validate().unwrap();
            assert!(tr.result().alpha_eq(&p.result));
            assert_eq!(perp_eval(&t(s), 1000).tree.unwrap(), p);
        }
    }

    #[test]
    fn checker_rejects_broken_trees() {
        let mut p = perp_eval(&t("[*].<x>.*"), 10).tree.unwrap();
        p.children.pop();
        assert!(!check_perp_tree(&p));
        let mut q = perp_eval(&t("[[*].<y>.y].x"), 10).tree.unwrap();
        q.children[0].result = t("[*].<y>.y");
        q.result = t("[[*].<y>.y].x");
        assert!(!check_perp_tree(&q));
    }

    #[test]
    fn records_round_trip() {
        let p = perp_eval(&t("[*]b.<x>.[x]a.*;a<y>.y"), 100).tree.unwrap();
        let rec = PerpRecord::from(&p);
        let back =
            PerpTree::try_from(&serde_json::from_str::<PerpRecord>(&serde_json::to_string(&rec).unwrap()).unwrap())
                .unwrap();
        assert_eq!(back, p);
    }
}
