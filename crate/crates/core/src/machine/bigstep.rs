use crate::syntax::{substitute, Term};

use super::{run, Memory, RunOutcome};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EvalRule {
    Unit,
    Seq,
    Push,
    Pop,
}

/// A derivation of `input, term ⇓count output`.
#[derive(Clone, Debug)]
pub struct EvalTree {
    pub rule: EvalRule,
    pub input: Memory,
    pub term: Term,
    pub output: Memory,
    pub count: usize,
    pub children: Vec<EvalTree>,
}

impl EvalTree {
    /// Number of rule instances, counted without trusting `count`.
    pub fn instances(&self) -> usize {
        let mut n = 0;
        let mut todo = vec![self];
        while let Some(t) = todo.pop() {
            n += 1;
            todo.extend(t.children.iter());
        }
        n
    }

    /// Every node's count and memories agree with its rule.
    pub fn is_consistent(&self) -> bool {
        let mut todo = vec![self];
        while let Some(t) = todo.pop() {
            let ok = match (t.rule, t.children.as_slice()) {
                (EvalRule::Unit, []) => t.count == 1 && t.input == t.output && matches!(t.term, Term::Skip),
                (EvalRule::Seq, [l, r]) => match &t.term {
                    Term::Seq(m, n) => {
                        l.term == **m
                            && r.term == **n
                            && l.input == t.input
                            && l.output == r.input
                            && r.output == t.output
                            && t.count == l.count + r.count + 1
                    }
                    _ => false,
                },
                (EvalRule::Push, [c]) => match &t.term {
                    Term::Push(n, a, m) => {
                        let mut s = t.input.clone();
                        s.push(a.clone(), (**n).clone());
                        c.term == **m && c.input == s && c.output == t.output && t.count == c.count + 1
                    }
                    _ => false,
                },
                (EvalRule::Pop, [c]) => match &t.term {
                    Term::Pop(a, x, m) => {
                        let mut s = t.input.clone();
                        match s.pop(a) {
                            Some(n) => {
                                c.term == substitute(&n, x, m)
                                    && c.input == s
                                    && c.output == t.output
                                    && t.count == c.count + 1
                            }
                            None => false,
                        }
                    }
                    _ => false,
                },
                _ => false,
            };
            if !ok {
                return false;
            }
            todo.extend(t.children.iter());
        }
        true
    }
}

#[derive(Clone, Debug)]
pub enum BigStep {
    Derived {
        output: Memory,
        tree: EvalTree,
    },
    /// No rule applies: a variable, or a pop on an empty stack.
    Stuck,
    OutOfFuel,
}

enum Task {
    Eval(Memory, Term),
    SeqRight { input: Memory, term: Term },
    SeqDone { input: Memory, term: Term },
    Wrap { rule: EvalRule, input: Memory, term: Term },
}

/// Builds the big-step derivation from `mem`. Fuel bounds the number of
/// rule instances, so it is comparable with the machine's state budget.
pub fn eval_big(mem: Memory, t: Term, fuel: usize) -> BigStep {
    let mut tasks = vec![Task::Eval(mem, t)];
    let mut done: Vec<EvalTree> = Vec::new();
    let mut used = 0;
    while let Some(task) = tasks.pop() {
        match task {
            Task::Eval(s, term) => {
                used += 1;
                if used > fuel {
                    return BigStep::OutOfFuel;
                }
                match &term {
                    Term::Skip => done.push(EvalTree {
                        rule: EvalRule::Unit,
                        output: s.clone(),
                        input: s,
                        term,
                        count: 1,
                        children: Vec::new(),
                    }),
                    Term::Seq(m, _) => {
                        let left = (**m).clone();
                        tasks.push(Task::SeqRight { input: s.clone(), term });
                        tasks.push(Task::Eval(s, left));
                    }
                    Term::Push(n, a, m) => {
                        let mut inner = s.clone();
                        inner.push(a.clone(), (**n).clone());
                        let body = (**m).clone();
                        tasks.push(Task::Wrap { rule: EvalRule::Push, input: s, term });
                        tasks.push(Task::Eval(inner, body));
                    }
                    Term::Pop(a, x, m) => {
                        let mut inner = s.clone();
                        let Some(n) = inner.pop(a) else {
                            return BigStep::Stuck;
                        };
                        let body = substitute(&n, x, m);
                        tasks.push(Task::Wrap { rule: EvalRule::Pop, input: s, term });
                        tasks.push(Task::Eval(inner, body));
                    }
                    Term::Var(_) => return BigStep::Stuck,
                }
            }
            Task::SeqRight { input, term } => {
                let left = done.last().expect("left premise");
                let right = match &term {
                    Term::Seq(_, n) => (**n).clone(),
                    _ => unreachable!(),
                };
                let mid = left.output.clone();
                tasks.push(Task::SeqDone { input, term });
                tasks.push(Task::Eval(mid, right));
            }
            Task::SeqDone { input, term } => {
                let right = done.pop().expect("right premise");
                let left = done.pop().expect("left premise");
                done.push(EvalTree {
                    rule: EvalRule::Seq,
                    input,
                    term,
                    output: right.output.clone(),
                    count: left.count + right.count + 1,
                    children: vec![left, right],
                });
            }
            Task::Wrap { rule, input, term } => {
                let child = done.pop().expect("premise");
                done.push(EvalTree {
                    rule,
                    input,
                    term,
                    output: child.output.clone(),
                    count: child.count + 1,
                    children: vec![child],
                });
            }
        }
    }
    let tree = done.pop().expect("root derivation");
    BigStep::Derived { output: tree.output.clone(), tree }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Agree(usize),
    BothFail,
    BothDiverge,
    Mismatch(String),
}

/// Compares the machine and the big-step evaluator under the same budget.
pub fn check_agreement(t: &Term, mem: &Memory, fuel: usize) -> Verdict {
    let small = run(mem.clone(), t.clone(), fuel, false).outcome;
    let big = eval_big(mem.clone(), t.clone(), fuel);
    match (small, big) {
        (RunOutcome::Success { final_memory, length }, BigStep::Derived { output, tree }) => {
            if length == tree.count && final_memory == output && tree.instances() == tree.count {
                Verdict::Agree(length)
            } else {
                Verdict::Mismatch(format!(
                    "run length {length} with {final_memory}, big-step count {} with {output}",
                    tree.count
                ))
            }
        }
        (RunOutcome::Failed { .. }, BigStep::Stuck) => Verdict::BothFail,
        (RunOutcome::FuelExhausted { .. }, BigStep::OutOfFuel) => Verdict::BothDiverge,
        (s, b) => Verdict::Mismatch(format!("run {s:?} against big-step {b:?}")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse, Location};

    fn count(mem: Memory, s: &str) -> Option<usize> {
        match eval_big(mem, parse(s).unwrap(), 100) {
            BigStep::Derived { tree, .. } => {
                assert!(tree.is_consistent());
                Some(tree.count)
            }
            _ => None,
        }
    }

    #[test]
    fn counts() {
        assert_eq!(count(Memory::new(), "*"), Some(1));
        assert_eq!(count(Memory::new(), "*;*"), Some(3));
        let mut m = Memory::new();
        m.push(Location::lam(), Term::Skip);
        assert_eq!(count(m, "<x>.x"), Some(2));
        assert_eq!(count(Memory::new(), "x"), None);
    }

    #[test]
    fn agreement_examples() {
        let e = Memory::new();
        assert_eq!(check_agreement(&parse("*").unwrap(), &e, 10), Verdict::Agree(1));
        assert_eq!(check_agreement(&parse("[*].<x>.x").unwrap(), &e, 10), Verdict::Agree(3));
        let omega = parse("[<x>.[x].x].<x>.[x].x").unwrap();
        assert_eq!(check_agreement(&omega, &e, 100), Verdict::BothDiverge);
        assert_eq!(check_agreement(&parse("a<x>.*").unwrap(), &e, 10), Verdict::BothFail);
    }

    #[test]
    fn fuel_boundaries_coincide() {
        let t = parse("[*].<x>.x;*").unwrap();
        let n = match check_agreement(&t, &Memory::new(), 100) {
            Verdict::Agree(n) => n,
            v => panic!("{v:?}"),
        };
        assert_eq!(check_agreement(&t, &Memory::new(), n), Verdict::Agree(n));
        assert_eq!(check_agreement(&t, &Memory::new(), n - 1), Verdict::BothDiverge);
    }
}
