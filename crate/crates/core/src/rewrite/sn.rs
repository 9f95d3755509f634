use std::collections::HashMap;

use crate::syntax::{Nameless, Term};

use super::{apply_redex, redexes};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SnVerdict {
    /// Every reduction path terminates. `max_path` is the longest path and
    /// `max_costly` the most Beta and Next steps on any path.
    Sn { max_path: usize, max_costly: usize },
    /// A term that reduces back to itself (up to alpha).
    NotSn { cycle: Term },
    /// Budget exhausted before a verdict.
    Unknown,
}

enum Mark {
    OnPath,
    Done { path: usize, costly: usize },
}

struct Frame {
    key: Nameless,
    succs: Vec<(Term, bool)>,
    next: usize,
    pending_costly: bool,
    path: usize,
    costly: usize,
}

fn successors(t: &Term) -> Vec<(Term, bool)> {
    redexes(t, false)
        .into_iter()
        .map(|r| {
            let (s, _) = apply_redex(t, &r).expect("discovered redexes apply");
            (s, r.rule.is_costly())
        })
        .collect()
}

/// Explores the whole reduction graph of `t`, memoized on alpha-classes.
/// `fuel` bounds the number of distinct terms visited and `size_cap` their size.
pub fn bounded_sn_check(t: &Term, fuel: usize, size_cap: usize) -> SnVerdict {
    if t.size() > size_cap {
        return SnVerdict::Unknown;
    }
    let mut marks: HashMap<Nameless, Mark> = HashMap::new();
    let root = Frame { key: t.alpha_key(), succs: successors(t), next: 0, pending_costly: false, path: 0, costly: 0 };
    marks.insert(root.key.clone(), Mark::OnPath);
    let mut stack = vec![root];
    let mut visited = 1;
    loop {
        let top = stack.last_mut().expect("non-empty stack");
        if top.next < top.succs.len() {
            let (s, costly) = top.succs[top.next].clone();
            top.next += 1;
            let key = s.alpha_key();
            match marks.get(&key) {
                Some(Mark::OnPath) => return SnVerdict::NotSn { cycle: s },
                Some(Mark::Done { path, costly: c }) => {
                    top.path = top.path.max(path + 1);
                    top.costly = top.costly.max(c + usize::from(costly));
                }
                None => {
                    if s.size() > size_cap || visited >= fuel {
                        return SnVerdict::Unknown;
                    }
                    visited += 1;
                    top.pending_costly = costly;
                    marks.insert(key.clone(), Mark::OnPath);
                    let succs = successors(&s);
                    stack.push(Frame { key, succs, next: 0, pending_costly: false, path: 0, costly: 0 });
                }
            }
        } else {
            let done = stack.pop().expect("frame");
            marks.insert(done.key, Mark::Done { path: done.path, costly: done.costly });
            match stack.last_mut() {
                Some(parent) => {
                    parent.path = parent.path.max(done.path + 1);
                    parent.costly = parent.costly.max(done.costly + usize::from(parent.pending_costly));
                }
                None => return SnVerdict::Sn { max_path: done.path, max_costly: done.costly },
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse;

    fn check(s: &str) -> SnVerdict {
        bounded_sn_check(&parse(s).unwrap(), 10_000, 200)
    }

    #[test]
    fn verdicts() {
        assert_eq!(check("*"), SnVerdict::Sn { max_path: 0, max_costly: 0 });
        assert_eq!(check("[*].<x>.*"), SnVerdict::Sn { max_path: 1, max_costly: 1 });
        assert!(matches!(check("[<x>.[x].x].<x>.[x].x"), SnVerdict::NotSn { .. }));
    }

    #[test]
    fn longest_path_counts_every_route() {
        // Reducing the argument first costs one more Beta than discarding it.
        assert_eq!(check("[[*].<y>.y].<x>.*"), SnVerdict::Sn { max_path: 2, max_costly: 2 });
    }

    #[test]
    fn growth_is_unknown() {
        let grow = "[<x>.[x].[x].x].<x>.[x].[x].x";
        assert_eq!(bounded_sn_check(&parse(grow).unwrap(), 50, 40), SnVerdict::Unknown);
    }
}
