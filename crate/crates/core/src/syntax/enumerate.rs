use std::collections::HashMap;
use std::sync::Arc;

use rand::Rng;

use super::{Location, Name, Term};

const BINDER_STEMS: [&str; 6] = ["x", "y", "z", "u", "v", "w"];

struct Enumerator<'a> {
    locations: &'a [Location],
    free: &'a [Name],
    binders: Vec<Name>,
    memo: HashMap<(usize, usize), Vec<Term>>,
}

impl Enumerator<'_> {
    fn binder(&mut self, depth: usize) -> Name {
        while self.binders.len() <= depth {
            let cand = (0..)
                .map(|i| {
                    let stem = BINDER_STEMS[i % BINDER_STEMS.len()];
                    match i / BINDER_STEMS.len() {
                        0 => Name::new(stem),
                        k => Name::from(format!("{stem}{k}")),
                    }
                })
                .find(|n| !self.free.contains(n) && !self.binders.contains(n))
                .expect("fresh binder");
            self.binders.push(cand);
        }
        self.binders[depth].clone()
    }

    /// Terms of exactly `size` with binders `0..depth` in scope.
    fn exact(&mut self, size: usize, depth: usize) -> Vec<Term> {
        if let Some(v) = self.memo.get(&(size, depth)) {
            return v.clone();
        }
        let mut out = Vec::new();
        if size == 1 {
            out.push(Term::Skip);
            for d in 0..depth {
                out.push(Term::Var(self.binder(d)));
            }
            out.extend(self.free.iter().cloned().map(Term::Var));
        } else {
            let x = self.binder(depth);
            for body in self.exact(size - 1, depth + 1) {
                for a in self.locations {
                    out.push(Term::Pop(a.clone(), x.clone(), Arc::new(body.clone())));
                }
            }
            for i in 1..size - 1 {
                let j = size - 1 - i;
                let lefts = self.exact(i, depth);
                let rights = self.exact(j, depth);
                for l in &lefts {
                    for r in &rights {
                        for a in self.locations {
                            out.push(Term::push(l.clone(), a.clone(), r.clone()));
                        }
                        out.push(Term::seq(l.clone(), r.clone()));
                    }
                }
            }
        }
        self.memo.insert((size, depth), out.clone());
        out
    }
}

/// Every alpha-distinct term of size at most `max_size` over the given
/// locations and free variables, smallest first.
pub fn enumerate_terms(max_size: usize, locations: &[Location], vars: &[Name]) -> impl Iterator<Item = Term> {
    let mut e = Enumerator { locations, free: vars, binders: Vec::new(), memo: HashMap::new() };
    let all: Vec<Term> = (1..=max_size).flat_map(|n| e.exact(n, 0)).collect();
    all.into_iter()
}

/// A random closed term of size at most `max_size`.
pub fn random_closed_term<R: Rng>(rng: &mut R, max_size: usize, locations: &[Location]) -> Term {
    let size = rng.gen_range(1..=max_size.max(1));
    let mut bound = Vec::new();
    gen(rng, size, locations, &mut bound)
}

fn gen<R: Rng>(rng: &mut R, size: usize, locations: &[Location], bound: &mut Vec<Name>) -> Term {
    let loc = |rng: &mut R| locations[rng.gen_range(0..locations.len())].clone();
    match size {
        0 | 1 => {
            if !bound.is_empty() && rng.gen_bool(0.6) {
                Term::Var(bound[rng.gen_range(0..bound.len())].clone())
            } else {
                Term::Skip
            }
        }
        2 => pop(rng, 1, locations, bound),
        _ => match rng.gen_range(0..3) {
            0 => pop(rng, size - 1, locations, bound),
            k => {
                let i = rng.gen_range(1..size - 1);
                let left = gen(rng, i, locations, bound);
                let right = gen(rng, size - 1 - i, locations, bound);
                if k == 1 {
                    Term::push(left, loc(rng), right)
                } else {
                    Term::seq(left, right)
                }
            }
        },
    }
}

fn pop<R: Rng>(rng: &mut R, body: usize, locations: &[Location], bound: &mut Vec<Name>) -> Term {
    let a = locations[rng.gen_range(0..locations.len())].clone();
    let x = Name::from(format!("v{}", bound.len()));
    bound.push(x.clone());
    let m = gen(rng, body, locations, bound);
    bound.pop();
    Term::Pop(a, x, Arc::new(m))
}
