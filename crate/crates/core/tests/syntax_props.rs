mod common;

use std::collections::BTreeSet;

use fmc::syntax::{apply_subst_map, enumerate_terms, parse, substitute, Location, Name, SubstMap, Term};
use proptest::prelude::*;

use common::arb_term;

/// Nameless terms with named free variables, used as an independent oracle.
#[derive(Clone, Debug, PartialEq, Eq)]
enum Db {
    Idx(usize),
    Free(String),
    Pop(String, Box<Db>),
    Push(Box<Db>, String, Box<Db>),
    Skip,
    Seq(Box<Db>, Box<Db>),
}

fn to_db(t: &Term, env: &mut Vec<String>) -> Db {
    match t {
        Term::Var(x) => match env.iter().rev().position(|b| b == x.as_str()) {
            Some(i) => Db::Idx(i),
            None => Db::Free(x.to_string()),
        },
        Term::Skip => Db::Skip,
        Term::Pop(a, x, m) => {
            env.push(x.to_string());
            let b = to_db(m, env);
            env.pop();
            Db::Pop(a.to_string(), Box::new(b))
        }
        Term::Push(n, a, m) => Db::Push(Box::new(to_db(n, env)), a.to_string(), Box::new(to_db(m, env))),
        Term::Seq(n, m) => Db::Seq(Box::new(to_db(n, env)), Box::new(to_db(m, env))),
    }
}

fn db(t: &Term) -> Db {
    to_db(t, &mut Vec::new())
}

fn shift(d: &Db, by: usize, cutoff: usize) -> Db {
    match d {
        Db::Idx(i) if *i >= cutoff => Db::Idx(i + by),
        Db::Idx(_) | Db::Free(_) | Db::Skip => d.clone(),
        Db::Pop(a, b) => Db::Pop(a.clone(), Box::new(shift(b, by, cutoff + 1))),
        Db::Push(n, a, m) => Db::Push(Box::new(shift(n, by, cutoff)), a.clone(), Box::new(shift(m, by, cutoff))),
        Db::Seq(n, m) => Db::Seq(Box::new(shift(n, by, cutoff)), Box::new(shift(m, by, cutoff))),
    }
}

fn db_subst(m: &Db, x: &str, n: &Db, depth: usize) -> Db {
    match m {
        Db::Free(y) if y == x => shift(n, depth, 0),
        Db::Idx(_) | Db::Free(_) | Db::Skip => m.clone(),
        Db::Pop(a, b) => Db::Pop(a.clone(), Box::new(db_subst(b, x, n, depth + 1))),
        Db::Push(p, a, q) => {
            Db::Push(Box::new(db_subst(p, x, n, depth)), a.clone(), Box::new(db_subst(q, x, n, depth)))
        }
        Db::Seq(p, q) => Db::Seq(Box::new(db_subst(p, x, n, depth)), Box::new(db_subst(q, x, n, depth))),
    }
}

fn db_free(d: &Db, out: &mut BTreeSet<String>) {
    match d {
        Db::Free(x) => {
            out.insert(x.clone());
        }
        Db::Idx(_) | Db::Skip => {}
        Db::Pop(_, b) => db_free(b, out),
        Db::Push(n, _, m) | Db::Seq(n, m) => {
            db_free(n, out);
            db_free(m, out);
        }
    }
}

fn count_free(t: &Term, x: &Name) -> usize {
    match t {
        Term::Var(y) => usize::from(x == y),
        Term::Skip => 0,
        Term::Pop(_, y, m) => {
            if x == y {
                0
            } else {
                count_free(m, x)
            }
        }
        Term::Push(n, _, m) | Term::Seq(n, m) => count_free(n, x) + count_free(m, x),
    }
}

/// Rename every binder to a fresh `b{k}`, consistently.
fn rename_all(t: &Term, env: &mut Vec<(Name, Name)>, k: &mut usize) -> Term {
    match t {
        Term::Var(x) => match env.iter().rev().find(|(o, _)| o == x) {
            Some((_, n)) => Term::Var(n.clone()),
            None => t.clone(),
        },
        Term::Skip => Term::Skip,
        Term::Pop(a, x, m) => {
            *k += 1;
            let nx = Name::from(format!("b{k}"));
            env.push((x.clone(), nx.clone()));
            let b = rename_all(m, env, k);
            env.pop();
            Term::pop(a.clone(), nx, b)
        }
        Term::Push(n, a, m) => Term::push(rename_all(n, env, k), a.clone(), rename_all(m, env, k)),
        Term::Seq(n, m) => Term::seq(rename_all(n, env, k), rename_all(m, env, k)),
    }
}

proptest! {
    #[test]
    fn pretty_then_parse_is_identity(t in arb_term()) {
        let back = parse(&t.to_string()).unwrap();
        prop_assert!(back.syntactic_eq(&t), "{} reparsed as {}", t, back);
    }

    #[test]
    fn substitution_matches_the_nameless_oracle(n in arb_term(), m in arb_term(), x in prop::sample::select(vec!["x", "y"])) {
        let x = Name::new(x);
        let got = substitute(&n, &x, &m);
        prop_assert_eq!(db(&got), db_subst(&db(&m), x.as_str(), &db(&n), 0));
    }

    #[test]
    fn free_vars_match_the_binder_walk(t in arb_term()) {
        let mut want = BTreeSet::new();
        db_free(&db(&t), &mut want);
        let got: BTreeSet<String> = t.free_vars().iter().map(|n| n.to_string()).collect();
        prop_assert_eq!(got, want);
    }

    #[test]
    fn substitution_free_vars_and_size(n in arb_term(), m in arb_term()) {
        let x = Name::new("x");
        let r = substitute(&n, &x, &m);
        let mut bound: BTreeSet<Name> = m.free_vars();
        bound.remove(&x);
        let fv_n = n.free_vars();
        let fv_r = r.free_vars();
        prop_assert!(fv_r.iter().all(|v| bound.contains(v) || fv_n.contains(v)));
        if m.has_free(&x) {
            let union: BTreeSet<Name> = bound.union(&fv_n).cloned().collect();
            prop_assert_eq!(fv_r, union);
        }
        let k = count_free(&m, &x);
        prop_assert_eq!(r.size(), m.size() + k * (n.size() - 1));
    }

    #[test]
    fn alpha_is_an_equivalence_and_a_congruence(s in arb_term(), t in arb_term()) {
        let s2 = rename_all(&s, &mut Vec::new(), &mut 0);
        prop_assert!(s.alpha_eq(&s));
        prop_assert!(s.alpha_eq(&s2) && s2.alpha_eq(&s));
        prop_assert_eq!(s.alpha_key(), s2.alpha_key());
        prop_assert_eq!(s.alpha_eq(&t), t.alpha_eq(&s));
        prop_assert_eq!(s.alpha_eq(&t), db(&s) == db(&t));
        let t2 = rename_all(&t, &mut Vec::new(), &mut 100);
        let a = Location::new("a");
        prop_assert!(Term::seq(s.clone(), t.clone()).alpha_eq(&Term::seq(s2.clone(), t2.clone())));
        prop_assert!(Term::push(s.clone(), a.clone(), t.clone()).alpha_eq(&Term::push(s2.clone(), a.clone(), t2.clone())));
        prop_assert!(Term::pop(a, "x", s.clone()).alpha_eq(&Term::pop(Location::new("a"), "x", s2)));
    }

    #[test]
    fn simultaneous_maps_match_sequential_with_fresh_names(n1 in arb_term(), n2 in arb_term(), m in arb_term()) {
        let sigma: SubstMap = [(Name::new("x"), n1.clone()), (Name::new("y"), n2.clone())].into_iter().collect();
        let got = apply_subst_map(&sigma, &m);
        let (f1, f2) = (Name::new("fresh_a"), Name::new("fresh_b"));
        let step = substitute(&Term::Var(f1.clone()), &Name::new("x"), &m);
        let step = substitute(&Term::Var(f2.clone()), &Name::new("y"), &step);
        let step = substitute(&n1, &f1, &step);
        let want = substitute(&n2, &f2, &step);
        prop_assert!(got.alpha_eq(&want), "{} vs {}", got, want);
    }
}

#[test]
fn spec_examples() {
    let cap = substitute(&parse("y").unwrap(), &Name::new("x"), &parse("<y>.x").unwrap());
    assert_eq!(db(&cap), db(&parse("<q>.y").unwrap()));
    let sigma: SubstMap =
        [(Name::new("x"), parse("y").unwrap()), (Name::new("y"), parse("x").unwrap())].into_iter().collect();
    assert!(apply_subst_map(&sigma, &parse("x;y").unwrap()).syntactic_eq(&parse("y;x").unwrap()));
    assert_eq!(parse("[y]a.a<y>.y").unwrap().free_vars().len(), 1);
}

#[test]
fn every_small_term_round_trips() {
    let locs = [Location::lam(), Location::new("a")];
    for t in enumerate_terms(6, &locs, &[Name::new("x")]) {
        assert!(parse(&t.to_string()).unwrap().syntactic_eq(&t), "{t}");
    }
}
