use std::collections::{BTreeMap, BTreeSet};

use crate::syntax::{Location, Name, Term};

use super::derivation::Derivation;
use super::types::{CollectionType, CompType, MemoryType};

type Resources = BTreeMap<Name, Vec<CompType>>;

/// Closed normal forms up to `max_depth` with a weak derivation of `target`,
/// smallest first. Argument collections are read off the target, so the
/// search over each candidate is finite.
pub fn inhabit_search(target: &CompType, max_depth: usize) -> Option<Term> {
    inhabit_derivation(target, max_depth).and_then(|d| d.term().cloned())
}

pub fn inhabit_derivation(target: &CompType, max_depth: usize) -> Option<Derivation> {
    let mut locs = BTreeSet::from([Location::lam()]);
    comp_locations(target, &mut locs);
    let locs: Vec<Location> = locs.into_iter().collect();
    let mut candidates = normal_forms(max_depth, 0, &locs);
    candidates.sort_by_cached_key(|t| (t.size(), t.to_string()));
    candidates.into_iter().find_map(|t| {
        search(&t, &target.input, &target.output, &Resources::new())
            .into_iter()
            .find(|(_, r)| r.values().all(Vec::is_empty))
            .map(|(d, _)| d)
    })
}

fn comp_locations(t: &CompType, out: &mut BTreeSet<Location>) {
    for m in [&t.input, &t.output] {
        for a in m.locations() {
            out.insert(a.clone());
            for c in m.vector(a) {
                c.iter().for_each(|e| comp_locations(e, out));
            }
        }
    }
}

fn binder(k: usize) -> Name {
    Name::new(&format!("x{k}"))
}

/// Full normal forms of height at most `h` over `k` bound variables.
pub(crate) fn normal_forms(h: usize, k: usize, locs: &[Location]) -> Vec<Term> {
    if h == 0 {
        return Vec::new();
    }
    let mut out = neutral_forms(h, k, locs);
    for a in locs {
        for body in normal_forms(h - 1, k + 1, locs) {
            out.push(Term::pop(a.clone(), binder(k), body));
        }
    }
    out
}

fn neutral_forms(h: usize, k: usize, locs: &[Location]) -> Vec<Term> {
    if h == 0 {
        return Vec::new();
    }
    let mut out = vec![Term::Skip];
    out.extend((0..k).map(|i| Term::Var(binder(i))));
    let below = normal_forms(h - 1, k, locs);
    for i in 0..k {
        out.extend(below.iter().map(|m| Term::seq(Term::Var(binder(i)), m.clone())));
    }
    let heads = neutral_forms(h - 1, k, locs);
    for a in locs {
        for m in &below {
            out.extend(heads.iter().map(|n| Term::push(m.clone(), a.clone(), n.clone())));
        }
    }
    out
}

fn distinct(ts: &[CompType]) -> Vec<CompType> {
    let mut out: Vec<CompType> = Vec::new();
    for t in ts {
        if !out.contains(t) {
            out.push(t.clone());
        }
    }
    out
}

fn consume(res: &Resources, x: &Name, t: &CompType) -> Resources {
    let mut r = res.clone();
    let v = r.get_mut(x).expect("bound variable");
    let i = v.iter().position(|u| u == t).expect("available type");
    v.remove(i);
    r
}

/// The collections the pushes must supply so that `input` extended by them is `need`.
fn pushed_collections(
    input: &MemoryType,
    pushes: &[(Term, Location)],
    need: &MemoryType,
) -> Option<Vec<CollectionType>> {
    let mut per_loc: BTreeMap<&Location, Vec<usize>> = BTreeMap::new();
    for (i, (_, a)) in pushes.iter().enumerate() {
        per_loc.entry(a).or_default().push(i);
    }
    let locs: BTreeSet<&Location> = input.locations().chain(need.locations()).chain(per_loc.keys().copied()).collect();
    let mut out = vec![CollectionType::empty(); pushes.len()];
    for a in locs {
        let (have, want) = (input.vector(a), need.vector(a));
        let idx = per_loc.get(a).map(Vec::as_slice).unwrap_or_default();
        if want.len() != have.len() + idx.len() || want[..have.len()] != *have {
            return None;
        }
        for (&i, c) in idx.iter().zip(&want[have.len()..]) {
            out[i] = c.clone();
        }
    }
    Some(out)
}

fn search(m: &Term, input: &MemoryType, output: &MemoryType, res: &Resources) -> Vec<(Derivation, Resources)> {
    if let Term::Pop(a, x, body) = m {
        let mut inner = input.clone();
        let Some(iota) = inner.pop(a) else { return Vec::new() };
        let mut r = res.clone();
        let shadowed = r.insert(x.clone(), iota.0);
        return search(body, &inner, output, &r)
            .into_iter()
            .filter(|(_, r)| r[x].is_empty())
            .filter_map(|(d, mut r)| {
                match &shadowed {
                    Some(v) => r.insert(x.clone(), v.clone()),
                    None => r.remove(x),
                };
                Some((Derivation::abs(a.clone(), x.clone(), d).ok()?, r))
            })
            .collect();
    }
    let mut pushes = Vec::new();
    let mut head = m;
    while let Term::Push(n, a, rest) = head {
        pushes.push(((**n).clone(), a.clone()));
        head = rest;
    }
    // (input the head needs, its derivation, remaining resources)
    let mut cores: Vec<(MemoryType, Derivation, Resources)> = Vec::new();
    match head {
        Term::Skip => cores.push((output.clone(), Derivation::unit(output.clone()), res.clone())),
        Term::Var(x) => {
            for t in distinct(res.get(x).map(Vec::as_slice).unwrap_or_default()) {
                if t.output == *output {
                    cores.push((t.input.clone(), Derivation::var(x.clone(), t.clone()), consume(res, x, &t)));
                }
            }
        }
        Term::Seq(l, rest) => {
            let Term::Var(x) = &**l else { return Vec::new() };
            for t in distinct(res.get(x).map(Vec::as_slice).unwrap_or_default()) {
                let r = consume(res, x, &t);
                for (dr, r2) in search(rest, &t.output, output, &r) {
                    if let Ok(d) = Derivation::seq(Derivation::var(x.clone(), t.clone()), dr) {
                        cores.push((t.input.clone(), d, r2));
                    }
                }
            }
        }
        _ => return Vec::new(),
    }
    let mut out = Vec::new();
    for (need, core, r) in cores {
        let Some(colls) = pushed_collections(input, &pushes, &need) else { continue };
        let states = type_args(&pushes, &colls, &r);
        for (items, r) in states {
            let mut d = core.clone();
            let built = pushes.iter().zip(items).rev().try_for_each(|((arg, a), items)| {
                let c = Derivation::collection(arg.clone(), items)?;
                d = Derivation::app_weak(a.clone(), c, d.clone())?;
                Ok::<_, super::TypeError>(())
            });
            if built.is_ok() {
                out.push((d, r));
            }
        }
    }
    out
}

/// Each argument typed once per element of its collection, threading resources.
fn type_args(
    pushes: &[(Term, Location)],
    colls: &[CollectionType],
    res: &Resources,
) -> Vec<(Vec<Vec<Derivation>>, Resources)> {
    let Some(((arg, _), rest)) = pushes.split_first() else {
        return vec![(Vec::new(), res.clone())];
    };
    let elems: Vec<CompType> = colls[0].iter().cloned().collect();
    let mut out = Vec::new();
    for (items, r) in type_items(arg, &elems, res) {
        for (mut tail, r2) in type_args(rest, &colls[1..], &r) {
            tail.insert(0, items.clone());
            out.push((tail, r2));
        }
    }
    out
}

fn type_items(arg: &Term, ts: &[CompType], res: &Resources) -> Vec<(Vec<Derivation>, Resources)> {
    let Some((t, rest)) = ts.split_first() else {
        return vec![(Vec::new(), res.clone())];
    };
    let mut out = Vec::new();
    for (d, r) in search(arg, &t.input, &t.output, res) {
        for (mut tail, r2) in type_items(arg, rest, &r) {
            tail.insert(0, d.clone());
            out.push((tail, r2));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::typesys::{check_derivation, type_spine_nf, System};

    fn ty(s: &str) -> CompType {
        s.parse().unwrap()
    }

    #[test]
    fn candidate_count() {
        assert_eq!(normal_forms(4, 0, &[Location::lam()]).len(), 304);
    }

    #[test]
    fn unit_type_has_only_skip() {
        assert_eq!(inhabit_search(&ty("=>"), 4).unwrap().to_string(), "*");
    }

    #[test]
    fn pushed_unit() {
        let d = inhabit_derivation(&ty("=> [=>]"), 4).unwrap();
        assert!(check_derivation(&d, System::Weak).ok);
        assert!(matches!(d.term().unwrap(), Term::Push(_, _, m) if matches!(**m, Term::Skip)));
    }

    #[test]
    fn no_inhabitant() {
        assert!(inhabit_search(&ty("=> [=>, => [=>]]"), 4).is_none());
    }

    #[test]
    fn found_derivations_check() {
        for s in ["[=>] =>", "[[=>] =>] => [=>]", "a([=>]) => a([=>])", "[=> [=>]] => [=>]"] {
            let target = ty(s);
            let d = inhabit_derivation(&target, 4).unwrap_or_else(|| panic!("{s}"));
            assert!(check_derivation(&d, System::Weak).ok, "{s}");
            assert_eq!(d.comp_type(), Some(&target), "{s}");
        }
    }

    #[test]
    fn spine_typings_are_found() {
        for t in normal_forms(3, 0, &[Location::lam(), Location::new("a")]) {
            let d = type_spine_nf(&t).unwrap();
            let ty = d.comp_type().unwrap();
            let hits = search(&t, &ty.input, &ty.output, &Resources::new());
            assert!(hits.iter().any(|(_, r)| r.values().all(Vec::is_empty)), "{t} : {ty}");
        }
    }
}
