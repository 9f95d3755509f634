#![allow(dead_code)]

use std::collections::BTreeMap;

use fmc::encodings::{encode_store, encode_store_value, parse_store, StoreTerm, StoreValue};
use fmc::machine::{run, RunOutcome};
use fmc::syntax::{random_closed_term, Location, Name, SubstMap, Term};
use fmc::Memory;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Direct interpreter for the store calculus: closures and a cell map.
#[derive(Clone, Debug)]
pub enum Val {
    Closure(Name, StoreTerm, Vec<(Name, Val)>),
}

pub type Cells = BTreeMap<Location, Val>;

fn value(v: &StoreValue, env: &[(Name, Val)]) -> Option<Val> {
    match v {
        StoreValue::Var(x) => env.iter().rev().find(|(y, _)| y == x).map(|(_, v)| v.clone()),
        StoreValue::Lam(x, m) => Some(Val::Closure(x.clone(), (**m).clone(), env.to_vec())),
    }
}

pub fn eval(m: &StoreTerm, env: &[(Name, Val)], cells: &mut Cells, fuel: &mut usize) -> Option<Val> {
    *fuel = fuel.checked_sub(1)?;
    match m {
        StoreTerm::Ret(v) => value(v, env),
        StoreTerm::Bind(m, v) => {
            let arg = eval(m, env, cells, fuel)?;
            let Val::Closure(x, body, mut cenv) = value(v, env)?;
            cenv.push((x, arg));
            eval(&body, &cenv, cells, fuel)
        }
        StoreTerm::Get(a, x, m) => {
            let mut env = env.to_vec();
            env.push((x.clone(), cells.get(a)?.clone()));
            eval(m, &env, cells, fuel)
        }
        StoreTerm::Set(a, v, m) => {
            let new = value(v, env)?;
            cells.insert(a.clone(), new);
            eval(m, env, cells, fuel)
        }
    }
}

pub fn read_back(v: &Val) -> Term {
    let Val::Closure(x, m, env) = v;
    let mut sigma = SubstMap::new();
    for (y, w) in env {
        if y != x {
            sigma.insert(y.clone(), read_back(w));
        }
    }
    sigma.apply(&encode_store_value(&StoreValue::Lam(x.clone(), Box::new(m.clone()))))
}

pub const INITIAL_CELLS: [(&str, &str); 2] = [("a", "\\u. ret u"), ("b", "\\v. set a v (ret v)")];

pub const STORE_PROGRAMS: [&str; 5] = [
    "get a (\\f. set b f (ret f))",
    "set a (\\x. ret x) (get a (\\f. ret f >>= \\y. set b y (ret y)))",
    "ret (\\x. set a x (ret x)) >>= \\g. get b (\\h. ret h >>= g)",
    "set a (\\x. get a (\\s. ret s)) (get a (\\f. ret f >>= f))",
    "get a (\\x. get b (\\y. set a y (set b x (ret x))))",
];

fn initial_value(src: &str) -> StoreValue {
    match parse_store(&format!("ret {src}")).unwrap() {
        StoreTerm::Ret(v) => v,
        _ => unreachable!(),
    }
}

/// Final cells and returned value, by the oracle and by the machine.
pub struct Simulation {
    pub oracle: Memory,
    pub machine: Memory,
}

pub fn simulate(program: &str) -> Simulation {
    let m = parse_store(program).unwrap();
    let mut cells = Cells::new();
    let mut mem = Memory::new();
    for (a, v) in INITIAL_CELLS {
        let v = initial_value(v);
        cells.insert(Location::new(a), value(&v, &[]).unwrap());
        mem.push(Location::new(a), encode_store_value(&v));
    }
    let ret = eval(&m, &[], &mut cells, &mut 10_000).expect("oracle evaluates");
    let mut stacks: Vec<(Location, Vec<Term>)> = cells.iter().map(|(a, v)| (a.clone(), vec![read_back(v)])).collect();
    stacks.push((Location::lam(), vec![read_back(&ret)]));
    let machine = match run(mem, encode_store(&m), 100_000, false).outcome {
        RunOutcome::Success { final_memory, .. } => final_memory,
        other => panic!("machine did not finish: {other:?}"),
    };
    Simulation { oracle: Memory::from_stacks(stacks), machine }
}

pub fn locations() -> Vec<Location> {
    vec![Location::lam(), Location::new("a")]
}

/// Possibly open terms over `x`, `y`, `z` and two locations.
pub fn arb_term() -> impl Strategy<Value = Term> {
    let leaf = prop_oneof![Just(Term::Skip), prop::sample::select(vec!["x", "y", "z"]).prop_map(Term::var),];
    leaf.prop_recursive(5, 40, 2, |inner| {
        let loc = prop::sample::select(vec!["lam", "a"]).prop_map(Location::new);
        let var = prop::sample::select(vec!["x", "y", "z"]);
        prop_oneof![
            (loc.clone(), var, inner.clone()).prop_map(|(a, x, m)| Term::pop(a, x, m)),
            (inner.clone(), loc, inner.clone()).prop_map(|(n, a, m)| Term::push(n, a, m)),
            (inner.clone(), inner).prop_map(|(n, m)| Term::seq(n, m)),
        ]
    })
}

pub fn arb_closed_term(max_size: usize) -> impl Strategy<Value = Term> {
    any::<u64>().prop_map(move |seed| random_closed_term(&mut ChaCha8Rng::seed_from_u64(seed), max_size, &locations()))
}
