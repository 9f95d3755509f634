mod common;

use fmc::encodings::{encode_cbn, encode_store, parse_store, LambdaTerm};
use fmc::rewrite::{apply_redex, first_redex, Rule};
use fmc::syntax::{substitute, Location, Name, Term};
use fmc::typesys::{check_derivation, CollectionType, CompType, Derivation, MemoryType, System};
use proptest::prelude::*;

#[test]
fn store_programs_match_oracle() {
    for p in common::STORE_PROGRAMS {
        let s = common::simulate(p);
        assert_eq!(s.machine, s.oracle, "{p}");
    }
}

fn lambda_term() -> impl Strategy<Value = LambdaTerm> {
    let leaf = prop::sample::select(vec!["x", "y", "z"]).prop_map(LambdaTerm::var);
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (prop::sample::select(vec!["x", "y"]), inner.clone()).prop_map(|(x, b)| LambdaTerm::lam(x, b)),
            (inner.clone(), inner).prop_map(|(m, n)| LambdaTerm::app(m, n)),
        ]
    })
}

proptest! {
    #[test]
    fn cbn_preserves_beta(body in lambda_term(), arg in lambda_term()) {
        let redex = LambdaTerm::app(LambdaTerm::lam("x", body.clone()), arg.clone());
        let t = encode_cbn(&redex);
        let r = first_redex(&t, true).unwrap();
        prop_assert_eq!(r.rule, Rule::Beta);
        let (after, _) = apply_redex(&t, &r).unwrap();
        prop_assert_eq!(after, substitute(&encode_cbn(&arg), &Name::new("x"), &encode_cbn(&body)));
    }
}

fn ty(s: &str) -> CompType {
    s.parse().unwrap()
}

fn var(x: &str, t: &str) -> Derivation {
    Derivation::var(Name::new(x), ty(t))
}

fn coll(x: &str, items: Vec<Derivation>) -> Derivation {
    let term = items.first().and_then(|d| d.term().cloned()).unwrap_or(Term::var(x));
    Derivation::collection(term, items).unwrap()
}

fn mem(s: &str) -> MemoryType {
    s.parse().unwrap()
}

/// `[x].*` returning a variable of type `t`, starting from `m`.
fn ret_var(x: &str, t: &str, m: &str) -> Derivation {
    let top = mem(m).with_pushed(Location::lam(), CollectionType::single(ty(t)));
    Derivation::app_weak(Location::lam(), coll(x, vec![var(x, t)]), Derivation::unit(top)).unwrap()
}

fn assert_shape(d: &Derivation, program: &str, expected: &str) {
    let r = check_derivation(d, System::Weak);
    assert!(r.ok, "{program}: {:?}", r.failure);
    assert!(d.term().unwrap().syntactic_eq(&encode_store(&parse_store(program).unwrap())), "{program}");
    assert_eq!(d.comp_type(), Some(&ty(expected)), "{program}");
}

#[test]
fn get_sums_the_cell_collection() {
    let a = Location::new("a");
    let body = ret_var("x", "=>", "a([=>])");
    let pushed = Derivation::app_weak(a.clone(), coll("x", vec![var("x", "=>")]), body).unwrap();
    let d = Derivation::abs(a, Name::new("x"), pushed).unwrap();
    assert_shape(&d, "get a (\\x. ret x)", "a([=>, =>]) => a([=>]) [=>]");
}

#[test]
fn set_discards_the_old_cell() {
    let a = Location::new("a");
    let v = Derivation::abs(Location::lam(), Name::new("y"), ret_var("y", "=>", "")).unwrap();
    let v_ty = v.comp_type().unwrap().to_string();
    let m = Derivation::unit(mem(&format!("a([{v_ty}])")));
    let pushed =
        Derivation::app_weak(a.clone(), Derivation::collection(v.term().unwrap().clone(), vec![v]).unwrap(), m)
            .unwrap();
    let d = Derivation::abs(a, Name::new("_"), pushed).unwrap();
    assert_eq!(d.comp_type().unwrap().input, mem("a([])"));
    assert!(check_derivation(&d, System::Weak).ok);
    assert_eq!(d.term().unwrap().to_string(), "a<_>.[<y>.[y].*]a.*");
    assert_eq!(d.comp_type(), Some(&ty(&format!("a([]) => a([{v_ty}])"))));
}

#[test]
fn bind_composes() {
    let left = ret_var("x", "=>", "");
    let right = Derivation::abs(Location::lam(), Name::new("y"), ret_var("y", "=>", "")).unwrap();
    let d = Derivation::seq(left, right).unwrap();
    assert_shape(&d, "ret x >>= \\y. ret y", "=> [=>]");
    assert_eq!(d.context.get(&Name::new("x")).len(), 1);
}
