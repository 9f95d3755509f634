mod common;

use fmc::perpetual::{check_perp_tree, perp_eval, replay, PerpStatus};
use fmc::rewrite::{bounded_sn_check, is_normal, normalize_full, SnVerdict};
use fmc::syntax::{enumerate_terms, parse};
use proptest::prelude::*;

use common::{arb_closed_term, locations};

#[test]
fn termination_matches_strong_normalization() {
    let (mut sn, mut not_sn) = (0, 0);
    for t in enumerate_terms(6, &locations(), &[]) {
        let done = perp_eval(&t, 5_000).status == PerpStatus::Done;
        match bounded_sn_check(&t, 5_000, 60) {
            SnVerdict::Sn { .. } => {
                sn += 1;
                assert!(done, "`{t}` is SN but evaluation ran out")
            }
            SnVerdict::NotSn { .. } => {
                not_sn += 1;
                assert!(!done, "`{t}` is not SN but evaluation finished")
            }
            SnVerdict::Unknown => {}
        }
    }
    assert!(sn > 0, "{sn} SN, {not_sn} not SN");
}

#[test]
fn divergent_terms_never_finish() {
    for src in ["[<x>.[x].x].<x>.[x].x", "<y>.([<x>.[x].x].<x>.[x].x)", "[[<x>.[x].x].<x>.[x].x].<z>.*"] {
        let t = parse(src).unwrap();
        assert!(matches!(bounded_sn_check(&t, 5_000, 60), SnVerdict::NotSn { .. }), "{src}");
        assert_eq!(perp_eval(&t, 5_000).status, PerpStatus::FuelExhausted, "{src}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn finished_trees_replay(t in arb_closed_term(14)) {
        let r = perp_eval(&t, 2_000);
        if let (PerpStatus::Done, Some(p)) = (r.status, r.tree) {
            prop_assert!(check_perp_tree(&p));
            prop_assert_eq!(&p.subject, &t);
            let tr = replay(&p).unwrap();
            prop_assert!(tr.validate().is_ok());
            prop_assert!(tr.result().alpha_eq(&p.result));
            let nf = normalize_full(&t, 100_000).expect("a strongly normalizing term normalizes");
            prop_assert!(is_normal(nf.result()));
            prop_assert!(nf.result().alpha_eq(&p.result));
        }
    }

    #[test]
    fn evaluation_is_deterministic(t in arb_closed_term(14)) {
        prop_assert_eq!(perp_eval(&t, 1_000), perp_eval(&t, 1_000));
    }

    #[test]
    fn termination_matches_oracle_on_random_terms(t in arb_closed_term(12)) {
        let done = perp_eval(&t, 5_000).status == PerpStatus::Done;
        match bounded_sn_check(&t, 5_000, 60) {
            SnVerdict::Sn { .. } => prop_assert!(done),
            SnVerdict::NotSn { .. } => prop_assert!(!done),
            SnVerdict::Unknown => {}
        }
    }
}
