mod common;

use fmc::machine::{dimension_memory, dimension_subst, eval_big, BigStep};
use fmc::rewrite::{
    apply_redex, is_normal, is_spine_normal, non_beta_measure, normalize_full, redexes, spine_normalize, Rule,
};
use fmc::syntax::{enumerate_terms, Name, Term};
use proptest::prelude::*;

use common::{arb_closed_term, arb_term, locations};

#[test]
fn recognizers_match_redex_search() {
    let vars = [Name::new("x")];
    for t in enumerate_terms(6, &locations(), &vars) {
        assert_eq!(is_spine_normal(&t), redexes(&t, true).is_empty(), "`{t}`");
        assert_eq!(is_normal(&t), redexes(&t, false).is_empty(), "`{t}`");
    }
}

fn outcome(b: BigStep) -> Option<fmc::Memory> {
    match b {
        BigStep::Derived { output, .. } => Some(output),
        _ => None,
    }
}

proptest! {
    #[test]
    fn non_beta_steps_decrease_the_measure(t in arb_term()) {
        let before = non_beta_measure(&t);
        for r in redexes(&t, false).into_iter().filter(|r| r.rule != Rule::Beta) {
            let (after, _) = apply_redex(&t, &r).unwrap();
            let m = non_beta_measure(&after);
            prop_assert!(m < before, "{} at {}: {:?} to {:?}", r.rule, r.at, before, m);
            if r.rule == Rule::Passage {
                prop_assert_eq!(m.0, before.0);
            }
        }
    }

    #[test]
    fn spine_steps_preserve_evaluation(t in arb_term(), d in 0usize..3) {
        let locs = locations();
        let mem = dimension_memory(d, &locs);
        for r in redexes(&t, true) {
            let (after, _) = apply_redex(&t, &r).unwrap();
            let mut vars = t.free_vars();
            vars.extend(after.free_vars());
            let sigma = dimension_subst(d, &locs, &vars);
            let a = outcome(eval_big(mem.clone(), sigma.apply(&t), 5_000));
            let b = outcome(eval_big(mem.clone(), sigma.apply(&after), 5_000));
            prop_assert_eq!(a, b, "{} at {}", r.rule, r.at);
        }
    }

    #[test]
    fn spine_normalization_is_sound(t in arb_closed_term(14)) {
        if let Some(tr) = spine_normalize(&t, 2_000) {
            prop_assert!(tr.validate().is_ok());
            prop_assert!(is_spine_normal(tr.result()));
            prop_assert!(tr.steps.iter().all(|s| s.redex.spine && s.redex.at.is_spine()));
        }
    }

    #[test]
    fn full_normalization_is_sound(t in arb_closed_term(12)) {
        if let Some(tr) = normalize_full(&t, 2_000) {
            prop_assert!(tr.validate().is_ok());
            prop_assert!(is_normal(tr.result()));
        }
    }

    #[test]
    fn beta_payload_points_at_copies(t in arb_term()) {
        for r in redexes(&t, false).into_iter().filter(|r| r.rule == Rule::Beta) {
            let (after, payload) = apply_redex(&t, &r).unwrap();
            let p = payload.expect("Beta records its payload");
            let inner: &Term = after.subterm(&r.at).unwrap();
            for occ in &p.occurrences {
                prop_assert_eq!(inner.subterm(occ), Some(&p.argument));
            }
        }
    }
}
