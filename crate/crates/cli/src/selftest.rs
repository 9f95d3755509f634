use clap::ValueEnum;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use fmc::machine::{check_agreement, Verdict};
use fmc::perpetual::{check_perp_tree, perp_eval, replay, PerpStatus};
use fmc::rewrite::{bounded_sn_check, SnVerdict};
use fmc::syntax::{enumerate_terms, random_closed_term};
use fmc::typesys::{check_derivation, infer_strong, infer_weak, System};
use fmc::{Location, Term};

use crate::Report;

const ENUMERATED_SIZE: usize = 6;
const RANDOM_TERMS: usize = 200;
const RANDOM_SIZE: usize = 15;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    All,
    /// Machine runs against big-step evaluation
    Agreement,
    /// Perpetual evaluation against the bounded strong normalization check
    Perpetual,
    /// Weak inference produces checkable derivations
    Weak,
    /// Strong inference produces checkable derivations
    Strong,
}

impl Suite {
    fn name(self) -> &'static str {
        match self {
            Suite::All => "all",
            Suite::Agreement => "agreement",
            Suite::Perpetual => "perpetual",
            Suite::Weak => "weak",
            Suite::Strong => "strong",
        }
    }

    /// `Ok(true)` when the check ran, `Ok(false)` when it was inconclusive.
    fn check(self, t: &Term, fuel: usize) -> Result<bool, String> {
        match self {
            Suite::All => unreachable!(),
            Suite::Agreement => match check_agreement(t, &Default::default(), fuel) {
                Verdict::Mismatch(m) => Err(format!("{m:?}")),
                Verdict::BothDiverge => Ok(false),
                Verdict::Agree(_) | Verdict::BothFail => Ok(true),
            },
            Suite::Perpetual => {
                let r = perp_eval(t, fuel);
                let done = r.status == PerpStatus::Done;
                match bounded_sn_check(t, fuel, 60) {
                    SnVerdict::Sn { .. } if !done => return Err("SN but evaluation did not finish".into()),
                    SnVerdict::NotSn { .. } if done => return Err("not SN but evaluation finished".into()),
                    _ => {}
                }
                let Some(p) = r.tree else { return Ok(false) };
                if !check_perp_tree(&p) {
                    return Err("evaluation tree rejected".into());
                }
                let tr = replay(&p).map_err(|e| e.to_string())?;
                if !tr.result().alpha_eq(&p.result) {
                    return Err(format!("replay ends in {}", tr.result()));
                }
                Ok(true)
            }
            Suite::Weak | Suite::Strong => {
                let (infer, system) = match self {
                    Suite::Weak => (infer_weak as fn(&Term, usize) -> _, System::Weak),
                    _ => (infer_strong as fn(&Term, usize) -> _, System::Strong),
                };
                let Ok(d) = infer(t, fuel) else { return Ok(false) };
                let r = check_derivation(&d, system);
                match r.failure {
                    Some(f) => Err(format!("derivation rejected at {:?}: {}", f.path, f.reason)),
                    None if d.term() != Some(t) => Err("derivation types another term".into()),
                    None => Ok(true),
                }
            }
        }
    }
}

fn terms(seed: u64) -> Vec<Term> {
    let locs = [Location::lam(), Location::new("a")];
    let mut out: Vec<Term> = enumerate_terms(ENUMERATED_SIZE, &locs, &[]).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    out.extend((0..RANDOM_TERMS).map(|_| random_closed_term(&mut rng, RANDOM_SIZE, &locs)));
    out
}

pub fn run_suites(suite: Suite, seed: u64, fuel: usize) -> Report {
    let suites = match suite {
        Suite::All => vec![Suite::Agreement, Suite::Perpetual, Suite::Weak, Suite::Strong],
        s => vec![s],
    };
    let terms = terms(seed);
    let mut lines = Vec::new();
    let mut results = Vec::new();
    let mut passed = true;
    for s in suites {
        let (mut checked, mut inconclusive) = (0, 0);
        let mut failures: Vec<(String, String)> = Vec::new();
        for t in &terms {
            match s.check(t, fuel) {
                Ok(true) => checked += 1,
                Ok(false) => inconclusive += 1,
                Err(e) => failures.push((t.to_string(), e)),
            }
        }
        failures.sort();
        failures.dedup();
        let ok = failures.is_empty();
        passed &= ok;
        lines.push(format!(
            "{} {}: {checked} checked, {inconclusive} inconclusive, {} failed",
            if ok { "PASS" } else { "FAIL" },
            s.name(),
            failures.len()
        ));
        lines.extend(failures.iter().map(|(t, e)| format!("  {t}: {e}")));
        let failures: Vec<Value> = failures.iter().map(|(t, e)| json!({"term": t, "reason": e})).collect();
        results.push(json!({
            "suite": s.name(),
            "passed": ok,
            "checked": checked,
            "inconclusive": inconclusive,
            "failures": failures,
        }));
    }
    let json = json!({
        "status": if passed { "pass" } else { "fail" },
        "seed": seed,
        "terms": terms.len(),
        "suites": results,
    });
    let text = lines.join("\n");
    if passed {
        Report::ok(text, json)
    } else {
        Report::negative(text, json)
    }
}
