//! Acceptance suite: one line per criterion, non-zero exit if any fails.
//! `FMC_SEED` overrides the seed of the random part of the term suite.

mod common;

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use fmc::encodings::DerivedForm;
use fmc::machine::{check_agreement, dimension_memory, dimension_subst, run, spine_dimension, RunOutcome, Verdict};
use fmc::perpetual::{check_perp_tree, perp_eval, replay, PerpStatus};
use fmc::rewrite::{
    apply_redex, bounded_sn_check, is_normal, non_beta_measure, redexes, spine_normalize, Rule, SnVerdict,
};
use fmc::syntax::{enumerate_terms, parse, random_closed_term, Location, Name, Term};
use fmc::typesys::{
    check_derivation, expand_spine_step, infer_state_ladder, infer_strong_pair, infer_weak, infer_weak_state,
    inhabit_search, output_dims, reduce_state, CompType, System,
};
use fmc::{MachineState, Memory};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

const FUEL: usize = 10_000;
const OMEGA: &str = "[<x>.[x].x].<x>.[x].x";

struct Outcome {
    pass: bool,
    detail: String,
}

/// Runs `f` over the items in parallel and keeps the first few failure messages.
fn all<T: Sync>(items: &[T], f: impl Fn(&T) -> Result<usize, String> + Sync + Send) -> Outcome {
    let results: Vec<Result<usize, String>> = items.par_iter().map(f).collect();
    let checked: usize = results.iter().filter_map(|r| r.as_ref().ok()).sum();
    let failures: Vec<&String> = results.iter().filter_map(|r| r.as_ref().err()).collect();
    match failures.first() {
        None => Outcome { pass: true, detail: format!("{checked} checks") },
        Some(first) => Outcome { pass: false, detail: format!("{} failures, first: {first}", failures.len()) },
    }
}

fn suite_locations() -> Vec<Location> {
    vec![Location::lam(), Location::new("a")]
}

fn suite_1() -> Vec<Term> {
    let seed = std::env::var("FMC_SEED").ok().and_then(|s| s.parse().ok()).unwrap_or(0x5eed);
    let locs = suite_locations();
    let mut terms: Vec<Term> = enumerate_terms(7, &locs, &[]).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    terms.extend((0..1000).map(|_| random_closed_term(&mut rng, 15, &locs)));
    terms
}

fn criterion_1(suite: &[Term]) -> Outcome {
    all(suite, |t| match check_agreement(t, &Memory::new(), FUEL) {
        Verdict::Mismatch(why) => Err(format!("`{t}`: {why}")),
        _ => Ok(1),
    })
}

fn run_length(t: &Term) -> Option<(usize, Memory)> {
    match run(Memory::new(), t.clone(), FUEL, false).outcome {
        RunOutcome::Success { final_memory, length } => Some((length, final_memory)),
        _ => None,
    }
}

fn criterion_2(terminating: &[(Term, usize, Memory)]) -> Outcome {
    all(terminating, |(t, n, out)| {
        let d = infer_weak_state(&Memory::new(), t, FUEL).map_err(|e| format!("`{t}`: {e}"))?;
        let c = check_derivation(&d, System::State);
        if !c.ok {
            return Err(format!("`{t}`: derivation rejected: {:?}", c.failure));
        }
        let ty = d.comp_type().expect("state type");
        if !ty.input.is_empty() || output_dims(&d) != Some(out.dims()) {
            return Err(format!("`{t}`: type {ty} against final memory {out}"));
        }
        if d.weight() != *n {
            return Err(format!("`{t}`: weight {} against run length {n}", d.weight()));
        }
        Ok(1)
    })
}

fn criterion_3(terminating: &[(Term, usize, Memory)]) -> Outcome {
    all(terminating, |(t, _, _)| {
        let ladder = infer_state_ladder(&MachineState::new(Memory::new(), t.clone()), FUEL)
            .map_err(|e| format!("`{t}`: {e}"))?;
        for (i, pair) in ladder.windows(2).enumerate() {
            let (w0, w1) = (pair[0].weight(), pair[1].weight());
            if w0 != w1 + 1 {
                return Err(format!("`{t}`: state {i} weighs {w0}, state {} weighs {w1}", i + 1));
            }
            let stepped = reduce_state(&pair[0]).map_err(|e| format!("`{t}` state {i}: {e}"))?;
            if stepped.weight() + 1 != w0 || !check_derivation(&stepped, System::State).ok {
                return Err(format!("`{t}`: forward step from state {i} gives weight {}", stepped.weight()));
            }
        }
        if let Some(bad) = ladder.iter().position(|d| !check_derivation(d, System::State).ok) {
            return Err(format!("`{t}`: ladder derivation {bad} rejected"));
        }
        Ok(ladder.len().saturating_sub(1))
    })
}

fn criterion_4(suite: &[Term]) -> Outcome {
    all(suite, |t| {
        let mut n = 0;
        for r in redexes(t, true) {
            let (after, _) = apply_redex(t, &r).map_err(|e| format!("`{t}`: {e}"))?;
            let Ok(d) = infer_weak(&after, FUEL) else { continue };
            let e = expand_spine_step(&d, t, &r).map_err(|e| format!("`{t}` at {}: {e}", r.at))?;
            let gain = if matches!(r.rule, Rule::Beta | Rule::Next) { 2 } else { 0 };
            if e.weight() != d.weight() + gain {
                return Err(format!("`{t}` {} at {}: weight {} from {}", r.rule, r.at, e.weight(), d.weight()));
            }
            if !check_derivation(&e, System::Weak).ok || e.comp_type() != d.comp_type() || e.context != d.context {
                return Err(format!("`{t}` {} at {}: expansion rejected", r.rule, r.at));
            }
            n += 1;
        }
        Ok(n)
    })
}

fn criterion_5(suite: &[Term]) -> Outcome {
    let locs = suite_locations();
    all(suite, |t| {
        let typed = infer_weak(t, FUEL).is_ok();
        let nf = spine_normalize(t, FUEL);
        let d = match &nf {
            Some(tr) => spine_dimension(tr.result()).expect("spine normal form"),
            None => t.pop_depth(),
        };
        let closed = dimension_subst(d, &locs, &t.free_vars()).apply(t);
        let runs = matches!(run(dimension_memory(d, &locs), closed, FUEL, false).outcome, RunOutcome::Success { .. });
        if typed == nf.is_some() && typed == runs {
            Ok(1)
        } else {
            Err(format!("`{t}`: typed {typed}, spine-normalizes {}, runs at dimension {d} {runs}", nf.is_some()))
        }
    })
}

fn criterion_6(suite: &[Term]) -> Outcome {
    all(suite, |t| {
        let before = non_beta_measure(t);
        let mut n = 0;
        for r in redexes(t, false).into_iter().filter(|r| r.rule != Rule::Beta) {
            let (after, _) = apply_redex(t, &r).map_err(|e| format!("`{t}`: {e}"))?;
            let m = non_beta_measure(&after);
            if m >= before {
                return Err(format!("`{t}` {} at {}: measure {before:?} to {m:?}", r.rule, r.at));
            }
            n += 1;
        }
        Ok(n)
    })
}

struct StrongCase {
    term: Term,
    verdict: SnVerdict,
}

fn strong_cases() -> Vec<StrongCase> {
    let terms: Vec<Term> = enumerate_terms(6, &suite_locations(), &[]).collect();
    terms
        .into_par_iter()
        .map(|term| StrongCase { verdict: bounded_sn_check(&term, 5_000, 60), term })
        .filter(|c| c.verdict != SnVerdict::Unknown)
        .collect()
}

fn criterion_7(cases: &[StrongCase]) -> Outcome {
    all(cases, |c| {
        let t = &c.term;
        let done = perp_eval(t, FUEL).status == PerpStatus::Done;
        let strong = infer_strong_pair(t, FUEL);
        match (&c.verdict, done, strong) {
            (SnVerdict::Sn { max_costly, .. }, true, Ok((d, nf))) => {
                if !check_derivation(&d, System::Strong).ok || !check_derivation(&nf, System::Strong).ok {
                    return Err(format!("`{t}`: strong derivation rejected"));
                }
                if d.weight() < *max_costly {
                    return Err(format!("`{t}`: weight {} below {max_costly} costly steps", d.weight()));
                }
                Ok(1)
            }
            (SnVerdict::NotSn { .. }, false, Err(_)) => Ok(1),
            (v, done, s) => Err(format!("`{t}`: oracle {v:?}, perpetual done {done}, strong typed {}", s.is_ok())),
        }
    })
}

fn criterion_8(cases: &[StrongCase]) -> Outcome {
    all(cases, |c| {
        let Some(p) = perp_eval(&c.term, FUEL).tree else { return Ok(0) };
        if !check_perp_tree(&p) {
            return Err(format!("`{}`: tree rejected", c.term));
        }
        let tr = replay(&p).map_err(|e| format!("`{}`: {e}", c.term))?;
        if tr.validate().is_err() || !tr.result().alpha_eq(&p.result) || !is_normal(tr.result()) {
            return Err(format!("`{}`: replay ends in `{}`", c.term, tr.result()));
        }
        Ok(1)
    })
}

fn criterion_9() -> Outcome {
    let start = Instant::now();
    let ty = |s: &str| s.parse::<CompType>().expect("type");
    let unit = inhabit_search(&ty("=>"), 4);
    let pushed = inhabit_search(&ty("=> [=>]"), 4);
    let none = inhabit_search(&ty("=> [=>, => [=>]]"), 4);
    let elapsed = start.elapsed();
    let unit_ok = matches!(unit, Some(Term::Skip));
    let pushed_ok = matches!(&pushed, Some(Term::Push(_, a, m)) if a.is_default() && matches!(**m, Term::Skip));
    let pass = unit_ok && pushed_ok && none.is_none() && elapsed < Duration::from_secs(10);
    let show = |t: &Option<Term>| t.as_ref().map_or("absent".to_string(), Term::to_string);
    Outcome { pass, detail: format!("{}, {}, {} in {elapsed:.2?}", show(&unit), show(&pushed), show(&none)) }
}

fn criterion_10() -> Outcome {
    let a = Location::new("a");
    let p = |s: &str| parse(s).expect("term");
    let lines = [
        DerivedForm::Apply { fun: p("<y>.[y]b.*"), arg: p("w") },
        DerivedForm::LetGet { loc: a.clone(), x: Name::new("x"), body: p("[x]b.a<y>.[y]a.*") },
        DerivedForm::Update { loc: a, value: p("<z>.[z].*"), rest: p("a<f>.[f]a.*") },
    ];
    let mut problems = Vec::new();
    for f in &lines {
        match f.simplification(50) {
            Some(tr) if tr.validate().is_ok() => {}
            _ => problems.push(format!("{} does not simplify", f.kind())),
        }
    }
    for prog in common::STORE_PROGRAMS {
        let s = common::simulate(prog);
        if s.machine != s.oracle {
            problems.push(format!("`{prog}`: machine {} against oracle {}", s.machine, s.oracle));
        }
    }
    let neg = p(&format!("[{OMEGA}].<x>.*"));
    let weak = infer_weak(&neg, FUEL).map(|d| check_derivation(&d, System::Weak).ok).unwrap_or(false);
    if !weak || infer_strong_pair(&neg, 2_000).is_ok() {
        problems.push(format!("negative pair: weak {weak}"));
    }
    Outcome {
        pass: problems.is_empty(),
        detail: problems
            .first()
            .cloned()
            .unwrap_or_else(|| "3 simplifications, 5 store programs, negative pair".into()),
    }
}

fn report(n: usize, name: &str, start: Instant, o: Outcome) -> bool {
    let tag = if o.pass { "PASS" } else { "FAIL" };
    println!("[{tag}] criterion {n:>2} {name}: {} ({:.1?})", o.detail, start.elapsed());
    o.pass
}

fn main_inner() -> bool {
    let suite = suite_1();
    let distinct: BTreeSet<String> = suite.iter().map(Term::to_string).collect();
    println!("suite: {} terms ({} distinct)", suite.len(), distinct.len());
    let terminating: Vec<(Term, usize, Memory)> =
        suite.par_iter().filter_map(|t| run_length(t).map(|(n, m)| (t.clone(), n, m))).collect();
    let mut ok = true;
    let mut go = |n, name: &str, f: &dyn Fn() -> Outcome| {
        let start = Instant::now();
        ok &= report(n, name, start, f());
    };
    go(1, "small-step and big-step agree", &|| criterion_1(&suite));
    go(2, "weight equals run length", &|| criterion_2(&terminating));
    go(3, "step ladder", &|| criterion_3(&terminating));
    go(4, "weighted spine subject expansion", &|| criterion_4(&suite));
    go(5, "typing, spine normalization, termination", &|| criterion_5(&suite));
    go(6, "non-beta measure decreases", &|| criterion_6(&suite));
    let cases = strong_cases();
    go(7, "strong typing, perpetual evaluation, SN", &|| criterion_7(&cases));
    go(8, "perpetual replay", &|| criterion_8(&cases));
    go(9, "inhabitation", &criterion_9);
    go(10, "effect encodings", &criterion_10);
    ok
}

fn main() -> ExitCode {
    let pool = rayon::ThreadPoolBuilder::new().stack_size(256 << 20).build().expect("thread pool");
    let ok = std::thread::Builder::new()
        .stack_size(256 << 20)
        .spawn(move || pool.install(main_inner))
        .expect("spawn")
        .join()
        .expect("acceptance run");
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
