use std::collections::BTreeMap;

use crate::perpetual::{perp_eval, weak_head_split, PerpRule, PerpStatus, PerpTree};
use crate::syntax::{Location, Position, Selector, Term};

use super::derivation::{Derivation, TypeError};
use super::expand::{expand_at, rebuild_along};
use super::infer::InferError;
use super::transform::split_substitution;
use super::types::{CompType, MemoryType};
use super::System;

/// A strong derivation of `t`, synthesized from its perpetual evaluation.
pub fn infer_strong(t: &Term, fuel: usize) -> Result<Derivation, InferError> {
    infer_strong_pair(t, fuel).map(|(d, _)| d)
}

/// Strong derivations of `t` and of its normal form with the same context and type.
pub fn infer_strong_pair(t: &Term, fuel: usize) -> Result<(Derivation, Derivation), InferError> {
    let r = perp_eval(t, fuel);
    match (r.status, r.tree) {
        (PerpStatus::Done, Some(p)) => Ok(from_perp_tree(&p)?),
        _ => Err(InferError::FuelExhausted),
    }
}

/// Follows the tree rule by rule; the first derivation types the subject,
/// the second the result.
pub fn from_perp_tree(p: &PerpTree) -> Result<(Derivation, Derivation), TypeError> {
    let split = weak_head_split(&p.subject);
    let n = split.pushes.len();
    let ch = &p.children;
    match p.rule {
        PerpRule::Beta => {
            let (cont, cont_nf) = from_perp_tree(&ch[0])?;
            let (witness, _) = from_perp_tree(&ch[1])?;
            let (arg, a) = split.pushes.last().expect("Beta has a push");
            let Term::Pop(_, x, body) = &split.core else {
                return Err(TypeError::Shape("Beta without abstraction".into()));
            };
            let path = vec![Selector::PushBody; n - 1];
            let d = rebuild_along(&cont, &path, &mut |sub| {
                let (coll, inner) = split_substitution(sub, body, x, arg, System::Strong)?;
                let abs = Derivation::abs(a.clone(), x.clone(), inner)?;
                Derivation::app_strong(a.clone(), coll, abs, witness.clone())
            })?;
            let extra = witness.context.clone();
            Ok((d, Derivation::weakening(cont_nf, extra)))
        }
        PerpRule::NormAbs => {
            let Term::Pop(a, x, _) = &p.subject else { unreachable!("NormAbs subject") };
            let (d, nf) = from_perp_tree(&ch[0])?;
            Ok((Derivation::abs(a.clone(), x.clone(), d)?, Derivation::abs(a.clone(), x.clone(), nf)?))
        }
        PerpRule::NormUnit | PerpRule::NormVar | PerpRule::NormSeq => {
            let mut f: BTreeMap<Location, usize> = BTreeMap::new();
            for (_, a) in &split.pushes {
                *f.entry(a.clone()).or_default() += 1;
            }
            let base = MemoryType::empties(&f);
            let (core, core_nf) = match &split.core {
                Term::Skip => (Derivation::unit(base.clone()), Derivation::unit(base)),
                Term::Var(x) => {
                    let v = Derivation::var(x.clone(), CompType::new(base, MemoryType::new()));
                    (v.clone(), v)
                }
                Term::Seq(head, _) => {
                    let Term::Var(x) = &**head else { unreachable!("NormSeq head") };
                    let (tail, tail_nf) = from_perp_tree(&ch[n])?;
                    let mid = tail.comp_type().expect("term judgement").input.clone();
                    let v = Derivation::var(x.clone(), CompType::new(base, mid));
                    (Derivation::seq(v.clone(), tail)?, Derivation::seq(v, tail_nf)?)
                }
                _ => unreachable!("normal cores"),
            };
            let (mut d, mut nf) = (core, core_nf);
            for (i, (m, a)) in split.pushes.iter().enumerate().rev() {
                let (w, w_nf) = from_perp_tree(&ch[i])?;
                d = Derivation::app_strong(a.clone(), Derivation::collection(m.clone(), Vec::new())?, d, w)?;
                let result = w_nf.term().expect("term judgement").clone();
                nf = Derivation::app_strong(a.clone(), Derivation::collection(result, Vec::new())?, nf, w_nf)?;
            }
            Ok((d, nf))
        }
        rule => {
            let (d, nf) = from_perp_tree(&ch[0])?;
            let k = if rule == PerpRule::Passage { n - 1 } else { n };
            let at = Position(vec![Selector::PushBody; k]);
            let rr = rule.reduction().expect("head step");
            Ok((expand_at(&d, &p.subject, &at, rr, System::Strong)?, nf))
        }
    }
}
