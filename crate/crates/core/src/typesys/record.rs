use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::machine::{ContinuationStack, MachineState, Memory, MemoryRecord, RecordError, StateRecord};
use crate::syntax::{Name, Term};

use super::context::TypingContext;
use super::derivation::{Derivation, Subject, Typed, TypingRule};
use super::types::{CollectionType, CompType};

/// Serialized derivation node. Context entries list the element types of
/// each variable's collection.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DerivationRecord {
    pub rule: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub var: Option<String>,
    pub context: BTreeMap<String, Vec<String>>,
    pub subject: SubjectRecord,
    #[serde(rename = "type")]
    pub ty: String,
    #[serde(default)]
    pub children: Vec<DerivationRecord>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SubjectRecord {
    Term(String),
    Kont(Vec<String>),
    State(StateRecord),
    Memory(MemoryRecord),
}

impl From<&Derivation> for DerivationRecord {
    fn from(d: &Derivation) -> DerivationRecord {
        let var = match &d.rule {
            TypingRule::SubstAdmissible(x) => Some(x.to_string()),
            _ => None,
        };
        let context =
            d.context.iter().map(|(x, c)| (x.to_string(), c.iter().map(CompType::to_string).collect())).collect();
        let subject = match &d.subject {
            Subject::Term(t) => SubjectRecord::Term(t.to_string()),
            Subject::Memory(m) => SubjectRecord::Memory(MemoryRecord::from(m)),
            Subject::Kont(k) => SubjectRecord::Kont(k.iter().map(Term::to_string).collect()),
            Subject::State(s) => SubjectRecord::State(StateRecord::from(s)),
        };
        DerivationRecord {
            rule: d.rule.name().to_string(),
            var,
            context,
            subject,
            ty: d.ty.to_string(),
            children: d.children.iter().map(DerivationRecord::from).collect(),
        }
    }
}

fn parse_rule(name: &str, var: Option<&str>) -> Result<TypingRule, RecordError> {
    Ok(match name {
        "Var" => TypingRule::Var,
        "Abs" => TypingRule::Abs,
        "AppWeak" => TypingRule::AppWeak,
        "Unit" => TypingRule::Unit,
        "Seq" => TypingRule::Seq,
        "Collection" => TypingRule::Collection,
        "MemEmpty" => TypingRule::MemEmpty,
        "MemPush" => TypingRule::MemPush,
        "KontEmpty" => TypingRule::KontEmpty,
        "KontPush" => TypingRule::KontPush,
        "State" => TypingRule::State,
        "AppStrong" => TypingRule::AppStrong,
        "Weakening" => TypingRule::Weakening,
        "SubstAdmissible" => match var {
            Some(x) => TypingRule::SubstAdmissible(Name::new(x)),
            None => return Err(RecordError::Rule("SubstAdmissible without `var`".into())),
        },
        other => return Err(RecordError::Rule(format!("unknown typing rule `{other}`"))),
    })
}

fn parse_type<T: std::str::FromStr<Err = super::TypeParseError>>(s: &str) -> Result<T, RecordError> {
    s.parse().map_err(|e: super::TypeParseError| RecordError::Rule(format!("bad type `{s}`: {e}")))
}

impl TryFrom<&DerivationRecord> for Derivation {
    type Error = RecordError;

    /// Rebuilds the tree as written, without checking it.
    fn try_from(r: &DerivationRecord) -> Result<Derivation, RecordError> {
        let rule = parse_rule(&r.rule, r.var.as_deref())?;
        let mut context = TypingContext::new();
        for (x, ts) in &r.context {
            let elems = ts.iter().map(|t| parse_type(t)).collect::<Result<Vec<CompType>, _>>()?;
            context.add(Name::new(x), CollectionType(elems));
        }
        let subject = match (&rule, &r.subject) {
            (TypingRule::MemEmpty | TypingRule::MemPush, SubjectRecord::Memory(m)) => {
                Subject::Memory(Memory::try_from(m)?)
            }
            (TypingRule::KontEmpty | TypingRule::KontPush, SubjectRecord::Kont(k)) => {
                let terms = k.iter().map(|s| crate::machine::parse_term(s)).collect::<Result<Vec<_>, _>>()?;
                Subject::Kont(ContinuationStack::from_head_first(terms))
            }
            (TypingRule::State, SubjectRecord::State(s)) => Subject::State(MachineState::try_from(s)?),
            (_, SubjectRecord::Term(t)) => Subject::Term(crate::machine::parse_term(t)?),
            (rule, _) => return Err(RecordError::Rule(format!("subject does not fit rule {rule}"))),
        };
        let ty = match rule {
            TypingRule::Collection => Typed::Collection(parse_type(&r.ty)?),
            TypingRule::MemEmpty | TypingRule::MemPush => Typed::Memory(parse_type(&r.ty)?),
            _ => Typed::Comp(parse_type(&r.ty)?),
        };
        let children = r.children.iter().map(Derivation::try_from).collect::<Result<_, _>>()?;
        Ok(Derivation { rule, context, subject, ty, children })
    }
}
