use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::syntax::{parse, Location, ParseError, Term};

use super::{ContinuationStack, MachineState, Memory};

#[derive(Debug, Error)]
pub enum RecordError {
    #[error("bad term `{text}`: {source}")]
    Term { text: String, source: ParseError },
    #[error("bad location `{0}`")]
    Location(String),
    #[error("{0}")]
    Rule(String),
}

pub(crate) fn parse_term(text: &str) -> Result<Term, RecordError> {
    parse(text).map_err(|source| RecordError::Term { text: text.to_string(), source })
}

/// `{loc: [term, ...]}` with the top of each stack last.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MemoryRecord(pub BTreeMap<String, Vec<String>>);

impl From<&Memory> for MemoryRecord {
    fn from(m: &Memory) -> MemoryRecord {
        MemoryRecord(m.iter().map(|(a, s)| (a.to_string(), s.iter().map(Term::to_string).collect())).collect())
    }
}

impl TryFrom<&MemoryRecord> for Memory {
    type Error = RecordError;

    fn try_from(r: &MemoryRecord) -> Result<Memory, RecordError> {
        let mut stacks = Vec::new();
        for (a, items) in &r.0 {
            let valid = a.starts_with(|c: char| c.is_ascii_lowercase())
                && a.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
            if !valid {
                return Err(RecordError::Location(a.clone()));
            }
            let terms = items.iter().map(|s| parse_term(s)).collect::<Result<Vec<_>, _>>()?;
            stacks.push((Location::new(a), terms));
        }
        Ok(Memory::from_stacks(stacks))
    }
}

/// One machine state; the continuation is listed head first.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateRecord {
    pub memory: MemoryRecord,
    pub focus: String,
    pub kont: Vec<String>,
}

impl From<&MachineState> for StateRecord {
    fn from(s: &MachineState) -> StateRecord {
        StateRecord {
            memory: MemoryRecord::from(&s.memory),
            focus: s.focus.to_string(),
            kont: s.kont.iter().map(Term::to_string).collect(),
        }
    }
}

impl TryFrom<&StateRecord> for MachineState {
    type Error = RecordError;

    fn try_from(r: &StateRecord) -> Result<MachineState, RecordError> {
        let kont = r.kont.iter().map(|s| parse_term(s)).collect::<Result<Vec<_>, _>>()?;
        Ok(MachineState {
            memory: Memory::try_from(&r.memory)?,
            focus: parse_term(&r.focus)?,
            kont: ContinuationStack::from_head_first(kont),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::run;

    #[test]
    fn trace_records_round_trip() {
        let t = parse("[*]a.(<x>.x;*);a<y>.*").unwrap();
        let r = run(Memory::new(), t, 50, true);
        for s in r.trace.unwrap() {
            let rec = StateRecord::from(&s);
            let json = serde_json::to_string(&rec).unwrap();
            let back: StateRecord = serde_json::from_str(&json).unwrap();
            assert_eq!(MachineState::try_from(&back).unwrap(), s);
        }
    }

    #[test]
    fn key_order_is_stable() {
        let mut s = MachineState::new("a:[*]".parse().unwrap(), Term::Skip);
        s.kont.push(parse("x").unwrap());
        s.kont.push(parse("y").unwrap());
        let json = serde_json::to_string(&StateRecord::from(&s)).unwrap();
        assert_eq!(json, r#"{"memory":{"a":["*"]},"focus":"*","kont":["y","x"]}"#);
    }
}
