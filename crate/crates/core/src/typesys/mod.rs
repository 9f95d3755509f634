//! Quantitative types: the type grammar, weak, strong and state derivations,
//! an independent checker, and inference by proof replay.

mod check;
mod context;
mod derivation;
mod expand;
mod infer;
mod inhabit;
mod record;
mod strong;
mod transform;
mod types;

use std::fmt;
use std::str::FromStr;

pub use check::{check_derivation, CheckFailure, CheckResult};
pub use context::{context_sum, TypingContext};
pub use derivation::{Derivation, Subject, TypeError, Typed, TypingRule};
pub use expand::expand_spine_step;
pub use infer::{
    infer_state, infer_state_ladder, infer_weak, infer_weak_state, output_dims, reduce_state, type_spine_nf, InferError,
};
pub use inhabit::{inhabit_derivation, inhabit_search};
pub use record::{DerivationRecord, SubjectRecord};
pub use strong::{from_perp_tree, infer_strong, infer_strong_pair};
pub use transform::{eliminate_substitution, eliminate_substitutions, retarget, split_substitution};
pub use types::{CollectionType, CompType, MemoryType, TypeParseError, VectorType};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum System {
    Weak,
    Strong,
    /// The weak system extended to memories, continuations and states.
    State,
}

impl System {
    pub fn name(self) -> &'static str {
        match self {
            System::Weak => "weak",
            System::Strong => "strong",
            System::State => "state",
        }
    }
}

impl fmt::Display for System {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for System {
    type Err = String;

    fn from_str(s: &str) -> Result<System, String> {
        match s {
            "weak" => Ok(System::Weak),
            "strong" => Ok(System::Strong),
            "state" => Ok(System::State),
            other => Err(format!("unknown type system `{other}`")),
        }
    }
}
