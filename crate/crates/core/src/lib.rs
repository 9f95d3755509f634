//! The Functional Machine Calculus: an abstract machine with located operand
//! stacks, its reduction theory, perpetual evaluation, and quantitative
//! (non-idempotent intersection) types whose weights count machine steps.

pub mod encodings;
pub mod machine;
pub mod perpetual;
pub mod rewrite;
pub mod syntax;
pub mod typesys;

pub use machine::{ContinuationStack, MachineState, Memory};
pub use syntax::{parse, Location, Name, Position, Selector, SubstMap, Term};
