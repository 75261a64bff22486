//! Bounded exhaustive model checking for the release/acquire/relaxed
//! fragment of the C11 memory model.
//!
//! The crate has three layers:
//!
//! * a litmus command language with an uninterpreted (value-agnostic)
//!   small-step semantics ([`ast`], [`parse`], [`step`]);
//! * the operational event semantics over C11 states — observability,
//!   modification-order insertion and the Read/Write/RMW rules
//!   ([`state`], [`analysis`]) — together with the axiomatic side used as a
//!   runtime oracle ([`axioms`], [`candidates`]);
//! * a bounded exhaustive explorer with a determinate-value/variable-order
//!   assertion calculus and a per-transition proof-rule audit
//!   ([`explore`], [`assertions`]).

pub mod analysis;
pub mod assertions;
pub mod ast;
pub mod axioms;
pub mod candidates;
pub mod dot;
pub mod event;
pub mod exec_json;
pub mod equiv;
pub mod explore;
pub mod parse;
pub mod rel;
pub mod state;
pub mod step;

pub use analysis::{Analysis, Relations};
pub use ast::{Assertion, Command, Expr, LitmusSpec, Program, Scope};
pub use event::{Action, Event, Tag, Tid, Val, VarId, VarTable};
pub use parse::{parse, ParseError};
pub use state::{C11State, PreExecution, RaTransition};
