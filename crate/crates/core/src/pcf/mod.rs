//! PCF+: a typed lambda calculus with naturals, booleans, pairs, lists and
//! pattern matching, extended with lifted built-ins over variational values.

pub mod eval;
mod nat;
pub mod parse;
pub mod syntax;
pub mod types;
pub mod value;

pub use eval::{Counters, EvalError, Interp};
pub use nat::Nat;
pub use parse::{parse_program, parse_program_with, parse_term, parse_type, ParseError};
pub use syntax::{BinOp, LiftedAlt, Name, Pattern, Prim, Program, Term, Type};
pub use types::{typecheck, typecheck_program, Ctx, TypeError};
pub use value::{Datum, Env, Thunk, Value};
