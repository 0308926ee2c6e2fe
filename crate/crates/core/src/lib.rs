//! Deterministic random Solidity program generator.
//!
//! The crate generates valid, diverse Solidity (>= 0.8.0) contracts designed
//! to expose compiler defects: every program carries event instrumentation
//! that logs all state variables, so independently compiled builds can be
//! executed and compared log-for-log.

pub mod ast;
pub mod body;
pub mod config;
pub mod context;
pub mod emit;
pub mod env;
pub mod exprs;
pub mod generate;
pub mod policies;
pub mod prng;
pub mod validate;

pub use ast::Program;
pub use config::GenConfig;
pub use emit::{emit_program, line_count};
pub use generate::{generate_program, generate_source};
pub use validate::{max_live_locals, validate, Violation};
