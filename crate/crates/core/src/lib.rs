//! Table reasoning engine.
//!
//! A raw table is formatted into a typed grid, a tool maker emits a
//! single-assignment plan over a sandboxed tool registry, the plan is
//! executed (falling back to chain-of-thought when it cannot run), and the
//! result is explained with line-anchored call references.

pub mod diagnostics;
pub mod executor;
pub mod explain;
pub mod formatter;
pub mod gateway;
pub mod harness;
pub mod plan;
pub mod table;
pub mod toolkit;
