//! Confluence analysis for first-order term rewrite systems.

pub mod checker;
pub mod critical_pairs;
pub mod fixtures;
pub mod joinability;
pub mod limits;
pub mod matrix;
pub mod par;
pub mod prover;
pub mod relative_termination;
pub mod rewriting;
pub mod rule_labeling;
pub mod term;
pub mod tpdb;
pub mod trace;
