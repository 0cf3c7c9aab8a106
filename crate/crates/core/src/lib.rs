//! A small lazy functional-logic language with functional patterns, a
//! narrowing evaluator, and synthesis of inverse functions.

pub mod ast;
pub mod check;
pub mod cli;
pub mod desugar;
pub mod eval;
pub mod json;
pub mod parser;
pub mod pretty;
pub mod transform;
