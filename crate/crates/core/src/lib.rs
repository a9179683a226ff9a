//! Exact learning-theory quantities on finite domains.
//!
//! `shatterlab` computes VC dimension, growth functions, fat-shattering
//! dimension, ε-covering numbers and composition classes for finite
//! concept and function classes, and runs Monte Carlo PAC experiments.
//! Every routine is exact on its finite input; infinite classes are only
//! ever represented by finite traces.
//!
//! Modules:
//! - [`model`]: finite spaces, concepts, function tables and their distances.
//! - [`shatter`]: shattering, growth function, VC and fat-shattering dimension.
//! - [`cover`]: covering and packing numbers, covering propositions, entropy bounds.
//! - [`compose`]: classical and continuous connectives and composition classes.
//! - [`pacsim`]: rectangle learner trials and the one-point counterexample class.
//! - [`doc`]: the JSON class-definition document.
//! - [`gen`]: seeded instance generators shared by tests, the CLI and benchmarks.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bits;
pub mod compose;
pub mod cover;
pub mod doc;
pub mod error;
pub mod gen;
pub mod model;
pub mod pacsim;
pub mod shatter;

pub use error::{Error, Result};
pub use model::{
    Concept, ConceptClass, FiniteSpace, FunctionClass, FunctionTable, PointSubset,
};
