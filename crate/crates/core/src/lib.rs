//! Benchmarking per-token representation stacks (static, contextual,
//! position, POS, character channels) for CNN relation extraction on
//! SemEval-2010 Task 8.
//!
//! The pipeline is: [`corpus`] parses and splits the data,
//! [`representations`] composes each sentence into a fixed-size matrix,
//! [`neuralnet`] trains the classifier, [`eval`] scores it, and
//! [`harness`] drives seeded multi-run sweeps from a JSON config.

pub mod corpus;
pub mod eval;
pub mod harness;
pub mod neuralnet;
pub mod representations;
pub mod rng;
pub mod tensor;
