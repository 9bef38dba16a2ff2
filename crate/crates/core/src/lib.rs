//! Formulas, proof search and agent simulation for the logic CL2 with
//! environment annotations.

pub mod agents;
pub mod classical;
pub mod cli;
pub mod engine;
pub mod formula;
pub mod prover;
