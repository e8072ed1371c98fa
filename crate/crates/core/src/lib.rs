//! Real-space topological indices of free-fermion lattice models.
//!
//! Pipeline: [`geometry`] builds a finite disk and a conical partition,
//! [`models`] writes a Majorana-basis Hamiltonian on it, [`quasifree`] turns
//! that into a basis projection `P`, [`symgen`] builds flux generators that
//! commute with `P`, and [`invariants`] evaluates the Chern number, Hall
//! response, exchange phases, parity and twist-defect indices.

pub mod cli;
pub mod error;
pub mod geometry;
pub mod invariants;
pub mod linalg;
pub mod models;
pub mod quasifree;
pub mod sampling;
pub mod symgen;

pub use error::{Error, Result};
