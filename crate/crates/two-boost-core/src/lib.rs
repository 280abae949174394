//! Chords of the planar two-boost system: root counting for the rotating
//! frame multiplier equation, chord reconstruction and certification, a
//! Maslov-type index, a priori bounds, potential cutoffs, and a shooting
//! solver for perturbed problems.

pub mod action;
pub mod bounds;
pub mod error;
pub mod symplectic;
pub mod hamiltonian;
pub mod chords;
pub mod cutoff;
pub mod integrate;
pub mod scaling;
pub mod shooting;
pub mod suite;

pub use error::{Error, Result};
