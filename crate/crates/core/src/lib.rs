//! Exact lattice-theoretic machinery for classifying finite symplectic
//! automorphism groups of the supersingular K3 surface of Artin invariant one.
//!
//! Modules build on each other in order: [`arith`], [`lattice`], [`genus`],
//! [`discform`], [`criteria`], [`classify`].

pub mod arith;
pub mod classify;
pub mod criteria;
pub mod discform;
pub mod genus;
pub mod lattice;
