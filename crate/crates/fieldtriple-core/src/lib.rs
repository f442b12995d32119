//! Symbolic and numeric engine for the Tulczyjew triple of first-order field
//! theory: adapted coordinate charts on jet and phase bundles, the alpha and
//! beta morphisms, phase dynamics, Euler-Lagrange resolution, Legendre
//! map/transform, Hamiltonian generation, and finite-difference verification
//! of candidate field sections.

pub mod charts;
pub mod expr;
pub mod hamiltonian;
pub mod lagrangian;
pub mod model;
pub mod parse;
