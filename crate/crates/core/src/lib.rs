//! Pulse-level simulation of non-adiabatic, non-abelian holonomic gates on a
//! driven three-level atom, with full three-level process tomography.
//!
//! The logical qubit is encoded in `|0⟩, |1⟩`; the auxiliary level `|e⟩` is
//! populated only during a gate. A two-tone drive with constant amplitude
//! ratio and a 2π-area envelope carries the logical subspace around a closed
//! loop, and the resulting operator depends only on that loop.

pub mod evolution;
pub mod experiment;
pub mod gates;
pub mod pulse;
pub mod qutrit;
pub mod tomography;
