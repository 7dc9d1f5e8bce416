//! Symmetric extendibility of bipartite quantum states.
//!
//! A state `ρ_AB` has a symmetric extension when some `σ_ABB'` invariant
//! under swapping `B ↔ B'` reduces to `ρ_AB`. This crate decides that
//! question through exact spectral criteria where they exist (the spectrum
//! condition, rank-2 and Bell-diagonal conditions, Z-correlated states), a
//! constructive pure-extension builder for two qubits, and a numerical
//! feasibility oracle for everything else. The same machinery classifies
//! quantum channels as degradable or anti-degradable.

pub mod channels;
pub mod error;
pub mod gallery;
pub mod linalg;
pub mod oracle;
pub mod random;
pub mod states;
pub mod twoqubit;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, HermitianEigen, C64};
pub use states::{BipartiteState, Spectrum, TripartiteExtension};


pub use oracle::{FeasibilityResult, OracleOptions, Status, Symmetry};
