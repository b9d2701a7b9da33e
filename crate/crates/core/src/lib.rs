//! Optimal transport and nodal sets: numerical tools for the uncertainty
//! principle `W₁(f₊, f₋) · 𝓗^{d−1}{f = 0} ≳ (‖f‖₁/‖f‖∞)^{4−1/d} ‖f‖₁` on
//! the unit cube, its spectral consequences, and a graph analogue.

pub mod error;
pub mod graph_uncertainty;
pub mod grid_function;
pub mod numerics;
pub mod ot_solver;
pub mod spectral_cube;
pub mod uncertainty;

pub use error::{Error, Result};
pub use grid_function::{sample_family, DiscreteMeasure, FamilySpec, GridFunction, Norms};
pub use ot_solver::{Method, SolverConfig, TransportPlan};
pub use uncertainty::UncertaintyReport;
