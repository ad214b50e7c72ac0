//! Measurable controls, L^p seminorms, absolutely continuous curves and the
//! evolution map `γ ↦ η` with `η⁻¹η' = γ`, `η(0) = e` on matrix Lie groups.

pub mod ac_curve;
pub mod cli;
pub mod controls;
pub mod error;
pub mod evolution;
pub mod group_curve;
pub mod lebesgue;
pub mod lie_core;
pub mod measurable;
pub mod quadrature;

pub use error::{Error, Result};
