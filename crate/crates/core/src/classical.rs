//! Vacuum Maxwell system on the periodic grid:
//!
//! ```text
//! ∂B/∂t = -curl E
//! ∂E/∂t = curl B / (ε₀μ₀) - J/ε₀
//! ∂ρ/∂t = -div J
//! ```
//!
//! with `div E = ρ/ε₀` and `div B = 0` monitored, not enforced.

use crate::constants::PhysicalConstants;
use crate::error::Result;
use crate::field::VectorField;
use crate::ops;
use crate::state::{EMState, Rates, ResidualReport};
use crate::vec3::Vec3;

/// `curl B / (ε₀μ₀) - J/ε₀`. Shared verbatim by both systems.
pub(crate) fn vacuum_ampere(b: &VectorField, j: &VectorField, k: &PhysicalConstants) -> VectorField {
    ops::curl(b).scale(k.c_squared()).axpy(-1.0 / k.eps0(), j)
}

pub fn classical_rhs(s: &EMState, k: &PhysicalConstants) -> Result<Rates> {
    s.check_grids()?;
    Ok(Rates {
        de: vacuum_ampere(&s.b, &s.j, k),
        db: ops::curl(&s.e).scale(-1.0),
        drho: ops::divergence(&s.j).scale(-1.0),
    })
}

/// Norms of `div E - ρ/ε₀` (`gauss`) and `div B` (`div_b`).
pub fn classical_gauss_residual(s: &EMState, k: &PhysicalConstants) -> Result<ResidualReport> {
    s.check_grids()?;
    let mut report = ResidualReport::default();
    let gauss = ops::divergence(&s.e).axpy(-1.0 / k.eps0(), &s.rho);
    report.push_scalar("gauss", &gauss, Vec3::ZERO);
    report.push_scalar("div_b", &ops::divergence(&s.b), Vec3::ZERO);
    Ok(report)
}
