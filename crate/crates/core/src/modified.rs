//! Modified system with the mean charge velocity `ū(t)`:
//!
//! ```text
//! ∂B/∂t = -curl E
//! ∂E/∂t = ū × curl E - u̇̄ × B + curl[ū × (E + ū × B)] + curl B/(ε₀μ₀) - J/ε₀
//! ∂ρ/∂t = -div J
//! ```
//!
//! The electric update is the unique rate (up to the choice of the curl term)
//! that keeps `div(E + ū × B) = ρ/ε₀` constant in time. With `ū = u̇̄ = 0` every
//! extra term vanishes and the system is the vacuum Maxwell system.

use crate::classical::vacuum_ampere;
use crate::constants::PhysicalConstants;
use crate::error::Result;
use crate::field::{cross_const, VectorField};
use crate::ops;
use crate::state::{EMState, Rates, ResidualReport};
use crate::vec3::Vec3;

/// The electric rate split into its named contributions.
#[derive(Debug, Clone, PartialEq)]
pub struct ModifiedTerms {
    /// `curl B/(ε₀μ₀) - J/ε₀`, identical to the classical rate.
    pub vacuum: VectorField,
    /// `ū × curl E`.
    pub advective: VectorField,
    /// `-u̇̄ × B`.
    pub acceleration: VectorField,
    /// `curl[ū × (E + ū × B)]`.
    pub transport: VectorField,
    /// `-curl E`, the magnetic rate.
    pub faraday: VectorField,
}

impl ModifiedTerms {
    /// `∂E/∂t`, summed as `vacuum + advective + acceleration + transport`.
    pub fn de(&self) -> VectorField {
        self.vacuum
            .add(&self.advective)
            .add(&self.acceleration)
            .add(&self.transport)
    }
}

pub fn modified_terms(s: &EMState, k: &PhysicalConstants) -> Result<ModifiedTerms> {
    s.check_grids()?;
    let ubar = s.ubar;
    let curl_e = ops::curl(&s.e);
    let combo = s.e.add(&cross_const(ubar, &s.b));
    Ok(ModifiedTerms {
        vacuum: vacuum_ampere(&s.b, &s.j, k),
        advective: cross_const(ubar, &curl_e),
        acceleration: cross_const(s.ubar_dot, &s.b).scale(-1.0),
        transport: ops::curl(&cross_const(ubar, &combo)),
        faraday: curl_e.scale(-1.0),
    })
}

pub fn modified_rhs(s: &EMState, k: &PhysicalConstants) -> Result<Rates> {
    let terms = modified_terms(s, k)?;
    Ok(Rates {
        de: terms.de(),
        db: terms.faraday,
        drho: ops::divergence(&s.j).scale(-1.0),
    })
}

/// Norms of `div(E + ū × B) - ρ/ε₀` (`gauss_modified`) and `div B` (`div_b`).
pub fn modified_gauss_residual(s: &EMState, k: &PhysicalConstants) -> Result<ResidualReport> {
    s.check_grids()?;
    let mut report = ResidualReport::default();
    report.push_scalar("gauss_modified", &modified_gauss_field(s, k), Vec3::ZERO);
    report.push_scalar("div_b", &ops::divergence(&s.b), Vec3::ZERO);
    Ok(report)
}

/// The pointwise modified Gauss residual `div(E + ū × B) - ρ/ε₀`.
pub fn modified_gauss_field(s: &EMState, k: &PhysicalConstants) -> crate::field::ScalarField {
    let combo = s.e.add(&cross_const(s.ubar, &s.b));
    ops::divergence(&combo).axpy(-1.0 / k.eps0(), &s.rho)
}

/// Volume average of `J/ρ` over nodes with `ρ > rho_floor`; `fallback` when there are none.
pub fn mean_velocity_from_state(s: &EMState, rho_floor: f64, fallback: Vec3) -> Vec3 {
    let mut sum = Vec3::ZERO;
    let mut count = 0usize;
    for (rho, j) in s.rho.values().iter().zip(s.j.values()) {
        if *rho > rho_floor {
            sum += *j / *rho;
            count += 1;
        }
    }
    if count == 0 {
        fallback
    } else {
        sum / count as f64
    }
}
