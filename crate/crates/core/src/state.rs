use serde::{Deserialize, Serialize};

use crate::constants::PhysicalConstants;
use crate::error::{Error, Result};
use crate::field::{ScalarField, VectorField};
use crate::grid::GridSpec;
use crate::vec3::Vec3;

/// Stability guard on `c dt / h` for RK4 with central differences.
pub const COURANT_LIMIT: f64 = 0.5;
pub const DEFAULT_CFL: f64 = 0.4;

/// Full dynamical state advanced by the solvers.
#[derive(Debug, Clone, PartialEq)]
pub struct EMState {
    pub t: f64,
    pub e: VectorField,
    pub b: VectorField,
    pub rho: ScalarField,
    pub j: VectorField,
    /// Mean charge velocity ū(t).
    pub ubar: Vec3,
    /// dū/dt.
    pub ubar_dot: Vec3,
}

impl EMState {
    pub fn zeros(grid: GridSpec) -> Self {
        Self {
            t: 0.0,
            e: VectorField::zeros(grid),
            b: VectorField::zeros(grid),
            rho: ScalarField::zeros(grid),
            j: VectorField::zeros(grid),
            ubar: Vec3::ZERO,
            ubar_dot: Vec3::ZERO,
        }
    }

    pub fn grid(&self) -> &GridSpec {
        self.e.grid()
    }

    pub fn check_grids(&self) -> Result<()> {
        let g = self.grid();
        if !self.b.grid().same_as(g) {
            return Err(Error::GridMismatch("B and E"));
        }
        if !self.rho.grid().same_as(g) {
            return Err(Error::GridMismatch("rho and E"));
        }
        if !self.j.grid().same_as(g) {
            return Err(Error::GridMismatch("J and E"));
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.e.values().iter().all(|v| v.is_finite())
            && self.b.values().iter().all(|v| v.is_finite())
            && self.rho.values().iter().all(|v| v.is_finite())
    }

    /// Electromagnetic energy `½∫(ε₀|E|² + |B|²/μ₀) dV`.
    pub fn energy(&self, k: &PhysicalConstants) -> f64 {
        let dv = self.grid().cell_volume();
        let e2: f64 = self.e.values().iter().map(|v| v.norm_sq()).sum();
        let b2: f64 = self.b.values().iter().map(|v| v.norm_sq()).sum();
        0.5 * dv * (k.eps0() * e2 + b2 / k.mu0())
    }
}

/// Time derivatives of the evolved fields.
#[derive(Debug, Clone, PartialEq)]
pub struct Rates {
    pub de: VectorField,
    pub db: VectorField,
    pub drho: ScalarField,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    /// Explicit step; when absent `dt = cfl * h / c`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    pub cfl: f64,
    pub steps: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            dt: None,
            cfl: DEFAULT_CFL,
            steps: 100,
        }
    }
}

impl SolverConfig {
    pub fn with_steps(steps: usize) -> Self {
        Self {
            steps,
            ..Self::default()
        }
    }

    /// Resolved time step, rejected when `c dt / h` exceeds [`COURANT_LIMIT`].
    pub fn resolve_dt(&self, grid: &GridSpec, k: &PhysicalConstants) -> Result<f64> {
        let dt = self.dt.unwrap_or(self.cfl * grid.h() / k.c());
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::Config {
                path: "solver.dt".into(),
                msg: format!("time step must be positive, got {dt}"),
            });
        }
        let courant = dt * k.c() / grid.h();
        if courant > COURANT_LIMIT * (1.0 + 1e-12) {
            return Err(Error::Cfl {
                courant,
                limit: COURANT_LIMIT,
            });
        }
        Ok(dt)
    }
}

/// One row of a residual report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualEntry {
    pub equation: String,
    pub max: f64,
    /// Root-mean-square over nodes (and time slices, for trajectory checks).
    pub l2: f64,
    pub h: f64,
    pub v0: Vec3,
}

/// Per-equation norm diagnostics.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ResidualReport {
    pub entries: Vec<ResidualEntry>,
}

pub const RESIDUAL_COLUMNS: &str = "level,equation,h,v0x,v0y,v0z,max,l2";

impl ResidualReport {
    pub fn push_scalar(&mut self, equation: &str, f: &ScalarField, v0: Vec3) {
        self.entries.push(ResidualEntry {
            equation: equation.into(),
            max: f.max_norm(),
            l2: f.rms(),
            h: f.grid().h(),
            v0,
        });
    }

    pub fn push_vector(&mut self, equation: &str, f: &VectorField, v0: Vec3) {
        self.entries.push(ResidualEntry {
            equation: equation.into(),
            max: f.max_norm(),
            l2: f.rms(),
            h: f.grid().h(),
            v0,
        });
    }

    pub fn get(&self, equation: &str) -> Option<&ResidualEntry> {
        self.entries.iter().find(|e| e.equation == equation)
    }

    /// Appends CSV rows (without header) tagged with a refinement `level`.
    pub fn write_csv_rows(&self, level: usize, out: &mut String) {
        use std::fmt::Write;
        for e in &self.entries {
            let _ = writeln!(
                out,
                "{level},{},{:e},{:e},{:e},{:e},{:e},{:e}",
                e.equation, e.h, e.v0[0], e.v0[1], e.v0[2], e.max, e.l2
            );
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dt_defaults_to_cfl() {
        let g = GridSpec::cube(8, 1.0).unwrap();
        let k = PhysicalConstants::normalized();
        let dt = SolverConfig::default().resolve_dt(&g, &k).unwrap();
        assert!((dt - 0.4 * 0.125).abs() < 1e-15);
    }

    #[test]
    fn cfl_guard() {
        let g = GridSpec::cube(8, 1.0).unwrap();
        let k = PhysicalConstants::normalized();
        let cfg = SolverConfig {
            dt: Some(0.51 * 0.125),
            ..SolverConfig::default()
        };
        assert!(matches!(cfg.resolve_dt(&g, &k), Err(Error::Cfl { .. })));
    }
}
