//! Two charges at rest seen by an observer moving with velocity `u`.
//!
//! In the observer's frame charge `q₁` at `A` is a current `-q₁ u δ(P - A)`
//! with magnetic field `B₁`, Coulomb field `E₁₁` and motion field
//! `E₁₂ = -(-u) × B₁`. Four predictions for the force on `q₂` at `B` are
//! reported side by side.

use std::f64::consts::PI;
use std::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::constants::PhysicalConstants;
use crate::error::{Error, Result};
use crate::vec3::Vec3;

/// `u` counts as perpendicular to `r` when `|u·r| ≤ PERP_TOLERANCE |u| |r|`.
pub const PERP_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoChargeScenario {
    pub q1: f64,
    pub q2: f64,
    pub a: Vec3,
    pub b: Vec3,
    /// Observer velocity relative to both charges.
    pub u: Vec3,
    pub constants: PhysicalConstants,
}

/// Fields of `q₁` at `B` in the moving observer's frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObserverFields {
    pub b1: Vec3,
    pub e11: Vec3,
    pub e12: Vec3,
}

/// The three contributions to the force on `q₂` and their sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModifiedForce {
    /// `-q₂ u × B₁`.
    pub magnetic: Vec3,
    /// `q₂ E₁₁`.
    pub coulomb: Vec3,
    /// `q₂ E₁₂`.
    pub motion: Vec3,
    pub total: Vec3,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForceComparison {
    pub beta: f64,
    pub f2: Vec3,
    pub f2_prime: Vec3,
    pub f2_double_prime: Vec3,
    /// Charge-scaled textbook force; only for `u ⊥ r`.
    pub f2_rel_textbook: Option<Vec3>,
    /// Charge scaling applied to the force that includes `E₁₂`; only for `u ⊥ r`.
    pub f2_rel_with_e12: Option<Vec3>,
}

pub const FORCE_COLUMNS: &str = "quantity,fx,fy,fz,norm,ratio_to_f2";

impl TwoChargeScenario {
    pub fn new(q1: f64, q2: f64, a: Vec3, b: Vec3, u: Vec3, constants: PhysicalConstants) -> Result<Self> {
        let s = Self { q1, q2, a, b, u, constants };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.a == self.b {
            return Err(Error::CoincidentCharges);
        }
        let speed = self.u.norm();
        if !(speed < self.constants.c()) {
            return Err(Error::Superluminal { speed, c: self.constants.c() });
        }
        Ok(())
    }

    /// `r = AB`.
    pub fn r(&self) -> Vec3 {
        self.b - self.a
    }

    pub fn beta(&self) -> f64 {
        self.constants.beta(self.u.norm())
    }

    pub fn u_perpendicular(&self) -> bool {
        let r = self.r();
        self.u.dot(r).abs() <= PERP_TOLERANCE * self.u.norm() * r.norm()
    }

    /// Coulomb forces `(F₁, F₂)` with `F₁ = -F₂`.
    pub fn rest_forces(&self) -> (Vec3, Vec3) {
        let r = self.r();
        let d = r.norm();
        let f2 = r * (self.q1 * self.q2 / (4.0 * PI * self.constants.eps0() * d * d * d));
        (-f2, f2)
    }

    pub fn observer_fields(&self) -> ObserverFields {
        let r = self.r();
        let d = r.norm();
        let d3 = d * d * d;
        let b1 = self.u.cross(r) * (-self.constants.mu0() * self.q1 / (4.0 * PI * d3));
        let e11 = r * (self.q1 / (4.0 * PI * self.constants.eps0() * d3));
        let e12 = -((-self.u).cross(b1));
        ObserverFields { b1, e11, e12 }
    }

    pub fn force_modified(&self) -> ModifiedForce {
        let f = self.observer_fields();
        let magnetic = -(self.u.cross(f.b1) * self.q2);
        let coulomb = f.e11 * self.q2;
        let motion = f.e12 * self.q2;
        ModifiedForce {
            magnetic,
            coulomb,
            motion,
            total: magnetic + coulomb + motion,
        }
    }

    /// `q₂ E₁₁ + (-q₂ u) × B₁`, the force without the motion field.
    pub fn force_classical_naive(&self) -> Vec3 {
        let f = self.observer_fields();
        f.e11 * self.q2 + (-self.u * self.q2).cross(f.b1)
    }

    /// The closed form `F₂ (1 - β²) + μ₀ q₁ q₂ (u·r) u / (4π r³)` of the naive force.
    pub fn force_classical_naive_closed_form(&self) -> Vec3 {
        let r = self.r();
        let d = r.norm();
        let beta = self.beta();
        let (_, f2) = self.rest_forces();
        f2 * (1.0 - beta * beta) + self.u * (self.constants.mu0() * self.q1 * self.q2 * self.u.dot(r) / (4.0 * PI * d * d * d))
    }

    pub fn force_relativistic_comparison(&self) -> ForceComparison {
        let beta = self.beta();
        let (_, f2) = self.rest_forces();
        let f2_prime = self.force_modified().total;
        let gamma_sq = 1.0 / (1.0 - beta * beta);
        let (textbook, with_e12) = if self.u_perpendicular() {
            // both charges scaled by 1/sqrt(1 - β²)
            (Some(self.force_classical_naive() * gamma_sq), Some(f2_prime * gamma_sq))
        } else {
            (None, None)
        };
        ForceComparison {
            beta,
            f2,
            f2_prime,
            f2_double_prime: self.force_classical_naive(),
            f2_rel_textbook: textbook,
            f2_rel_with_e12: with_e12,
        }
    }
}

impl ForceComparison {
    /// `(name, force)` rows in table order.
    pub fn rows(&self) -> [(&'static str, Option<Vec3>); 5] {
        [
            ("f2", Some(self.f2)),
            ("f2_prime", Some(self.f2_prime)),
            ("f2_double_prime", Some(self.f2_double_prime)),
            ("f2_rel_textbook", self.f2_rel_textbook),
            ("f2_rel_with_e12", self.f2_rel_with_e12),
        ]
    }

    pub fn ratio(&self, f: Vec3) -> f64 {
        f.norm() / self.f2.norm()
    }

    /// One row per quantity; unavailable quantities have empty cells.
    pub fn to_csv(&self) -> String {
        let mut out = format!("{FORCE_COLUMNS}\n");
        for (name, f) in self.rows() {
            match f {
                Some(f) => {
                    let _ = writeln!(out, "{name},{:e},{:e},{:e},{:e},{:e}", f[0], f[1], f[2], f.norm(), self.ratio(f));
                }
                None => {
                    let _ = writeln!(out, "{name},,,,,");
                }
            }
        }
        out
    }
}
