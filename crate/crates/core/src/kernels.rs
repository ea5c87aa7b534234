//! Closed-form fields of point charges and quadrature over charge clouds.
//!
//! All kernels are free-space expressions: the grid of a [`ChargeCloud`] only
//! supplies quadrature nodes, no periodic images are summed.
//!
//! For a charge `q` at `O` moving with velocity `u`, with `r = P - O`:
//!
//! * Coulomb: `E₁ = q r / (4π ε₀ r³)`
//! * Biot–Savart: `B = μ₀ q (u × r) / (4π r³)`
//! * motion-induced: `E₂ = -u × B = μ₀ q (|u|² r - (u·r) u) / (4π r³)`
//! * total: `E = E₁ + E₂`, and `E + u × B = E₁` for every `P ≠ O`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::constants::PhysicalConstants;
use crate::error::{Error, Result};
use crate::field::{ScalarField, VectorField};
use crate::vec3::Vec3;

pub const DEFAULT_CUTOFF: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointCharge {
    pub q: f64,
    pub position: Vec3,
    pub velocity: Vec3,
}

impl PointCharge {
    /// A charge moving slower than light.
    pub fn new(q: f64, position: Vec3, velocity: Vec3, k: &PhysicalConstants) -> Result<Self> {
        let pc = Self {
            q,
            position,
            velocity,
        };
        pc.validate(k)?;
        Ok(pc)
    }

    pub fn at_rest(q: f64, position: Vec3) -> Self {
        Self {
            q,
            position,
            velocity: Vec3::ZERO,
        }
    }

    pub fn validate(&self, k: &PhysicalConstants) -> Result<()> {
        let speed = self.velocity.norm();
        if !(speed < k.c()) {
            return Err(Error::Superluminal { speed, c: k.c() });
        }
        Ok(())
    }
}

/// What quadrature does with a cloud node lying within the cutoff of the evaluation point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SingularPolicy {
    /// Omit that node's contribution.
    #[default]
    SkipCell,
    Error,
}

/// Kernel evaluator: constants plus the singularity knobs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kernels {
    pub constants: PhysicalConstants,
    pub cutoff: f64,
    pub policy: SingularPolicy,
}

impl Kernels {
    pub fn new(constants: PhysicalConstants) -> Self {
        Self {
            constants,
            cutoff: DEFAULT_CUTOFF,
            policy: SingularPolicy::default(),
        }
    }

    pub fn with_cutoff(mut self, cutoff: f64) -> Self {
        self.cutoff = cutoff;
        self
    }

    pub fn with_policy(mut self, policy: SingularPolicy) -> Self {
        self.policy = policy;
        self
    }

    fn separation(&self, source: Vec3, p: Vec3) -> Result<(Vec3, f64)> {
        let r = p - source;
        let d = r.norm();
        if !(d >= self.cutoff) {
            return Err(Error::SingularPoint {
                point: p,
                source_pos: source,
                cutoff: self.cutoff,
            });
        }
        Ok((r, d))
    }

    fn check_speed(&self, pc: &PointCharge) -> Result<()> {
        pc.validate(&self.constants)
    }

    pub fn coulomb_e(&self, pc: &PointCharge, p: Vec3) -> Result<Vec3> {
        let (r, d) = self.separation(pc.position, p)?;
        Ok(r * (pc.q / (4.0 * PI * self.constants.eps0() * d * d * d)))
    }

    pub fn biot_savart_b(&self, pc: &PointCharge, p: Vec3) -> Result<Vec3> {
        self.check_speed(pc)?;
        let (r, d) = self.separation(pc.position, p)?;
        Ok(pc.velocity.cross(r) * (self.constants.mu0() * pc.q / (4.0 * PI * d * d * d)))
    }

    /// Field attributed to the motion of the charge's magnetic field, closed form.
    pub fn motion_e2(&self, pc: &PointCharge, p: Vec3) -> Result<Vec3> {
        self.check_speed(pc)?;
        let (r, d) = self.separation(pc.position, p)?;
        let u = pc.velocity;
        let pre = self.constants.mu0() * pc.q / (4.0 * PI * d * d * d);
        Ok((r * u.norm_sq() - u * u.dot(r)) * pre)
    }

    /// `coulomb_e + motion_e2`.
    pub fn total_e_moving(&self, pc: &PointCharge, p: Vec3) -> Result<Vec3> {
        Ok(self.coulomb_e(pc, p)? + self.motion_e2(pc, p)?)
    }

    /// The same field written as `(1 + β²) E₁ - μ₀ q (u·r) u / (4π r³)`.
    pub fn total_e_moving_beta_form(&self, pc: &PointCharge, p: Vec3) -> Result<Vec3> {
        self.check_speed(pc)?;
        let (r, d) = self.separation(pc.position, p)?;
        let u = pc.velocity;
        let beta = self.constants.beta(u.norm());
        let d3 = d * d * d;
        let coulomb = r * (pc.q / (4.0 * PI * self.constants.eps0() * d3));
        Ok(coulomb * (1.0 + beta * beta) - u * (self.constants.mu0() * pc.q * u.dot(r) / (4.0 * PI * d3)))
    }

    /// `E + u × B`, which reduces to the Coulomb field.
    pub fn invariant_combo(&self, pc: &PointCharge, p: Vec3) -> Result<Vec3> {
        Ok(self.total_e_moving(pc, p)? + pc.velocity.cross(self.biot_savart_b(pc, p)?))
    }

    /// Visits `(weight, u(M), M)` for every masked node that is not singular at `p`.
    fn for_cloud_nodes(
        &self,
        cloud: &ChargeCloud,
        p: Vec3,
        mut f: impl FnMut(f64, Vec3, Vec3),
    ) -> Result<()> {
        let g = cloud.rho.grid();
        let dv = g.cell_volume();
        for idx in 0..g.len() {
            if !cloud.mask[idx] {
                continue;
            }
            let m = g.position_of(idx);
            if (p - m).norm() < self.cutoff {
                match self.policy {
                    SingularPolicy::SkipCell => continue,
                    SingularPolicy::Error => {
                        return Err(Error::SingularPoint {
                            point: p,
                            source_pos: m,
                            cutoff: self.cutoff,
                        })
                    }
                }
            }
            f(cloud.rho.values()[idx] * dv, cloud.u.values()[idx], m);
        }
        Ok(())
    }

    /// Midpoint-rule superposition `∫ B_M(P) dV(M)` over the cloud support.
    pub fn cloud_b_superposition(&self, cloud: &ChargeCloud, p: Vec3) -> Result<Vec3> {
        let mut acc = Vec3::ZERO;
        self.for_cloud_nodes(cloud, p, |dq, u, m| {
            let r = p - m;
            let d = r.norm();
            acc += u.cross(r) * (self.constants.mu0() * dq / (4.0 * PI * d * d * d));
        })?;
        Ok(acc)
    }

    /// Coulomb superposition `∫ E₁,M(P) dV(M)` over the cloud support.
    pub fn cloud_coulomb_e(&self, cloud: &ChargeCloud, p: Vec3) -> Result<Vec3> {
        let mut acc = Vec3::ZERO;
        self.for_cloud_nodes(cloud, p, |dq, _, m| {
            let r = p - m;
            let d = r.norm();
            acc += r * (dq / (4.0 * PI * self.constants.eps0() * d * d * d));
        })?;
        Ok(acc)
    }

    /// `ū × B_sup(P) - ∫ u(M) × B_M(P) dV(M)`.
    ///
    /// Zero when `B_sup` satisfies the implicit mean-velocity definition of the
    /// cloud's magnetic field; in general it measures how far the Biot–Savart
    /// superposition is from doing so.
    pub fn b_definition_residual(&self, cloud: &ChargeCloud, p: Vec3) -> Result<Vec3> {
        let ubar = cloud.mean_velocity()?;
        let b = self.cloud_b_superposition(cloud, p)?;
        let mut weighted = Vec3::ZERO;
        self.for_cloud_nodes(cloud, p, |dq, u, m| {
            let r = p - m;
            let d = r.norm();
            let bm = u.cross(r) * (self.constants.mu0() * dq / (4.0 * PI * d * d * d));
            weighted += u.cross(bm);
        })?;
        Ok(ubar.cross(b) - weighted)
    }
}

/// Charges sampled on grid nodes: density, velocity and a support mask.
#[derive(Debug, Clone, PartialEq)]
pub struct ChargeCloud {
    rho: ScalarField,
    u: VectorField,
    mask: Vec<bool>,
}

impl ChargeCloud {
    /// Support is every node with nonzero density.
    pub fn new(rho: ScalarField, u: VectorField) -> Result<Self> {
        let mask = rho.values().iter().map(|&v| v != 0.0).collect();
        Self::with_mask(rho, u, mask)
    }

    pub fn with_mask(rho: ScalarField, u: VectorField, mask: Vec<bool>) -> Result<Self> {
        if !rho.grid().same_as(u.grid()) {
            return Err(Error::GridMismatch("cloud density and velocity"));
        }
        if mask.len() != rho.grid().len() {
            return Err(Error::GridMismatch("cloud mask length"));
        }
        Ok(Self { rho, u, mask })
    }

    pub fn rho(&self) -> &ScalarField {
        &self.rho
    }

    pub fn velocity(&self) -> &VectorField {
        &self.u
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    /// Volume of the support, `count * h³`.
    pub fn support_volume(&self) -> f64 {
        self.mask.iter().filter(|&&m| m).count() as f64 * self.rho.grid().cell_volume()
    }

    /// `J = ρ u`.
    pub fn current(&self) -> VectorField {
        self.rho.times_vector(&self.u)
    }

    /// Volume average of `u` over the support.
    pub fn mean_velocity(&self) -> Result<Vec3> {
        let volume = self.support_volume();
        if volume <= 0.0 {
            return Err(Error::EmptySupport);
        }
        let dv = self.rho.grid().cell_volume();
        let sum = self
            .u
            .values()
            .iter()
            .zip(&self.mask)
            .filter(|(_, &m)| m)
            .fold(Vec3::ZERO, |acc, (u, _)| acc + *u * dv);
        Ok(sum / volume)
    }
}
