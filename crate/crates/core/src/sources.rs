//! Prescribed sources and the scenario catalog.
//!
//! Each catalog entry supplies the current density `J(x, t)` the solvers treat
//! as given data, optionally a closed-form charge density, and initial fields.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::constants::PhysicalConstants;
use crate::error::{Error, Result};
use crate::field::{cross_const, ScalarField, VectorField};
use crate::grid::GridSpec;
use crate::ops;
use crate::spectral;
use crate::state::EMState;
use crate::vec3::Vec3;

pub trait Sources: Send + Sync {
    fn current(&self, grid: &GridSpec, t: f64) -> VectorField;

    /// Closed-form charge density consistent with [`Sources::current`], if the model has one.
    fn density(&self, _grid: &GridSpec, _t: f64) -> Option<ScalarField> {
        None
    }
}

/// No charges, no currents.
#[derive(Debug, Clone, Copy, Default)]
pub struct SourceFree;

impl Sources for SourceFree {
    fn current(&self, grid: &GridSpec, _t: f64) -> VectorField {
        VectorField::zeros(*grid)
    }

    fn density(&self, grid: &GridSpec, _t: f64) -> Option<ScalarField> {
        Some(ScalarField::zeros(*grid))
    }
}

/// Modified Bessel function I₀ by its power series.
pub fn bessel_i0(x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    for m in 1..200 {
        term *= q / (m as f64 * m as f64);
        sum += term;
        if term < 1e-17 * sum {
            break;
        }
    }
    sum
}

/// A smooth periodic blob translating at constant velocity.
///
/// Shape: `Π_a exp(κ (cos(2π s_a / L_a) - 1))` with `s = x - center - velocity t`,
/// a periodised Gaussian of width about `L / (2π √κ)`. The exact box mean of the
/// shape is subtracted so the periodic box carries no net charge; the uniform
/// compensating background drifts with the blob, so `J = ρ v` everywhere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianCloud {
    pub amplitude: f64,
    pub center: Vec3,
    pub kappa: f64,
    pub velocity: Vec3,
}

impl GaussianCloud {
    fn shape_mean(&self) -> f64 {
        (bessel_i0(self.kappa) * (-self.kappa).exp()).powi(3)
    }

    pub fn density_at(&self, grid: &GridSpec, x: Vec3, t: f64) -> f64 {
        let l = grid.lengths();
        let s = x - self.center - self.velocity * t;
        let arg: f64 = (0..3)
            .map(|a| (2.0 * PI * s[a] / l[a]).cos() - 1.0)
            .sum();
        self.amplitude * ((self.kappa * arg).exp() - self.shape_mean())
    }

    /// Initial fields: `E_c` from the discrete Poisson solve, then the uniform-velocity
    /// Biot–Savart superposition `B = v × E_c / c²` and `E = E_c - v × B`.
    pub fn initial_state(&self, grid: &GridSpec, k: &PhysicalConstants) -> EMState {
        let rho = self.density(grid, 0.0).expect("closed form");
        let e_c = spectral::electrostatic_field(&rho, k);
        let b = cross_const(self.velocity, &e_c).scale(1.0 / (k.c() * k.c()));
        let e = e_c.sub(&cross_const(self.velocity, &b));
        let j = self.current(grid, 0.0);
        EMState {
            t: 0.0,
            e,
            b,
            rho,
            j,
            ubar: self.velocity,
            ubar_dot: Vec3::ZERO,
        }
    }
}

impl Sources for GaussianCloud {
    fn current(&self, grid: &GridSpec, t: f64) -> VectorField {
        self.density(grid, t).expect("closed form").times_const(self.velocity)
    }

    fn density(&self, grid: &GridSpec, t: f64) -> Option<ScalarField> {
        let g = *grid;
        Some(ScalarField::from_fn(g, |x| self.density_at(&g, x, t)))
    }
}

/// One travelling mode `E = a sin(k·x - ω t + φ)`, `B = k̂ × E / c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveMode {
    /// Integer wave numbers per box length.
    pub m: [i32; 3],
    pub amplitude: Vec3,
    #[serde(default)]
    pub phase: f64,
}

/// Superposition of source-free plane waves on the periodic box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlaneWave {
    pub modes: Vec<WaveMode>,
}

impl PlaneWave {
    /// A single wave along +x polarised in y.
    pub fn along_x(amplitude: f64) -> Self {
        Self {
            modes: vec![WaveMode {
                m: [1, 0, 0],
                amplitude: Vec3::new(0.0, amplitude, 0.0),
                phase: 0.0,
            }],
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (i, mode) in self.modes.iter().enumerate() {
            if mode.m == [0, 0, 0] {
                return Err(Error::Config {
                    path: format!("source.modes[{i}].m"),
                    msg: "wave vector must be nonzero".into(),
                });
            }
            let kdir = Vec3(mode.m.map(|v| v as f64));
            if mode.amplitude.dot(kdir).abs() > 1e-12 * mode.amplitude.norm() * kdir.norm() {
                return Err(Error::Config {
                    path: format!("source.modes[{i}].amplitude"),
                    msg: "polarisation must be transverse to the wave vector".into(),
                });
            }
        }
        Ok(())
    }

    fn wave_vector(grid: &GridSpec, m: [i32; 3]) -> Vec3 {
        let l = grid.lengths();
        Vec3::new(
            2.0 * PI * m[0] as f64 / l[0],
            2.0 * PI * m[1] as f64 / l[1],
            2.0 * PI * m[2] as f64 / l[2],
        )
    }

    /// Continuum solution of the vacuum equations at time `t`.
    pub fn exact_fields(&self, grid: &GridSpec, t: f64, k: &PhysicalConstants) -> (VectorField, VectorField) {
        let g = *grid;
        let c = k.c();
        let modes: Vec<(Vec3, f64, Vec3, Vec3)> = self
            .modes
            .iter()
            .map(|mode| {
                let kv = Self::wave_vector(&g, mode.m);
                let bdir = kv.cross(mode.amplitude) / (kv.norm() * c);
                (kv, c * kv.norm(), mode.amplitude, bdir)
            })
            .collect();
        let phases: Vec<f64> = self.modes.iter().map(|m| m.phase).collect();
        let e = VectorField::from_fn(g, |x| {
            modes
                .iter()
                .zip(&phases)
                .fold(Vec3::ZERO, |acc, ((kv, w, a, _), ph)| acc + *a * (kv.dot(x) - w * t + ph).sin())
        });
        let b = VectorField::from_fn(g, |x| {
            modes
                .iter()
                .zip(&phases)
                .fold(Vec3::ZERO, |acc, ((kv, w, _, bd), ph)| acc + *bd * (kv.dot(x) - w * t + ph).sin())
        });
        (e, b)
    }

    pub fn initial_state(&self, grid: &GridSpec, k: &PhysicalConstants) -> EMState {
        let (e, b) = self.exact_fields(grid, 0.0, k);
        EMState {
            e,
            b,
            ..EMState::zeros(*grid)
        }
    }
}

impl Sources for PlaneWave {
    fn current(&self, grid: &GridSpec, _t: f64) -> VectorField {
        VectorField::zeros(*grid)
    }

    fn density(&self, grid: &GridSpec, _t: f64) -> Option<ScalarField> {
        Some(ScalarField::zeros(*grid))
    }
}

/// Uniform charge density moving at constant velocity: `ρ = ρ₀`, `J = ρ₀ v`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniformDrift {
    pub density: f64,
    pub velocity: Vec3,
}

impl UniformDrift {
    pub fn initial_state(&self, grid: &GridSpec) -> EMState {
        EMState {
            rho: ScalarField::constant(*grid, self.density),
            j: self.current(grid, 0.0),
            ubar: self.velocity,
            ..EMState::zeros(*grid)
        }
    }
}

impl Sources for UniformDrift {
    fn current(&self, grid: &GridSpec, _t: f64) -> VectorField {
        VectorField::constant(*grid, self.velocity * self.density)
    }

    fn density(&self, grid: &GridSpec, _t: f64) -> Option<ScalarField> {
        Some(ScalarField::constant(*grid, self.density))
    }
}

/// Static field `B = B₀ ẑ (sin(2π x/Lx) + sin(2π y/Ly))` held up by the neutral
/// current `J = curl B / μ₀`, taken with the discrete curl so the state is an
/// exact fixed point of the discrete classical system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Magnetostatic {
    pub amplitude: f64,
}

impl Magnetostatic {
    pub fn field(&self, grid: &GridSpec) -> VectorField {
        let l = grid.lengths();
        let b0 = self.amplitude;
        VectorField::from_fn(*grid, |x| {
            Vec3::new(
                0.0,
                0.0,
                b0 * ((2.0 * PI * x.x() / l[0]).sin() + (2.0 * PI * x.y() / l[1]).sin()),
            )
        })
    }

    /// Continuum `curl B`.
    pub fn curl_exact(&self, grid: &GridSpec) -> VectorField {
        let l = grid.lengths();
        let (kx, ky) = (2.0 * PI / l[0], 2.0 * PI / l[1]);
        let b0 = self.amplitude;
        VectorField::from_fn(*grid, |x| {
            Vec3::new(b0 * ky * (ky * x.y()).cos(), -b0 * kx * (kx * x.x()).cos(), 0.0)
        })
    }

    pub fn initial_state(&self, grid: &GridSpec, k: &PhysicalConstants) -> EMState {
        let b = self.field(grid);
        let j = ops::curl(&b).scale(1.0 / k.mu0());
        EMState {
            b,
            j,
            ..EMState::zeros(*grid)
        }
    }
}

/// Holds a precomputed static current.
#[derive(Debug, Clone)]
pub struct StaticCurrent {
    pub j: VectorField,
}

impl Sources for StaticCurrent {
    fn current(&self, _grid: &GridSpec, _t: f64) -> VectorField {
        self.j.clone()
    }

    fn density(&self, grid: &GridSpec, _t: f64) -> Option<ScalarField> {
        Some(ScalarField::zeros(*grid))
    }
}

/// Named entries of the scenario catalog.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SourceSpec {
    GaussianCloud(GaussianCloud),
    PlaneWave(PlaneWave),
    UniformDrift(UniformDrift),
    Magnetostatic(Magnetostatic),
    /// Everything zero.
    Zero,
}

impl SourceSpec {
    pub fn name(&self) -> &'static str {
        match self {
            SourceSpec::GaussianCloud(_) => "gaussian-cloud",
            SourceSpec::PlaneWave(_) => "plane-wave",
            SourceSpec::UniformDrift(_) => "uniform-drift",
            SourceSpec::Magnetostatic(_) => "magnetostatic",
            SourceSpec::Zero => "zero",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            SourceSpec::PlaneWave(p) => p.validate(),
            SourceSpec::GaussianCloud(c) if !(c.kappa > 0.0) => Err(Error::Config {
                path: "source.kappa".into(),
                msg: "kappa must be positive".into(),
            }),
            _ => Ok(()),
        }
    }

    pub fn initial_state(&self, grid: &GridSpec, k: &PhysicalConstants) -> EMState {
        match self {
            SourceSpec::GaussianCloud(c) => c.initial_state(grid, k),
            SourceSpec::PlaneWave(p) => p.initial_state(grid, k),
            SourceSpec::UniformDrift(u) => u.initial_state(grid),
            SourceSpec::Magnetostatic(m) => m.initial_state(grid, k),
            SourceSpec::Zero => EMState::zeros(*grid),
        }
    }

    /// The source model driving the solver for this entry.
    pub fn sources(&self, grid: &GridSpec, k: &PhysicalConstants) -> Box<dyn Sources> {
        match self {
            SourceSpec::GaussianCloud(c) => Box::new(*c),
            SourceSpec::PlaneWave(p) => Box::new(p.clone()),
            SourceSpec::UniformDrift(u) => Box::new(*u),
            SourceSpec::Magnetostatic(m) => Box::new(StaticCurrent {
                j: m.initial_state(grid, k).j,
            }),
            SourceSpec::Zero => Box::new(SourceFree),
        }
    }
}
