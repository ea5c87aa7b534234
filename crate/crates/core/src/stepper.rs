//! Classical RK4 time stepping shared by both systems.

use serde::{Deserialize, Serialize};

use crate::classical::classical_rhs;
use crate::constants::PhysicalConstants;
use crate::error::{Error, Result};
use crate::field::{ScalarField, VectorField};
use crate::modified::{mean_velocity_from_state, modified_rhs};
use crate::sources::Sources;
use crate::state::{EMState, Rates, SolverConfig};
use crate::vec3::Vec3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum System {
    Classical,
    #[default]
    Modified,
}

/// How ρ is advanced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChargeMode {
    /// Integrated from `∂ρ/∂t = -div J` with the discrete divergence.
    #[default]
    Evolved,
    /// Sampled from the source model's closed-form density at every stage.
    Prescribed,
}

/// `ū(t) = u0 + accel t + amplitude sin(omega t)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct PrescribedUbar {
    pub u0: Vec3,
    pub accel: Vec3,
    pub amplitude: Vec3,
    pub omega: f64,
}

impl PrescribedUbar {
    pub fn constant(u0: Vec3) -> Self {
        Self {
            u0,
            ..Self::default()
        }
    }

    pub fn value(&self, t: f64) -> Vec3 {
        self.u0 + self.accel * t + self.amplitude * (self.omega * t).sin()
    }

    pub fn rate(&self, t: f64) -> Vec3 {
        self.accel + self.amplitude * (self.omega * (self.omega * t).cos())
    }
}

/// Source of `ū` and `u̇̄` for the modified system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum UbarMode {
    Prescribed(PrescribedUbar),
    /// `ū` from [`mean_velocity_from_state`] at the start of each step and held
    /// across its stages; `u̇̄` by backward differences of the step history
    /// (zero on the first step, first order on the second, second order after).
    Derived {
        /// Density threshold; defaults to `1e-12 * max|ρ|` of the initial state.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        rho_floor: Option<f64>,
        /// Used while no node exceeds the floor.
        #[serde(default)]
        fallback: PrescribedUbar,
    },
}

impl Default for UbarMode {
    fn default() -> Self {
        UbarMode::Prescribed(PrescribedUbar::default())
    }
}

/// Explicit RK4 integrator for either system with prescribed currents.
pub struct Solver<'a> {
    system: System,
    constants: PhysicalConstants,
    dt: f64,
    sources: &'a dyn Sources,
    charge: ChargeMode,
    ubar: UbarMode,
    rho_floor: f64,
    history: Vec<Vec3>,
}

impl<'a> Solver<'a> {
    pub fn new(
        system: System,
        config: &SolverConfig,
        constants: PhysicalConstants,
        grid: &crate::grid::GridSpec,
        sources: &'a dyn Sources,
    ) -> Result<Self> {
        Ok(Self {
            system,
            constants,
            dt: config.resolve_dt(grid, &constants)?,
            sources,
            charge: ChargeMode::Evolved,
            ubar: UbarMode::default(),
            rho_floor: 0.0,
            history: Vec::new(),
        })
    }

    pub fn with_charge_mode(mut self, charge: ChargeMode) -> Self {
        self.charge = charge;
        self
    }

    pub fn with_ubar(mut self, ubar: UbarMode) -> Self {
        self.ubar = ubar;
        self
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn system(&self) -> System {
        self.system
    }

    /// Fills the source-controlled parts of `s` (J, prescribed ρ, ū, u̇̄) at `s.t`
    /// and resets the ū history. Call once before stepping.
    pub fn prepare(&mut self, s: &mut EMState) -> Result<()> {
        s.check_grids()?;
        let g = *s.grid();
        s.j = self.sources.current(&g, s.t);
        if self.charge == ChargeMode::Prescribed {
            s.rho = self.density(&g, s.t)?;
        }
        self.history.clear();
        if let UbarMode::Derived { rho_floor, .. } = self.ubar {
            self.rho_floor = rho_floor.unwrap_or(1e-12 * s.rho.max_norm());
        }
        let (u, du) = self.step_ubar(s, false);
        s.ubar = u;
        s.ubar_dot = du;
        Ok(())
    }

    fn density(&self, g: &crate::grid::GridSpec, t: f64) -> Result<ScalarField> {
        self.sources
            .density(g, t)
            .ok_or(Error::MissingSource("prescribed charge mode needs a closed-form density"))
    }

    /// ū and u̇̄ at the start of the step, recording ū in the history for derived mode.
    fn step_ubar(&mut self, s: &EMState, record: bool) -> (Vec3, Vec3) {
        if self.system == System::Classical {
            return (Vec3::ZERO, Vec3::ZERO);
        }
        match self.ubar {
            UbarMode::Prescribed(p) => (p.value(s.t), p.rate(s.t)),
            UbarMode::Derived { fallback, .. } => {
                let u = mean_velocity_from_state(s, self.rho_floor, fallback.value(s.t));
                let dt = self.dt;
                let du = match self.history.as_slice() {
                    [] => Vec3::ZERO,
                    [prev] => (u - *prev) / dt,
                    [.., p2, p1] => (u * 3.0 - *p1 * 4.0 + *p2) / (2.0 * dt),
                };
                if record {
                    self.history.push(u);
                    if self.history.len() > 2 {
                        self.history.remove(0);
                    }
                }
                (u, du)
            }
        }
    }

    fn rates(&self, s: &EMState) -> Result<Rates> {
        match self.system {
            System::Classical => classical_rhs(s, &self.constants),
            System::Modified => modified_rhs(s, &self.constants),
        }
    }

    fn stage(&self, base: &EMState, t: f64, ubar: (Vec3, Vec3), j: &VectorField, k: &Rates, f: f64) -> Result<EMState> {
        let rho = match self.charge {
            ChargeMode::Evolved => base.rho.axpy(f, &k.drho),
            ChargeMode::Prescribed => self.density(base.grid(), t)?,
        };
        Ok(EMState {
            t,
            e: base.e.axpy(f, &k.de),
            b: base.b.axpy(f, &k.db),
            rho,
            j: j.clone(),
            ubar: ubar.0,
            ubar_dot: ubar.1,
        })
    }

    fn stage_ubar(&self, t: f64, held: (Vec3, Vec3)) -> (Vec3, Vec3) {
        match (self.system, self.ubar) {
            (System::Modified, UbarMode::Prescribed(p)) => (p.value(t), p.rate(t)),
            _ => held,
        }
    }

    /// Advances `s` by one step of `dt`.
    pub fn step(&mut self, s: &EMState) -> Result<EMState> {
        s.check_grids()?;
        let g = *s.grid();
        let dt = self.dt;
        let t0 = s.t;
        let held = self.step_ubar(s, true);
        let mut y0 = s.clone();
        y0.ubar = held.0;
        y0.ubar_dot = held.1;

        let t_half = t0 + 0.5 * dt;
        let t1 = t0 + dt;
        let j_half = self.sources.current(&g, t_half);
        let j1 = self.sources.current(&g, t1);

        let k1 = self.rates(&y0)?;
        let y2 = self.stage(&y0, t_half, self.stage_ubar(t_half, held), &j_half, &k1, 0.5 * dt)?;
        let k2 = self.rates(&y2)?;
        let y3 = self.stage(&y0, t_half, self.stage_ubar(t_half, held), &j_half, &k2, 0.5 * dt)?;
        let k3 = self.rates(&y3)?;
        let y4 = self.stage(&y0, t1, self.stage_ubar(t1, held), &j1, &k3, dt)?;
        let k4 = self.rates(&y4)?;

        let w = dt / 6.0;
        let combine_v = |base: &VectorField, a: &VectorField, b: &VectorField, c: &VectorField, d: &VectorField| {
            let sum = a.add(&b.scale(2.0)).add(&c.scale(2.0)).add(d);
            base.axpy(w, &sum)
        };
        let rho = match self.charge {
            ChargeMode::Evolved => {
                let sum = k1.drho.add(&k2.drho.scale(2.0)).add(&k3.drho.scale(2.0)).add(&k4.drho);
                y0.rho.axpy(w, &sum)
            }
            ChargeMode::Prescribed => self.density(&g, t1)?,
        };
        let ub = self.stage_ubar(t1, held);
        let mut next = EMState {
            t: t1,
            e: combine_v(&y0.e, &k1.de, &k2.de, &k3.de, &k4.de),
            b: combine_v(&y0.b, &k1.db, &k2.db, &k3.db, &k4.db),
            rho,
            j: j1,
            ubar: ub.0,
            ubar_dot: ub.1,
        };
        if !next.is_finite() {
            return Err(Error::Diverged { t: t1 });
        }
        if let (System::Modified, UbarMode::Derived { fallback, .. }) = (self.system, self.ubar) {
            // reported ū is current; u̇̄ stays the value used during the step
            next.ubar = mean_velocity_from_state(&next, self.rho_floor, fallback.value(t1));
        }
        Ok(next)
    }

    /// Takes `steps` steps from `s`, calling `observe` on the initial and every new state.
    pub fn run(&mut self, mut s: EMState, steps: usize, mut observe: impl FnMut(&EMState)) -> Result<EMState> {
        self.prepare(&mut s)?;
        observe(&s);
        for _ in 0..steps {
            s = self.step(&s)?;
            observe(&s);
        }
        Ok(s)
    }
}

/// One RK4 step of the vacuum system with ū ignored.
pub fn step_classical(s: &EMState, config: &SolverConfig, k: PhysicalConstants, sources: &dyn Sources) -> Result<EMState> {
    let mut solver = Solver::new(System::Classical, config, k, s.grid(), sources)?;
    solver.step(s)
}

/// One RK4 step of the modified system using the `ū`, `u̇̄` carried by `s`, held over the step.
pub fn step_modified(s: &EMState, config: &SolverConfig, k: PhysicalConstants, sources: &dyn Sources) -> Result<EMState> {
    let mut solver = Solver::new(System::Modified, config, k, s.grid(), sources)?.with_ubar(UbarMode::Prescribed(PrescribedUbar {
        u0: s.ubar - s.ubar_dot * s.t,
        accel: s.ubar_dot,
        ..PrescribedUbar::default()
    }));
    solver.step(s)
}
