//! Galilean boosts `x' = x - t v₀` and the trajectory residual harness.
//!
//! Primed data are sampled on the same lattice as the unprimed data:
//!
//! ```text
//! ρ'(x', t) = ρ(x' + t v₀, t)          u' = u(x' + t v₀, t) - v₀
//! J'(x', t) = J(x' + t v₀, t) - ρ(x' + t v₀, t) v₀
//! E'(x', t) = E(x' + t v₀, t) + v₀ × B(x' + t v₀, t)
//! B'(x', t) = B(x' + t v₀, t)          ū' = ū - v₀,  u̇̄' = u̇̄
//! ```
//!
//! A shift that is a whole number of cells along every axis is an exact roll;
//! any other shift uses periodic trilinear interpolation.

use std::ops::{Add, Mul, Sub};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classical::vacuum_ampere;
use crate::constants::PhysicalConstants;
use crate::error::{Error, Result};
use crate::field::{cross_const, ScalarField, VectorField};
use crate::grid::GridSpec;
use crate::modified::{modified_gauss_field, modified_terms};
use crate::ops;
use crate::sources::Sources;
use crate::state::{EMState, ResidualReport};
use crate::stepper::{Solver, System};
use crate::vec3::Vec3;

/// Shifts closer than this (in cells) to a lattice vector are treated as exact rolls.
pub const LATTICE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FrameBoost {
    pub v0: Vec3,
}

impl FrameBoost {
    pub fn new(v0: Vec3) -> Result<Self> {
        if !v0.is_finite() {
            return Err(Error::Config {
                path: "boost.v0".into(),
                msg: format!("boost velocity must be finite, got {v0:?}"),
            });
        }
        Ok(Self { v0 })
    }

    pub fn inverse(&self) -> Self {
        Self { v0: -self.v0 }
    }

    /// The spatial offset `t v₀` at which primed data are sampled.
    pub fn offset(&self, t: f64) -> Vec3 {
        self.v0 * t
    }

    /// True when `t v₀` is a lattice vector of `grid`.
    pub fn is_lattice_aligned(&self, grid: &GridSpec, t: f64) -> bool {
        let s = self.offset(t) / grid.h();
        (0..3).all(|a| (s[a] - s[a].round()).abs() < LATTICE_TOLERANCE)
    }
}

fn shift_values<T>(grid: &GridSpec, values: &[T], d: Vec3) -> Vec<T>
where
    T: Copy + Send + Sync + Add<Output = T> + Sub<Output = T> + Mul<f64, Output = T>,
{
    let dims = grid.dims();
    let s = d / grid.h();
    let mut whole = [0usize; 3];
    let mut frac = [0.0f64; 3];
    for a in 0..3 {
        let mut fl = s[a].floor();
        let mut fr = s[a] - fl;
        if fr < LATTICE_TOLERANCE {
            fr = 0.0;
        } else if fr > 1.0 - LATTICE_TOLERANCE {
            fr = 0.0;
            fl += 1.0;
        }
        whole[a] = (fl as i64).rem_euclid(dims[a] as i64) as usize;
        frac[a] = fr;
    }
    (0..grid.len())
        .into_par_iter()
        .map(|idx| {
            let i = grid.coords(idx);
            let mut lo = [0usize; 3];
            let mut hi = [0usize; 3];
            for a in 0..3 {
                lo[a] = (i[a] + whole[a]) % dims[a];
                hi[a] = (lo[a] + 1) % dims[a];
            }
            if frac == [0.0; 3] {
                return values[grid.index(lo)];
            }
            // nested lerps `a + f (b - a)` reproduce constants exactly
            let lerp = |a: T, b: T, f: f64| if f == 0.0 { a } else { a + (b - a) * f };
            let at = |x: usize, y: usize, z: usize| values[grid.index([x, y, z])];
            let [fx, fy, fz] = frac;
            let along_x = |y: usize, z: usize| lerp(at(lo[0], y, z), at(hi[0], y, z), fx);
            let along_y = |z: usize| lerp(along_x(lo[1], z), along_x(hi[1], z), fy);
            lerp(along_y(lo[2]), along_y(hi[2]), fz)
        })
        .collect()
}

/// `g(x) = f(x + d)` on the periodic grid.
pub fn shift_scalar(f: &ScalarField, d: Vec3) -> ScalarField {
    let g = *f.grid();
    ScalarField::from_values(g, shift_values(&g, f.values(), d)).expect("same length")
}

/// `g(x) = f(x + d)` on the periodic grid.
pub fn shift_vector(f: &VectorField, d: Vec3) -> VectorField {
    let g = *f.grid();
    VectorField::from_values(g, shift_values(&g, f.values(), d)).expect("same length")
}

/// Primed `(ρ', u', J')` at time `t`.
pub fn boost_sources(
    rho: &ScalarField,
    u: &VectorField,
    j: &VectorField,
    boost: &FrameBoost,
    t: f64,
) -> Result<(ScalarField, VectorField, VectorField)> {
    if !rho.grid().same_as(u.grid()) || !rho.grid().same_as(j.grid()) {
        return Err(Error::GridMismatch("rho, u and J"));
    }
    let d = boost.offset(t);
    let rho_s = shift_scalar(rho, d);
    let u_p = shift_vector(u, d).map(|v| v - boost.v0);
    let j_p = shift_vector(j, d).sub(&rho_s.times_const(boost.v0));
    Ok((rho_s, u_p, j_p))
}

/// Primed `(E', B')` at time `t`.
pub fn boost_fields(e: &VectorField, b: &VectorField, boost: &FrameBoost, t: f64) -> Result<(VectorField, VectorField)> {
    if !e.grid().same_as(b.grid()) {
        return Err(Error::GridMismatch("E and B"));
    }
    let d = boost.offset(t);
    let b_p = shift_vector(b, d);
    let e_p = shift_vector(e, d).add(&cross_const(boost.v0, &b_p));
    Ok((e_p, b_p))
}

/// The whole state seen from the primed frame at the state's own time.
pub fn boost_state(s: &EMState, boost: &FrameBoost) -> Result<EMState> {
    s.check_grids()?;
    let (e, b) = boost_fields(&s.e, &s.b, boost, s.t)?;
    let d = boost.offset(s.t);
    let rho = shift_scalar(&s.rho, d);
    let j = shift_vector(&s.j, d).sub(&rho.times_const(boost.v0));
    Ok(EMState {
        t: s.t,
        e,
        b,
        rho,
        j,
        ubar: s.ubar - boost.v0,
        ubar_dot: s.ubar_dot,
    })
}

/// States on one grid at uniformly spaced times.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    states: Vec<EMState>,
    spacing: f64,
}

impl Trajectory {
    /// Needs at least three states (one centered time difference).
    pub fn new(states: Vec<EMState>) -> Result<Self> {
        if states.len() < 3 {
            return Err(Error::Trajectory(format!(
                "need at least 3 states for centered differences, got {}",
                states.len()
            )));
        }
        let g = *states[0].grid();
        for s in &states {
            s.check_grids()?;
            if !s.grid().same_as(&g) {
                return Err(Error::Trajectory("states live on different grids".into()));
            }
        }
        let spacing = states[1].t - states[0].t;
        if !(spacing > 0.0) {
            return Err(Error::Trajectory("times must increase".into()));
        }
        for w in states.windows(2) {
            let d = w[1].t - w[0].t;
            if (d - spacing).abs() > 1e-9 * spacing {
                return Err(Error::Trajectory(format!(
                    "non-uniform spacing: {d:e} vs {spacing:e} at t = {:e}",
                    w[0].t
                )));
            }
        }
        Ok(Self { states, spacing })
    }

    pub fn states(&self) -> &[EMState] {
        &self.states
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn grid(&self) -> &GridSpec {
        self.states[0].grid()
    }

    pub fn into_states(self) -> Vec<EMState> {
        self.states
    }
}

/// Runs `solver` for `slices - 1` intervals of `every` steps and stores every interval end.
pub fn record_trajectory(solver: &mut Solver<'_>, mut s: EMState, slices: usize, every: usize) -> Result<Trajectory> {
    solver.prepare(&mut s)?;
    let mut states = vec![s.clone()];
    for _ in 1..slices {
        for _ in 0..every {
            s = solver.step(&s)?;
        }
        states.push(s.clone());
    }
    Trajectory::new(states)
}

/// Max and RMS accumulated over the interior time slices.
#[derive(Default)]
struct SliceNorms {
    max: f64,
    sum_sq: f64,
    count: usize,
}

impl SliceNorms {
    fn scalar(&mut self, f: &ScalarField) {
        self.max = self.max.max(f.max_norm());
        self.sum_sq += f.rms().powi(2);
        self.count += 1;
    }

    fn vector(&mut self, f: &VectorField) {
        self.max = self.max.max(f.max_norm());
        self.sum_sq += f.rms().powi(2);
        self.count += 1;
    }

    fn push(self, report: &mut ResidualReport, equation: &str, h: f64, v0: Vec3) {
        report.entries.push(crate::state::ResidualEntry {
            equation: equation.into(),
            max: self.max,
            l2: (self.sum_sq / self.count.max(1) as f64).sqrt(),
            h,
            v0,
        });
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Law {
    Modified,
    Classical,
}

fn trajectory_residual(traj: &Trajectory, boost: &FrameBoost, k: &PhysicalConstants, law: Law) -> Result<ResidualReport> {
    let primed: Vec<EMState> = traj
        .states()
        .iter()
        .map(|s| boost_state(s, boost))
        .collect::<Result<_>>()?;
    let two_dt = 2.0 * traj.spacing();
    let mut faraday = SliceNorms::default();
    let mut ampere = SliceNorms::default();
    let mut gauss = SliceNorms::default();
    let mut div_b = SliceNorms::default();
    let mut continuity = SliceNorms::default();
    for w in primed.windows(3) {
        let (prev, s, next) = (&w[0], &w[1], &w[2]);
        let db_dt = next.b.sub(&prev.b).scale(1.0 / two_dt);
        let de_dt = next.e.sub(&prev.e).scale(1.0 / two_dt);
        let drho_dt = next.rho.sub(&prev.rho).scale(1.0 / two_dt);
        faraday.vector(&db_dt.add(&ops::curl(&s.e)));
        match law {
            Law::Modified => {
                ampere.vector(&de_dt.sub(&modified_terms(s, k)?.de()));
                gauss.scalar(&modified_gauss_field(s, k));
            }
            Law::Classical => {
                ampere.vector(&de_dt.sub(&vacuum_ampere(&s.b, &s.j, k)));
                gauss.scalar(&ops::divergence(&s.e).axpy(-1.0 / k.eps0(), &s.rho));
            }
        }
        div_b.scalar(&ops::divergence(&s.b));
        continuity.scalar(&drho_dt.add(&ops::divergence(&s.j)));
    }
    let h = traj.grid().h();
    let v0 = boost.v0;
    let mut report = ResidualReport::default();
    faraday.push(&mut report, "faraday", h, v0);
    let (a, g) = match law {
        Law::Modified => ("ampere_modified", "gauss_modified"),
        Law::Classical => ("ampere", "gauss"),
    };
    ampere.push(&mut report, a, h, v0);
    gauss.push(&mut report, g, h, v0);
    div_b.push(&mut report, "div_b", h, v0);
    continuity.push(&mut report, "continuity", h, v0);
    Ok(report)
}

/// Residuals of the primed modified system (Faraday, modified Ampère, modified
/// Gauss, div B, continuity) on the boosted trajectory, with centered time
/// differences at fixed `x'` over the interior slices.
pub fn invariance_residual_modified(traj: &Trajectory, boost: &FrameBoost, k: &PhysicalConstants) -> Result<ResidualReport> {
    trajectory_residual(traj, boost, k, Law::Modified)
}

/// Residuals of the vacuum system (Faraday, Ampère, Gauss, div B, continuity)
/// evaluated on boosted data.
pub fn noninvariance_residual_classical(traj: &Trajectory, boost: &FrameBoost, k: &PhysicalConstants) -> Result<ResidualReport> {
    trajectory_residual(traj, boost, k, Law::Classical)
}

/// Sources seen from the primed frame; the density defaults to zero when the
/// model has no closed form.
pub struct BoostedSources<'a> {
    pub inner: &'a dyn Sources,
    pub boost: FrameBoost,
}

impl Sources for BoostedSources<'_> {
    fn current(&self, grid: &GridSpec, t: f64) -> VectorField {
        let d = self.boost.offset(t);
        let rho = self.inner.density(grid, t).unwrap_or_else(|| ScalarField::zeros(*grid));
        shift_vector(&self.inner.current(grid, t), d).sub(&shift_scalar(&rho, d).times_const(self.boost.v0))
    }

    fn density(&self, grid: &GridSpec, t: f64) -> Option<ScalarField> {
        self.inner.density(grid, t).map(|r| shift_scalar(&r, self.boost.offset(t)))
    }
}

/// End-to-end check: solve in both frames with the modified system and a
/// constant prescribed `ū`, then compare the boosted unprimed end state with the
/// primed end state (`two_solver_e`, `two_solver_b`, `two_solver_rho`).
pub fn two_solver_residual(
    initial: &EMState,
    sources: &dyn Sources,
    boost: &FrameBoost,
    config: &crate::state::SolverConfig,
    k: PhysicalConstants,
) -> Result<ResidualReport> {
    use crate::stepper::{PrescribedUbar, UbarMode};
    let g = *initial.grid();
    let mut unprimed = Solver::new(System::Modified, config, k, &g, sources)?
        .with_ubar(UbarMode::Prescribed(PrescribedUbar::constant(initial.ubar)));
    let end = unprimed.run(initial.clone(), config.steps, |_| {})?;

    let boosted = BoostedSources { inner: sources, boost: *boost };
    let mut primed = Solver::new(System::Modified, config, k, &g, &boosted)?
        .with_ubar(UbarMode::Prescribed(PrescribedUbar::constant(initial.ubar - boost.v0)));
    let end_p = primed.run(boost_state(initial, boost)?, config.steps, |_| {})?;

    let expected = boost_state(&end, boost)?;
    let mut report = ResidualReport::default();
    report.push_vector("two_solver_e", &end_p.e.sub(&expected.e), boost.v0);
    report.push_vector("two_solver_b", &end_p.b.sub(&expected.b), boost.v0);
    report.push_scalar("two_solver_rho", &end_p.rho.sub(&expected.rho), boost.v0);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sources::{GaussianCloud, PlaneWave};
    use crate::state::SolverConfig;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn smooth(g: GridSpec, phase: f64) -> VectorField {
        VectorField::from_fn(g, |p| {
            Vec3::new((p.x() + phase).sin(), (p.y() - p.z()).cos(), (p.x() + 2.0 * p.y()).sin())
        })
    }

    #[test]
    fn zero_boost_is_identity() {
        let g = GridSpec::cube(6, 2.0 * PI).unwrap();
        let e = smooth(g, 0.1);
        let b = smooth(g, 0.7);
        let (ep, bp) = boost_fields(&e, &b, &FrameBoost::default(), 3.3).unwrap();
        assert_eq!(ep, e);
        assert_eq!(bp, b);
        let rho = ScalarField::from_fn(g, |p| p.y().cos());
        let (r, u, j) = boost_sources(&rho, &e, &b, &FrameBoost::default(), 1.0).unwrap();
        assert_eq!((r, u, j), (rho, e, b));
    }

    #[test]
    fn lattice_shift_is_exact_roll() {
        let g = GridSpec::new([8, 6, 4], 0.5).unwrap();
        let f = ScalarField::from_fn(g, |p| p.x() + 10.0 * p.y() + 100.0 * p.z());
        let s = shift_scalar(&f, Vec3::new(1.0, -0.5, 2.0));
        for idx in 0..g.len() {
            let [i, j, l] = g.coords(idx);
            let src = [(i + 2) % 8, (j + 5) % 6, l];
            assert_eq!(s.values()[idx], f.values()[g.index(src)]);
        }
    }

    #[test]
    fn trilinear_is_exact_for_periodic_linear_combination_of_neighbours() {
        // half-cell shift averages neighbours
        let g = GridSpec::new([8, 4, 4], 1.0).unwrap();
        let f = ScalarField::from_fn(g, |p| (p.x() * PI / 4.0).sin());
        let s = shift_scalar(&f, Vec3::new(0.5, 0.0, 0.0));
        for idx in 0..g.len() {
            let [i, j, l] = g.coords(idx);
            let a = f.values()[g.index([i, j, l])];
            let b = f.values()[g.index([(i + 1) % 8, j, l])];
            assert!((s.values()[idx] - 0.5 * (a + b)).abs() < 1e-15);
        }
    }

    #[test]
    fn at_t_zero_only_velocities_change() {
        let g = GridSpec::cube(5, 1.0).unwrap();
        let boost = FrameBoost::new(Vec3::new(0.3, 0.1, -0.2)).unwrap();
        let rho = ScalarField::from_fn(g, |p| 1.0 + p.x() * p.y());
        let u = smooth(g, 0.2);
        let j = rho.times_vector(&u);
        let (r, up, jp) = boost_sources(&rho, &u, &j, &boost, 0.0).unwrap();
        assert_eq!(r, rho);
        assert!(up.max_abs_diff(&u.map(|v| v - boost.v0)) == 0.0);
        // J' = ρ' u' in the primed frame
        assert!(jp.max_abs_diff(&r.times_vector(&up)) < 1e-15);
    }

    #[test]
    fn uniform_sources() {
        let g = GridSpec::cube(4, 1.0).unwrap();
        let u0 = Vec3::new(1.0, 2.0, 3.0);
        let boost = FrameBoost::new(Vec3::new(0.5, 0.0, 0.25)).unwrap();
        let rho = ScalarField::constant(g, 2.0);
        let u = VectorField::constant(g, u0);
        let (_, _, jp) = boost_sources(&rho, &u, &rho.times_const(u0), &boost, 0.37).unwrap();
        let want = (u0 - boost.v0) * 2.0;
        assert!(jp.values().iter().all(|v| (*v - want).max_abs() < 1e-15));
    }

    #[test]
    fn magnetic_field_is_invariant_and_electric_picks_up_v0_cross_b() {
        let g = GridSpec::cube(8, 2.0 * PI).unwrap();
        let b = smooth(g, 0.4);
        let boost = FrameBoost::new(Vec3::new(0.3, -0.2, 0.6)).unwrap();
        let t = 0.83;
        let (ep, bp) = boost_fields(&VectorField::zeros(g), &b, &boost, t).unwrap();
        assert_eq!(bp, shift_vector(&b, boost.offset(t)));
        assert!(ep.max_abs_diff(&cross_const(boost.v0, &bp)) == 0.0);
        let (ep, bp) = boost_fields(&smooth(g, 0.0), &VectorField::zeros(g), &boost, t).unwrap();
        assert_eq!(ep, shift_vector(&smooth(g, 0.0), boost.offset(t)));
        assert_eq!(bp.max_norm(), 0.0);
    }

    #[test]
    fn round_trip_on_lattice() {
        let g = GridSpec::cube(8, 2.0 * PI).unwrap();
        let (e, b) = (smooth(g, 0.0), smooth(g, 1.0));
        let boost = FrameBoost::new(Vec3::new(g.h(), 2.0 * g.h(), 0.0)).unwrap();
        let t = 3.0;
        let (ep, bp) = boost_fields(&e, &b, &boost, t).unwrap();
        // undo: x = x' + t v₀ so the inverse shift samples at x - t v₀
        let (e2, b2) = boost_fields(&ep, &bp, &boost.inverse(), t).unwrap();
        assert_eq!(b2, b);
        assert!(e2.max_abs_diff(&e) < 1e-14);
    }

    #[test]
    fn round_trip_off_lattice_within_interpolation_error() {
        let err = |n: usize| {
            let g = GridSpec::cube(n, 2.0 * PI).unwrap();
            let (e, b) = (smooth(g, 0.0), smooth(g, 1.0));
            let boost = FrameBoost::new(Vec3::new(0.37 * g.h(), 0.0, 0.21 * g.h())).unwrap();
            let (ep, bp) = boost_fields(&e, &b, &boost, 1.0).unwrap();
            let (e2, _) = boost_fields(&ep, &bp, &boost.inverse(), 1.0).unwrap();
            e2.max_abs_diff(&e)
        };
        let (a, b) = (err(16), err(32));
        assert!(a < 0.05 && (a / b) > 3.5, "{a} {b}");
    }

    #[test]
    fn composition_on_lattice() {
        let g = GridSpec::cube(8, 2.0 * PI).unwrap();
        let h = g.h();
        let (e, b) = (smooth(g, 0.2), smooth(g, 0.9));
        let (b1, b2) = (FrameBoost::new(Vec3::new(h, 0.0, 0.0)).unwrap(), FrameBoost::new(Vec3::new(0.0, 2.0 * h, -h)).unwrap());
        let t = 2.0;
        let (e1, bb1) = boost_fields(&e, &b, &b1, t).unwrap();
        let (e12, b12) = boost_fields(&e1, &bb1, &b2, t).unwrap();
        let (ec, bc) = boost_fields(&e, &b, &FrameBoost::new(b1.v0 + b2.v0).unwrap(), t).unwrap();
        assert_eq!(b12, bc);
        assert!(e12.max_abs_diff(&ec) < 1e-14);
    }

    proptest! {
        #[test]
        fn force_is_frame_independent(
            e in prop::array::uniform3(-5.0f64..5.0),
            b in prop::array::uniform3(-5.0f64..5.0),
            v in prop::array::uniform3(-3.0f64..3.0),
            v0 in prop::array::uniform3(-3.0f64..3.0),
            q in -2.0f64..2.0,
        ) {
            let (e, b, v, v0) = (Vec3(e), Vec3(b), Vec3(v), Vec3(v0));
            let g = GridSpec::cube(4, 1.0).unwrap();
            let (ep, bp) = boost_fields(&VectorField::constant(g, e), &VectorField::constant(g, b), &FrameBoost { v0 }, 0.0).unwrap();
            let f = (e + v.cross(b)) * q;
            let fp = (ep.values()[0] + (v - v0).cross(bp.values()[0])) * q;
            prop_assert!((f - fp).max_abs() <= 1e-13 * (1.0 + f.max_abs()));
        }
    }

    #[test]
    fn trajectory_validation() {
        let g = GridSpec::cube(4, 1.0).unwrap();
        let at = |t: f64| EMState { t, ..EMState::zeros(g) };
        assert!(Trajectory::new(vec![at(0.0), at(1.0)]).is_err());
        assert!(Trajectory::new(vec![at(0.0), at(1.0), at(2.5)]).is_err());
        assert!(Trajectory::new(vec![at(0.0), at(1.0), at(2.0)]).is_ok());
    }

    #[test]
    fn constant_fields_have_zero_residuals() {
        let g = GridSpec::cube(6, 1.0).unwrap();
        let k = PhysicalConstants::normalized();
        let e0 = Vec3::new(0.3, -1.0, 2.0);
        let b0 = Vec3::new(1.0, 0.5, -0.25);
        let states = (0..4)
            .map(|i| EMState {
                t: i as f64 * 0.1,
                e: VectorField::constant(g, e0),
                b: VectorField::constant(g, b0),
                ..EMState::zeros(g)
            })
            .collect();
        let traj = Trajectory::new(states).unwrap();
        let boost = FrameBoost::new(Vec3::new(0.37, -0.2, 0.9)).unwrap();
        for rep in [invariance_residual_modified(&traj, &boost, &k).unwrap(), noninvariance_residual_classical(&traj, &boost, &k).unwrap()] {
            assert_eq!(rep.entries.len(), 5);
            for e in &rep.entries {
                assert_eq!((e.max, e.l2), (0.0, 0.0), "{}", e.equation);
            }
        }
    }

    #[test]
    fn zero_boost_reports_unprimed_residuals() {
        let g = GridSpec::new([16, 4, 4], 2.0 * PI / 16.0).unwrap();
        let k = PhysicalConstants::normalized();
        let wave = PlaneWave::along_x(1.0);
        let mut solver = Solver::new(System::Modified, &SolverConfig::default(), k, &g, &wave).unwrap();
        let traj = record_trajectory(&mut solver, wave.initial_state(&g, &k), 4, 1).unwrap();
        let rep = invariance_residual_modified(&traj, &FrameBoost::default(), &k).unwrap();
        // direct evaluation on the unprimed states
        let div_b = traj.states()[1..3].iter().map(|s| ops::divergence(&s.b).max_norm()).fold(0.0, f64::max);
        assert_eq!(rep.get("div_b").unwrap().max, div_b);
        let dt2 = 2.0 * traj.spacing();
        let mut far = 0.0f64;
        for w in traj.states().windows(3) {
            let r = w[2].b.sub(&w[0].b).scale(1.0 / dt2).add(&ops::curl(&w[1].e));
            far = far.max(r.max_norm());
        }
        assert_eq!(rep.get("faraday").unwrap().max, far);
    }

    #[test]
    fn classical_gauss_residual_detects_v0_cross_b() {
        let g = GridSpec::new([16, 16, 4], 2.0 * PI / 16.0).unwrap();
        let k = PhysicalConstants::normalized();
        let ms = crate::sources::Magnetostatic { amplitude: 1.0 };
        let s0 = ms.initial_state(&g, &k);
        let src = crate::sources::StaticCurrent { j: s0.j.clone() };
        let mut solver = Solver::new(System::Classical, &SolverConfig::default(), k, &g, &src).unwrap();
        let traj = record_trajectory(&mut solver, s0, 3, 1).unwrap();
        let boost = FrameBoost::new(Vec3::new(0.3, 0.0, 0.0)).unwrap();
        let classical = noninvariance_residual_classical(&traj, &boost, &k).unwrap();
        let modified = invariance_residual_modified(&traj, &boost, &k).unwrap();
        assert!(classical.get("gauss").unwrap().max > 0.2);
        assert!(modified.get("gauss_modified").unwrap().max < 1e-14);
    }

    #[test]
    fn two_solver_mismatch_converges() {
        let k = PhysicalConstants::normalized();
        let run = |n: usize| {
            let g = GridSpec::cube(n, 2.0 * PI).unwrap();
            let cloud = GaussianCloud { amplitude: 1.0, center: Vec3::new(3.0, 3.0, 3.0), kappa: 2.0, velocity: Vec3::new(0.2, 0.0, 0.0) };
            let s0 = cloud.initial_state(&g, &k);
            let dt = 0.4 * g.h();
            // v₀ dt = h/4, so the end time is lattice aligned after a multiple of 4 steps
            let boost = FrameBoost::new(Vec3::new(g.h() / (4.0 * dt), 0.0, 0.0)).unwrap();
            let cfg = SolverConfig { dt: Some(dt), cfl: 0.4, steps: n / 2 };
            let rep = two_solver_residual(&s0, &cloud, &boost, &cfg, k).unwrap();
            let scale = s0.e.max_norm().max(s0.b.max_norm()).max(s0.rho.max_norm());
            rep.entries.iter().map(|e| e.max / scale).fold(0.0, f64::max)
        };
        let (a, b) = (run(16), run(32));
        assert!(a < 0.1 && a / b > 2.5, "{a} {b}");
    }
}
