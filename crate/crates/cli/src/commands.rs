//! Subcommand implementations: config resolution, then the library call.
//!
//! Precedence is flag (or its environment mirror) over config file over default.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use galmax::classical::classical_gauss_residual;
use galmax::constants::PhysicalConstants;
use galmax::dump::{read_state, write_state};
use galmax::galilean::{invariance_residual_modified, noninvariance_residual_classical, FrameBoost, Trajectory};
use galmax::identities::{analytic_report, discrete_report};
use galmax::kernels::{Kernels, PointCharge, DEFAULT_CUTOFF};
use galmax::modified::modified_gauss_residual;
use galmax::scenario::{parse_scenario, parse_toml, Scenario, Units};
use galmax::state::{EMState, RESIDUAL_COLUMNS};
use galmax::stepper::{Solver, System};
use galmax::two_charge::TwoChargeScenario;
use galmax::vec3::Vec3;
use galmax::{Error, Result};
use serde::{Deserialize, Serialize};

use crate::output::RunDir;
use crate::{CheckInvarianceArgs, Cli, Command, GlobalArgs, IdentitiesArgs, KernelsArgs, SimulateArgs, TwoChargeArgs};

pub const DIAGNOSTIC_COLUMNS: &str = "step,t,energy,gauss_max,div_b_max";
pub const KERNEL_COLUMNS: &str = "point,px,py,pz,kernel,fx,fy,fz,norm";
const DEFAULT_OUT: &str = "out";

pub fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.global.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config {
                path: "threads".into(),
                msg: e.to_string(),
            })?;
    }
    let g = &cli.global;
    match &cli.command {
        Command::Simulate(a) => simulate(g, a),
        Command::CheckInvariance(a) => check_invariance(g, a),
        Command::Identities(a) => identities(g, a),
        Command::TwoCharge(a) => two_charge(g, a),
        Command::Kernels(a) => kernels(g, a),
    }
}

fn read_config_text(g: &GlobalArgs) -> Result<Option<String>> {
    g.scenario
        .as_ref()
        .map(|p| {
            std::fs::read_to_string(p).map_err(|e| Error::Config {
                path: "scenario".into(),
                msg: format!("cannot read {}: {e}", p.display()),
            })
        })
        .transpose()
}

/// Parses the config file, or an empty document when none was given.
fn load<T: serde::de::DeserializeOwned>(g: &GlobalArgs) -> Result<T> {
    parse_toml(&read_config_text(g)?.unwrap_or_default())
}

fn out_dir(g: &GlobalArgs, from_config: Option<&str>) -> PathBuf {
    g.out.clone().unwrap_or_else(|| PathBuf::from(from_config.unwrap_or(DEFAULT_OUT)))
}

fn simulate(g: &GlobalArgs, a: &SimulateArgs) -> Result<()> {
    let text = read_config_text(g)?.ok_or_else(|| Error::Config {
        path: "scenario".into(),
        msg: "simulate needs a scenario file (--scenario or GALMAX_SCENARIO)".into(),
    })?;
    let mut sc: Scenario = parse_toml(&text)?;
    if let Some(u) = g.units {
        sc.units = u.into();
        sc.constants = None;
    }
    if let Some(seed) = g.seed {
        sc.seed = seed;
    }
    if let Some(out) = &g.out {
        sc.output.dir = out.display().to_string();
    }
    if let Some(s) = a.system {
        sc.system = s.into();
    }
    if let Some(n) = a.steps {
        sc.solver.steps = n;
    }
    if let Some(n) = a.every {
        sc.output.every = Some(n);
    }
    sc.validate()?;
    let sc = sc.effective();

    let mut run = RunDir::create(Path::new(&sc.output.dir))?;
    let k = sc.constants();
    let sources = sc.source.sources(&sc.grid, &k);
    let mut solver = Solver::new(sc.system, &sc.solver, k, &sc.grid, sources.as_ref())?
        .with_charge_mode(sc.charge)
        .with_ubar(sc.ubar);
    let every = sc.snapshot_every();
    let mut diagnostics = format!("{DIAGNOSTIC_COLUMNS}\n");
    let mut observe = |step: usize, s: &EMState, run: &mut RunDir| -> Result<()> {
        let report = match sc.system {
            System::Classical => classical_gauss_residual(s, &k)?,
            System::Modified => modified_gauss_residual(s, &k)?,
        };
        let gauss = report.entries.first().map_or(0.0, |e| e.max);
        let div_b = report.get("div_b").map_or(0.0, |e| e.max);
        let _ = writeln!(diagnostics, "{step},{:e},{:e},{gauss:e},{div_b:e}", s.t, s.energy(&k));
        if step.is_multiple_of(every) {
            let name = format!("snapshots/step_{step:06}");
            write_state(&run.path(&name), step, s)?;
            run.record(name);
        }
        Ok(())
    };
    let mut s = sc.source.initial_state(&sc.grid, &k);
    solver.prepare(&mut s)?;
    observe(0, &s, &mut run)?;
    for step in 1..=sc.solver.steps {
        s = solver.step(&s)?;
        observe(step, &s, &mut run)?;
    }
    run.write("diagnostics.csv", &diagnostics)?;
    run.finish("simulate", sc.seed, &sc)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckInvarianceConfig {
    /// One directory per refinement level, coarsest first.
    #[serde(default)]
    pub trajectories: Vec<PathBuf>,
    #[serde(default)]
    pub v0: Vec3,
    #[serde(default)]
    pub law: System,
    /// Used only for trajectories without a `config.toml` of their own.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub units: Option<Units>,
}

/// Snapshots under `<dir>/snapshots`, in step order, and the constants of the producing run.
fn load_trajectory(dir: &Path, fallback: Units) -> Result<(Trajectory, PhysicalConstants)> {
    let snapshots = dir.join("snapshots");
    let mut entries: Vec<PathBuf> = std::fs::read_dir(&snapshots)
        .map_err(|e| Error::Trajectory(format!("{}: {e}", snapshots.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_dir())
        .collect();
    entries.sort();
    let states = entries
        .iter()
        .map(|p| read_state(p).map(|(_, s)| s))
        .collect::<Result<Vec<_>>>()?;
    let config = dir.join("config.toml");
    let k = if config.exists() {
        parse_scenario(&std::fs::read_to_string(&config)?)?.constants()
    } else {
        fallback.constants()
    };
    Ok((Trajectory::new(states)?, k))
}

fn check_invariance(g: &GlobalArgs, a: &CheckInvarianceArgs) -> Result<()> {
    let mut cfg: CheckInvarianceConfig = load(g)?;
    if !a.trajectories.is_empty() {
        cfg.trajectories = a.trajectories.clone();
    }
    if let Some(v) = a.v0 {
        cfg.v0 = v;
    }
    if let Some(l) = a.law {
        cfg.law = l.into();
    }
    if let Some(u) = g.units {
        cfg.units = Some(u.into());
    }
    if cfg.trajectories.is_empty() {
        return Err(Error::Config {
            path: "trajectories".into(),
            msg: "at least one trajectory directory is required".into(),
        });
    }
    let boost = FrameBoost::new(cfg.v0)?;
    let mut csv = format!("{RESIDUAL_COLUMNS}\n");
    for (level, dir) in cfg.trajectories.iter().enumerate() {
        let (traj, k) = load_trajectory(dir, cfg.units.unwrap_or_default())?;
        let report = match cfg.law {
            System::Modified => invariance_residual_modified(&traj, &boost, &k)?,
            System::Classical => noninvariance_residual_classical(&traj, &boost, &k)?,
        };
        report.write_csv_rows(level, &mut csv);
    }
    let mut run = RunDir::create(&out_dir(g, None))?;
    run.write("residuals.csv", &csv)?;
    run.finish("check-invariance", g.seed.unwrap_or(0), &cfg)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IdentitiesConfig {
    pub seed: u64,
    pub degree: i32,
    pub levels: Vec<usize>,
    pub analytic_n: usize,
}

impl Default for IdentitiesConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            degree: 2,
            levels: vec![16, 32, 64],
            analytic_n: 32,
        }
    }
}

fn identities(g: &GlobalArgs, a: &IdentitiesArgs) -> Result<()> {
    let mut cfg: IdentitiesConfig = load(g)?;
    if let Some(s) = g.seed {
        cfg.seed = s;
    }
    if let Some(d) = a.degree {
        cfg.degree = d;
    }
    if let Some(l) = &a.levels {
        cfg.levels = l.clone();
    }
    if let Some(n) = a.analytic_n {
        cfg.analytic_n = n;
    }
    if cfg.degree < 1 {
        return Err(Error::Config {
            path: "degree".into(),
            msg: format!("must be at least 1, got {}", cfg.degree),
        });
    }
    let analytic = analytic_report(cfg.seed, cfg.degree, cfg.analytic_n)?;
    let discrete = discrete_report(cfg.seed, cfg.degree, &cfg.levels)?;
    // one header; analytic rows have an empty h column
    let mut csv = analytic.to_csv();
    csv.extend(discrete.to_csv().lines().skip(1).map(|l| format!("{l}\n")));
    let mut run = RunDir::create(&out_dir(g, None))?;
    run.write("identities.csv", &csv)?;
    run.finish("identities", cfg.seed, &cfg)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TwoChargeConfig {
    pub units: Units,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub constants: Option<PhysicalConstants>,
    pub q1: f64,
    pub q2: f64,
    pub a: Vec3,
    pub b: Vec3,
    pub u: Vec3,
}

impl Default for TwoChargeConfig {
    fn default() -> Self {
        Self {
            units: Units::Si,
            constants: None,
            q1: 1e-9,
            q2: 1e-9,
            a: Vec3::ZERO,
            b: Vec3::new(0.01, 0.0, 0.0),
            u: Vec3::ZERO,
        }
    }
}

fn summary(c: &galmax::two_charge::ForceComparison, perpendicular: bool) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "Force on q2, observer speed beta = {:.6}", c.beta);
    let line = |s: &mut String, label: &str, f: Option<Vec3>, claim: &str| {
        let _ = match f {
            Some(f) => writeln!(s, "  {label:<16} |F| = {:.6e}  ratio to F2 = {:.6}  ({claim})", f.norm(), c.ratio(f)),
            None => writeln!(s, "  {label:<16} n/a (defined only for u perpendicular to AB)  ({claim})"),
        };
    };
    line(&mut s, "f2", Some(c.f2), "Coulomb force with both charges at rest");
    line(&mut s, "f2_prime", Some(c.f2_prime), "modified system in the moving frame, motion field E12 included");
    line(&mut s, "f2_double_prime", Some(c.f2_double_prime), "classical Maxwell-Lorentz in the moving frame, no E12");
    line(&mut s, "f2_rel_textbook", c.f2_rel_textbook, "textbook relativity: charges scaled by 1/sqrt(1 - beta^2)");
    line(&mut s, "f2_rel_with_e12", c.f2_rel_with_e12, "the same charge scaling applied to the force with E12");
    if !perpendicular {
        let _ = writeln!(s, "  u is not perpendicular to AB, so the relativistic rows are left empty");
    }
    s
}

fn two_charge(g: &GlobalArgs, a: &TwoChargeArgs) -> Result<()> {
    let mut cfg: TwoChargeConfig = load(g)?;
    if let Some(u) = g.units {
        cfg.units = u.into();
        cfg.constants = None;
    }
    for (dst, src) in [(&mut cfg.q1, a.q1), (&mut cfg.q2, a.q2)] {
        if let Some(v) = src {
            *dst = v;
        }
    }
    for (dst, src) in [(&mut cfg.a, a.a), (&mut cfg.b, a.b), (&mut cfg.u, a.u)] {
        if let Some(v) = src {
            *dst = v;
        }
    }
    cfg.constants = Some(cfg.constants.unwrap_or_else(|| cfg.units.constants()));
    let k = cfg.constants.expect("filled above");
    let scenario = TwoChargeScenario::new(cfg.q1, cfg.q2, cfg.a, cfg.b, cfg.u, k)?;
    let comparison = scenario.force_relativistic_comparison();
    let text = summary(&comparison, scenario.u_perpendicular());
    print!("{text}");
    let mut run = RunDir::create(&out_dir(g, None))?;
    run.write("two_charge.csv", &comparison.to_csv())?;
    run.write("summary.txt", &text)?;
    run.finish("two-charge", g.seed.unwrap_or(0), &cfg)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KernelsConfig {
    pub units: Units,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub constants: Option<PhysicalConstants>,
    pub q: f64,
    pub position: Vec3,
    pub velocity: Vec3,
    pub points: Vec<Vec3>,
    pub cutoff: f64,
}

impl Default for KernelsConfig {
    fn default() -> Self {
        Self {
            units: Units::Si,
            constants: None,
            q: 1e-9,
            position: Vec3::ZERO,
            velocity: Vec3::ZERO,
            points: vec![Vec3::new(0.01, 0.0, 0.0)],
            cutoff: DEFAULT_CUTOFF,
        }
    }
}

fn kernels(g: &GlobalArgs, a: &KernelsArgs) -> Result<()> {
    let mut cfg: KernelsConfig = load(g)?;
    if let Some(u) = g.units {
        cfg.units = u.into();
        cfg.constants = None;
    }
    if let Some(q) = a.q {
        cfg.q = q;
    }
    if let Some(p) = a.position {
        cfg.position = p;
    }
    if let Some(v) = a.velocity {
        cfg.velocity = v;
    }
    if !a.points.is_empty() {
        cfg.points = a.points.clone();
    }
    if let Some(c) = a.cutoff {
        cfg.cutoff = c;
    }
    cfg.constants = Some(cfg.constants.unwrap_or_else(|| cfg.units.constants()));
    let k = cfg.constants.expect("filled above");
    let pc = PointCharge::new(cfg.q, cfg.position, cfg.velocity, &k)?;
    let kern = Kernels::new(k).with_cutoff(cfg.cutoff);
    let mut csv = format!("{KERNEL_COLUMNS}\n");
    for (i, &p) in cfg.points.iter().enumerate() {
        let values = [
            ("coulomb_e", kern.coulomb_e(&pc, p)?),
            ("biot_savart_b", kern.biot_savart_b(&pc, p)?),
            ("motion_e2", kern.motion_e2(&pc, p)?),
            ("total_e", kern.total_e_moving(&pc, p)?),
            ("total_e_beta_form", kern.total_e_moving_beta_form(&pc, p)?),
            ("invariant_combo", kern.invariant_combo(&pc, p)?),
        ];
        for (name, f) in values {
            let _ = writeln!(csv, "{i},{:e},{:e},{:e},{name},{:e},{:e},{:e},{:e}", p[0], p[1], p[2], f[0], f[1], f[2], f.norm());
        }
    }
    let mut run = RunDir::create(&out_dir(g, None))?;
    run.write("kernels.csv", &csv)?;
    run.finish("kernels", g.seed.unwrap_or(0), &cfg)
}
