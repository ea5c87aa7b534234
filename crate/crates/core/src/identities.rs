//! The six vector formulas, checked two ways.
//!
//! The analytic path uses trigonometric polynomials whose products and
//! derivatives are exact, so left and right sides differ only by round-off.
//! The discrete path applies the grid operators to sampled fields and measures
//! how fast the two sides approach each other under refinement.

use std::collections::BTreeMap;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{ScalarField, VectorField};
use crate::grid::GridSpec;
use crate::ops;
use crate::vec3::Vec3;

/// `Σ c_m exp(i m·x)` over integer wave vectors `m`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrigPoly {
    terms: BTreeMap<[i32; 3], Complex64>,
}

impl TrigPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: f64) -> Self {
        let mut p = Self::zero();
        p.add_term([0, 0, 0], Complex64::new(c, 0.0));
        p
    }

    /// `a cos(m·x) + b sin(m·x)`.
    pub fn cos_sin(m: [i32; 3], a: f64, b: f64) -> Self {
        let mut p = Self::zero();
        if m == [0, 0, 0] {
            p.add_term(m, Complex64::new(a, 0.0));
            return p;
        }
        // cos θ = (e^{iθ} + e^{-iθ})/2, sin θ = (e^{iθ} - e^{-iθ})/2i
        let c = Complex64::new(0.5 * a, -0.5 * b);
        p.add_term(m, c);
        p.add_term([-m[0], -m[1], -m[2]], c.conj());
        p
    }

    fn add_term(&mut self, m: [i32; 3], c: Complex64) {
        let e = self.terms.entry(m).or_insert(Complex64::new(0.0, 0.0));
        *e += c;
        if *e == Complex64::new(0.0, 0.0) {
            self.terms.remove(&m);
        }
    }

    /// Largest `|m_i|` over all terms.
    pub fn degree(&self) -> i32 {
        self.terms.keys().flat_map(|m| m.iter().map(|v| v.abs())).max().unwrap_or(0)
    }

    pub fn add(&self, o: &TrigPoly) -> Self {
        let mut p = self.clone();
        for (m, c) in &o.terms {
            p.add_term(*m, *c);
        }
        p
    }

    pub fn sub(&self, o: &TrigPoly) -> Self {
        self.add(&o.scale(-1.0))
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut p = Self::zero();
        for (m, c) in &self.terms {
            p.add_term(*m, *c * s);
        }
        p
    }

    /// Exact product (convolution of the coefficient sets).
    pub fn mul(&self, o: &TrigPoly) -> Self {
        let mut p = Self::zero();
        for (m, c) in &self.terms {
            for (n, d) in &o.terms {
                p.add_term([m[0] + n[0], m[1] + n[1], m[2] + n[2]], c * d);
            }
        }
        p
    }

    /// Exact `∂/∂x_axis`.
    pub fn deriv(&self, axis: usize) -> Self {
        let mut p = Self::zero();
        for (m, c) in &self.terms {
            if m[axis] != 0 {
                p.add_term(*m, c * Complex64::new(0.0, m[axis] as f64));
            }
        }
        p
    }

    pub fn eval(&self, x: Vec3) -> f64 {
        self.terms
            .iter()
            .map(|(m, c)| {
                let th = m[0] as f64 * x[0] + m[1] as f64 * x[1] + m[2] as f64 * x[2];
                c.re * th.cos() - c.im * th.sin()
            })
            .sum()
    }
}

/// Scalar trigonometric polynomial with its gradient.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticScalar {
    pub value: TrigPoly,
    pub grad: [TrigPoly; 3],
}

/// Vector trigonometric polynomial with its Jacobian, `jac[i][j] = ∂_j a_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticField {
    pub comps: [TrigPoly; 3],
    pub jac: [[TrigPoly; 3]; 3],
}

const SELF_CHECK_POINTS: [[f64; 3]; 4] = [[0.3, 1.1, 2.9], [4.0, 0.2, 5.5], [2.2, 3.7, 0.8], [5.9, 4.4, 3.3]];

/// Compares `d` with central differences of `f` at steps `h` and `h/2`: either
/// both agree to round-off or the error shrinks by about 4.
fn check_derivative(f: &TrigPoly, d: &TrigPoly, axis: usize, what: &str) -> Result<()> {
    let scale = 1.0 + f.terms.values().map(|c| c.norm()).sum::<f64>() * (1 + f.degree()).pow(3) as f64;
    let err = |h: f64| {
        SELF_CHECK_POINTS
            .iter()
            .map(|p| {
                let x = Vec3(*p);
                let e = Vec3::unit(axis) * h;
                let fd = (f.eval(x + e) - f.eval(x - e)) / (2.0 * h);
                (fd - d.eval(x)).abs()
            })
            .fold(0.0, f64::max)
    };
    let (e1, e2) = (err(1e-2), err(5e-3));
    if e1 < 1e-9 * scale {
        return Ok(());
    }
    let ratio = e1 / e2;
    if (3.0..=5.0).contains(&ratio) {
        Ok(())
    } else {
        Err(Error::SelfCheck(format!(
            "{what}: derivative along axis {axis} disagrees with finite differences (errors {e1:e}, {e2:e})"
        )))
    }
}

impl AnalyticScalar {
    pub fn new(value: TrigPoly) -> Result<Self> {
        let grad = [value.deriv(0), value.deriv(1), value.deriv(2)];
        Self::with_gradient(value, grad)
    }

    /// Uses caller-supplied derivatives after checking them against finite differences.
    pub fn with_gradient(value: TrigPoly, grad: [TrigPoly; 3]) -> Result<Self> {
        for (a, g) in grad.iter().enumerate() {
            check_derivative(&value, g, a, "scalar")?;
        }
        Ok(Self { value, grad })
    }

    pub fn eval(&self, x: Vec3) -> f64 {
        self.value.eval(x)
    }

    pub fn eval_grad(&self, x: Vec3) -> Vec3 {
        Vec3::new(self.grad[0].eval(x), self.grad[1].eval(x), self.grad[2].eval(x))
    }

    pub fn sample(&self, g: &GridSpec) -> ScalarField {
        ScalarField::from_fn(*g, |x| self.eval(x))
    }

    pub fn gradient_field(&self) -> Result<AnalyticField> {
        AnalyticField::new(self.grad.clone())
    }
}

impl AnalyticField {
    pub fn new(comps: [TrigPoly; 3]) -> Result<Self> {
        let jac = [0, 1, 2].map(|i| [0, 1, 2].map(|j| comps[i].deriv(j)));
        Self::with_jacobian(comps, jac)
    }

    pub fn with_jacobian(comps: [TrigPoly; 3], jac: [[TrigPoly; 3]; 3]) -> Result<Self> {
        for i in 0..3 {
            for j in 0..3 {
                check_derivative(&comps[i], &jac[i][j], j, &format!("component {i}"))?;
            }
        }
        Ok(Self { comps, jac })
    }

    pub fn constant(v: Vec3) -> Self {
        Self::new([0, 1, 2].map(|i| TrigPoly::constant(v[i]))).expect("constants differentiate exactly")
    }

    pub fn eval(&self, x: Vec3) -> Vec3 {
        Vec3::new(self.comps[0].eval(x), self.comps[1].eval(x), self.comps[2].eval(x))
    }

    /// Row `i` is the gradient of component `i`.
    pub fn eval_jac(&self, x: Vec3) -> [Vec3; 3] {
        [0, 1, 2].map(|i| Vec3::new(self.jac[i][0].eval(x), self.jac[i][1].eval(x), self.jac[i][2].eval(x)))
    }

    pub fn sample(&self, g: &GridSpec) -> VectorField {
        VectorField::from_fn(*g, |x| self.eval(x))
    }

    pub fn degree(&self) -> i32 {
        self.comps.iter().map(TrigPoly::degree).max().unwrap_or(0)
    }
}

fn poly_dot(a: &[TrigPoly; 3], b: &[TrigPoly; 3]) -> TrigPoly {
    a[0].mul(&b[0]).add(&a[1].mul(&b[1])).add(&a[2].mul(&b[2]))
}

fn poly_cross(a: &[TrigPoly; 3], b: &[TrigPoly; 3]) -> [TrigPoly; 3] {
    [
        a[1].mul(&b[2]).sub(&a[2].mul(&b[1])),
        a[2].mul(&b[0]).sub(&a[0].mul(&b[2])),
        a[0].mul(&b[1]).sub(&a[1].mul(&b[0])),
    ]
}

fn poly_div(a: &[TrigPoly; 3]) -> TrigPoly {
    a[0].deriv(0).add(&a[1].deriv(1)).add(&a[2].deriv(2))
}

fn poly_curl(a: &[TrigPoly; 3]) -> [TrigPoly; 3] {
    [
        a[2].deriv(1).sub(&a[1].deriv(2)),
        a[0].deriv(2).sub(&a[2].deriv(0)),
        a[1].deriv(0).sub(&a[0].deriv(1)),
    ]
}

fn poly_grad(f: &TrigPoly) -> [TrigPoly; 3] {
    [f.deriv(0), f.deriv(1), f.deriv(2)]
}

fn eval3(p: &[TrigPoly; 3], x: Vec3) -> Vec3 {
    Vec3::new(p[0].eval(x), p[1].eval(x), p[2].eval(x))
}

/// The six formulas, named by their left-hand sides.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IdentityId {
    /// `a × (b × c) = (a·c) b - (a·b) c`, with `c = ∇f`.
    BacCab,
    /// `∇(a·b) = (b·∇)a + (a·∇)b + b × (∇×a) + a × (∇×b)`.
    GradDot,
    /// `∇·(a×b) = b·(∇×a) - a·(∇×b)`.
    DivCross,
    /// `∇·(f a) = f ∇·a + ∇f·a`.
    DivScalar,
    /// `∇×(a×b) = (b·∇)a - (a·∇)b + (∇·b) a - (∇·a) b`.
    CurlCross,
    /// `∇×(f a) = f ∇×a + ∇f × a`.
    CurlScalar,
}

impl IdentityId {
    pub const ALL: [IdentityId; 6] = [
        IdentityId::BacCab,
        IdentityId::GradDot,
        IdentityId::DivCross,
        IdentityId::DivScalar,
        IdentityId::CurlCross,
        IdentityId::CurlScalar,
    ];

    pub fn name(self) -> &'static str {
        match self {
            IdentityId::BacCab => "bac-cab",
            IdentityId::GradDot => "grad-dot",
            IdentityId::DivCross => "div-cross",
            IdentityId::DivScalar => "div-scalar",
            IdentityId::CurlCross => "curl-cross",
            IdentityId::CurlScalar => "curl-scalar",
        }
    }

    /// False for the purely algebraic formula, whose discrete form is exact.
    pub fn has_derivatives(self) -> bool {
        self != IdentityId::BacCab
    }
}

impl fmt::Display for IdentityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for IdentityId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        IdentityId::ALL
            .into_iter()
            .find(|id| id.name() == s)
            .ok_or_else(|| Error::Config {
                path: "identity".into(),
                msg: format!("unknown identity `{s}`"),
            })
    }
}

/// `(∇a) v` as the directional derivative `(v·∇)a` from the Jacobian rows.
fn directional(jac: &[Vec3; 3], v: Vec3) -> Vec3 {
    Vec3::new(jac[0].dot(v), jac[1].dot(v), jac[2].dot(v))
}

fn curl_of(jac: &[Vec3; 3]) -> Vec3 {
    Vec3::new(jac[2][1] - jac[1][2], jac[0][2] - jac[2][0], jac[1][0] - jac[0][1])
}

fn div_of(jac: &[Vec3; 3]) -> f64 {
    jac[0][0] + jac[1][1] + jac[2][2]
}

/// Max pointwise deviation between the two sides over the nodes of `grid`.
/// The left side differentiates the exact product polynomial; the right side
/// combines pointwise values with the supplied derivatives.
pub fn check_identity(id: IdentityId, a: &AnalyticField, b: &AnalyticField, f: &AnalyticScalar, grid: &GridSpec) -> f64 {
    let lhs: Box<dyn Fn(Vec3) -> Vec3 + Sync> = match id {
        IdentityId::BacCab => Box::new(|x| {
            let c = f.eval_grad(x);
            a.eval(x).cross(b.eval(x).cross(c))
        }),
        IdentityId::GradDot => {
            let g = poly_grad(&poly_dot(&a.comps, &b.comps));
            Box::new(move |x| eval3(&g, x))
        }
        IdentityId::DivCross => {
            let d = poly_div(&poly_cross(&a.comps, &b.comps));
            Box::new(move |x| Vec3::new(d.eval(x), 0.0, 0.0))
        }
        IdentityId::DivScalar => {
            let fa = a.comps.clone().map(|c| c.mul(&f.value));
            let d = poly_div(&fa);
            Box::new(move |x| Vec3::new(d.eval(x), 0.0, 0.0))
        }
        IdentityId::CurlCross => {
            let c = poly_curl(&poly_cross(&a.comps, &b.comps));
            Box::new(move |x| eval3(&c, x))
        }
        IdentityId::CurlScalar => {
            let fa = a.comps.clone().map(|c| c.mul(&f.value));
            let c = poly_curl(&fa);
            Box::new(move |x| eval3(&c, x))
        }
    };
    let rhs = |x: Vec3| -> Vec3 {
        let (av, bv) = (a.eval(x), b.eval(x));
        let (ja, jb) = (a.eval_jac(x), b.eval_jac(x));
        match id {
            IdentityId::BacCab => {
                let c = f.eval_grad(x);
                bv * av.dot(c) - c * av.dot(bv)
            }
            IdentityId::GradDot => {
                // ∇(a·b)_k = Σ_i (b_i ∂_k a_i + a_i ∂_k b_i) written in the listed form
                directional(&ja, bv) + directional(&jb, av) + bv.cross(curl_of(&ja)) + av.cross(curl_of(&jb))
            }
            IdentityId::DivCross => Vec3::new(bv.dot(curl_of(&ja)) - av.dot(curl_of(&jb)), 0.0, 0.0),
            IdentityId::DivScalar => Vec3::new(f.eval(x) * div_of(&ja) + f.eval_grad(x).dot(av), 0.0, 0.0),
            IdentityId::CurlCross => {
                directional(&ja, bv) - directional(&jb, av) + av * div_of(&jb) - bv * div_of(&ja)
            }
            IdentityId::CurlScalar => curl_of(&ja) * f.eval(x) + f.eval_grad(x).cross(av),
        }
    };
    (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let x = grid.position_of(i);
            (lhs(x) - rhs(x)).max_abs()
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(0.0, f64::max)
}

/// Max-norm deviation between the two sides built from the grid operators.
pub fn check_identity_discrete(id: IdentityId, a: &VectorField, b: &VectorField, f: &ScalarField) -> Result<f64> {
    if !a.grid().same_as(b.grid()) || !a.grid().same_as(f.grid()) {
        return Err(Error::GridMismatch("identity operands"));
    }
    let dev = match id {
        IdentityId::BacCab => {
            let c = ops::gradient(f);
            let lhs = a.cross(&b.cross(&c));
            let rhs = b.times_scalar(&a.dot(&c)).sub(&c.times_scalar(&a.dot(b)));
            lhs.max_abs_diff(&rhs)
        }
        IdentityId::GradDot => {
            let lhs = ops::gradient(&a.dot(b));
            let rhs = ops::directional_field(b, a)
                .add(&ops::directional_field(a, b))
                .add(&b.cross(&ops::curl(a)))
                .add(&a.cross(&ops::curl(b)));
            lhs.max_abs_diff(&rhs)
        }
        IdentityId::DivCross => {
            let lhs = ops::divergence(&a.cross(b));
            let rhs = b.dot(&ops::curl(a)).sub(&a.dot(&ops::curl(b)));
            lhs.max_abs_diff(&rhs)
        }
        IdentityId::DivScalar => {
            let lhs = ops::divergence(&f.times_vector(a));
            let rhs = f.zip_map(&ops::divergence(a), |x, y| x * y).add(&ops::gradient(f).dot(a));
            lhs.max_abs_diff(&rhs)
        }
        IdentityId::CurlCross => {
            let lhs = ops::curl(&a.cross(b));
            let rhs = ops::directional_field(b, a)
                .sub(&ops::directional_field(a, b))
                .add(&a.times_scalar(&ops::divergence(b)))
                .sub(&b.times_scalar(&ops::divergence(a)));
            lhs.max_abs_diff(&rhs)
        }
        IdentityId::CurlScalar => {
            let lhs = ops::curl(&f.times_vector(a));
            let rhs = ops::curl(a).times_scalar(f).add(&ops::gradient(f).cross(a));
            lhs.max_abs_diff(&rhs)
        }
    };
    Ok(dev)
}

/// Operands for one identity check.
#[derive(Debug, Clone, PartialEq)]
pub struct IdentityFields {
    pub a: AnalyticField,
    pub b: AnalyticField,
    pub f: AnalyticScalar,
}

fn random_poly(rng: &mut ChaCha8Rng, degree: i32, terms: usize) -> TrigPoly {
    let mut p = TrigPoly::constant(rng.random_range(-1.0..1.0));
    for _ in 0..terms {
        let m = [0, 1, 2].map(|_| rng.random_range(-degree..=degree));
        p = p.add(&TrigPoly::cos_sin(m, rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    }
    p
}

impl IdentityFields {
    /// Random trigonometric operands with every `|m_i| ≤ degree`, reproducible from `seed`.
    pub fn random(seed: u64, degree: i32) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let terms = 3;
        let vector = |rng: &mut ChaCha8Rng| [0, 1, 2].map(|_| random_poly(rng, degree, terms));
        let a = AnalyticField::new(vector(&mut rng))?;
        let b = AnalyticField::new(vector(&mut rng))?;
        let f = AnalyticScalar::new(random_poly(&mut rng, degree, terms))?;
        Ok(Self { a, b, f })
    }

    pub fn constant(a: Vec3, b: Vec3, f: f64) -> Self {
        Self {
            a: AnalyticField::constant(a),
            b: AnalyticField::constant(b),
            f: AnalyticScalar::new(TrigPoly::constant(f)).expect("constant"),
        }
    }
}

/// One row of an identity report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityRow {
    pub identity: IdentityId,
    /// Absent for the analytic path.
    pub h: Option<f64>,
    pub deviation: f64,
    /// Pairwise order against the previous refinement level; absent on the
    /// coarsest level and when both deviations are at round-off.
    pub order: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub seed: u64,
    pub degree: i32,
    pub rows: Vec<IdentityRow>,
}

pub const IDENTITY_COLUMNS: &str = "identity,seed,h,deviation,order";

/// Deviations below this are treated as round-off and get no order estimate.
pub const ROUND_OFF: f64 = 1e-12;

impl IdentityReport {
    pub fn to_csv(&self) -> String {
        use std::fmt::Write;
        let mut out = format!("{IDENTITY_COLUMNS}\n");
        let opt = |v: Option<f64>| v.map(|x| format!("{x:e}")).unwrap_or_default();
        for r in &self.rows {
            let _ = writeln!(out, "{},{},{},{:e},{}", r.identity, self.seed, opt(r.h), r.deviation, opt(r.order));
        }
        out
    }

    pub fn rows_for(&self, id: IdentityId) -> impl Iterator<Item = &IdentityRow> {
        self.rows.iter().filter(move |r| r.identity == id)
    }
}

/// Analytic check of every identity on an `n³` grid over `[0, 2π)³`.
pub fn analytic_report(seed: u64, degree: i32, n: usize) -> Result<IdentityReport> {
    let fields = IdentityFields::random(seed, degree)?;
    let g = GridSpec::cube(n, 2.0 * std::f64::consts::PI)?;
    let rows = IdentityId::ALL
        .into_iter()
        .map(|id| IdentityRow {
            identity: id,
            h: None,
            deviation: check_identity(id, &fields.a, &fields.b, &fields.f, &g),
            order: None,
        })
        .collect();
    Ok(IdentityReport { seed, degree, rows })
}

/// Discrete deviations on `n³` grids over `[0, 2π)³` with pairwise orders
/// `log2(dev_coarse / dev_fine) / log2(h_coarse / h_fine)`.
pub fn discrete_report(seed: u64, degree: i32, ns: &[usize]) -> Result<IdentityReport> {
    let fields = IdentityFields::random(seed, degree)?;
    let mut rows = Vec::new();
    for id in IdentityId::ALL {
        let mut prev: Option<(f64, f64)> = None;
        for &n in ns {
            let g = GridSpec::cube(n, 2.0 * std::f64::consts::PI)?;
            let dev = check_identity_discrete(id, &fields.a.sample(&g), &fields.b.sample(&g), &fields.f.sample(&g))?;
            let order = prev.and_then(|(h0, d0)| {
                (d0 > ROUND_OFF && dev > ROUND_OFF).then(|| (d0 / dev).ln() / (h0 / g.h()).ln())
            });
            rows.push(IdentityRow {
                identity: id,
                h: Some(g.h()),
                deviation: dev,
                order,
            });
            prev = Some((g.h(), dev));
        }
    }
    Ok(IdentityReport { seed, degree, rows })
}
