//! Grid-sampled scalar and vector fields with pointwise algebra.
//!
//! Binary operations require both operands to live on the same grid and panic
//! otherwise; the solver entry points check grids up front and return
//! [`Error::GridMismatch`](crate::Error::GridMismatch) instead.
//!
//! Reductions (`max_norm`, `rms`, `sum`) run serially in node order so their
//! results do not depend on the thread count.

use rayon::prelude::*;

use crate::grid::GridSpec;
use crate::vec3::Vec3;

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: GridSpec,
    values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    grid: GridSpec,
    values: Vec<Vec3>,
}

fn check_grid(a: &GridSpec, b: &GridSpec) {
    assert!(a.same_as(b), "field operands live on different grids");
}

impl ScalarField {
    pub fn zeros(grid: GridSpec) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn constant(grid: GridSpec, v: f64) -> Self {
        Self {
            values: vec![v; grid.len()],
            grid,
        }
    }

    /// Samples `f` at every node position.
    pub fn from_fn(grid: GridSpec, f: impl Fn(Vec3) -> f64 + Sync) -> Self {
        let values = (0..grid.len())
            .into_par_iter()
            .map(|idx| f(grid.position_of(idx)))
            .collect();
        Self { grid, values }
    }

    pub fn from_values(grid: GridSpec, values: Vec<f64>) -> Option<Self> {
        (values.len() == grid.len()).then_some(Self { grid, values })
    }

    #[inline]
    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    #[inline]
    pub fn at(&self, i: [usize; 3]) -> f64 {
        self.values[self.grid.index(i)]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64 + Sync) -> Self {
        Self {
            grid: self.grid,
            values: self.values.par_iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_map(&self, o: &ScalarField, f: impl Fn(f64, f64) -> f64 + Sync) -> Self {
        check_grid(&self.grid, &o.grid);
        Self {
            grid: self.grid,
            values: self
                .values
                .par_iter()
                .zip(o.values.par_iter())
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn add(&self, o: &ScalarField) -> Self {
        self.zip_map(o, |a, b| a + b)
    }

    pub fn sub(&self, o: &ScalarField) -> Self {
        self.zip_map(o, |a, b| a - b)
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|v| v * s)
    }

    /// `self + s * o`.
    pub fn axpy(&self, s: f64, o: &ScalarField) -> Self {
        self.zip_map(o, |a, b| a + s * b)
    }

    /// Pointwise `self * v`.
    pub fn times_vector(&self, v: &VectorField) -> VectorField {
        check_grid(&self.grid, &v.grid);
        VectorField {
            grid: self.grid,
            values: self
                .values
                .par_iter()
                .zip(v.values.par_iter())
                .map(|(&s, &w)| w * s)
                .collect(),
        }
    }

    /// Pointwise `self * v` for a constant vector.
    pub fn times_const(&self, v: Vec3) -> VectorField {
        VectorField {
            grid: self.grid,
            values: self.values.par_iter().map(|&s| v * s).collect(),
        }
    }

    pub fn max_norm(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Root-mean-square over nodes (volume-normalised L2 norm).
    pub fn rms(&self) -> f64 {
        (self.values.iter().map(|v| v * v).sum::<f64>() / self.values.len() as f64).sqrt()
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.sum() / self.values.len() as f64
    }

    pub fn max_abs_diff(&self, o: &ScalarField) -> f64 {
        check_grid(&self.grid, &o.grid);
        self.values
            .iter()
            .zip(&o.values)
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()))
    }
}

impl VectorField {
    pub fn zeros(grid: GridSpec) -> Self {
        Self::constant(grid, Vec3::ZERO)
    }

    pub fn constant(grid: GridSpec, v: Vec3) -> Self {
        Self {
            values: vec![v; grid.len()],
            grid,
        }
    }

    /// Samples `f` at every node position.
    pub fn from_fn(grid: GridSpec, f: impl Fn(Vec3) -> Vec3 + Sync) -> Self {
        let values = (0..grid.len())
            .into_par_iter()
            .map(|idx| f(grid.position_of(idx)))
            .collect();
        Self { grid, values }
    }

    pub fn from_values(grid: GridSpec, values: Vec<Vec3>) -> Option<Self> {
        (values.len() == grid.len()).then_some(Self { grid, values })
    }

    #[inline]
    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    #[inline]
    pub fn values(&self) -> &[Vec3] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Vec3] {
        &mut self.values
    }

    #[inline]
    pub fn at(&self, i: [usize; 3]) -> Vec3 {
        self.values[self.grid.index(i)]
    }

    pub fn component(&self, axis: usize) -> ScalarField {
        ScalarField {
            grid: self.grid,
            values: self.values.iter().map(|v| v[axis]).collect(),
        }
    }

    pub fn map(&self, f: impl Fn(Vec3) -> Vec3 + Sync) -> Self {
        Self {
            grid: self.grid,
            values: self.values.par_iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_map(&self, o: &VectorField, f: impl Fn(Vec3, Vec3) -> Vec3 + Sync) -> Self {
        check_grid(&self.grid, &o.grid);
        Self {
            grid: self.grid,
            values: self
                .values
                .par_iter()
                .zip(o.values.par_iter())
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn add(&self, o: &VectorField) -> Self {
        self.zip_map(o, |a, b| a + b)
    }

    pub fn sub(&self, o: &VectorField) -> Self {
        self.zip_map(o, |a, b| a - b)
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|v| v * s)
    }

    /// `self + s * o`.
    pub fn axpy(&self, s: f64, o: &VectorField) -> Self {
        self.zip_map(o, |a, b| a + b * s)
    }

    pub fn cross(&self, o: &VectorField) -> Self {
        self.zip_map(o, |a, b| a.cross(b))
    }

    pub fn dot(&self, o: &VectorField) -> ScalarField {
        check_grid(&self.grid, &o.grid);
        ScalarField {
            grid: self.grid,
            values: self
                .values
                .par_iter()
                .zip(o.values.par_iter())
                .map(|(a, b)| a.dot(*b))
                .collect(),
        }
    }

    /// Pointwise `self * s`.
    pub fn times_scalar(&self, s: &ScalarField) -> Self {
        s.times_vector(self)
    }

    /// Largest nodal magnitude |v|.
    pub fn max_norm(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.norm()))
    }

    /// Root-mean-square of |v| over nodes.
    pub fn rms(&self) -> f64 {
        (self.values.iter().map(|v| v.norm_sq()).sum::<f64>() / self.values.len() as f64).sqrt()
    }

    pub fn max_abs_diff(&self, o: &VectorField) -> f64 {
        check_grid(&self.grid, &o.grid);
        self.values
            .iter()
            .zip(&o.values)
            .fold(0.0_f64, |m, (a, b)| m.max((*a - *b).max_abs()))
    }
}

/// Pointwise `a × f` for a constant vector `a`.
pub fn cross_const(a: Vec3, f: &VectorField) -> VectorField {
    f.map(|v| a.cross(v))
}

/// Pointwise `a · f` for a constant vector `a`.
pub fn dot_const(a: Vec3, f: &VectorField) -> ScalarField {
    ScalarField {
        grid: f.grid,
        values: f.values.par_iter().map(|v| a.dot(*v)).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_field(grid: GridSpec, rng: &mut ChaCha8Rng) -> VectorField {
        let values = (0..grid.len())
            .map(|_| {
                Vec3::new(
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                )
            })
            .collect();
        VectorField::from_values(grid, values).unwrap()
    }

    #[test]
    fn pointwise_cross_basis() {
        let g = GridSpec::cube(4, 1.0).unwrap();
        let a = VectorField::constant(g, Vec3::unit(0));
        let b = VectorField::constant(g, Vec3::unit(1));
        assert!(a.cross(&b).values().iter().all(|&v| v == Vec3::unit(2)));
        assert_eq!(a.cross(&a).max_norm(), 0.0);
    }

    #[test]
    fn triple_product_expansion_on_random_fields() {
        let g = GridSpec::cube(6, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let a = random_field(g, &mut rng);
        let b = random_field(g, &mut rng);
        let c = random_field(g, &mut rng);
        let lhs = a.cross(&b.cross(&c));
        let rhs = a
            .dot(&c)
            .times_vector(&b)
            .sub(&a.dot(&b).times_vector(&c));
        assert!(lhs.max_abs_diff(&rhs) < 1e-14);
    }

    #[test]
    #[should_panic(expected = "different grids")]
    fn mismatched_grids_panic() {
        let a = ScalarField::zeros(GridSpec::cube(4, 1.0).unwrap());
        let b = ScalarField::zeros(GridSpec::cube(5, 1.0).unwrap());
        let _ = a.add(&b);
    }

    #[test]
    fn norms() {
        let g = GridSpec::cube(4, 1.0).unwrap();
        let f = VectorField::constant(g, Vec3::new(3.0, 0.0, 4.0));
        assert_eq!(f.max_norm(), 5.0);
        assert!((f.rms() - 5.0).abs() < 1e-15);
    }
}
