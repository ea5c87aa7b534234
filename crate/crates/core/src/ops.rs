//! Second-order central-difference operators on the periodic collocated grid.
//!
//! `D_a f(i) = (f(i + e_a) - f(i - e_a)) / 2h`. Every operator is built from
//! `D_a`, so the discrete operators commute and `div(curl f)` and
//! `curl(grad s)` vanish to round-off on any periodic field.

use rayon::prelude::*;

use crate::field::{ScalarField, VectorField};
use crate::grid::GridSpec;
use crate::vec3::Vec3;

#[inline]
fn stencil<T: Copy + Send + Sync, R: Send>(
    grid: &GridSpec,
    values: &[T],
    f: impl Fn([(T, T); 3]) -> R + Sync,
) -> Vec<R> {
    (0..grid.len())
        .into_par_iter()
        .map(|idx| {
            let pairs = [0, 1, 2].map(|a| {
                let (m, p) = grid.neighbours(idx, a);
                (values[m], values[p])
            });
            f(pairs)
        })
        .collect()
}

/// Central-difference partial derivative of a scalar field along `axis`.
pub fn partial(s: &ScalarField, axis: usize) -> ScalarField {
    let g = *s.grid();
    let inv = 0.5 / g.h();
    let values = stencil(&g, s.values(), |p| (p[axis].1 - p[axis].0) * inv);
    ScalarField::from_values(g, values).expect("length preserved")
}

pub fn gradient(s: &ScalarField) -> VectorField {
    let g = *s.grid();
    let inv = 0.5 / g.h();
    let values = stencil(&g, s.values(), |p| {
        Vec3::new(p[0].1 - p[0].0, p[1].1 - p[1].0, p[2].1 - p[2].0) * inv
    });
    VectorField::from_values(g, values).expect("length preserved")
}

pub fn divergence(f: &VectorField) -> ScalarField {
    let g = *f.grid();
    let inv = 0.5 / g.h();
    let values = stencil(&g, f.values(), |p| {
        ((p[0].1[0] - p[0].0[0]) + (p[1].1[1] - p[1].0[1]) + (p[2].1[2] - p[2].0[2])) * inv
    });
    ScalarField::from_values(g, values).expect("length preserved")
}

pub fn curl(f: &VectorField) -> VectorField {
    let g = *f.grid();
    let inv = 0.5 / g.h();
    let values = stencil(&g, f.values(), |p| {
        // d[a] = D_a f (unscaled)
        let d = p.map(|(m, pl)| pl - m);
        Vec3::new(
            d[1][2] - d[2][1],
            d[2][0] - d[0][2],
            d[0][1] - d[1][0],
        ) * inv
    });
    VectorField::from_values(g, values).expect("length preserved")
}

/// `(a · ∇) f` for a constant vector `a`.
pub fn directional(a: Vec3, f: &VectorField) -> VectorField {
    let g = *f.grid();
    let inv = 0.5 / g.h();
    let values = stencil(&g, f.values(), |p| {
        ((p[0].1 - p[0].0) * a[0] + (p[1].1 - p[1].0) * a[1] + (p[2].1 - p[2].0) * a[2]) * inv
    });
    VectorField::from_values(g, values).expect("length preserved")
}

/// `(a · ∇) f` with a variable vector field `a`.
pub fn directional_field(a: &VectorField, f: &VectorField) -> VectorField {
    assert!(a.grid().same_as(f.grid()), "field operands live on different grids");
    let g = *f.grid();
    let inv = 0.5 / g.h();
    let av = a.values();
    let fv = f.values();
    let values = (0..g.len())
        .into_par_iter()
        .map(|idx| {
            let w = av[idx];
            let mut acc = Vec3::ZERO;
            for axis in 0..3 {
                let (m, p) = g.neighbours(idx, axis);
                acc += (fv[p] - fv[m]) * w[axis];
            }
            acc * inv
        })
        .collect();
    VectorField::from_values(g, values).expect("length preserved")
}
