//! FFT solve of the discrete Poisson problem `div(grad φ) = f` on the periodic grid.
//!
//! The compound operator uses the same central differences as [`crate::ops`], so its
//! Fourier symbol is `-Σ sin²(k_a h) / h²`. Modes where the symbol vanishes (the mean
//! and the odd-even Nyquist modes) are projected out.

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::constants::PhysicalConstants;
use crate::field::{ScalarField, VectorField};
use crate::grid::GridSpec;
use crate::ops;

const NULL_SYMBOL: f64 = 1e-12;

fn fft3(buf: &mut [Complex64], grid: &GridSpec, inverse: bool) {
    let dims = grid.dims();
    let strides = grid.strides();
    let mut planner = FftPlanner::<f64>::new();
    for axis in 0..3 {
        let n = dims[axis];
        let fft = if inverse {
            planner.plan_fft_inverse(n)
        } else {
            planner.plan_fft_forward(n)
        };
        let s = strides[axis];
        let mut line = vec![Complex64::default(); n];
        for start in 0..grid.len() {
            if grid.coords(start)[axis] != 0 {
                continue;
            }
            for (i, slot) in line.iter_mut().enumerate() {
                *slot = buf[start + i * s];
            }
            fft.process(&mut line);
            for (i, v) in line.iter().enumerate() {
                buf[start + i * s] = *v;
            }
        }
    }
    if inverse {
        let norm = 1.0 / grid.len() as f64;
        buf.iter_mut().for_each(|v| *v *= norm);
    }
}

/// Solves `div(grad φ) = f` with the discrete operators; the returned φ has zero mean.
pub fn solve_poisson(f: &ScalarField) -> ScalarField {
    let g = *f.grid();
    let dims = g.dims();
    let h2 = g.h() * g.h();
    let mut buf: Vec<Complex64> = f.values().iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft3(&mut buf, &g, false);
    for (idx, v) in buf.iter_mut().enumerate() {
        let m = g.coords(idx);
        let symbol: f64 = (0..3)
            .map(|a| {
                let theta = 2.0 * std::f64::consts::PI * m[a] as f64 / dims[a] as f64;
                theta.sin().powi(2)
            })
            .sum::<f64>()
            / h2;
        if symbol * h2 < NULL_SYMBOL {
            *v = Complex64::default();
        } else {
            *v /= -symbol;
        }
    }
    fft3(&mut buf, &g, true);
    ScalarField::from_values(g, buf.iter().map(|c| c.re).collect()).expect("length preserved")
}

/// Electrostatic field `E = -grad φ` with `div E = (ρ - <ρ>)/ε₀` in the discrete sense.
pub fn electrostatic_field(rho: &ScalarField, k: &PhysicalConstants) -> VectorField {
    let phi = solve_poisson(&rho.scale(-1.0 / k.eps0()));
    ops::gradient(&phi).scale(-1.0)
}
