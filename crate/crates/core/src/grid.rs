use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vec3::Vec3;

/// Minimum nodes per axis for the central-difference stencil.
pub const MIN_DIM: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    #[default]
    Periodic,
}

/// Uniform collocated grid. Node `(ix, iy, iz)` sits at `origin + h * (ix, iy, iz)`.
///
/// Nodes are stored x-major: the flat index is `(ix * ny + iy) * nz + iz`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGrid", into = "RawGrid")]
pub struct GridSpec {
    dims: [usize; 3],
    h: f64,
    origin: Vec3,
    boundary: Boundary,
}

#[derive(Serialize, Deserialize)]
struct RawGrid {
    dims: [usize; 3],
    h: f64,
    #[serde(default)]
    origin: Vec3,
    #[serde(default)]
    boundary: Boundary,
}

impl TryFrom<RawGrid> for GridSpec {
    type Error = Error;
    fn try_from(r: RawGrid) -> Result<Self> {
        GridSpec::with_origin(r.dims, r.h, r.origin)
    }
}

impl From<GridSpec> for RawGrid {
    fn from(g: GridSpec) -> Self {
        RawGrid {
            dims: g.dims,
            h: g.h,
            origin: g.origin,
            boundary: g.boundary,
        }
    }
}

impl GridSpec {
    pub fn new(dims: [usize; 3], h: f64) -> Result<Self> {
        Self::with_origin(dims, h, Vec3::ZERO)
    }

    pub fn with_origin(dims: [usize; 3], h: f64, origin: Vec3) -> Result<Self> {
        if let Some(d) = dims.iter().find(|&&d| d < MIN_DIM) {
            return Err(Error::InvalidGrid(format!(
                "each axis needs at least {MIN_DIM} nodes, got {d}"
            )));
        }
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidGrid(format!("spacing must be positive, got {h}")));
        }
        if !origin.is_finite() {
            return Err(Error::InvalidGrid("origin must be finite".into()));
        }
        Ok(Self {
            dims,
            h,
            origin,
            boundary: Boundary::Periodic,
        })
    }

    /// `n`³ nodes covering the periodic box `[0, length)³`.
    pub fn cube(n: usize, length: f64) -> Result<Self> {
        Self::new([n; 3], length / n as f64)
    }

    #[inline]
    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    #[inline]
    pub fn h(&self) -> f64 {
        self.h
    }

    #[inline]
    pub fn origin(&self) -> Vec3 {
        self.origin
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.dims[0] * self.dims[1] * self.dims[2]
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Period of the box along each axis.
    pub fn lengths(&self) -> Vec3 {
        Vec3(self.dims.map(|d| d as f64 * self.h))
    }

    pub fn cell_volume(&self) -> f64 {
        self.h * self.h * self.h
    }

    #[inline]
    pub fn strides(&self) -> [usize; 3] {
        [self.dims[1] * self.dims[2], self.dims[2], 1]
    }

    #[inline]
    pub fn index(&self, i: [usize; 3]) -> usize {
        (i[0] * self.dims[1] + i[1]) * self.dims[2] + i[2]
    }

    #[inline]
    pub fn coords(&self, idx: usize) -> [usize; 3] {
        let iz = idx % self.dims[2];
        let rest = idx / self.dims[2];
        [rest / self.dims[1], rest % self.dims[1], iz]
    }

    #[inline]
    pub fn position(&self, i: [usize; 3]) -> Vec3 {
        self.origin + Vec3(i.map(|v| v as f64)) * self.h
    }

    pub fn position_of(&self, idx: usize) -> Vec3 {
        self.position(self.coords(idx))
    }

    /// Flat indices of the two neighbours of `idx` along `axis`, with periodic wrap.
    #[inline]
    pub fn neighbours(&self, idx: usize, axis: usize) -> (usize, usize) {
        let i = self.coords(idx);
        let n = self.dims[axis];
        let s = self.strides()[axis];
        let base = idx - i[axis] * s;
        let minus = if i[axis] == 0 { n - 1 } else { i[axis] - 1 };
        let plus = if i[axis] + 1 == n { 0 } else { i[axis] + 1 };
        (base + minus * s, base + plus * s)
    }

    /// True when no stencil reaching `depth` nodes from `i` wraps around the box.
    pub fn is_interior(&self, i: [usize; 3], depth: usize) -> bool {
        (0..3).all(|a| i[a] >= depth && i[a] + depth < self.dims[a])
    }

    /// Whether two grids describe the same lattice (bitwise-equal spacing and origin).
    pub fn same_as(&self, other: &GridSpec) -> bool {
        self == other
    }
}
