//! Cell-centred samples of functions on the unit cube `[0,1]^d`, `d ∈ {1,2,3}`.
//!
//! A [`GridFunction`] holds one value per cell of a uniform grid with `n`
//! cells per axis. The value is read as the function's value at the cell
//! centre and, for integrals, as constant over the cell. Values are stored
//! with axis 0 varying fastest.

mod family;
mod io;
mod measure;
mod nodal;

pub(crate) use family::cosine_synthesis;
pub use family::{sample_family, FamilySpec};
pub use measure::DiscreteMeasure;

use crate::error::{Error, Result};
use crate::numerics::neumaier_sum;

/// Default relative tolerance certifying a zero mean.
pub const DEFAULT_MEAN_TOL: f64 = 1e-12;

/// Largest supported number of cells; keeps d = 3 grids at desk scale.
pub const MAX_CELLS: usize = 1 << 25;

/// `L¹` and `L^∞` norms of a grid function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Norms {
    pub l1: f64,
    pub linf: f64,
}

impl Norms {
    /// `‖f‖₁ / ‖f‖_∞`, or 0 for the zero function.
    pub fn ratio(&self) -> f64 {
        if self.linf > 0.0 {
            self.l1 / self.linf
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    dim: usize,
    n: usize,
    values: Vec<f64>,
    mean_tol: f64,
}

impl GridFunction {
    pub fn new(dim: usize, n: usize, values: Vec<f64>) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::InvalidGrid(format!("dimension {dim} not in 1..=3")));
        }
        if n == 0 {
            return Err(Error::InvalidGrid("zero cells per axis".into()));
        }
        let len = n
            .checked_pow(dim as u32)
            .filter(|&len| len <= MAX_CELLS)
            .ok_or_else(|| Error::InvalidGrid(format!("{n}^{dim} cells exceeds {MAX_CELLS}")))?;
        if values.len() != len {
            return Err(Error::InvalidGrid(format!(
                "expected {len} values, got {}",
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidGrid(format!("non-finite value at cell {i}")));
        }
        Ok(Self {
            dim,
            n,
            values,
            mean_tol: DEFAULT_MEAN_TOL,
        })
    }

    /// Samples `f` at every cell centre.
    pub fn from_fn(dim: usize, n: usize, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        if !(1..=3).contains(&dim) || n == 0 {
            return Self::new(dim, n, Vec::new());
        }
        let len = n
            .checked_pow(dim as u32)
            .filter(|&len| len <= MAX_CELLS)
            .ok_or_else(|| Error::InvalidGrid(format!("{n}^{dim} cells exceeds {MAX_CELLS}")))?;
        let h = 1.0 / n as f64;
        let mut x = [0.0; 3];
        let values = (0..len)
            .map(|idx| {
                let mut rem = idx;
                for xa in x.iter_mut().take(dim) {
                    *xa = ((rem % n) as f64 + 0.5) * h;
                    rem /= n;
                }
                f(&x[..dim])
            })
            .collect();
        Self::new(dim, n, values)
    }

    pub fn with_mean_tol(mut self, mean_tol: f64) -> Self {
        self.mean_tol = mean_tol;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Cells per axis.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Cell side `1/n`.
    pub fn h(&self) -> f64 {
        1.0 / self.n as f64
    }

    pub fn cell_volume(&self) -> f64 {
        self.h().powi(self.dim as i32)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn mean_tol(&self) -> f64 {
        self.mean_tol
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Multi-index of a flat cell index (unused axes are 0).
    pub fn multi_index(&self, idx: usize) -> [usize; 3] {
        let mut out = [0; 3];
        let mut rem = idx;
        for o in out.iter_mut().take(self.dim) {
            *o = rem % self.n;
            rem /= self.n;
        }
        out
    }

    pub fn flat_index(&self, multi: [usize; 3]) -> usize {
        (0..self.dim).rev().fold(0, |acc, a| acc * self.n + multi[a])
    }

    /// Centre of cell `idx`; only the first `dim` coordinates are meaningful.
    pub fn cell_center(&self, idx: usize) -> [f64; 3] {
        let h = self.h();
        let m = self.multi_index(idx);
        let mut x = [0.0; 3];
        for a in 0..self.dim {
            x[a] = (m[a] as f64 + 0.5) * h;
        }
        x
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = self.values.iter().map(|&v| f(v)).collect();
        Ok(Self::new(self.dim, self.n, values)?.with_mean_tol(self.mean_tol))
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            values: self.values.iter().map(|v| c * v).collect(),
            ..self.clone()
        }
    }

    /// Mirror image `x ↦ f(1 − x)` in every coordinate.
    pub fn reflected(&self) -> Self {
        let mut values = self.values.clone();
        values.reverse();
        Self {
            values,
            ..self.clone()
        }
    }

    /// Discrete integral `h^d Σ values`.
    pub fn integral(&self) -> f64 {
        neumaier_sum(self.values.iter().copied()) * self.cell_volume()
    }

    pub fn norms(&self) -> Norms {
        let l1 = neumaier_sum(self.values.iter().map(|v| v.abs())) * self.cell_volume();
        let linf = self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        Norms { l1, linf }
    }

    /// `|h^d Σ values| ≤ mean_tol · ‖f‖₁`.
    pub fn is_zero_mean(&self) -> bool {
        self.integral().abs() <= self.mean_tol * self.norms().l1
    }

    pub(crate) fn require_zero_mean(&self) -> Result<()> {
        if self.is_zero_mean() {
            Ok(())
        } else {
            Err(Error::NotZeroMean {
                mean: self.integral(),
                tol: self.mean_tol * self.norms().l1,
            })
        }
    }

    /// Subtracts the discrete mean from every value.
    pub fn make_zero_mean(&self) -> Result<Self> {
        let scale = self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let mut values = self.values.clone();
        // Two passes: the second removes the rounding left by the first.
        for _ in 0..2 {
            let mean = neumaier_sum(values.iter().copied()) / values.len() as f64;
            if mean == 0.0 {
                break;
            }
            values.iter_mut().for_each(|v| *v -= mean);
        }
        let centred_scale = values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        if centred_scale <= 1e-14 * scale || centred_scale == 0.0 {
            return Err(Error::AllConstant);
        }
        let out = Self::new(self.dim, self.n, values)?.with_mean_tol(self.mean_tol);
        out.require_zero_mean()?;
        Ok(out)
    }

    /// Splits a zero-mean function into `(f₊ dx, f₋ dx)` with one atom per cell.
    ///
    /// Cells whose value is exactly zero belong to neither measure.
    pub fn split_signs(&self) -> Result<(DiscreteMeasure, DiscreteMeasure)> {
        self.split_signs_pooled(self.n)
    }

    /// Like [`split_signs`](Self::split_signs), but cells are pooled into
    /// `blocks` blocks per axis. Each block contributes at most one positive
    /// and one negative atom, placed at the centroid of its mass.
    pub fn split_signs_pooled(&self, blocks: usize) -> Result<(DiscreteMeasure, DiscreteMeasure)> {
        self.require_zero_mean()?;
        let blocks = blocks.clamp(1, self.n);
        let dim = self.dim;
        let nb = blocks.pow(dim as u32);
        let vol = self.cell_volume();
        // Per block: mass and first moments, for each sign.
        let mut plus = vec![0.0; nb * (dim + 1)];
        let mut minus = vec![0.0; nb * (dim + 1)];
        for (idx, &v) in self.values.iter().enumerate() {
            if v == 0.0 {
                continue;
            }
            let m = self.multi_index(idx);
            let x = self.cell_center(idx);
            let block = (0..dim)
                .rev()
                .fold(0, |acc, a| acc * blocks + m[a] * blocks / self.n);
            let (acc, mass) = if v > 0.0 {
                (&mut plus, v * vol)
            } else {
                (&mut minus, -v * vol)
            };
            let row = &mut acc[block * (dim + 1)..(block + 1) * (dim + 1)];
            row[0] += mass;
            for a in 0..dim {
                row[a + 1] += mass * x[a];
            }
        }
        let build = |acc: &[f64]| {
            let mut points = Vec::new();
            let mut masses = Vec::new();
            for row in acc.chunks_exact(dim + 1) {
                if row[0] > 0.0 {
                    masses.push(row[0]);
                    points.extend(row[1..].iter().map(|s| (s / row[0]).clamp(0.0, 1.0)));
                }
            }
            DiscreteMeasure::new(dim, points, masses)
        };
        Ok((build(&plus)?, build(&minus)?))
    }

    /// Estimated `(d−1)`-dimensional measure of the zero set `{f = 0}`.
    ///
    /// Uses piecewise-linear interpolation on the dual grid of cell centres,
    /// extended to the boundary of the cube by linear extrapolation:
    /// sign changes in 1-D, marching squares in 2-D and marching tetrahedra
    /// in 3-D.
    pub fn nodal_measure(&self) -> f64 {
        nodal::nodal_measure(self)
    }
}
