//! Bump configurations that are nearly extremal for the uncertainty product.
//!
//! `n` indicator balls of radius `ε` and height `ε^{−d}/n` sit at the centres
//! of a regular lattice on a constant negative background chosen so that the
//! mean vanishes. As `ε → 0` with `n` fixed, `‖f‖₁/‖f‖∞ ∼ nε^d` while the
//! product `W₁ · 𝓗^{d−1}` behaves like `ε^{d−1}`, so the product can only be
//! bounded below by a power `α ≥ (d−1)/d` of the ratio.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::{uncertainty_product_at, Resolution};
use crate::error::{Error, Result};
use crate::grid_function::GridFunction;
use crate::numerics::log_log_slope;
use crate::ot_solver::{Method, SolverConfig};

/// Cells per bump radius in the default grid.
const CELLS_PER_RADIUS: f64 = 8.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtremalFamily {
    pub dim: usize,
    pub points: usize,
    pub eps: f64,
    pub cells: Option<usize>,
}

/// Leading-order closed forms for the family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtremalAnalytic {
    pub l1: f64,
    pub linf: f64,
    pub ratio: f64,
    pub nodal: f64,
    /// Only meaningful when `points` is a perfect `d`-th power, so that
    /// every lattice cell holds one bump.
    pub w1: f64,
    pub lhs: f64,
}

/// Volume of the unit ball.
fn ball_volume(dim: usize) -> f64 {
    match dim {
        1 => 2.0,
        2 => PI,
        _ => 4.0 * PI / 3.0,
    }
}

/// Surface measure of the unit sphere (point count for `d = 1`).
fn sphere_area(dim: usize) -> f64 {
    match dim {
        1 => 2.0,
        2 => 2.0 * PI,
        _ => 4.0 * PI,
    }
}

/// Mean distance from the centre of the unit cube to a uniform point.
fn mean_centre_distance(dim: usize) -> f64 {
    match dim {
        1 => 0.25,
        2 => (2f64.sqrt() + (1.0 + 2f64.sqrt()).ln()) / 6.0,
        _ => 0.480_296_0,
    }
}

impl ExtremalFamily {
    pub fn new(dim: usize, points: usize, eps: f64) -> Self {
        Self {
            dim,
            points,
            eps,
            cells: None,
        }
    }

    pub fn with_cells(mut self, cells: usize) -> Self {
        self.cells = Some(cells);
        self
    }

    /// Lattice points per axis: the smallest `m` with `m^d ≥ points`.
    pub fn lattice_side(&self) -> usize {
        let mut m = (self.points as f64).powf(1.0 / self.dim as f64).floor().max(1.0) as usize;
        while m.pow(self.dim as u32) < self.points {
            m += 1;
        }
        m
    }

    /// Cells per axis of the sampling grid.
    pub fn grid_cells(&self) -> usize {
        self.cells
            .unwrap_or_else(|| (CELLS_PER_RADIUS / self.eps).ceil() as usize)
    }

    /// Bump centres, `dim` coordinates each.
    pub fn centres(&self) -> Vec<[f64; 3]> {
        let m = self.lattice_side();
        (0..self.points)
            .map(|mut k| {
                let mut c = [0.0; 3];
                for ca in c.iter_mut().take(self.dim) {
                    *ca = ((k % m) as f64 + 0.5) / m as f64;
                    k /= m;
                }
                c
            })
            .collect()
    }

    fn validate(&self) -> Result<()> {
        if !(1..=3).contains(&self.dim) {
            return Err(Error::InvalidConfig(format!(
                "dimension {} not in 1..=3",
                self.dim
            )));
        }
        if self.points == 0 {
            return Err(Error::InvalidConfig(
                "extremal family needs at least one point".into(),
            ));
        }
        let bound = (self.points as f64).powf(-1.0 / self.dim as f64) / 4.0;
        if !(self.eps > 0.0 && self.eps <= bound) {
            return Err(Error::EpsTooLarge { eps: self.eps, bound });
        }
        let h = 1.0 / self.grid_cells() as f64;
        if h > self.eps / CELLS_PER_RADIUS * (1.0 + 1e-12) {
            return Err(Error::ResolutionTooCoarse { h, eps: self.eps });
        }
        Ok(())
    }

    /// Samples the family on its grid; the background is the exact discrete
    /// value that makes the mean vanish.
    pub fn build(&self) -> Result<GridFunction> {
        self.validate()?;
        let dim = self.dim;
        let n = self.grid_cells();
        let height = self.eps.powi(-(dim as i32)) / self.points as f64;
        let m = self.lattice_side();
        let eps2 = self.eps * self.eps;
        let inside = GridFunction::from_fn(dim, n, |x| {
            // Nearest lattice centre along each axis.
            let mut sq = 0.0;
            let mut k = 0;
            let mut stride = 1;
            for &t in x.iter() {
                let j = ((t * m as f64) as usize).min(m - 1);
                let c = (j as f64 + 0.5) / m as f64;
                sq += (t - c) * (t - c);
                k += j * stride;
                stride *= m;
            }
            if k < self.points && sq < eps2 {
                1.0
            } else {
                0.0
            }
        })?;
        let count = inside.values().iter().filter(|v| **v > 0.0).count();
        if count == 0 {
            return Err(Error::ResolutionTooCoarse {
                h: 1.0 / n as f64,
                eps: self.eps,
            });
        }
        let background = height * count as f64 / n.pow(dim as u32) as f64;
        let values = inside
            .into_values()
            .into_iter()
            .map(|b| if b > 0.0 { height - background } else { -background })
            .collect();
        GridFunction::new(dim, n, values)
    }

    pub fn analytic(&self) -> ExtremalAnalytic {
        let d = self.dim;
        let n = self.points as f64;
        let omega = ball_volume(d);
        let eps_d = self.eps.powi(d as i32);
        let l1 = 2.0 * omega * (1.0 - n * omega * eps_d);
        let linf = 1.0 / (n * eps_d) - omega;
        let nodal = n * sphere_area(d) * self.eps.powi(d as i32 - 1);
        let s = 1.0 / self.lattice_side() as f64;
        let w1 = n * omega * mean_centre_distance(d) * s.powi(d as i32 + 1);
        ExtremalAnalytic {
            l1,
            linf,
            ratio: l1 / linf,
            nodal,
            w1,
            lhs: w1 * nodal,
        }
    }
}

/// The family sampled on its default grid.
pub fn extremal_family(dim: usize, points: usize, eps: f64) -> Result<GridFunction> {
    ExtremalFamily::new(dim, points, eps).build()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub eps: f64,
    pub cells: usize,
    pub ratio: f64,
    pub w: f64,
    pub nodal: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub quotient: f64,
    pub method: Method,
    pub resolution: usize,
    pub analytic: ExtremalAnalytic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingSweep {
    pub dim: usize,
    pub points: usize,
    pub rows: Vec<SweepRow>,
    /// Least-squares slope of `log lhs` against `log ratio`.
    pub slope: f64,
    /// `(d−1)/d`.
    pub target: f64,
}

/// Sweep over `eps_list` with the automatic transport resolution.
pub fn scaling_sweep(
    dim: usize,
    points: usize,
    eps_list: &[f64],
    cfg: &SolverConfig,
) -> Result<ScalingSweep> {
    scaling_sweep_with(dim, points, eps_list, cfg, |family| {
        Resolution::auto(dim, family.grid_cells())
    })
}

pub fn scaling_sweep_with(
    dim: usize,
    points: usize,
    eps_list: &[f64],
    cfg: &SolverConfig,
    resolution: impl Fn(&ExtremalFamily) -> Resolution + Sync,
) -> Result<ScalingSweep> {
    if eps_list.len() < 2 {
        return Err(Error::TooFewPoints(eps_list.len()));
    }
    let rows = eps_list
        .par_iter()
        .map(|&eps| {
            let family = ExtremalFamily::new(dim, points, eps);
            let f = family.build()?;
            let r = uncertainty_product_at(&f, cfg, resolution(&family))?;
            Ok(SweepRow {
                eps,
                cells: f.n(),
                ratio: r.ratio,
                w: r.w,
                nodal: r.nodal,
                lhs: r.lhs,
                rhs: r.rhs,
                quotient: r.quotient,
                method: r.method,
                resolution: r.resolution,
                analytic: family.analytic(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let ratios: Vec<f64> = rows.iter().map(|r| r.ratio).collect();
    let lhs: Vec<f64> = rows.iter().map(|r| r.lhs).collect();
    let slope = log_log_slope(&ratios, &lhs)?;
    Ok(ScalingSweep {
        dim,
        points,
        rows,
        slope,
        target: (dim as f64 - 1.0) / dim as f64,
    })
}
