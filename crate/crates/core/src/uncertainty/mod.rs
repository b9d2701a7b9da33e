//! The transport/nodal-set uncertainty product on the unit cube.
//!
//! [`uncertainty_product`] measures `W_p(f₊, f₋) · 𝓗^{d−1}{f = 0}` and
//! compares it with `(‖f‖₁/‖f‖∞)^α ‖f‖₁`. [`cube_decomposition`] and
//! [`critical_scale`] expose the quantities of the lower-bound argument, and
//! [`ExtremalFamily`] builds the bump configurations that show the exponent
//! `(d−1)/d` cannot be beaten.

mod cubes;
mod extremal;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::grid_function::{DiscreteMeasure, GridFunction};
use crate::ot_solver::{transport, Method, SolverConfig};

pub use cubes::{
    critical_scale, cube_decomposition, CriticalScale, CubeBounds, CubeClass, CubeDecomposition, CubeRecord,
};
pub use extremal::{
    extremal_family, scaling_sweep, scaling_sweep_with, ExtremalAnalytic, ExtremalFamily, ScalingSweep,
    SweepRow,
};

/// Largest transport support per side for the automatic resolution.
const AUTO_ATOMS_PER_AXIS: [usize; 3] = [4096, 64, 16];

/// Which measures the transport cost is computed between.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Resolution {
    /// One atom per grid cell.
    Full,
    /// Cells pooled into `b^d` blocks; each block contributes one positive
    /// and one negative atom at the respective centroids.
    Blocks(usize),
}

impl Resolution {
    /// Full resolution up to about 4096 atoms per side, pooled beyond.
    pub fn auto(dim: usize, n: usize) -> Self {
        let cap = AUTO_ATOMS_PER_AXIS[dim.clamp(1, 3) - 1];
        if n <= cap {
            Resolution::Full
        } else {
            Resolution::Blocks(cap)
        }
    }

    /// Transport atoms per axis for a grid with `n` cells per axis.
    pub fn atoms_per_axis(self, n: usize) -> usize {
        match self {
            Resolution::Full => n,
            Resolution::Blocks(b) => b.min(n),
        }
    }

    pub fn measures(self, f: &GridFunction) -> Result<(DiscreteMeasure, DiscreteMeasure)> {
        match self {
            Resolution::Blocks(b) if b < f.n() => f.split_signs_pooled(b),
            _ => f.split_signs(),
        }
    }
}

/// `α = 3 − 1/d + 1/p`; equal to `4 − 1/d` for `p = 1`.
pub fn product_exponent(dim: usize, p: f64) -> f64 {
    (3.0 + 1.0 / p) - 1.0 / dim as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UncertaintyReport {
    pub dim: usize,
    pub n: usize,
    pub p: f64,
    /// `W_p(f₊, f₋)`.
    pub w: f64,
    pub nodal: f64,
    pub l1: f64,
    pub linf: f64,
    pub ratio: f64,
    pub alpha: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub quotient: f64,
    pub method: Method,
    /// Transport atoms per axis.
    pub resolution: usize,
    pub converged: bool,
}

/// Uncertainty product of `f` with the automatic transport resolution.
pub fn uncertainty_product(f: &GridFunction, cfg: &SolverConfig) -> Result<UncertaintyReport> {
    uncertainty_product_at(f, cfg, Resolution::auto(f.dim(), f.n()))
}

pub fn uncertainty_product_at(
    f: &GridFunction,
    cfg: &SolverConfig,
    resolution: Resolution,
) -> Result<UncertaintyReport> {
    f.require_zero_mean()?;
    cfg.validate()?;
    let norms = f.norms();
    let (mu, nu) = resolution.measures(f)?;
    let atoms = resolution.atoms_per_axis(f.n());
    let mut cfg = cfg.clone();
    if cfg.method == Method::Sinkhorn && cfg.reg.is_none() {
        cfg.reg = Some(1.0 / atoms as f64);
    }
    let result = transport(&mu, &nu, &cfg)?;
    let nodal = f.nodal_measure();
    Ok(assemble(
        f.dim(),
        f.n(),
        cfg.p,
        result.cost,
        nodal,
        norms.l1,
        norms.linf,
        result.method,
        atoms,
        result.converged,
    ))
}

#[allow(clippy::too_many_arguments)]
fn assemble(
    dim: usize,
    n: usize,
    p: f64,
    w: f64,
    nodal: f64,
    l1: f64,
    linf: f64,
    method: Method,
    resolution: usize,
    converged: bool,
) -> UncertaintyReport {
    let ratio = l1 / linf;
    let alpha = product_exponent(dim, p);
    let lhs = w * nodal;
    let rhs = ratio.powf(alpha) * l1;
    UncertaintyReport {
        dim,
        n,
        p,
        w,
        nodal,
        l1,
        linf,
        ratio,
        alpha,
        lhs,
        rhs,
        quotient: lhs / rhs,
        method,
        resolution,
        converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn exponent_for_p_one_is_exact() {
        for d in 1..=3 {
            assert_eq!(product_exponent(d, 1.0), 4.0 - 1.0 / d as f64);
        }
        assert!((product_exponent(2, 2.0) - 3.0).abs() < 1e-15);
    }

    #[test]
    fn cosine_in_the_plane() {
        let f = GridFunction::from_fn(2, 64, |x| (PI * x[0]).cos()).unwrap();
        let r = uncertainty_product(&f, &SolverConfig::default()).unwrap();
        assert!((r.nodal - 1.0).abs() < 1e-9);
        let w = 2.0 / (PI * PI);
        assert!((r.w - w).abs() < 1e-3 * w, "w = {}", r.w);
        assert!((r.l1 - 2.0 / PI).abs() < 1e-3);
        assert!((r.linf - 1.0).abs() < 1e-3);
        assert!(r.quotient > 0.0);
        assert_eq!(r.method, Method::Exact);
    }

    #[test]
    fn quotient_is_scale_invariant() {
        let f = GridFunction::from_fn(2, 24, |x| {
            (PI * x[0]).cos() * (2.0 * PI * x[1]).cos() + 0.3 * (PI * x[1]).cos()
        })
        .unwrap()
        .make_zero_mean()
        .unwrap();
        let cfg = SolverConfig::default();
        let a = uncertainty_product(&f, &cfg).unwrap();
        let b = uncertainty_product(&f.scaled(7.5), &cfg).unwrap();
        assert!((a.quotient - b.quotient).abs() < 1e-9 * a.quotient);
    }
}
