//! Wasserstein distances between discrete measures on the unit cube.
//!
//! [`wp_exact`] solves the transport problem as an uncapacitated min-cost
//! flow and returns the plan together with dual potentials that certify
//! optimality. [`sinkhorn`] is the entropic approximation used when the
//! supports are too large for the exact solver. [`w1_1d_oracle`] computes
//! W₁ in one dimension from cumulative sums and serves as an independent
//! reference.

mod exact;
pub mod flow;
mod knn;
mod oracle;
mod sinkhorn;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid_function::DiscreteMeasure;

pub use exact::{wp_exact, wp_exact_with, DualCertificate, ExactSolution};
pub use flow::{FlowNetwork, FlowSolution};
pub use oracle::w1_1d_oracle;
pub use sinkhorn::{sinkhorn, sinkhorn_with, SinkhornResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Exact,
    Sinkhorn,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Exact => "exact",
            Method::Sinkhorn => "sinkhorn",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Method::Exact),
            "sinkhorn" => Ok(Method::Sinkhorn),
            other => Err(Error::InvalidConfig(format!("unknown method `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub method: Method,
    pub p: f64,
    /// Entropic regularisation for Sinkhorn, in cost units. `None` lets the
    /// caller choose (the grid spacing for grid measures).
    pub reg: Option<f64>,
    pub max_iter: usize,
    /// Relative marginal tolerance.
    pub feasibility_tol: f64,
    /// Relative complementary-slackness tolerance.
    pub duality_tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            method: Method::Exact,
            p: 1.0,
            reg: None,
            max_iter: 20_000,
            feasibility_tol: 1e-9,
            duality_tol: 1e-9,
        }
    }
}

impl SolverConfig {
    pub fn exact(p: f64) -> Self {
        Self { p, ..Self::default() }
    }

    pub fn sinkhorn(p: f64, reg: f64) -> Self {
        Self {
            method: Method::Sinkhorn,
            p,
            reg: Some(reg),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p >= 1.0 && self.p.is_finite()) {
            return Err(Error::InvalidConfig(format!("p = {} must be >= 1", self.p)));
        }
        if let Some(reg) = self.reg {
            if !(reg > 0.0 && reg.is_finite()) {
                return Err(Error::InvalidConfig(format!("reg = {reg} must be > 0")));
            }
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidConfig("max_iter must be positive".into()));
        }
        for (name, tol) in [
            ("feasibility_tol", self.feasibility_tol),
            ("duality_tol", self.duality_tol),
        ] {
            if !(tol > 0.0 && tol.is_finite()) {
                return Err(Error::InvalidConfig(format!("{name} = {tol} must be > 0")));
            }
        }
        Ok(())
    }
}

/// A coupling between two discrete measures.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportPlan {
    /// `(source atom, target atom, mass)`, indices into the input measures.
    pub pairs: Vec<(usize, usize, f64)>,
    /// `Σ mass · |x − y|^p`, before the p-th root.
    pub cost: f64,
    pub p: f64,
}

impl TransportPlan {
    /// Largest deviation of a row or column sum from the corresponding
    /// marginal, relative to the total mass of `mu`.
    pub fn marginal_error(&self, mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> f64 {
        let mut rows = vec![0.0; mu.len()];
        let mut cols = vec![0.0; nu.len()];
        for &(i, j, m) in &self.pairs {
            rows[i] += m;
            cols[j] += m;
        }
        let worst = rows
            .iter()
            .zip(mu.masses())
            .chain(cols.iter().zip(nu.masses()))
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        worst / mu.total_mass()
    }

    /// `Σ mass · |x − y|^p` recomputed from the supports.
    pub fn evaluate_cost(&self, mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> f64 {
        crate::numerics::neumaier_sum(
            self.pairs
                .iter()
                .map(|&(i, j, m)| m * ground_cost(mu.point(i), nu.point(j), self.p)),
        )
    }
}

/// Result of [`transport`], whichever solver ran.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportResult {
    /// `W_p`, after the p-th root.
    pub cost: f64,
    pub method: Method,
    /// Always true for the exact solver.
    pub converged: bool,
}

/// `W_p(mu, nu)` with the solver selected by `cfg`.
pub fn transport(mu: &DiscreteMeasure, nu: &DiscreteMeasure, cfg: &SolverConfig) -> Result<TransportResult> {
    match cfg.method {
        Method::Exact => {
            let sol = wp_exact_with(mu, nu, cfg)?;
            Ok(TransportResult {
                cost: sol.cost,
                method: Method::Exact,
                converged: true,
            })
        }
        Method::Sinkhorn => {
            let res = sinkhorn_with(mu, nu, cfg)?;
            Ok(TransportResult {
                cost: res.cost,
                method: Method::Sinkhorn,
                converged: res.converged,
            })
        }
    }
}

/// `|x − y|^p` with the Euclidean distance.
pub fn ground_cost(x: &[f64], y: &[f64], p: f64) -> f64 {
    let sq: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
    if p == 1.0 {
        sq.sqrt()
    } else if p == 2.0 {
        sq
    } else {
        sq.powf(0.5 * p)
    }
}

/// Shared input checks: dimensions, nonempty supports and balanced mass.
fn check_pair(mu: &DiscreteMeasure, nu: &DiscreteMeasure, cfg: &SolverConfig) -> Result<()> {
    cfg.validate()?;
    if mu.dim() != nu.dim() {
        return Err(Error::WrongDimension {
            expected: mu.dim(),
            got: nu.dim(),
        });
    }
    let (a, b) = (mu.total_mass(), nu.total_mass());
    if mu.is_empty() || nu.is_empty() || a <= 0.0 || b <= 0.0 {
        return Err(Error::EmptySupport);
    }
    if (a - b).abs() > cfg.feasibility_tol * a {
        return Err(Error::MassMismatch { mu: a, nu: b });
    }
    Ok(())
}

/// Diagonal of the joint bounding box raised to `p`; the scale for
/// relative cost tolerances.
fn cost_scale(mu: &DiscreteMeasure, nu: &DiscreteMeasure, p: f64) -> f64 {
    let d = mu.dim();
    let mut lo = vec![f64::INFINITY; d];
    let mut hi = vec![f64::NEG_INFINITY; d];
    for x in mu.points().chunks_exact(d).chain(nu.points().chunks_exact(d)) {
        for a in 0..d {
            lo[a] = lo[a].min(x[a]);
            hi[a] = hi[a].max(x[a]);
        }
    }
    let s = ground_cost(&lo, &hi, p);
    if s > 0.0 {
        s
    } else {
        1.0
    }
}
