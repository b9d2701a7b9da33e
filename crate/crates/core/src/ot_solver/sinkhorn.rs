//! Log-domain Sinkhorn iterations with ε-scaling.

use super::{check_pair, ground_cost, SolverConfig};
use crate::error::{Error, Result};
use crate::grid_function::DiscreteMeasure;

/// Largest cost matrix the solver will allocate.
const MAX_ENTRIES: usize = 1 << 25;
/// Intermediate ε-scaling stages stop at this marginal error.
const STAGE_TOL: f64 = 1e-3;
const STAGE_ITERS: usize = 100;
const SHRINK: f64 = 0.5;

#[derive(Debug, Clone, PartialEq)]
pub struct SinkhornResult {
    /// `(⟨C, P⟩)^{1/p}` for the final plan `P`.
    pub cost: f64,
    /// True when the L¹ marginal violation (relative to the total mass)
    /// reached `feasibility_tol`.
    pub converged: bool,
    pub marginal_error: f64,
    pub iterations: usize,
}

/// Entropic approximation of `W_p(mu, nu)` with regularisation `reg`.
pub fn sinkhorn(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    p: f64,
    reg: f64,
    max_iter: usize,
) -> Result<SinkhornResult> {
    let cfg = SolverConfig {
        max_iter,
        ..SolverConfig::sinkhorn(p, reg)
    };
    sinkhorn_with(mu, nu, &cfg)
}

pub fn sinkhorn_with(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    cfg: &SolverConfig,
) -> Result<SinkhornResult> {
    check_pair(mu, nu, cfg)?;
    let reg = cfg
        .reg
        .ok_or_else(|| Error::InvalidConfig("sinkhorn needs reg > 0".into()))?;
    let (n, m) = (mu.len(), nu.len());
    if n.saturating_mul(m) > MAX_ENTRIES {
        return Err(Error::TooLarge {
            what: "sinkhorn cost matrix",
            size: n.saturating_mul(m),
            limit: MAX_ENTRIES,
        });
    }
    let total = mu.total_mass();
    let a: Vec<f64> = mu.masses().iter().map(|v| v / total).collect();
    let nu_total = nu.total_mass();
    let b: Vec<f64> = nu.masses().iter().map(|v| v / nu_total).collect();
    let log_a: Vec<f64> = a.iter().map(|v| v.ln()).collect();
    let log_b: Vec<f64> = b.iter().map(|v| v.ln()).collect();

    let mut cost = vec![0.0; n * m];
    for i in 0..n {
        for j in 0..m {
            cost[i * m + j] = ground_cost(mu.point(i), nu.point(j), cfg.p);
        }
    }
    let c_max = cost.iter().copied().fold(0.0, f64::max);

    let mut f = vec![0.0; n];
    let mut g = vec![0.0; m];
    let mut scratch = vec![0.0; n.max(m)];
    let mut eps = c_max.max(reg);
    let mut iterations = 0;
    let mut err = f64::INFINITY;
    loop {
        let last = eps <= reg;
        let (tol, cap) = if last {
            (cfg.feasibility_tol, cfg.max_iter)
        } else {
            (STAGE_TOL, STAGE_ITERS)
        };
        let mut stage_iters = 0;
        while stage_iters < cap && iterations < cfg.max_iter {
            // f-update (rows exact), then g-update (columns exact).
            for i in 0..n {
                let row = &cost[i * m..(i + 1) * m];
                for j in 0..m {
                    scratch[j] = g[j] - row[j];
                }
                f[i] = eps * (log_a[i] - log_sum_exp(&scratch[..m], eps));
            }
            for j in 0..m {
                for i in 0..n {
                    scratch[i] = f[i] - cost[i * m + j];
                }
                g[j] = eps * (log_b[j] - log_sum_exp(&scratch[..n], eps));
            }
            iterations += 1;
            stage_iters += 1;
            err = row_violation(&cost, &f, &g, &a, eps, m);
            if err <= tol {
                break;
            }
        }
        if last || iterations >= cfg.max_iter {
            let value: f64 = (0..n)
                .map(|i| {
                    (0..m)
                        .map(|j| {
                            let c = cost[i * m + j];
                            c * ((f[i] + g[j] - c) / eps).exp()
                        })
                        .sum::<f64>()
                })
                .sum();
            let raw = value * total;
            return Ok(SinkhornResult {
                cost: raw.max(0.0).powf(1.0 / cfg.p),
                converged: last && err <= cfg.feasibility_tol,
                marginal_error: err,
                iterations,
            });
        }
        eps = (eps * SHRINK).max(reg);
    }
}

/// `log Σ exp(v / eps)`.
fn log_sum_exp(v: &[f64], eps: f64) -> f64 {
    let top = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let s: f64 = v.iter().map(|x| ((x - top) / eps).exp()).sum();
    top / eps + s.ln()
}

fn row_violation(cost: &[f64], f: &[f64], g: &[f64], a: &[f64], eps: f64, m: usize) -> f64 {
    f.iter()
        .enumerate()
        .map(|(i, fi)| {
            let row = &cost[i * m..(i + 1) * m];
            let r: f64 = row.iter().zip(g).map(|(c, gj)| ((fi + gj - c) / eps).exp()).sum();
            (r - a[i]).abs()
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ot_solver::Method;

    #[test]
    fn two_atoms_half_apart() {
        let mu = DiscreteMeasure::new(1, vec![0.25], vec![1.0]).unwrap();
        let nu = DiscreteMeasure::new(1, vec![0.75], vec![1.0]).unwrap();
        let res = sinkhorn(&mu, &nu, 1.0, 1e-3, 1000).unwrap();
        assert!((res.cost - 0.5).abs() < 1e-2);
        assert!(res.converged);
    }

    #[test]
    fn identical_measures_are_nearly_free() {
        let mu = DiscreteMeasure::new(1, vec![0.1, 0.5, 0.9], vec![0.3, 0.3, 0.4]).unwrap();
        let res = sinkhorn(&mu, &mu, 1.0, 1e-3, 5000).unwrap();
        // Atoms 0.4 apart: off-diagonal weight is about exp(−400).
        assert!(res.cost < 1e-9);
    }

    #[test]
    fn missing_reg_is_rejected() {
        let mu = DiscreteMeasure::new(1, vec![0.1], vec![1.0]).unwrap();
        let cfg = SolverConfig {
            method: Method::Sinkhorn,
            ..SolverConfig::default()
        };
        assert!(matches!(
            sinkhorn_with(&mu, &mu, &cfg),
            Err(Error::InvalidConfig(_))
        ));
    }
}
