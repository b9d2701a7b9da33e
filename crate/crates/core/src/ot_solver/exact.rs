//! Exact optimal transport as min-cost flow on the bipartite support graph.
//!
//! Small instances use every source/target pair as an arc. Larger ones start
//! from nearest-neighbour candidate arcs and add pairs with negative reduced
//! cost until none is left, so the final potentials are feasible for the
//! full bipartite problem.

use super::flow::NetworkSimplex;
use super::knn::k_nearest;
use super::{check_pair, cost_scale, ground_cost, SolverConfig, TransportPlan};
use crate::error::{Error, Result};
use crate::grid_function::DiscreteMeasure;

/// Above this many pairs the solver starts from sparse candidates.
const DENSE_PAIRS: usize = 1 << 18;
const NEIGHBOURS: usize = 16;
/// Violating pairs added per source in one pricing pass.
const PRICED_PER_SOURCE: usize = 8;
/// Atoms lighter than this fraction of the total are dropped.
const MASS_FLOOR: f64 = 1e-14;

/// Dual potentials `(φ, ψ)` with `φ_i + ψ_j ≤ c_ij` for every pair.
#[derive(Debug, Clone, PartialEq)]
pub struct DualCertificate {
    /// One per atom of the source measure.
    pub phi: Vec<f64>,
    /// One per atom of the target measure.
    pub psi: Vec<f64>,
    /// `max(φ_i + ψ_j − c_ij)` over all pairs, relative to the cost scale.
    pub max_violation: f64,
    /// `max |c_ij − φ_i − ψ_j|` over pairs carrying mass, relative.
    pub max_active_gap: f64,
    /// `|primal − dual| / max(primal, scale · mass)`.
    pub duality_gap: f64,
}

impl DualCertificate {
    pub fn holds(&self, tol: f64) -> bool {
        self.max_violation <= tol && self.max_active_gap <= tol && self.duality_gap <= tol
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExactSolution {
    /// `W_p` (after the p-th root).
    pub cost: f64,
    pub plan: TransportPlan,
    pub certificate: DualCertificate,
}

/// `W_p(mu, nu)` by exact min-cost flow with default tolerances.
pub fn wp_exact(mu: &DiscreteMeasure, nu: &DiscreteMeasure, p: f64) -> Result<ExactSolution> {
    wp_exact_with(mu, nu, &SolverConfig::exact(p))
}

pub fn wp_exact_with(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    cfg: &SolverConfig,
) -> Result<ExactSolution> {
    check_pair(mu, nu, cfg)?;
    let p = cfg.p;
    let dim = mu.dim();
    let total = mu.total_mass();
    let floor = MASS_FLOOR * total;
    let keep_src: Vec<usize> = (0..mu.len()).filter(|&i| mu.masses()[i] > floor).collect();
    let keep_dst: Vec<usize> = (0..nu.len()).filter(|&j| nu.masses()[j] > floor).collect();
    if keep_src.is_empty() || keep_dst.is_empty() {
        return Err(Error::EmptySupport);
    }
    let xs: Vec<f64> = keep_src.iter().flat_map(|&i| mu.point(i).to_vec()).collect();
    let ys: Vec<f64> = keep_dst.iter().flat_map(|&j| nu.point(j).to_vec()).collect();
    let a: Vec<f64> = keep_src.iter().map(|&i| mu.masses()[i]).collect();
    let b_raw: Vec<f64> = keep_dst.iter().map(|&j| nu.masses()[j]).collect();
    let a_total: f64 = crate::numerics::neumaier_sum(a.iter().copied());
    let b_total: f64 = crate::numerics::neumaier_sum(b_raw.iter().copied());
    let b: Vec<f64> = b_raw.iter().map(|v| v * a_total / b_total).collect();

    let scale = cost_scale(mu, nu, p);
    let price_tol = 0.1 * cfg.duality_tol * scale;
    let problem = Problem {
        dim,
        p,
        xs: &xs,
        a: &a,
        ys: &ys,
        b: &b,
    };
    let (arcs, pi) = problem.solve(scale, price_tol)?;
    let n = a.len();

    // Plan in the caller's indexing.
    let pairs = arcs
        .iter()
        .map(|&(i, j, f)| (keep_src[i], keep_dst[j], f))
        .collect();
    let mut plan = TransportPlan { pairs, cost: 0.0, p };
    plan.cost = plan.evaluate_cost(mu, nu);

    // φ_i = −π_i, ψ_j = π_j; dropped atoms get the c-transform.
    let mut psi = vec![0.0; nu.len()];
    let mut psi_set = vec![false; nu.len()];
    for (jj, &j) in keep_dst.iter().enumerate() {
        psi[j] = pi[n + jj];
        psi_set[j] = true;
    }
    let mut phi = vec![0.0; mu.len()];
    let mut phi_set = vec![false; mu.len()];
    for (ii, &i) in keep_src.iter().enumerate() {
        phi[i] = -pi[ii];
        phi_set[i] = true;
    }
    for i in 0..mu.len() {
        if !phi_set[i] {
            phi[i] = keep_dst
                .iter()
                .map(|&j| ground_cost(mu.point(i), nu.point(j), p) - psi[j])
                .fold(f64::INFINITY, f64::min);
        }
    }
    for j in 0..nu.len() {
        if !psi_set[j] {
            psi[j] = (0..mu.len())
                .map(|i| ground_cost(mu.point(i), nu.point(j), p) - phi[i])
                .fold(f64::INFINITY, f64::min);
        }
    }
    let certificate = certify(mu, nu, &plan, phi, psi, scale);
    Ok(ExactSolution {
        cost: plan.cost.powf(1.0 / p),
        plan,
        certificate,
    })
}

/// Atoms per coarse bucket when seeding from a pooled problem.
const ATOMS_PER_BUCKET: f64 = 4.0;

/// Flat point arrays and masses with equal totals.
struct Problem<'a> {
    dim: usize,
    p: f64,
    xs: &'a [f64],
    a: &'a [f64],
    ys: &'a [f64],
    b: &'a [f64],
}

impl Problem<'_> {
    fn cost(&self, i: usize, j: usize) -> f64 {
        let d = self.dim;
        ground_cost(&self.xs[i * d..(i + 1) * d], &self.ys[j * d..(j + 1) * d], self.p)
    }

    /// Optimal flow `(i, j, mass)` and node potentials (sources first).
    #[allow(clippy::type_complexity)]
    fn solve(&self, scale: f64, price_tol: f64) -> Result<(Vec<(usize, usize, f64)>, Vec<f64>)> {
        let (n, m) = (self.a.len(), self.b.len());
        let a_total: f64 = self.a.iter().sum();
        let mut supply = self.a.to_vec();
        supply.extend(self.b.iter().map(|v| -v));
        let mut ns = NetworkSimplex::new(&supply, scale * (1.0 + 1e-9), 1e-15 * a_total)?;
        let mut present: Vec<Vec<u32>> = vec![Vec::new(); n];
        let mut add = |ns: &mut NetworkSimplex, i: usize, j: u32| -> Result<bool> {
            if present[i].contains(&j) {
                return Ok(false);
            }
            present[i].push(j);
            ns.add_arc(i, n + j as usize, self.cost(i, j as usize))?;
            Ok(true)
        };

        // The artificial arcs keep every restricted problem feasible, and
        // their potentials price the missing pairs as in the full problem.
        if n.saturating_mul(m) <= DENSE_PAIRS {
            for i in 0..n {
                for j in 0..m as u32 {
                    add(&mut ns, i, j)?;
                }
            }
            ns.run();
        } else {
            for (i, list) in self.seed().into_iter().enumerate() {
                for j in list {
                    add(&mut ns, i, j)?;
                }
            }
            let mut worst: Vec<(f64, u32)> = Vec::new();
            loop {
                ns.run();
                let pi = ns.potential();
                let mut violating: Vec<(usize, u32)> = Vec::new();
                for i in 0..n {
                    worst.clear();
                    worst.extend((0..m).filter_map(|j| {
                        let rc = self.cost(i, j) + pi[i] - pi[n + j];
                        (rc < -price_tol).then_some((rc, j as u32))
                    }));
                    if worst.len() > PRICED_PER_SOURCE {
                        worst.select_nth_unstable_by(PRICED_PER_SOURCE - 1, |p, q| p.0.total_cmp(&q.0));
                        worst.truncate(PRICED_PER_SOURCE);
                    }
                    violating.extend(worst.iter().map(|&(_, j)| (i, j)));
                }
                let mut added = 0;
                for (i, j) in violating {
                    if add(&mut ns, i, j)? {
                        added += 1;
                    }
                }
                if added == 0 {
                    break;
                }
            }
        }
        if !ns.is_feasible() {
            return Err(Error::Infeasible);
        }
        let arcs = (0..ns.num_arcs())
            .filter(|&k| ns.arc_flow(k) > 0.0)
            .map(|k| {
                let (u, v, _) = ns.arc(k);
                (u, v - n, ns.arc_flow(k))
            })
            .collect();
        Ok((arcs, ns.potential().to_vec()))
    }

    /// Candidate arcs for a large instance: nearest neighbours in both
    /// directions, plus every pair whose buckets exchange mass in the
    /// optimal plan of the pooled problem.
    fn seed(&self) -> Vec<Vec<u32>> {
        let dim = self.dim;
        let (n, m) = (self.a.len(), self.b.len());
        let mut lists = knn_candidates(dim, self.xs, self.ys, NEIGHBOURS);

        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for x in self.xs.chunks_exact(dim).chain(self.ys.chunks_exact(dim)) {
            for k in 0..dim {
                lo[k] = lo[k].min(x[k]);
                hi[k] = hi[k].max(x[k]);
            }
        }
        let g = ((n.max(m) as f64 / ATOMS_PER_BUCKET).powf(1.0 / dim as f64).ceil() as usize).max(1);
        let bucket = |x: &[f64]| -> usize {
            (0..dim).rev().fold(0, |acc, k| {
                let w = hi[k] - lo[k];
                let t = if w > 0.0 { (x[k] - lo[k]) / w } else { 0.0 };
                acc * g + ((t * g as f64) as usize).min(g - 1)
            })
        };
        let pool = |pts: &[f64], mass: &[f64]| {
            let mut slot = std::collections::HashMap::new();
            let mut members: Vec<Vec<u32>> = Vec::new();
            let mut centre: Vec<f64> = Vec::new();
            let mut total: Vec<f64> = Vec::new();
            for (i, x) in pts.chunks_exact(dim).enumerate() {
                let s = *slot.entry(bucket(x)).or_insert_with(|| {
                    members.push(Vec::new());
                    centre.extend(std::iter::repeat_n(0.0, dim));
                    total.push(0.0);
                    members.len() - 1
                });
                members[s].push(i as u32);
                total[s] += mass[i];
                for k in 0..dim {
                    centre[s * dim + k] += mass[i] * x[k];
                }
            }
            for (s, t) in total.iter().enumerate() {
                for k in 0..dim {
                    centre[s * dim + k] /= t;
                }
            }
            (members, centre, total)
        };
        let (src_members, cx, ca) = pool(self.xs, self.a);
        let (dst_members, cy, cb) = pool(self.ys, self.b);
        if 4 * ca.len() > 3 * n && 4 * cb.len() > 3 * m {
            return lists;
        }
        let cb_total: f64 = cb.iter().sum();
        let ca_total: f64 = ca.iter().sum();
        let cb: Vec<f64> = cb.iter().map(|v| v * ca_total / cb_total).collect();
        let coarse = Problem {
            dim,
            p: self.p,
            xs: &cx,
            a: &ca,
            ys: &cy,
            b: &cb,
        };
        let scale = ground_cost(&lo[..dim], &hi[..dim], self.p).max(f64::MIN_POSITIVE);
        if let Ok((arcs, _)) = coarse.solve(scale, 1e-10 * scale) {
            for (s, t, _) in arcs {
                for &i in &src_members[s] {
                    lists[i as usize].extend_from_slice(&dst_members[t]);
                }
            }
        }
        for list in &mut lists {
            list.sort_unstable();
            list.dedup();
        }
        lists
    }
}

fn knn_candidates(dim: usize, xs: &[f64], ys: &[f64], k: usize) -> Vec<Vec<u32>> {
    let n = xs.len() / dim;
    let mut lists = k_nearest(dim, ys, xs, k);
    for (j, near) in k_nearest(dim, xs, ys, k).into_iter().enumerate() {
        for i in near {
            lists[i as usize].push(j as u32);
        }
    }
    debug_assert_eq!(lists.len(), n);
    for list in &mut lists {
        list.sort_unstable();
        list.dedup();
    }
    lists
}

fn certify(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    plan: &TransportPlan,
    phi: Vec<f64>,
    psi: Vec<f64>,
    scale: f64,
) -> DualCertificate {
    let p = plan.p;
    let mut violation = 0.0_f64;
    for (i, x) in mu.points().chunks_exact(mu.dim()).enumerate() {
        for (j, y) in nu.points().chunks_exact(nu.dim()).enumerate() {
            violation = violation.max(phi[i] + psi[j] - ground_cost(x, y, p));
        }
    }
    let active = plan
        .pairs
        .iter()
        .map(|&(i, j, _)| (ground_cost(mu.point(i), nu.point(j), p) - phi[i] - psi[j]).abs())
        .fold(0.0, f64::max);
    let dual = crate::numerics::neumaier_sum(
        mu.masses()
            .iter()
            .zip(&phi)
            .map(|(m, v)| m * v)
            .chain(nu.masses().iter().zip(&psi).map(|(m, v)| m * v)),
    );
    let mass = mu.total_mass();
    DualCertificate {
        max_violation: violation / scale,
        max_active_gap: active / scale,
        duality_gap: (plan.cost - dual).abs() / (scale * mass),
        phi,
        psi,
    }
}
