//! Partition of the cube into ε-cubes and the classification used by the
//! lower-bound argument.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid_function::GridFunction;
use crate::numerics::neumaier_sum;

/// Threshold fraction for both the negligible and the unbalanced test.
const THRESHOLD: f64 = 1.0 / 100.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CubeClass {
    /// `ε^{−d}‖f₊‖_{L¹(Q)} ≤ ‖f₊‖₁/100`.
    Negligible,
    /// Not negligible and `‖f₋‖_{L¹(Q)} > ‖f₊‖_{L¹(Q)}/100`.
    Balanced,
    /// Not negligible and `‖f₋‖_{L¹(Q)} ≤ ‖f₊‖_{L¹(Q)}/100`.
    Unbalanced,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CubeRecord {
    /// Flat cube index, axis 0 fastest.
    pub index: usize,
    pub l1_plus: f64,
    pub l1_minus: f64,
    pub class: CubeClass,
    /// `(1/2d) ε^{1−d} ‖f₊‖_{L¹(Q)}/‖f‖∞`.
    pub annulus_r: f64,
    /// Root of `ε^d − (ε − 2r)^d = ‖f₊‖_{L¹(Q)}/‖f‖∞`, capped at `ε/2`.
    pub annulus_r_exact: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CubeBounds {
    /// `(49/50) ε^{−d} ‖f‖₁/‖f‖∞`, as stated for `|ℬ|`.
    pub b_lower: f64,
    /// `(99/200) ε^{−d} ‖f‖₁/‖f‖∞`, which follows from `‖f₊‖_{L¹(Q)} ≤ ε^d ‖f‖∞`.
    pub b_lower_rigorous: f64,
    /// `ε^{d+1} ‖f‖₁²/‖f‖∞`, up to constants.
    pub per_unbalanced_transport: f64,
    /// `ε^{d−1} (‖f‖₁/‖f‖∞)^{(d−1)/d}`, up to constants.
    pub per_balanced_nodal: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CubeDecomposition {
    pub dim: usize,
    pub epsilon: f64,
    pub cubes_per_axis: usize,
    pub cubes: Vec<CubeRecord>,
    /// `|𝒜|`.
    pub negligible: usize,
    /// `|ℬ|`.
    pub significant: usize,
    /// `E`.
    pub balanced: usize,
    /// `F`.
    pub unbalanced: usize,
    pub bounds: CubeBounds,
}

/// Cubes per axis for `epsilon`, which must divide the grid.
fn aligned_cubes(epsilon: f64, n: usize) -> Result<usize> {
    let bad = Error::MisalignedEpsilon { eps: epsilon, n };
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(bad);
    }
    let q = (1.0 / epsilon).round();
    if q < 1.0 || (q * epsilon - 1.0).abs() > 1e-9 {
        return Err(bad);
    }
    let q = q as usize;
    if !n.is_multiple_of(q) {
        return Err(bad);
    }
    Ok(q)
}

pub fn cube_decomposition(f: &GridFunction, epsilon: f64) -> Result<CubeDecomposition> {
    f.require_zero_mean()?;
    let (dim, n) = (f.dim(), f.n());
    let q = aligned_cubes(epsilon, n)?;
    let eps = 1.0 / q as f64;
    let side = n / q;
    let count = q.pow(dim as u32);
    let vol = f.cell_volume();

    let mut plus = vec![Vec::new(); count];
    let mut minus = vec![Vec::new(); count];
    for (idx, &v) in f.values().iter().enumerate() {
        let c = f.multi_index(idx);
        let cube = (0..dim).rev().fold(0, |acc, a| acc * q + c[a] / side);
        if v > 0.0 {
            plus[cube].push(v * vol);
        } else if v < 0.0 {
            minus[cube].push(-v * vol);
        }
    }
    let norms = f.norms();
    let ratio = norms.ratio();
    let fplus_total = neumaier_sum(plus.iter().flatten().copied());
    let eps_d = eps.powi(dim as i32);
    let inv_eps_d = (q as f64).powi(dim as i32);
    let dd = dim as f64;

    let cubes: Vec<CubeRecord> = (0..count)
        .map(|index| {
            let l1_plus = neumaier_sum(plus[index].iter().copied());
            let l1_minus = neumaier_sum(minus[index].iter().copied());
            let class = if inv_eps_d * l1_plus <= THRESHOLD * fplus_total {
                CubeClass::Negligible
            } else if l1_minus <= THRESHOLD * l1_plus {
                CubeClass::Unbalanced
            } else {
                CubeClass::Balanced
            };
            let volume = l1_plus / norms.linf;
            CubeRecord {
                index,
                l1_plus,
                l1_minus,
                class,
                annulus_r: volume / (2.0 * dd * eps.powi(dim as i32 - 1)),
                annulus_r_exact: 0.5 * (eps - (eps_d - volume).max(0.0).powf(1.0 / dd)),
            }
        })
        .collect();
    let tally = |c: CubeClass| cubes.iter().filter(|r| r.class == c).count();
    let (negligible, balanced, unbalanced) = (
        tally(CubeClass::Negligible),
        tally(CubeClass::Balanced),
        tally(CubeClass::Unbalanced),
    );
    let bounds = CubeBounds {
        b_lower: 49.0 / 50.0 * inv_eps_d * ratio,
        b_lower_rigorous: 99.0 / 200.0 * inv_eps_d * ratio,
        per_unbalanced_transport: eps.powi(dim as i32 + 1) * norms.l1 * norms.l1 / norms.linf,
        per_balanced_nodal: eps.powi(dim as i32 - 1) * ratio.powf((dd - 1.0) / dd),
    };
    Ok(CubeDecomposition {
        dim,
        epsilon: eps,
        cubes_per_axis: q,
        cubes,
        negligible,
        significant: balanced + unbalanced,
        balanced,
        unbalanced,
        bounds,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalScale {
    /// `(‖f‖₁/‖f‖∞)^{2−1/d} / 𝓗^{d−1}`, capped at 1.
    pub eps_star: f64,
    /// Largest `1/q ≤ eps_star` with `q` dividing the grid (or `1/n`).
    pub eps_aligned: f64,
    pub cubes_per_axis: usize,
    pub ratio: f64,
    /// `eps_star / ratio`; bounded above by a dimensional constant.
    pub eps_over_ratio: f64,
    /// `𝓗^{d−1} / ratio^{(d−1)/d}`; bounded below by a dimensional constant.
    pub isoperimetric_quotient: f64,
}

/// The scale at which balanced cubes can no longer dominate.
pub fn critical_scale(f: &GridFunction, nodal: f64) -> Result<CriticalScale> {
    if nodal.is_nan() || nodal <= 0.0 {
        return Err(Error::ZeroNodal);
    }
    let dd = f.dim() as f64;
    let ratio = f.norms().ratio();
    let eps_star = (ratio.powf(2.0 - 1.0 / dd) / nodal).min(1.0);
    let n = f.n();
    let want = 1.0 / eps_star;
    let q = (1..=n)
        .filter(|q| n.is_multiple_of(*q))
        .find(|&q| q as f64 >= want * (1.0 - 1e-12))
        .unwrap_or(n);
    Ok(CriticalScale {
        eps_star,
        eps_aligned: 1.0 / q as f64,
        cubes_per_axis: q,
        ratio,
        eps_over_ratio: eps_star / ratio,
        isoperimetric_quotient: nodal / ratio.powf((dd - 1.0) / dd),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn partition_counts_add_up() {
        let f = GridFunction::from_fn(2, 32, |x| (2.0 * PI * x[0]).cos() + 0.2 * (PI * x[1]).cos()).unwrap();
        let dec = cube_decomposition(&f, 0.125).unwrap();
        assert_eq!(dec.negligible + dec.significant, 64);
        assert_eq!(dec.balanced + dec.unbalanced, dec.significant);
        assert_eq!(dec.cubes.len(), 64);
    }

    #[test]
    fn checkerboard_cubes_are_all_balanced() {
        // ±1 checkerboard at scale 1/8 inside every 1/4-cube.
        let f = GridFunction::from_fn(2, 16, |x| {
            let s = ((x[0] * 8.0) as usize + (x[1] * 8.0) as usize) % 2;
            if s == 0 {
                1.0
            } else {
                -1.0
            }
        })
        .unwrap();
        let dec = cube_decomposition(&f, 0.25).unwrap();
        assert_eq!(dec.balanced, dec.significant);
        assert_eq!(dec.significant, 16);
    }

    #[test]
    fn single_bump_gives_one_unbalanced_cube() {
        let f =
            GridFunction::from_fn(2, 16, |x| if x[0] < 0.25 && x[1] < 0.25 { 15.0 } else { -1.0 }).unwrap();
        let dec = cube_decomposition(&f, 0.25).unwrap();
        assert_eq!(dec.significant, 1);
        assert_eq!(dec.unbalanced, 1);
        assert_eq!(dec.cubes[0].class, CubeClass::Unbalanced);
    }

    #[test]
    fn misaligned_epsilon_is_rejected() {
        let f = GridFunction::from_fn(2, 12, |x| x[0] - 0.5).unwrap();
        assert!(matches!(
            cube_decomposition(&f, 0.2),
            Err(Error::MisalignedEpsilon { .. })
        ));
        assert!(matches!(
            cube_decomposition(&f, 0.3),
            Err(Error::MisalignedEpsilon { .. })
        ));
    }

    #[test]
    fn annulus_radius_solves_its_equation() {
        let f = GridFunction::from_fn(3, 16, |x| (PI * x[0]).cos() * (PI * x[2]).cos()).unwrap();
        let dec = cube_decomposition(&f, 0.25).unwrap();
        let linf = f.norms().linf;
        for c in &dec.cubes {
            let eps = dec.epsilon;
            let lhs = eps.powi(3) - (eps - 2.0 * c.annulus_r_exact).powi(3);
            assert!((lhs - c.l1_plus / linf).abs() < 1e-12);
            // The linearised radius never exceeds the exact one.
            assert!(c.annulus_r <= c.annulus_r_exact + 1e-15);
        }
    }

    #[test]
    fn critical_scale_examples() {
        let f = GridFunction::from_fn(2, 256, |x| (PI * x[0]).cos()).unwrap();
        let cs = critical_scale(&f, 1.0).unwrap();
        let want = (2.0 / PI).powf(1.5);
        assert!((cs.eps_star - want).abs() < 1e-4);
        assert_eq!(cs.eps_aligned, 0.5);
        let half = critical_scale(&f, 2.0).unwrap();
        assert!((half.eps_star - cs.eps_star / 2.0).abs() < 1e-15);
        assert!(matches!(critical_scale(&f, 0.0), Err(Error::ZeroNodal)));
    }
}
