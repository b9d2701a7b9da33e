//! Neumann eigenfunctions of the unit cube, band-limited random functions,
//! the heat semigroup, and numerical checks of the transport and nodal-set
//! bounds for functions orthogonal to all low modes.
//!
//! On `[0,1]^d` the Neumann Laplacian has eigenfunctions
//! `φ_k(x) = Π cos(π k_i x_i)` with `λ_k = π²|k|²`. A [`SpectralFunction`]
//! stores coefficients with respect to the orthonormal basis, in which every
//! nonzero index carries a factor `√2`.

use std::f64::consts::{PI, SQRT_2};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid_function::{cosine_synthesis, GridFunction};
use crate::numerics::log_log_slope;
use crate::ot_solver::{Method, SolverConfig};
use crate::uncertainty::{uncertainty_product_at, Resolution};

/// Grid cells per axis for each unit of the largest axis frequency.
pub const CELLS_PER_FREQUENCY: usize = 8;
/// Transport atoms per axis for each unit of the largest axis frequency.
pub const ATOMS_PER_FREQUENCY: usize = 4;
/// Largest number of active modes in a sampled function.
pub const MAX_ACTIVE_MODES: usize = 200;

/// `π²|k|²`.
pub fn eigenvalue(k: &[usize]) -> f64 {
    PI * PI * k.iter().map(|&v| (v * v) as f64).sum::<f64>()
}

/// `Π cos(π k_i x_i)` sampled at cell centres of an `n^d` grid.
pub fn neumann_eigenfunction(k: &[usize], n: usize) -> Result<GridFunction> {
    let dim = k.len();
    if !(1..=3).contains(&dim) {
        return Err(Error::InvalidGrid(format!("dimension {dim} not in 1..=3")));
    }
    let mut kk = [0; 3];
    kk[..dim].copy_from_slice(k);
    cosine_synthesis(dim, n, &[(kk, 1.0)], |_| 1.0)
}

/// A finite Neumann expansion with zero mean.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralFunction {
    dim: usize,
    /// `(k, ⟨f, φ_k⟩)` sorted by `k`, without zero coefficients.
    modes: Vec<([usize; 3], f64)>,
}

impl SpectralFunction {
    pub fn new(dim: usize, modes: impl IntoIterator<Item = ([usize; 3], f64)>) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::InvalidGrid(format!("dimension {dim} not in 1..=3")));
        }
        let mut out: Vec<([usize; 3], f64)> = Vec::new();
        for (k, c) in modes {
            if k[dim..].iter().any(|&v| v != 0) {
                return Err(Error::WrongDimension {
                    expected: dim,
                    got: 3 - k.iter().rev().take_while(|&&v| v == 0).count(),
                });
            }
            if !c.is_finite() {
                return Err(Error::InvalidConfig(format!("coefficient {c} for mode {k:?}")));
            }
            if k == [0; 3] && c != 0.0 {
                return Err(Error::NotZeroMean { mean: c, tol: 0.0 });
            }
            if c != 0.0 {
                out.push((k, c));
            }
        }
        out.sort_by_key(|a| a.0);
        for w in out.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::InvalidConfig(format!("mode {:?} given twice", w[0].0)));
            }
        }
        Ok(Self { dim, modes: out })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn modes(&self) -> &[([usize; 3], f64)] {
        &self.modes
    }

    pub fn coefficient(&self, k: [usize; 3]) -> f64 {
        self.modes
            .binary_search_by(|m| m.0.cmp(&k))
            .map(|i| self.modes[i].1)
            .unwrap_or(0.0)
    }

    /// `‖f‖₂` by Parseval.
    pub fn l2_norm(&self) -> f64 {
        self.modes.iter().map(|(_, c)| c * c).sum::<f64>().sqrt()
    }

    /// Largest single-axis frequency.
    pub fn k_max(&self) -> usize {
        self.modes
            .iter()
            .flat_map(|(k, _)| k.iter().copied())
            .max()
            .unwrap_or(0)
    }

    /// Smallest eigenvalue among active modes.
    pub fn lambda_low(&self) -> Option<f64> {
        self.modes
            .iter()
            .map(|(k, _)| eigenvalue(&k[..self.dim]))
            .min_by(f64::total_cmp)
    }

    /// Grid size resolving the top mode.
    pub fn default_cells(&self) -> usize {
        CELLS_PER_FREQUENCY * self.k_max().max(1)
    }

    /// Samples `Σ ⟨f, φ_k⟩ φ_k` at cell centres, with orthonormal `φ_k`.
    pub fn synthesize(&self, n: usize) -> Result<GridFunction> {
        cosine_synthesis(self.dim, n, &self.modes, |k| if k == 0 { 1.0 } else { SQRT_2 })
    }
}

/// Heat semigroup `e^{tΔ}`: each coefficient times `e^{−λ_k t}`.
pub fn heat_evolve(f: &SpectralFunction, t: f64) -> Result<SpectralFunction> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidConfig(format!("heat time {t} must be nonnegative")));
    }
    Ok(SpectralFunction {
        dim: f.dim,
        modes: f
            .modes
            .iter()
            .map(|&(k, c)| (k, c * (-eigenvalue(&k[..f.dim]) * t).exp()))
            .filter(|(_, c)| *c != 0.0)
            .collect(),
    })
}

/// Distribution of the random coefficients before normalisation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CoeffLaw {
    /// Independent `U[−1, 1]`.
    #[default]
    Uniform,
    /// Independent random signs.
    Rademacher,
}

/// Indices `k ∈ ℕ₀^dim` with `lo ≤ π²|k|² ≤ hi`.
pub fn band_modes(dim: usize, lo: f64, hi: f64) -> Vec<[usize; 3]> {
    let slack = 1e-12;
    let (lo2, hi2) = (lo / (PI * PI) * (1.0 - slack), hi / (PI * PI) * (1.0 + slack));
    let top = hi2.max(0.0).sqrt().floor() as usize;
    let side = top + 1;
    (0..side.pow(dim as u32))
        .filter_map(|mut idx| {
            let mut k = [0; 3];
            for ka in k.iter_mut().take(dim) {
                *ka = idx % side;
                idx /= side;
            }
            let s: f64 = k.iter().map(|&v| (v * v) as f64).sum();
            (s > 0.0 && s >= lo2 && s <= hi2).then_some(k)
        })
        .collect()
}

/// A random function with spectrum in `[λ_min, 4λ_min]` and `‖f‖₂ = 1`.
///
/// Bands with more than [`MAX_ACTIVE_MODES`] modes are subsampled uniformly.
pub fn highpass_sample(dim: usize, lambda_min: f64, law: CoeffLaw, seed: u64) -> Result<SpectralFunction> {
    if !(1..=3).contains(&dim) {
        return Err(Error::InvalidGrid(format!("dimension {dim} not in 1..=3")));
    }
    let (lo, hi) = (lambda_min, 4.0 * lambda_min);
    if !(lambda_min > 0.0 && lambda_min.is_finite()) {
        return Err(Error::EmptyBand { lo, hi });
    }
    let mut band = band_modes(dim, lo, hi);
    if band.is_empty() {
        return Err(Error::EmptyBand { lo, hi });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if band.len() > MAX_ACTIVE_MODES {
        band.shuffle(&mut rng);
        band.truncate(MAX_ACTIVE_MODES);
    }
    let mut coeffs: Vec<f64> = band
        .iter()
        .map(|_| match law {
            CoeffLaw::Uniform => rng.gen_range(-1.0..=1.0),
            CoeffLaw::Rademacher => {
                if rng.gen::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
        })
        .collect();
    let norm = coeffs.iter().map(|c| c * c).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(Error::EmptyBand { lo, hi });
    }
    coeffs.iter_mut().for_each(|c| *c /= norm);
    SpectralFunction::new(dim, band.into_iter().zip(coeffs))
}

/// One sampled function of a band sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandRow {
    pub lambda: f64,
    pub seed: u64,
    pub n: usize,
    pub modes: usize,
    pub l1: f64,
    pub linf: f64,
    pub ratio: f64,
    pub w: f64,
    pub nodal: f64,
    /// `W₁/‖f‖₁`.
    pub w_over_l1: f64,
    /// `(W₁/‖f‖₁) / (log λ/√λ)`.
    pub heat_quotient: f64,
    /// `W₁ 𝓗^{d−1} / (ratio^{4−1/d} ‖f‖₁)`.
    pub product_quotient: f64,
    /// `𝓗^{d−1} / ((√λ/log λ) ratio^{4−1/d})`.
    pub nodal_quotient: f64,
    pub method: Method,
    pub resolution: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandSweep {
    pub dim: usize,
    pub rows: Vec<BandRow>,
}

impl BandSweep {
    fn slope(&self, y: impl Fn(&BandRow) -> f64) -> Result<f64> {
        let xs: Vec<f64> = self.rows.iter().map(|r| r.lambda).collect();
        let ys: Vec<f64> = self.rows.iter().map(y).collect();
        log_log_slope(&xs, &ys)
    }

    /// Slope of `log(W₁/‖f‖₁)` against `log λ`.
    pub fn heat_slope(&self) -> Result<f64> {
        self.slope(|r| r.w_over_l1)
    }

    /// Slope of `log 𝓗^{d−1}` against `log λ`.
    pub fn nodal_slope(&self) -> Result<f64> {
        self.slope(|r| r.nodal)
    }
}

/// Evaluates one function: grid of [`CELLS_PER_FREQUENCY`] cells and
/// [`ATOMS_PER_FREQUENCY`] transport atoms per unit of the top frequency.
pub fn band_row(f: &SpectralFunction, lambda: f64, seed: u64, cfg: &SolverConfig) -> Result<BandRow> {
    let n = f.default_cells();
    let g = f.synthesize(n)?.make_zero_mean()?;
    let resolution = Resolution::Blocks(ATOMS_PER_FREQUENCY * f.k_max().max(1));
    let r = uncertainty_product_at(&g, cfg, resolution)?;
    let sqrt_l = lambda.sqrt();
    let log_l = lambda.ln();
    let w_over_l1 = r.w / r.l1;
    let exponent = 4.0 - 1.0 / f.dim as f64;
    Ok(BandRow {
        lambda,
        seed,
        n,
        modes: f.modes.len(),
        l1: r.l1,
        linf: r.linf,
        ratio: r.ratio,
        w: r.w,
        nodal: r.nodal,
        w_over_l1,
        heat_quotient: w_over_l1 * sqrt_l / log_l,
        product_quotient: r.w * r.nodal / (r.ratio.powf(exponent) * r.l1),
        nodal_quotient: r.nodal * log_l / (sqrt_l * r.ratio.powf(exponent)),
        method: r.method,
        resolution: r.resolution,
    })
}

/// All `(λ, seed)` samples, evaluated in parallel.
pub fn band_sweep(
    dim: usize,
    lambda_list: &[f64],
    seeds: &[u64],
    law: CoeffLaw,
    cfg: &SolverConfig,
) -> Result<BandSweep> {
    let jobs: Vec<(f64, u64)> = lambda_list
        .iter()
        .flat_map(|&l| seeds.iter().map(move |&s| (l, s)))
        .collect();
    let rows = jobs
        .par_iter()
        .map(|&(lambda, seed)| {
            let f = highpass_sample(dim, lambda, law, seed)?;
            band_row(&f, lambda, seed, cfg)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BandSweep { dim, rows })
}

/// Band sweep and the fitted exponent of one quantity against `λ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub sweep: BandSweep,
    pub slope: f64,
    pub target: f64,
}

/// `W₁(f₊, f₋)/‖f‖₁` should decay like `λ^{−1/2}` up to a logarithm.
pub fn heat_bound_check(
    dim: usize,
    lambda_list: &[f64],
    seeds: &[u64],
    cfg: &SolverConfig,
) -> Result<BoundCheck> {
    let sweep = band_sweep(dim, lambda_list, seeds, CoeffLaw::default(), cfg)?;
    let slope = sweep.heat_slope()?;
    Ok(BoundCheck {
        sweep,
        slope,
        target: -0.5,
    })
}

/// `𝓗^{d−1}{f = 0}` should grow like `λ^{1/2}` up to a logarithm.
pub fn sturm_hurwitz_check(
    dim: usize,
    lambda_list: &[f64],
    seeds: &[u64],
    cfg: &SolverConfig,
) -> Result<BoundCheck> {
    let sweep = band_sweep(dim, lambda_list, seeds, CoeffLaw::default(), cfg)?;
    let slope = sweep.nodal_slope()?;
    Ok(BoundCheck {
        sweep,
        slope,
        target: 0.5,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ot_solver::w1_1d_oracle;

    #[test]
    fn first_mode_has_unit_nodal_line() {
        let f = neumann_eigenfunction(&[1, 0], 64).unwrap();
        assert!((f.nodal_measure() - 1.0).abs() < 1e-9);
        assert!((eigenvalue(&[2, 1]) - 5.0 * PI * PI).abs() < 1e-12);
        let c = neumann_eigenfunction(&[0, 0], 8).unwrap();
        assert!(c.values().iter().all(|v| *v == 1.0));
        assert!(c.make_zero_mean().is_err());
    }

    #[test]
    fn band_threshold_excludes_low_modes() {
        let lo = 5.0 * PI * PI * (1.0 + 1e-9);
        let band = band_modes(2, lo, 4.0 * lo);
        for k in [
            [1, 0, 0],
            [0, 1, 0],
            [1, 1, 0],
            [2, 0, 0],
            [0, 2, 0],
            [2, 1, 0],
            [1, 2, 0],
        ] {
            assert!(!band.contains(&k), "{k:?}");
        }
        assert!(band.contains(&[2, 2, 0]));
        assert!(band.iter().all(|k| {
            let l = eigenvalue(&k[..2]);
            l >= lo && l <= 4.0 * lo
        }));
    }

    #[test]
    fn sampling_is_reproducible_and_normalised() {
        let a = highpass_sample(2, 16.0 * PI * PI, CoeffLaw::Uniform, 3).unwrap();
        let b = highpass_sample(2, 16.0 * PI * PI, CoeffLaw::Uniform, 3).unwrap();
        let c = highpass_sample(2, 16.0 * PI * PI, CoeffLaw::Uniform, 4).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!((a.l2_norm() - 1.0).abs() < 1e-12);
        assert_eq!(a.coefficient([0, 0, 0]), 0.0);
    }

    #[test]
    fn single_mode_band() {
        // [1.44, 5.76] π² holds only |k|² = 4 in one dimension.
        let f = highpass_sample(1, 1.44 * PI * PI, CoeffLaw::Uniform, 0).unwrap();
        assert_eq!(f.modes().len(), 1);
        assert_eq!(f.modes()[0].0, [2, 0, 0]);
        assert!((f.modes()[0].1.abs() - 1.0).abs() < 1e-15);
        let g = f.synthesize(32).unwrap();
        let e = neumann_eigenfunction(&[2], 32).unwrap();
        let s = f.modes()[0].1 * SQRT_2;
        for (x, y) in g.values().iter().zip(e.values()) {
            assert!((x - s * y).abs() < 1e-12);
        }
    }

    #[test]
    fn empty_band_is_reported() {
        // [0.1, 0.4] π² contains no nonzero index.
        assert!(matches!(
            highpass_sample(2, 0.1 * PI * PI, CoeffLaw::Uniform, 0),
            Err(Error::EmptyBand { .. })
        ));
    }

    #[test]
    fn heat_flow_properties() {
        let lambda = 4.0 * PI * PI;
        let f = highpass_sample(2, lambda, CoeffLaw::Uniform, 7).unwrap();
        assert_eq!(heat_evolve(&f, 0.0).unwrap(), f);
        let (s, t) = (0.003, 0.011);
        let a = heat_evolve(&heat_evolve(&f, s).unwrap(), t).unwrap();
        let b = heat_evolve(&f, s + t).unwrap();
        for ((ka, ca), (kb, cb)) in a.modes().iter().zip(b.modes()) {
            assert_eq!(ka, kb);
            assert!((ca - cb).abs() < 1e-12);
        }
        assert!(b.l2_norm() <= (-lambda * (s + t)).exp() * f.l2_norm() * (1.0 + 1e-12));
        assert_eq!(b.coefficient([0, 0, 0]), 0.0);
        assert!(heat_evolve(&f, -1.0).is_err());

        let single = SpectralFunction::new(2, [([3, 1, 0], 0.5)]).unwrap();
        let e = heat_evolve(&single, 0.01).unwrap();
        let want = 0.5 * (-PI * PI * 10.0 * 0.01).exp();
        assert!((e.coefficient([3, 1, 0]) - want).abs() < 1e-15);
    }

    #[test]
    fn parseval_on_resolving_grid() {
        for seed in 0..4 {
            let f = highpass_sample(2, 16.0 * PI * PI, CoeffLaw::Uniform, seed).unwrap();
            let g = f.synthesize(f.default_cells()).unwrap();
            let l2 = (g.values().iter().map(|v| v * v).sum::<f64>() * g.cell_volume()).sqrt();
            assert!((l2 - f.l2_norm()).abs() < 0.01 * f.l2_norm(), "{l2}");
            assert!(g.integral().abs() < 1e-12);
        }
    }

    #[test]
    fn pure_cosine_nodal_count() {
        for m in [1usize, 2, 5, 8] {
            let f = neumann_eigenfunction(&[m, 0], 16 * m).unwrap();
            assert!((f.nodal_measure() - m as f64).abs() < 1e-9);
        }
        let ls: Vec<f64> = [2usize, 4, 8].iter().map(|&m| eigenvalue(&[m, 0])).collect();
        let nodal: Vec<f64> = [2.0, 4.0, 8.0].to_vec();
        assert!((log_log_slope(&ls, &nodal).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn one_dimensional_cosines_transport_less_as_k_grows() {
        let mut last = f64::INFINITY;
        for k in 1..=6 {
            let f = neumann_eigenfunction(&[k], 384).unwrap();
            let w = w1_1d_oracle(&f).unwrap();
            // Each half-period moves mass 1/(πk) over a distance of order 1/k.
            let want = 2.0 / (PI * PI * k as f64);
            assert!((w - want).abs() < 1e-3 * want, "k = {k}: {w}");
            assert!(w < last);
            last = w;
        }
    }

    #[test]
    fn quotients_factor_through_the_heat_bound() {
        let cfg = SolverConfig::default();
        let f = highpass_sample(2, 4.0 * PI * PI, CoeffLaw::Uniform, 1).unwrap();
        let r = band_row(&f, 4.0 * PI * PI, 1, &cfg).unwrap();
        assert!(r.nodal_quotient > 0.0 && r.product_quotient > 0.0 && r.heat_quotient > 0.0);
        let implied = r.product_quotient / r.heat_quotient;
        assert!((r.nodal_quotient - implied).abs() < 1e-12 * implied);
    }
}
