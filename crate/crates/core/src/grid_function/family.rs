//! Deterministic test-corpus generators.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::GridFunction;
use crate::error::{Error, Result};
use crate::uncertainty::ExtremalFamily;

/// Parameters of a generated grid function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FamilySpec {
    /// `Σ a_k Π cos(π k_i x_i)` over `k ∈ {0..=k_max}^dim \ {0}` with
    /// `a_k ~ U[−1, 1]`.
    Trig {
        dim: usize,
        n: usize,
        k_max: usize,
        seed: u64,
    },
    /// `radius² − |x − ½|²`, centred to zero mean.
    RadialBump { dim: usize, n: usize, radius: f64 },
    /// Random `U[−1, 1]` levels on `blocks^dim` equal blocks.
    PiecewiseConstant {
        dim: usize,
        n: usize,
        blocks: usize,
        seed: u64,
    },
    /// A constant; rejected by centring.
    Constant { dim: usize, n: usize, value: f64 },
    /// Indicator bumps on a point lattice over a constant background.
    Extremal {
        dim: usize,
        points: usize,
        eps: f64,
        #[serde(default)]
        cells: Option<usize>,
    },
}

impl FamilySpec {
    /// A family by name with default shape parameters.
    pub fn named(name: &str, dim: usize, n: usize, seed: u64) -> Result<Self> {
        Ok(match name {
            "trig" => Self::Trig {
                dim,
                n,
                k_max: 3,
                seed,
            },
            "bump" | "radial-bump" => Self::RadialBump { dim, n, radius: 0.3 },
            "piecewise" | "piecewise-constant" => Self::PiecewiseConstant {
                dim,
                n,
                blocks: 4,
                seed,
            },
            "constant" | "constant-zero" => Self::Constant { dim, n, value: 0.0 },
            other => return Err(Error::UnknownFamily(other.to_string())),
        })
    }
}

/// Builds the grid function described by `spec`, centred to zero mean.
pub fn sample_family(spec: &FamilySpec) -> Result<GridFunction> {
    let raw = match *spec {
        FamilySpec::Trig { dim, n, k_max, seed } => trig(dim, n, k_max, seed)?,
        FamilySpec::RadialBump { dim, n, radius } => GridFunction::from_fn(dim, n, |x| {
            radius * radius - x.iter().map(|t| (t - 0.5).powi(2)).sum::<f64>()
        })?,
        FamilySpec::PiecewiseConstant { dim, n, blocks, seed } => {
            if blocks == 0 {
                return Err(Error::InvalidConfig("zero blocks".into()));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let levels: Vec<f64> = (0..blocks.pow(dim as u32))
                .map(|_| rng.gen_range(-1.0..=1.0))
                .collect();
            GridFunction::from_fn(dim, n, |x| {
                let b = x.iter().rev().fold(0, |acc, t| {
                    acc * blocks + ((t * blocks as f64) as usize).min(blocks - 1)
                });
                levels[b]
            })?
        }
        FamilySpec::Constant { dim, n, value } => GridFunction::from_fn(dim, n, |_| value)?,
        FamilySpec::Extremal {
            dim,
            points,
            eps,
            cells,
        } => {
            let mut family = ExtremalFamily::new(dim, points, eps);
            if let Some(c) = cells {
                family = family.with_cells(c);
            }
            return family.build();
        }
    };
    raw.make_zero_mean()
}

/// All nonzero multi-indices in `{0..=k_max}^dim`, lexicographic.
fn modes(dim: usize, k_max: usize) -> Vec<[usize; 3]> {
    let side = k_max + 1;
    (1..side.pow(dim as u32))
        .map(|mut idx| {
            let mut k = [0; 3];
            for ka in k.iter_mut().take(dim) {
                *ka = idx % side;
                idx /= side;
            }
            k
        })
        .collect()
}

fn trig(dim: usize, n: usize, k_max: usize, seed: u64) -> Result<GridFunction> {
    if !(1..=3).contains(&dim) || n == 0 {
        return GridFunction::new(dim, n, Vec::new());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coeffs: Vec<([usize; 3], f64)> = modes(dim, k_max)
        .into_iter()
        .map(|k| (k, rng.gen_range(-1.0..=1.0)))
        .collect();
    cosine_synthesis(dim, n, &coeffs, |_| 1.0)
}

/// Separable synthesis of `Σ c_k Π norm(k_i) cos(π k_i x_i)` at cell centres.
pub(crate) fn cosine_synthesis(
    dim: usize,
    n: usize,
    coeffs: &[([usize; 3], f64)],
    norm: impl Fn(usize) -> f64,
) -> Result<GridFunction> {
    let h = 1.0 / n as f64;
    let k_top = coeffs
        .iter()
        .flat_map(|(k, _)| k.iter().copied())
        .max()
        .unwrap_or(0);
    // table[k][i] = norm(k) cos(π k x_i)
    let table: Vec<Vec<f64>> = (0..=k_top)
        .map(|k| {
            let c = norm(k);
            (0..n)
                .map(|i| c * (PI * k as f64 * (i as f64 + 0.5) * h).cos())
                .collect()
        })
        .collect();
    let len = n.pow(dim as u32);
    let mut values = vec![0.0; len];
    for (k, a) in coeffs {
        match dim {
            1 => {
                for (v, c) in values.iter_mut().zip(&table[k[0]]) {
                    *v += a * c;
                }
            }
            2 => {
                let (tx, ty) = (&table[k[0]], &table[k[1]]);
                for (j, row) in values.chunks_exact_mut(n).enumerate() {
                    let s = a * ty[j];
                    for (v, c) in row.iter_mut().zip(tx) {
                        *v += s * c;
                    }
                }
            }
            _ => {
                let (tx, ty, tz) = (&table[k[0]], &table[k[1]], &table[k[2]]);
                for (l, slab) in values.chunks_exact_mut(n * n).enumerate() {
                    for (j, row) in slab.chunks_exact_mut(n).enumerate() {
                        let s = a * ty[j] * tz[l];
                        for (v, c) in row.iter_mut().zip(tx) {
                            *v += s * c;
                        }
                    }
                }
            }
        }
    }
    GridFunction::new(dim, n, values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trig_family_is_deterministic_and_centred() {
        let spec = FamilySpec::Trig {
            dim: 2,
            n: 32,
            k_max: 3,
            seed: 7,
        };
        let a = sample_family(&spec).unwrap();
        let b = sample_family(&spec).unwrap();
        assert_eq!(a, b);
        assert!(a.is_zero_mean());
        let other = sample_family(&FamilySpec::Trig {
            dim: 2,
            n: 32,
            k_max: 3,
            seed: 8,
        })
        .unwrap();
        assert_ne!(a, other);
    }

    #[test]
    fn constant_zero_is_rejected() {
        let spec = FamilySpec::named("constant-zero", 2, 8, 0).unwrap();
        assert!(matches!(sample_family(&spec), Err(Error::AllConstant)));
    }

    #[test]
    fn unknown_family_name() {
        assert!(matches!(
            FamilySpec::named("fractal", 2, 8, 0),
            Err(Error::UnknownFamily(_))
        ));
    }

    #[test]
    fn piecewise_constant_is_centred() {
        let f = sample_family(&FamilySpec::PiecewiseConstant {
            dim: 2,
            n: 16,
            blocks: 4,
            seed: 3,
        })
        .unwrap();
        assert!(f.is_zero_mean());
        assert!(f.norms().l1 > 0.0);
    }
}
