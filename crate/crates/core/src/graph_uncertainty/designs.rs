use std::sync::atomic::{AtomicUsize, Ordering};

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::spectrum::{laplacian_spectrum, Spectrum};
use super::transport::{uncertainty_product_graph, GraphProduct};
use super::{check_subset, Graph, VertexFunction};
use crate::error::{Error, Result};

/// Absolute tolerance on eigenspace projection norms.
pub const DESIGN_TOL: f64 = 1e-8;
/// Largest number of subsets an exhaustive search may visit.
pub const EXHAUSTIVE_CAP: u128 = 10_000_000;

/// Orthogonality of a centred indicator to the low Laplacian eigenspaces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignCertificate {
    /// 1-based, ascending.
    pub subset: Vec<usize>,
    /// Requested number of nontrivial eigenfunctions.
    pub k: usize,
    /// Eigenspaces needed to cover `k` eigenfunctions.
    pub k_eigenspaces: usize,
    /// Eigenvalue, dimension and projection norm of `χ_S − |S|/n` for each
    /// nontrivial eigenspace, lowest first.
    pub eigenvalues: Vec<f64>,
    pub dims: Vec<usize>,
    pub residuals: Vec<f64>,
    /// Consecutive nontrivial eigenspaces with residual within tolerance.
    pub orthogonal_eigenspaces: usize,
    /// Their total dimension.
    pub orthogonal_eigenfunctions: usize,
    /// Total dimension of all orthogonal nontrivial eigenspaces, consecutive
    /// or not.
    pub orthogonal_eigenfunctions_total: usize,
    /// Consecutive eigenvectors of the computed basis orthogonal to the
    /// indicator; can exceed the full-eigenspace count inside a multiple
    /// eigenvalue, and depends on the basis there.
    pub orthogonal_eigenvectors: usize,
    pub tol: f64,
    /// All residuals of the first `k_eigenspaces` eigenspaces are within `tol`.
    pub pass: bool,
}

/// Per-vertex coordinates in each nontrivial eigenspace.
struct Projector {
    n: usize,
    groups: Vec<(f64, usize, usize)>,
    /// `coords[v]` holds `u_i(v)` for every nontrivial eigenvector `i`.
    coords: Vec<Vec<f64>>,
    /// Eigenvalue index offsets of each group within `coords[v]`.
    offsets: Vec<usize>,
}

impl Projector {
    fn new(spec: &Spectrum) -> Self {
        let n = spec.values.len();
        let groups: Vec<(f64, usize, usize)> = spec
            .nontrivial()
            .iter()
            .map(|g| (g.value, g.start, g.dim))
            .collect();
        let coords = (0..n)
            .map(|v| (1..n).map(|i| spec.vectors[(v, i)]).collect())
            .collect();
        let mut offsets = Vec::with_capacity(groups.len() + 1);
        let mut acc = 0;
        for g in &groups {
            offsets.push(acc);
            acc += g.2;
        }
        offsets.push(acc);
        Self {
            n,
            groups,
            coords,
            offsets,
        }
    }

    /// Eigenspaces needed to reach `k` eigenfunctions.
    fn spaces_for(&self, k: usize) -> usize {
        self.offsets
            .iter()
            .position(|&o| o >= k)
            .unwrap_or(self.groups.len())
    }

    /// `⟨χ_S, u_i⟩` for every nontrivial eigenvector; the constant part of
    /// the centred indicator is orthogonal to all of them.
    fn inner(&self, subset0: &[usize]) -> Vec<f64> {
        let mut s = vec![0.0; self.n - 1];
        for &v in subset0 {
            for (a, c) in s.iter_mut().zip(&self.coords[v]) {
                *a += c;
            }
        }
        s
    }

    fn residuals(&self, inner: &[f64]) -> Vec<f64> {
        self.offsets
            .windows(2)
            .map(|w| inner[w[0]..w[1]].iter().map(|x| x * x).sum::<f64>().sqrt())
            .collect()
    }

    fn certificate(&self, subset: Vec<usize>, k: usize, tol: f64) -> DesignCertificate {
        let zero: Vec<usize> = subset.iter().map(|v| v - 1).collect();
        let inner = self.inner(&zero);
        let residuals = self.residuals(&inner);
        let spaces = residuals.iter().take_while(|&&r| r <= tol).count();
        let k_eigenspaces = self.spaces_for(k);
        DesignCertificate {
            subset,
            k,
            k_eigenspaces,
            eigenvalues: self.groups.iter().map(|g| g.0).collect(),
            dims: self.groups.iter().map(|g| g.2).collect(),
            pass: residuals[..k_eigenspaces].iter().all(|&r| r <= tol),
            orthogonal_eigenspaces: spaces,
            orthogonal_eigenfunctions: self.offsets[spaces],
            orthogonal_eigenfunctions_total: residuals
                .iter()
                .zip(&self.groups)
                .filter(|(r, _)| **r <= tol)
                .map(|(_, g)| g.2)
                .sum(),
            orthogonal_eigenvectors: inner.iter().take_while(|x| x.abs() <= tol).count(),
            residuals,
            tol,
        }
    }
}

/// Projects `χ_S − |S|/n` onto the nontrivial eigenspaces and checks the
/// ones covering the first `k` nontrivial eigenfunctions.
pub fn verify_design(g: &Graph, subset: &[usize], k: usize) -> Result<DesignCertificate> {
    verify_design_with(g, &laplacian_spectrum(g)?, subset, k, DESIGN_TOL)
}

pub fn verify_design_with(
    g: &Graph,
    spec: &Spectrum,
    subset: &[usize],
    k: usize,
    tol: f64,
) -> Result<DesignCertificate> {
    let s = check_subset(g.n(), subset)?;
    if s.is_empty() {
        return Err(Error::BadSubset("empty subset".into()));
    }
    if k > g.n() - 1 {
        return Err(Error::BadSubset(format!(
            "{k} eigenfunctions requested, the graph has {} nontrivial ones",
            g.n() - 1
        )));
    }
    Ok(Projector::new(spec).certificate(s, k, tol))
}

/// Every vertex outside `S` has exactly one neighbour in `S`.
pub fn perfect_domination_check(g: &Graph, subset: &[usize]) -> bool {
    let mut inside = vec![false; g.n()];
    for &v in subset {
        if v == 0 || v > g.n() {
            return false;
        }
        inside[v - 1] = true;
    }
    g.adjacency()
        .iter()
        .enumerate()
        .filter(|(v, _)| !inside[*v])
        .all(|(_, nb)| nb.iter().filter(|&&u| inside[u]).count() == 1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "mode")]
pub enum SearchMode {
    /// Every subset of the given size; at most [`EXHAUSTIVE_CAP`] of them.
    Exhaustive,
    /// Uniformly random subsets.
    Randomized { samples: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignSearch {
    pub size: usize,
    pub mode: SearchMode,
    /// Subsets examined (pruned branches count their leaves).
    pub examined: u128,
    /// Largest number of eigenfunctions covered by orthogonal eigenspaces.
    pub best_eigenfunctions: usize,
    /// Exhaustive: every maximiser, lexicographic. Randomized: the best
    /// distinct subsets found.
    pub best: Vec<DesignCertificate>,
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Subsets of `size` vertices whose centred indicator is orthogonal to as
/// many low eigenspaces as possible. `k_target` sets the `pass` flag of the
/// returned certificates.
pub fn search_designs(g: &Graph, size: usize, k_target: usize, mode: SearchMode) -> Result<DesignSearch> {
    let n = g.n();
    if size == 0 || size > n {
        return Err(Error::BadSubset(format!("subset size {size} for {n} vertices")));
    }
    let proj = Projector::new(&laplacian_spectrum(g)?);
    let k_target = k_target.min(n - 1);
    let (examined, subsets) = match mode {
        SearchMode::Exhaustive => {
            let count = binomial(n, size);
            if count > EXHAUSTIVE_CAP {
                return Err(Error::TooLargeForExhaustive {
                    count,
                    cap: EXHAUSTIVE_CAP,
                });
            }
            (count, exhaustive(&proj, size))
        }
        SearchMode::Randomized { samples, seed } => (samples as u128, randomized(&proj, size, samples, seed)),
    };
    let best: Vec<DesignCertificate> = subsets
        .into_iter()
        .map(|s| proj.certificate(s.iter().map(|v| v + 1).collect(), k_target, DESIGN_TOL))
        .collect();
    Ok(DesignSearch {
        size,
        mode,
        examined,
        best_eigenfunctions: best.first().map_or(0, |c| c.orthogonal_eigenfunctions),
        best,
    })
}

/// Number of consecutive orthogonal eigenspaces, by their total dimension.
fn covered(proj: &Projector, inner: &[f64]) -> usize {
    let mut total = 0;
    for w in proj.offsets.windows(2) {
        let r2: f64 = inner[w[0]..w[1]].iter().map(|x| x * x).sum();
        if r2 > DESIGN_TOL * DESIGN_TOL {
            break;
        }
        total = w[1];
    }
    total
}

struct Dfs<'a> {
    proj: &'a Projector,
    size: usize,
    best: &'a AtomicUsize,
    /// `max_v ‖P₁ e_v‖`, for pruning on the first eigenspace.
    first_reach: f64,
    first_dim: usize,
}

impl Dfs<'_> {
    fn run(
        &self,
        chosen: &mut Vec<usize>,
        inner: &mut Vec<f64>,
        next: usize,
        out: &mut (usize, Vec<Vec<usize>>),
    ) {
        let n = self.proj.n;
        if chosen.len() == self.size {
            let c = covered(self.proj, inner);
            if c > out.0 {
                *out = (c, Vec::new());
            }
            if c == out.0 {
                out.1.push(chosen.clone());
            }
            self.best.fetch_max(c, Ordering::Relaxed);
            return;
        }
        // Once some subset clears the first eigenspace, branches that can no
        // longer bring its projection within tolerance are hopeless.
        if self.best.load(Ordering::Relaxed) > 0 {
            let r = inner[..self.first_dim].iter().map(|x| x * x).sum::<f64>().sqrt();
            let left = (self.size - chosen.len()) as f64;
            if r - left * self.first_reach > DESIGN_TOL {
                return;
            }
        }
        let last = n - (self.size - chosen.len());
        for v in next..=last {
            chosen.push(v);
            for (a, c) in inner.iter_mut().zip(&self.proj.coords[v]) {
                *a += c;
            }
            self.run(chosen, inner, v + 1, out);
            for (a, c) in inner.iter_mut().zip(&self.proj.coords[v]) {
                *a -= c;
            }
            chosen.pop();
        }
    }
}

fn exhaustive(proj: &Projector, size: usize) -> Vec<Vec<usize>> {
    let n = proj.n;
    let best = AtomicUsize::new(0);
    let first_dim = proj.groups.first().map_or(0, |g| g.2);
    let first_reach = proj
        .coords
        .iter()
        .map(|c| c[..first_dim].iter().map(|x| x * x).sum::<f64>().sqrt())
        .fold(0.0, f64::max);
    let dfs = Dfs {
        proj,
        size,
        best: &best,
        first_reach,
        first_dim,
    };
    let parts: Vec<(usize, Vec<Vec<usize>>)> = (0..=n - size)
        .into_par_iter()
        .map(|first| {
            let mut chosen = vec![first];
            let mut inner = proj.coords[first].clone();
            let mut out = (0, Vec::new());
            dfs.run(&mut chosen, &mut inner, first + 1, &mut out);
            out
        })
        .collect();
    let top = parts.iter().map(|p| p.0).max().unwrap_or(0);
    let mut all: Vec<Vec<usize>> = parts
        .into_iter()
        .filter(|p| p.0 == top)
        .flat_map(|p| p.1)
        .collect();
    all.sort();
    all
}

/// Distinct subsets kept from a randomized search.
const RANDOM_KEEP: usize = 16;

fn randomized(proj: &Projector, size: usize, samples: usize, seed: u64) -> Vec<Vec<usize>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut scored: Vec<(usize, f64, Vec<usize>)> = (0..samples)
        .map(|_| {
            let mut s = sample(&mut rng, proj.n, size).into_vec();
            s.sort_unstable();
            let inner = proj.inner(&s);
            let c = covered(proj, &inner);
            // Tie-break by the first residual that fails.
            let res = proj.residuals(&inner);
            let next = res.iter().find(|&&r| r > DESIGN_TOL).copied().unwrap_or(0.0);
            (c, next, s)
        })
        .collect();
    scored.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.total_cmp(&b.1)).then(a.2.cmp(&b.2)));
    scored.dedup_by(|a, b| a.2 == b.2);
    scored.into_iter().take(RANDOM_KEEP).map(|t| t.2).collect()
}

/// Summary of the product over random subsets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtremalityTable {
    pub size: usize,
    pub samples: usize,
    pub seed: u64,
    pub design: DesignCertificate,
    pub design_product: GraphProduct,
    /// Products of centred indicators of random subsets of the same size.
    pub random_products: Vec<f64>,
    pub random_min: f64,
    pub random_q10: f64,
    pub random_median: f64,
    pub random_q90: f64,
    pub random_max: f64,
    pub random_mean: f64,
    /// Fraction of random subsets with a strictly smaller product.
    pub fraction_below_design: f64,
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = q * (sorted.len() - 1) as f64;
    let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Compares `W₁ · |∂|` of the best design of the given size with that of
/// random subsets of the same size.
pub fn design_extremality_experiment(
    g: &Graph,
    size: usize,
    samples: usize,
    seed: u64,
) -> Result<ExtremalityTable> {
    let mode = if binomial(g.n(), size) <= EXHAUSTIVE_CAP {
        SearchMode::Exhaustive
    } else {
        SearchMode::Randomized {
            samples: samples.max(1),
            seed,
        }
    };
    let search = search_designs(g, size, g.n() - 1, mode)?;
    let design = search.best.into_iter().next().ok_or(Error::EmptySupport)?;
    let product_of = |s: &[usize]| -> Result<f64> {
        let f = VertexFunction::centered_indicator(g.n(), s)?;
        if f.l1() == 0.0 {
            return Ok(0.0);
        }
        Ok(uncertainty_product_graph(g, &f)?.product)
    };
    let design_product = {
        let f = VertexFunction::centered_indicator(g.n(), &design.subset)?;
        if f.l1() == 0.0 {
            GraphProduct {
                w1: 0.0,
                boundary: 0,
                product: 0.0,
                l1: 0.0,
                w1_normalized: 0.0,
                product_normalized: 0.0,
            }
        } else {
            uncertainty_product_graph(g, &f)?
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let subsets: Vec<Vec<usize>> = (0..samples)
        .map(|_| sample(&mut rng, g.n(), size).into_iter().map(|v| v + 1).collect())
        .collect();
    let random_products = subsets
        .par_iter()
        .map(|s| product_of(s))
        .collect::<Result<Vec<f64>>>()?;
    let mut sorted = random_products.clone();
    sorted.sort_by(f64::total_cmp);
    let below = sorted.iter().filter(|&&p| p < design_product.product).count();
    Ok(ExtremalityTable {
        size,
        samples,
        seed,
        design,
        design_product,
        random_min: quantile(&sorted, 0.0),
        random_q10: quantile(&sorted, 0.1),
        random_median: quantile(&sorted, 0.5),
        random_q90: quantile(&sorted, 0.9),
        random_max: quantile(&sorted, 1.0),
        random_mean: sorted.iter().sum::<f64>() / sorted.len().max(1) as f64,
        fraction_below_design: below as f64 / samples.max(1) as f64,
        random_products,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomials() {
        assert_eq!(binomial(24, 6), 134_596);
        assert_eq!(binomial(24, 8), 735_471);
        assert_eq!(binomial(5, 7), 0);
    }

    #[test]
    fn complete_graph_complement_of_a_vertex_fails() {
        let g = Graph::complete(4).unwrap();
        let c = verify_design(&g, &[1, 2, 3], 1).unwrap();
        assert!(!c.pass);
        assert!(c.residuals[0] > 0.1);
    }

    #[test]
    fn full_vertex_set_is_orthogonal_to_everything() {
        let g = Graph::cycle(6).unwrap();
        let c = verify_design(&g, &[1, 2, 3, 4, 5, 6], 5).unwrap();
        assert!(c.pass);
        assert_eq!(c.orthogonal_eigenfunctions, 5);
        let s = search_designs(&g, 6, 5, SearchMode::Exhaustive).unwrap();
        assert_eq!(s.best_eigenfunctions, 5);
        assert_eq!(s.best.len(), 1);
    }

    #[test]
    fn subset_errors() {
        let g = Graph::cycle(5).unwrap();
        assert!(matches!(verify_design(&g, &[], 1), Err(Error::BadSubset(_))));
        assert!(matches!(verify_design(&g, &[6], 1), Err(Error::BadSubset(_))));
        assert!(matches!(verify_design(&g, &[1], 5), Err(Error::BadSubset(_))));
    }

    #[test]
    fn exhaustive_cap() {
        let g = Graph::cycle(60).unwrap();
        assert!(matches!(
            search_designs(&g, 30, 1, SearchMode::Exhaustive),
            Err(Error::TooLargeForExhaustive { .. })
        ));
    }

    #[test]
    fn domination_examples() {
        assert!(perfect_domination_check(&Graph::complete(4).unwrap(), &[1]));
        assert!(perfect_domination_check(&Graph::cycle(4).unwrap(), &[1, 2]));
        assert!(!perfect_domination_check(&Graph::cycle(5).unwrap(), &[1]));
    }

    #[test]
    fn cycle_antipodes() {
        // On C_6 the pair {1, 4} kills every eigenspace cos(2πj·/6) with odd j.
        let g = Graph::cycle(6).unwrap();
        let c = verify_design(&g, &[1, 4], 2).unwrap();
        assert!(c.pass);
        assert_eq!(c.orthogonal_eigenspaces, 1);
        assert_eq!(c.orthogonal_eigenfunctions, 2);
    }

    #[test]
    fn randomized_search_is_reproducible() {
        let g = Graph::nauru();
        let mode = SearchMode::Randomized {
            samples: 500,
            seed: 9,
        };
        let a = search_designs(&g, 6, 19, mode).unwrap();
        let b = search_designs(&g, 6, 19, mode).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn extremality_table_is_reproducible_and_handles_singletons() {
        let g = Graph::cycle(8).unwrap();
        let a = design_extremality_experiment(&g, 1, 50, 3).unwrap();
        let b = design_extremality_experiment(&g, 1, 50, 3).unwrap();
        assert_eq!(a, b);
        assert!(a.design_product.product > 0.0);
        assert!(a.random_min <= a.random_median && a.random_median <= a.random_max);
    }
}
