use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::Graph;
use crate::error::Result;

/// Relative tolerance for grouping eigenvalues into eigenspaces.
pub const SPECTRUM_TOL: f64 = 1e-9;

/// A maximal run of equal eigenvalues.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Eigenspace {
    pub value: f64,
    /// Index of the first eigenvector of the group.
    pub start: usize,
    pub dim: usize,
}

/// Spectrum of the combinatorial Laplacian `L = D − A`.
#[derive(Debug, Clone)]
pub struct Spectrum {
    /// Ascending.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors as columns, in the order of `values`.
    pub vectors: DMatrix<f64>,
    pub groups: Vec<Eigenspace>,
}

impl Spectrum {
    /// Eigenspaces after the constant one.
    pub fn nontrivial(&self) -> &[Eigenspace] {
        &self.groups[1..]
    }

    /// Eigenvalues with multiplicity, one per group.
    pub fn multiplicities(&self) -> Vec<(f64, usize)> {
        self.groups.iter().map(|g| (g.value, g.dim)).collect()
    }
}

pub fn laplacian_spectrum(g: &Graph) -> Result<Spectrum> {
    laplacian_spectrum_with_tol(g, SPECTRUM_TOL)
}

pub fn laplacian_spectrum_with_tol(g: &Graph, tol: f64) -> Result<Spectrum> {
    let n = g.n();
    let mut l = DMatrix::<f64>::zeros(n, n);
    for &(u, v) in g.edges() {
        let (a, b) = (u - 1, v - 1);
        l[(a, a)] += 1.0;
        l[(b, b)] += 1.0;
        l[(a, b)] -= 1.0;
        l[(b, a)] -= 1.0;
    }
    let eig = l.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let mut values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = DMatrix::<f64>::zeros(n, n);
    for (c, &i) in order.iter().enumerate() {
        vectors.set_column(c, &eig.eigenvectors.column(i));
    }
    // The kernel of a connected graph's Laplacian is the constants.
    values[0] = 0.0;
    let c = 1.0 / (n as f64).sqrt();
    vectors.column_mut(0).fill(c);

    let scale = values.last().copied().unwrap_or(0.0).abs().max(1.0);
    let mut groups: Vec<Eigenspace> = Vec::new();
    for (i, &v) in values.iter().enumerate() {
        match groups.last_mut() {
            Some(gr) if (v - values[i - 1]).abs() <= tol * scale => gr.dim += 1,
            _ => groups.push(Eigenspace {
                value: v,
                start: i,
                dim: 1,
            }),
        }
    }
    for gr in &mut groups {
        gr.value = values[gr.start..gr.start + gr.dim].iter().sum::<f64>() / gr.dim as f64;
    }
    Ok(Spectrum {
        values,
        vectors,
        groups,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &[f64], b: &[f64]) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-10)
    }

    #[test]
    fn path_of_three() {
        // det(L − λ) = −λ(λ − 1)(λ − 3).
        let s = laplacian_spectrum(&Graph::path(3).unwrap()).unwrap();
        assert!(close(&s.values, &[0.0, 1.0, 3.0]));
    }

    #[test]
    fn complete_graph() {
        let s = laplacian_spectrum(&Graph::complete(4).unwrap()).unwrap();
        assert!(close(&s.values, &[0.0, 4.0, 4.0, 4.0]));
        assert_eq!(s.groups.len(), 2);
        assert_eq!(s.groups[1].dim, 3);
    }

    #[test]
    fn kernel_is_constant_and_basis_orthonormal() {
        for g in [Graph::nauru(), Graph::mcgee(), Graph::cycle(7).unwrap()] {
            let s = laplacian_spectrum(&g).unwrap();
            assert_eq!(s.groups[0].dim, 1);
            assert!(s.values[1] > 1e-6);
            let gram = s.vectors.transpose() * &s.vectors;
            let eye = DMatrix::<f64>::identity(g.n(), g.n());
            assert!((gram - eye).amax() < 1e-10);
        }
    }

    #[test]
    fn grouping_is_stable_under_tolerance_changes() {
        for g in [Graph::nauru(), Graph::mcgee()] {
            let base = laplacian_spectrum(&g).unwrap().multiplicities();
            for tol in [SPECTRUM_TOL / 10.0, SPECTRUM_TOL * 10.0] {
                let other = laplacian_spectrum_with_tol(&g, tol).unwrap().multiplicities();
                assert_eq!(
                    base.iter().map(|m| m.1).collect::<Vec<_>>(),
                    other.iter().map(|m| m.1).collect::<Vec<_>>()
                );
            }
        }
    }
}
