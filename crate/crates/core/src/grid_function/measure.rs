use crate::error::{Error, Result};
use crate::numerics::neumaier_sum;

/// Slack allowed when checking that support points lie in the closed unit cube.
const CUBE_SLACK: f64 = 1e-12;

/// Finite atomic measure on `[0,1]^dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    dim: usize,
    /// Flat coordinates, `dim` per atom.
    points: Vec<f64>,
    masses: Vec<f64>,
}

impl DiscreteMeasure {
    pub fn new(dim: usize, points: Vec<f64>, masses: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidGrid("measure of dimension 0".into()));
        }
        if points.len() != dim * masses.len() {
            return Err(Error::InvalidGrid(format!(
                "{} coordinates for {} atoms in dimension {dim}",
                points.len(),
                masses.len()
            )));
        }
        if let Some(m) = masses.iter().find(|m| !(m.is_finite() && **m >= 0.0)) {
            return Err(Error::InvalidGrid(format!("invalid atom mass {m}")));
        }
        if let Some(x) = points
            .iter()
            .find(|x| !(x.is_finite() && (-CUBE_SLACK..=1.0 + CUBE_SLACK).contains(*x)))
        {
            return Err(Error::InvalidGrid(format!(
                "coordinate {x} outside the unit cube"
            )));
        }
        Ok(Self { dim, points, masses })
    }

    /// A single atom.
    pub fn dirac(point: &[f64], mass: f64) -> Result<Self> {
        Self::new(point.len(), point.to_vec(), vec![mass])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn total_mass(&self) -> f64 {
        neumaier_sum(self.masses.iter().copied())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64], f64)> + '_ {
        self.points
            .chunks_exact(self.dim)
            .zip(self.masses.iter().copied())
    }

    /// Same support with masses scaled to total 1.
    pub fn normalized(&self) -> Result<Self> {
        let total = self.total_mass();
        if total <= 0.0 {
            return Err(Error::EmptySupport);
        }
        Ok(Self {
            masses: self.masses.iter().map(|m| m / total).collect(),
            ..self.clone()
        })
    }

    /// Shifts every atom by `shift`; fails if an atom leaves the cube.
    pub fn translated(&self, shift: &[f64]) -> Result<Self> {
        if shift.len() != self.dim {
            return Err(Error::WrongDimension {
                expected: self.dim,
                got: shift.len(),
            });
        }
        let points = self
            .points
            .iter()
            .enumerate()
            .map(|(k, x)| x + shift[k % self.dim])
            .collect();
        Self::new(self.dim, points, self.masses.clone())
    }

    /// Drops atoms lighter than `floor`.
    pub fn pruned(&self, floor: f64) -> Self {
        let mut points = Vec::with_capacity(self.points.len());
        let mut masses = Vec::with_capacity(self.masses.len());
        for (x, m) in self.iter() {
            if m > floor {
                points.extend_from_slice(x);
                masses.push(m);
            }
        }
        Self {
            dim: self.dim,
            points,
            masses,
        }
    }
}
