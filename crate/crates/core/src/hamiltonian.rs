//! Finite-volume Anderson Hamiltonians `H = -Δ + V` on lattice cubes.
//!
//! Hopping entries are `+1` between nearest neighbours, so `(-Δu)_n` is the
//! plain sum of the neighbouring amplitudes and the Laplacian has zero
//! diagonal. Codebases that use `-1` hopping see the spectrum reflected about
//! zero; none of the statistics in this crate depend on that sign.

use crate::disorder::PotentialField;
use crate::eigensolve::DenseMatrix;
use crate::error::{Error, Result};
use crate::lattice::{Boundary, LatticeCube};

/// Nearest-neighbour hopping amplitude.
pub const HOPPING: f64 = 1.0;

/// Symmetric sparse operator on a lattice cube, stored in CSR form with both
/// triangles present and the diagonal entry first in each row.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianMatrix {
    cube: LatticeCube,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl HamiltonianMatrix {
    /// Nearest-neighbour graph of `cube` with the given diagonal and hopping.
    pub fn from_diagonal(cube: LatticeCube, diagonal: &[f64], hopping: f64) -> Result<Self> {
        let n = cube.volume();
        if diagonal.len() != n {
            return Err(Error::InvalidArgument(format!(
                "diagonal has {} entries for {} sites",
                diagonal.len(),
                n
            )));
        }
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::with_capacity(n * (2 * cube.dim() + 1));
        let mut vals = Vec::with_capacity(cols.capacity());
        row_ptr.push(0);
        for (i, &d) in diagonal.iter().enumerate() {
            cols.push(i);
            vals.push(d);
            if hopping != 0.0 {
                for j in cube.neighbors(i) {
                    cols.push(j);
                    vals.push(hopping);
                }
            }
            row_ptr.push(cols.len());
        }
        Ok(HamiltonianMatrix { cube, row_ptr, cols, vals })
    }

    pub fn cube(&self) -> &LatticeCube {
        &self.cube
    }

    pub fn dim(&self) -> usize {
        self.row_ptr.len() - 1
    }

    /// `(column, value)` pairs of row `i`, diagonal first.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[range.clone()].iter().copied().zip(self.vals[range].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.row(i).filter(|&(c, _)| c == j).map(|(_, v)| v).sum()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.vals[self.row_ptr[i]]).collect()
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.vals[self.row_ptr[i]]).sum()
    }

    /// Squared Frobenius norm.
    pub fn frobenius_sq(&self) -> f64 {
        self.vals.iter().map(|v| v * v).sum()
    }

    /// Largest absolute row sum; an upper bound on the spectral norm.
    pub fn norm_bound(&self) -> f64 {
        (0..self.dim())
            .map(|i| self.row(i).map(|(_, v)| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Gershgorin enclosure `[lo, hi]` of the spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..self.dim() {
            let mut d = 0.0;
            let mut r = 0.0;
            for (c, v) in self.row(i) {
                if c == i {
                    d += v;
                } else {
                    r += v.abs();
                }
            }
            lo = lo.min(d - r);
            hi = hi.max(d + r);
        }
        (lo, hi)
    }

    pub fn mul_vec(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = self.row(i).map(|(c, v)| v * x[c]).sum();
        }
    }

    /// `max |H_ij - H_ji|` over stored entries.
    pub fn max_asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.dim() {
            for (j, v) in self.row(i) {
                worst = worst.max((v - self.get(j, i)).abs());
            }
        }
        worst
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let n = self.dim();
        let mut m = DenseMatrix::zeros(n);
        for i in 0..n {
            for (j, v) in self.row(i) {
                m[(i, j)] += v;
            }
        }
        m
    }

    /// Lower-triangle profile: for every row, the smallest column holding a
    /// nonzero entry. Drives the envelope factorization in the windowed solver.
    pub fn profile(&self) -> Vec<usize> {
        (0..self.dim())
            .map(|i| self.row(i).map(|(c, _)| c).min().unwrap_or(i).min(i))
            .collect()
    }
}

/// The free operator `-Δ` on `cube`.
pub fn build_laplacian(cube: &LatticeCube) -> Result<HamiltonianMatrix> {
    if cube.boundary() == Boundary::Periodic && cube.side() < 3 {
        return Err(Error::InvalidLattice("periodic boundary needs side >= 3".into()));
    }
    HamiltonianMatrix::from_diagonal(cube.clone(), &vec![0.0; cube.volume()], HOPPING)
}

/// `-Δ` on `cube` plus the field restricted to `cube`.
pub fn assemble(cube: &LatticeCube, field: &PotentialField) -> Result<HamiltonianMatrix> {
    let diag = field.restrict(cube)?;
    HamiltonianMatrix::from_diagonal(cube.clone(), &diag, HOPPING)
}

/// Hamiltonian of the sub-cube at absolute `origin` with `side` sites per axis,
/// reusing the parent's disorder values.
pub fn subcube(
    parent_field: &PotentialField,
    origin: Vec<i64>,
    side: usize,
    boundary: Boundary,
) -> Result<HamiltonianMatrix> {
    let cube = LatticeCube::with_origin(parent_field.parent().dim(), side, boundary, origin)?;
    assemble(&cube, parent_field)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::disorder::{sample_potential, DisorderConfig, SiteDistribution};

    #[test]
    fn dirichlet_pair() {
        let cube = LatticeCube::new(1, 2, Boundary::Dirichlet).unwrap();
        let h = build_laplacian(&cube).unwrap();
        assert_eq!(h.to_dense().to_rows(), vec![vec![0.0, 1.0], vec![1.0, 0.0]]);
    }

    #[test]
    fn row_sums_of_laplacian() {
        let p = LatticeCube::new(2, 5, Boundary::Periodic).unwrap();
        let h = build_laplacian(&p).unwrap();
        assert!((0..h.dim()).all(|i| h.row(i).map(|(_, v)| v).sum::<f64>() == 4.0));
        let d = LatticeCube::new(2, 5, Boundary::Dirichlet).unwrap();
        let h = build_laplacian(&d).unwrap();
        assert!((0..h.dim()).all(|i| h.row(i).map(|(_, v)| v).sum::<f64>() <= 4.0));
        assert_eq!(h.row(0).map(|(_, v)| v).sum::<f64>(), 2.0);
    }

    #[test]
    fn trace_and_symmetry() {
        let cube = LatticeCube::new(1, 3, Boundary::Periodic).unwrap();
        let field = PotentialField::from_values(cube.clone(), vec![0.5, -1.25, 2.0]).unwrap();
        let h = assemble(&cube, &field).unwrap();
        assert_eq!(h.trace(), 0.5 - 1.25 + 2.0);
        assert_eq!(h.max_asymmetry(), 0.0);

        let big = LatticeCube::new(2, 6, Boundary::Periodic).unwrap();
        let cfg = DisorderConfig::new(SiteDistribution::Uniform { lo: -1.0, hi: 1.0 }, 4.0, 3).unwrap();
        let f = sample_potential(&big, &cfg).unwrap();
        let h = assemble(&big, &f).unwrap();
        assert_eq!(h.max_asymmetry(), 0.0);
        let expect: f64 = f.values().iter().sum();
        assert!((h.trace() - expect).abs() <= 1e-12 * expect.abs().max(1.0));
    }

    #[test]
    fn zero_field_is_laplacian() {
        let cube = LatticeCube::new(2, 4, Boundary::Periodic).unwrap();
        let h = assemble(&cube, &PotentialField::zeros(cube.clone())).unwrap();
        assert_eq!(h, build_laplacian(&cube).unwrap());
    }

    #[test]
    fn subcube_hand_assembly() {
        let parent = LatticeCube::new(1, 9, Boundary::Periodic).unwrap();
        let field = PotentialField::from_values(parent, (0..9).map(|i| i as f64 * 0.5).collect()).unwrap();
        let h = subcube(&field, vec![3], 3, Boundary::Dirichlet).unwrap();
        let expect = vec![vec![1.5, 1.0, 0.0], vec![1.0, 2.0, 1.0], vec![0.0, 1.0, 2.5]];
        assert_eq!(h.to_dense().to_rows(), expect);

        let whole = subcube(&field, vec![0], 9, Boundary::Periodic).unwrap();
        assert_eq!(whole, assemble(field.parent(), &field).unwrap());

        assert!(subcube(&field, vec![7], 3, Boundary::Dirichlet).is_err());
        assert!(subcube(&field, vec![-1], 3, Boundary::Dirichlet).is_err());
    }

    #[test]
    fn disjoint_subcubes_read_disjoint_slices() {
        let parent = LatticeCube::new(1, 40, Boundary::Periodic).unwrap();
        let cfg = DisorderConfig::new(SiteDistribution::Uniform { lo: -1.0, hi: 1.0 }, 1.0, 5).unwrap();
        let f = sample_potential(&parent, &cfg).unwrap();
        let a = subcube(&f, vec![2], 10, Boundary::Periodic).unwrap();
        let b = subcube(&f, vec![20], 10, Boundary::Periodic).unwrap();
        assert_eq!(a.diagonal(), f.values()[2..12].to_vec());
        assert_eq!(b.diagonal(), f.values()[20..30].to_vec());
    }

    #[test]
    fn profile_of_periodic_chain() {
        let cube = LatticeCube::new(1, 6, Boundary::Periodic).unwrap();
        let h = build_laplacian(&cube).unwrap();
        assert_eq!(h.profile(), vec![0, 0, 1, 2, 3, 0]);
    }
}
