//! Lattice cubes in `Z^d`, their row-major site enumeration and the
//! distances used for localization centers.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Boundary condition of a finite cube.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    Periodic,
    Dirichlet,
}

impl std::str::FromStr for Boundary {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "periodic" | "p" => Ok(Boundary::Periodic),
            "dirichlet" | "d" => Ok(Boundary::Dirichlet),
            other => Err(Error::InvalidArgument(format!("unknown boundary condition `{other}`"))),
        }
    }
}

/// A cube of `side^dim` lattice sites whose lowest corner sits at `origin`.
///
/// Sites are enumerated row-major with the first axis slowest, so the index
/// order coincides with the lexicographic order of coordinates.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LatticeCube {
    dim: usize,
    side: usize,
    boundary: Boundary,
    origin: Vec<i64>,
}

impl LatticeCube {
    /// Cube anchored at the origin of `Z^d`.
    pub fn new(dim: usize, side: usize, boundary: Boundary) -> Result<Self> {
        Self::with_origin(dim, side, boundary, vec![0; dim])
    }

    pub fn with_origin(dim: usize, side: usize, boundary: Boundary, origin: Vec<i64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidLattice("dimension must be positive".into()));
        }
        if side == 0 {
            return Err(Error::InvalidLattice("side must be positive".into()));
        }
        if boundary == Boundary::Periodic && side < 3 {
            return Err(Error::InvalidLattice(format!(
                "periodic boundary needs side >= 3 (got {side}); smaller tori double the \
                 nearest-neighbour edges"
            )));
        }
        if origin.len() != dim {
            return Err(Error::InvalidLattice(format!(
                "origin has {} coordinates, expected {dim}",
                origin.len()
            )));
        }
        side.checked_pow(dim as u32)
            .ok_or_else(|| Error::InvalidLattice("volume overflows usize".into()))?;
        Ok(LatticeCube { dim, side, boundary, origin })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn origin(&self) -> &[i64] {
        &self.origin
    }

    /// Number of sites, `side^dim`.
    pub fn volume(&self) -> usize {
        self.side.pow(self.dim as u32)
    }

    /// Row-major index of local coordinates (each in `0..side`).
    pub fn index(&self, local: &[usize]) -> usize {
        debug_assert_eq!(local.len(), self.dim);
        local.iter().fold(0, |acc, &c| {
            debug_assert!(c < self.side);
            acc * self.side + c
        })
    }

    /// Local coordinates of a site index.
    pub fn coords(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.dim];
        for slot in out.iter_mut().rev() {
            *slot = index % self.side;
            index /= self.side;
        }
        out
    }

    /// Absolute lattice coordinates of a site index.
    pub fn absolute(&self, index: usize) -> Vec<i64> {
        self.coords(index)
            .into_iter()
            .zip(&self.origin)
            .map(|(c, o)| o + c as i64)
            .collect()
    }

    /// Local coordinates of an absolute lattice point, if it lies in the cube.
    pub fn local_of(&self, absolute: &[i64]) -> Option<Vec<usize>> {
        if absolute.len() != self.dim {
            return None;
        }
        absolute
            .iter()
            .zip(&self.origin)
            .map(|(&a, &o)| {
                let c = a - o;
                (c >= 0 && (c as usize) < self.side).then_some(c as usize)
            })
            .collect()
    }

    /// True if `other` is entirely contained in this cube.
    pub fn contains_cube(&self, other: &LatticeCube) -> bool {
        other.dim == self.dim
            && other.origin.iter().zip(&self.origin).all(|(&a, &o)| {
                a >= o && (a - o) as usize + other.side <= self.side
            })
    }

    /// Nearest neighbours of a site (without duplicates), wrapping iff periodic.
    pub fn neighbors(&self, index: usize) -> Vec<usize> {
        let coords = self.coords(index);
        let mut out = Vec::with_capacity(2 * self.dim);
        let mut stride = 1;
        for axis in (0..self.dim).rev() {
            let c = coords[axis];
            if c + 1 < self.side {
                out.push(index + stride);
            } else if self.boundary == Boundary::Periodic {
                out.push(index + stride - self.side * stride);
            }
            if c > 0 {
                out.push(index - stride);
            } else if self.boundary == Boundary::Periodic {
                out.push(index + (self.side - 1) * stride);
            }
            stride *= self.side;
        }
        out.sort_unstable();
        out
    }

    /// Distance between two sites: shortest-path torus metric under periodic
    /// boundary, Euclidean otherwise.
    pub fn distance(&self, a: &[usize], b: &[usize]) -> f64 {
        match self.boundary {
            Boundary::Periodic => a
                .iter()
                .zip(b)
                .map(|(&x, &y)| {
                    let d = x.abs_diff(y);
                    d.min(self.side - d) as f64
                })
                .map(|d| d * d)
                .sum::<f64>()
                .sqrt(),
            Boundary::Dirichlet => a
                .iter()
                .zip(b)
                .map(|(&x, &y)| x.abs_diff(y) as f64)
                .map(|d| d * d)
                .sum::<f64>()
                .sqrt(),
        }
    }

    /// Distance from a site to the complement of the cube, taken axis-wise:
    /// the minimum over axes of `min(c + 1, side - c)`.
    pub fn depth(&self, local: &[usize]) -> usize {
        local.iter().map(|&c| (c + 1).min(self.side - c)).min().unwrap_or(0)
    }
}
