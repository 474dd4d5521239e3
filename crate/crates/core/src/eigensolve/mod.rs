//! Eigenvalues and eigenvectors of finite-volume Hamiltonians.
//!
//! Two routes are provided. [`full_spectrum`] diagonalizes the dense matrix
//! and is limited to [`DENSE_DIM_CAP`] sites. [`windowed_spectrum`] works on
//! the sparse matrix directly and returns only the eigenpairs inside an energy
//! interval, keeping their global indices; it is what makes boxes with many
//! thousands of sites affordable.

pub mod dense;
pub mod sturm;

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

pub use dense::{eigh, DenseMatrix};
pub use sturm::EnvelopeSolver;

use crate::error::{Error, Result};
use crate::hamiltonian::HamiltonianMatrix;
use crate::lattice::LatticeCube;

/// Largest matrix dimension handed to the dense solver.
pub const DENSE_DIM_CAP: usize = 8192;

const VECTOR_MAGIC: &[u8; 4] = b"AEV1";

/// Closed energy interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(Error::InvalidArgument(format!("bad interval [{lo}, {hi}]")));
        }
        Ok(Interval { lo, hi })
    }

    /// `[center - half, center + half]`.
    pub fn around(center: f64, half: f64) -> Result<Self> {
        Self::new(center - half, center + half)
    }

    pub fn contains(&self, e: f64) -> bool {
        self.lo <= e && e <= self.hi
    }

    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn center(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }
}

/// A contiguous run of the spectrum of one Hamiltonian.
///
/// `eigenvalues[k]` carries global index `first_index + k` in the ascending
/// spectrum of the full `dim`-dimensional operator. When present, `vectors[k]`
/// is the matching unit eigenvector in the cube's site order.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralData {
    cube: LatticeCube,
    dim: usize,
    first_index: usize,
    eigenvalues: Vec<f64>,
    vectors: Option<Vec<Vec<f64>>>,
}

impl SpectralData {
    pub fn new(
        cube: LatticeCube,
        first_index: usize,
        eigenvalues: Vec<f64>,
        vectors: Option<Vec<Vec<f64>>>,
    ) -> Result<Self> {
        let dim = cube.volume();
        if first_index + eigenvalues.len() > dim {
            return Err(Error::InvalidArgument("more eigenvalues than sites".into()));
        }
        if eigenvalues.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidArgument("eigenvalues must be ascending".into()));
        }
        if let Some(v) = &vectors {
            if v.len() != eigenvalues.len() || v.iter().any(|x| x.len() != dim) {
                return Err(Error::InvalidArgument("eigenvector shape mismatch".into()));
            }
        }
        Ok(SpectralData { cube, dim, first_index, eigenvalues, vectors })
    }

    pub fn cube(&self) -> &LatticeCube {
        &self.cube
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn first_index(&self) -> usize {
        self.first_index
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn vectors(&self) -> Option<&[Vec<f64>]> {
        self.vectors.as_deref()
    }

    pub fn vector(&self, k: usize) -> Option<&[f64]> {
        self.vectors.as_ref().map(|v| v[k].as_slice())
    }

    pub fn global_index(&self, k: usize) -> usize {
        self.first_index + k
    }

    /// True if every eigenvalue of the operator is present.
    pub fn is_complete(&self) -> bool {
        self.first_index == 0 && self.eigenvalues.len() == self.dim
    }

    /// Eigenvalues inside `interval`, with global indices and vectors kept.
    pub fn window(&self, interval: Interval) -> SpectralData {
        let a = self.eigenvalues.partition_point(|&e| e < interval.lo);
        let b = self.eigenvalues.partition_point(|&e| e <= interval.hi);
        SpectralData {
            cube: self.cube.clone(),
            dim: self.dim,
            first_index: self.first_index + a,
            eigenvalues: self.eigenvalues[a..b].to_vec(),
            vectors: self.vectors.as_ref().map(|v| v[a..b].to_vec()),
        }
    }

    /// Number of eigenvalues inside `interval`.
    pub fn count_in(&self, interval: Interval) -> usize {
        self.eigenvalues.iter().filter(|&&e| interval.contains(e)).count()
    }

    /// Writes `index,eigenvalue` rows with global indices.
    pub fn write_eigenvalues_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["index", "eigenvalue"])?;
        for (k, e) in self.eigenvalues.iter().enumerate() {
            out.write_record([self.global_index(k).to_string(), format!("{e:e}")])?;
        }
        out.flush()?;
        Ok(())
    }

    /// Reads `index,eigenvalue` rows written by
    /// [`write_eigenvalues_csv`](Self::write_eigenvalues_csv).
    pub fn read_eigenvalues_csv<R: Read>(cube: LatticeCube, r: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(r);
        let mut first = None;
        let mut values = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let idx: usize = parse_field(&rec, 0)?;
            let e: f64 = parse_field(&rec, 1)?;
            let expected = first.get_or_insert(idx);
            if idx != *expected + values.len() {
                return Err(Error::InvalidArgument("eigenvalue indices are not contiguous".into()));
            }
            values.push(e);
        }
        Self::new(cube, first.unwrap_or(0), values, None)
    }

    /// Binary eigenvector dump: magic `AEV1`, then `dim`, `count` and
    /// `first_index` as little-endian u64, then for each pair the eigenvalue
    /// followed by `dim` components, all little-endian f64.
    pub fn write_vectors_binary<W: Write>(&self, mut w: W) -> Result<()> {
        let vectors = self
            .vectors
            .as_ref()
            .ok_or_else(|| Error::InvalidArgument("no eigenvectors were computed".into()))?;
        w.write_all(VECTOR_MAGIC)?;
        for x in [self.dim, self.len(), self.first_index] {
            w.write_all(&(x as u64).to_le_bytes())?;
        }
        for (e, v) in self.eigenvalues.iter().zip(vectors) {
            w.write_all(&e.to_le_bytes())?;
            for x in v {
                w.write_all(&x.to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn read_vectors_binary<R: Read>(cube: LatticeCube, mut r: R) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != VECTOR_MAGIC {
            return Err(Error::InvalidArgument("not an eigenvector file".into()));
        }
        let mut word = [0u8; 8];
        let mut next = |r: &mut R| -> Result<[u8; 8]> {
            r.read_exact(&mut word)?;
            Ok(word)
        };
        let dim = u64::from_le_bytes(next(&mut r)?) as usize;
        let count = u64::from_le_bytes(next(&mut r)?) as usize;
        let first = u64::from_le_bytes(next(&mut r)?) as usize;
        if dim != cube.volume() {
            return Err(Error::InvalidArgument("eigenvector length does not match the cube".into()));
        }
        let mut values = Vec::with_capacity(count);
        let mut vectors = Vec::with_capacity(count);
        for _ in 0..count {
            values.push(f64::from_le_bytes(next(&mut r)?));
            let mut v = Vec::with_capacity(dim);
            for _ in 0..dim {
                v.push(f64::from_le_bytes(next(&mut r)?));
            }
            vectors.push(v);
        }
        Self::new(cube, first, values, Some(vectors))
    }
}

fn parse_field<T: std::str::FromStr>(rec: &csv::StringRecord, i: usize) -> Result<T> {
    rec.get(i)
        .and_then(|s| s.trim().parse().ok())
        .ok_or_else(|| Error::InvalidArgument(format!("bad CSV field {i} in {rec:?}")))
}

/// All eigenvalues (and optionally eigenvectors) by dense diagonalization.
pub fn full_spectrum(h: &HamiltonianMatrix, want_vectors: bool) -> Result<SpectralData> {
    full_spectrum_capped(h, want_vectors, DENSE_DIM_CAP)
}

pub fn full_spectrum_capped(h: &HamiltonianMatrix, want_vectors: bool, cap: usize) -> Result<SpectralData> {
    let n = h.dim();
    if n > cap {
        return Err(Error::DimensionCap { dim: n, cap });
    }
    let (values, vectors) = eigh(&h.to_dense(), want_vectors)?;
    SpectralData::new(h.cube().clone(), 0, values, vectors)
}

/// Restriction of a spectrum to an energy window.
pub fn window(spectrum: &SpectralData, interval: Interval) -> SpectralData {
    spectrum.window(interval)
}

/// Eigenpairs of `h` inside `interval`, computed from the sparse matrix.
///
/// With `include_next`, the first eigenvalue above the window is appended
/// when one exists, so spacings of every in-window level can be formed.
pub fn windowed_spectrum(
    h: &HamiltonianMatrix,
    interval: Interval,
    want_vectors: bool,
    include_next: bool,
) -> Result<SpectralData> {
    let mut solver = EnvelopeSolver::new(h);
    let n = solver.dim();
    let k0 = solver.count_below(interval.lo);
    let mut k1 = solver.count_below(interval.hi.next_up()).max(k0);
    if include_next && k1 < n {
        k1 += 1;
    }
    let values = solver.eigenvalues_by_index(k0, k1)?;
    let vectors = if want_vectors {
        Some(solver.eigenvectors(&values, k0 as u64)?)
    } else {
        None
    };
    SpectralData::new(h.cube().clone(), k0, values, vectors)
}

/// Number of eigenvalues of `h` below each energy, from inertia counts.
pub fn counts_below(h: &HamiltonianMatrix, energies: &[f64]) -> Vec<usize> {
    EnvelopeSolver::new(h).counts_below(energies)
}
