//! Two-scale approximation: tile the box with separated sub-cubes, solve each
//! sub-cube on the shared potential and match big-box eigenvalues to
//! sub-cube eigenvalues.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::disorder::PotentialField;
use crate::eigensolve::{full_spectrum, Interval, SpectralData};
use crate::error::{Error, Result};
use crate::hamiltonian::subcube;
use crate::lattice::{Boundary, LatticeCube};
use crate::localization::{centers, CenterRecord};
use crate::statistics::wilson_interval;

/// Tiling of `[0, L)^d` by `k^d` cubes of side `ℓ` separated by buffers of
/// width `ℓ'`. Along each axis the layout is
/// `ℓ' | ℓ | ℓ' | ... | ℓ | ℓ' + remainder`, so `(ℓ + ℓ')k + ℓ' + remainder = L`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    pub dim: usize,
    pub parent_side: usize,
    pub side: usize,
    pub buffer: usize,
    pub count: usize,
    /// Extra sites absorbed by the last buffer on each axis.
    pub remainder: usize,
    /// Exponents `(β, β')` when the scales were derived from `L^β`, `L^{β'}`.
    pub exponents: Option<(f64, f64)>,
}

impl Decomposition {
    /// Scales `ℓ' = round(L^{β'})`, `k = floor(L^{1-β})` and the largest `ℓ`
    /// that fits.
    pub fn decompose(dim: usize, parent_side: usize, beta: f64, beta_prime: f64) -> Result<Self> {
        if !(0.0 < beta_prime && beta_prime < beta && beta < 1.0) {
            return Err(Error::InfeasibleGeometry(format!(
                "exponents must satisfy 0 < β' < β < 1 (got β = {beta}, β' = {beta_prime})"
            )));
        }
        let l = parent_side as f64;
        let buffer = l.powf(beta_prime).round() as usize;
        let count = l.powf(1.0 - beta).floor() as usize;
        let mut d = Self::layout(dim, parent_side, buffer, count)?;
        d.exponents = Some((beta, beta_prime));
        Ok(d)
    }

    /// Explicit scales: as many cubes of side `ℓ` as fit with buffers `ℓ'`.
    pub fn from_scales(dim: usize, parent_side: usize, side: usize, buffer: usize) -> Result<Self> {
        if side == 0 {
            return Err(Error::InfeasibleGeometry("sub-cube side ℓ must be positive".into()));
        }
        if parent_side < side + 2 * buffer {
            return Err(Error::InfeasibleGeometry(format!(
                "L = {parent_side} violates L ≥ ℓ + 2ℓ' = {}",
                side + 2 * buffer
            )));
        }
        let count = (parent_side - buffer) / (side + buffer);
        let remainder = parent_side - buffer - count * (side + buffer);
        let d = Decomposition { dim, parent_side, side, buffer, count, remainder, exponents: None };
        d.check()?;
        Ok(d)
    }

    fn layout(dim: usize, parent_side: usize, buffer: usize, count: usize) -> Result<Self> {
        if buffer == 0 {
            return Err(Error::InfeasibleGeometry(format!("ℓ' = round(L^β') = 0 violates ℓ' ≥ 1 at L = {parent_side}")));
        }
        if count == 0 {
            return Err(Error::InfeasibleGeometry(format!("k = floor(L^(1-β)) = 0 violates k ≥ 1 at L = {parent_side}")));
        }
        let free = parent_side as i64 - ((count + 1) * buffer) as i64;
        let side = free.div_euclid(count as i64);
        if side <= 0 {
            return Err(Error::InfeasibleGeometry(format!(
                "ℓ = (L - (k+1)ℓ')/k = {side} violates ℓ > 0 (L = {parent_side}, k = {count}, ℓ' = {buffer})"
            )));
        }
        let side = side as usize;
        let remainder = parent_side - (count + 1) * buffer - count * side;
        let d = Decomposition { dim, parent_side, side, buffer, count, remainder, exponents: None };
        d.check()?;
        Ok(d)
    }

    fn check(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::InvalidLattice("dimension must be positive".into()));
        }
        debug_assert_eq!((self.side + self.buffer) * self.count + self.buffer + self.remainder, self.parent_side);
        Ok(())
    }

    pub fn cube_count(&self) -> usize {
        self.count.pow(self.dim as u32)
    }

    /// Segment lengths along one axis, alternating buffer and cube.
    pub fn axis_layout(&self) -> Vec<usize> {
        let mut out = vec![self.buffer];
        for i in 0..self.count {
            out.push(self.side);
            out.push(if i + 1 == self.count { self.buffer + self.remainder } else { self.buffer });
        }
        out
    }

    fn axis_origin(&self, i: usize) -> usize {
        self.buffer + i * (self.side + self.buffer)
    }

    /// Absolute origin of cube `j` (cubes enumerated row-major).
    pub fn origin(&self, j: usize) -> Vec<i64> {
        let mut idx = vec![0; self.dim];
        let mut r = j;
        for a in (0..self.dim).rev() {
            idx[a] = r % self.count;
            r /= self.count;
        }
        idx.iter().map(|&i| self.axis_origin(i) as i64).collect()
    }

    pub fn cube(&self, j: usize, boundary: Boundary) -> Result<LatticeCube> {
        LatticeCube::with_origin(self.dim, self.side, boundary, self.origin(j))
    }

    /// Number of parent sites outside every sub-cube.
    pub fn uncovered_volume(&self) -> usize {
        self.parent_side.pow(self.dim as u32) - self.cube_count() * self.side.pow(self.dim as u32)
    }

    /// Whether a sub-cube local coordinate is at least `ℓ'` from the cube's
    /// boundary on every axis.
    pub fn is_inner(&self, local: &[usize]) -> bool {
        local.iter().all(|&c| c >= self.buffer && c + self.buffer < self.side)
    }

    /// Cube whose inner region contains the parent site `coords`, with a
    /// flag for sites on the inner region's boundary.
    pub fn locate_inner(&self, coords: &[usize]) -> Option<(usize, bool)> {
        let mut j = 0;
        let mut borderline = false;
        for &p in coords {
            let off = p.checked_sub(self.buffer)?;
            let (i, within) = (off / (self.side + self.buffer), off % (self.side + self.buffer));
            if i >= self.count || within < self.buffer || within + self.buffer >= self.side {
                return None;
            }
            borderline |= within == self.buffer || within + self.buffer + 1 == self.side;
            j = j * self.count + i;
        }
        Some((j, borderline))
    }
}

/// Sub-cube spectrum and its Bernoulli indicator.
#[derive(Debug, Clone, PartialEq)]
pub struct CubeSpectrum {
    pub index: usize,
    pub origin: Vec<i64>,
    /// Every eigenvalue of the sub-cube Hamiltonian.
    pub eigenvalues: Vec<f64>,
    pub in_window: usize,
    /// Center of the in-window eigenvector when there is exactly one.
    pub center: Option<CenterRecord>,
    /// One in-window eigenvalue whose center lies in the inner region.
    pub x: bool,
}

/// Spectra of every sub-cube of `decomp` on the shared potential.
pub fn local_eigen(
    field: &PotentialField,
    decomp: &Decomposition,
    window: Interval,
    boundary: Boundary,
) -> Result<Vec<CubeSpectrum>> {
    let parent = field.parent();
    if parent.dim() != decomp.dim || parent.side() != decomp.parent_side {
        return Err(Error::InvalidArgument("decomposition does not fit the potential's box".into()));
    }
    (0..decomp.cube_count())
        .into_par_iter()
        .map(|j| {
            let origin = decomp.origin(j);
            let h = subcube(field, origin.clone(), decomp.side, boundary)?;
            let spec = full_spectrum(&h, true)?;
            let e = spec.eigenvalues();
            let a = e.partition_point(|&x| x < window.lo);
            let b = e.partition_point(|&x| x <= window.hi);
            let center = if b - a == 1 {
                let mut rec = centers(spec.vector(a).unwrap(), spec.cube())?;
                rec.index = a;
                rec.energy = e[a];
                Some(rec)
            } else {
                None
            };
            let x = center.as_ref().is_some_and(|c| decomp.is_inner(&c.coords));
            Ok(CubeSpectrum { index: j, origin, eigenvalues: e.to_vec(), in_window: b - a, center, x })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchPair {
    /// Global index of the big-box eigenvalue.
    pub big_index: usize,
    pub energy: f64,
    pub cube: usize,
    pub cube_energy: f64,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchReport {
    pub parent_side: usize,
    pub side: usize,
    pub buffer: usize,
    pub window: Interval,
    pub tol: f64,
    /// `e^{-ℓ'}`, the asymptotic error scale for exponential decay.
    pub asymptotic_bound: f64,
    pub pairs: Vec<MatchPair>,
    /// Eligible big-box levels left without a partner within `tol`.
    pub unmatched: Vec<usize>,
    /// In-window big-box levels whose center lies in no inner region.
    pub outside: usize,
    /// Eligible levels whose center sits on an inner-region boundary.
    pub borderline: usize,
    /// Sub-cubes with at least two in-window eigenvalues.
    pub multi_cubes: Vec<usize>,
    /// Bernoulli indicators by cube index.
    pub x: Vec<bool>,
}

/// Scalar digest of a [`MatchReport`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchSummary {
    #[serde(rename = "L")]
    pub parent_side: usize,
    pub ell: usize,
    pub ell_prime: usize,
    pub window: Interval,
    pub eligible: usize,
    pub matched_fraction: f64,
    #[serde(rename = "median_dE")]
    pub median_de: f64,
    #[serde(rename = "max_dE")]
    pub max_de: f64,
    pub n_multi_cubes: usize,
    pub n_unmatched: usize,
    pub n_outside: usize,
    pub n_borderline: usize,
    pub tol: f64,
    pub asymptotic_bound: f64,
}

impl MatchReport {
    pub fn eligible(&self) -> usize {
        self.pairs.len() + self.unmatched.len()
    }

    /// Matched levels over levels whose center lies in some inner region;
    /// NaN when no level is eligible.
    pub fn matched_fraction(&self) -> f64 {
        if self.eligible() == 0 {
            f64::NAN
        } else {
            self.pairs.len() as f64 / self.eligible() as f64
        }
    }

    pub fn deltas(&self) -> Vec<f64> {
        let mut d: Vec<f64> = self.pairs.iter().map(|p| p.delta).collect();
        d.sort_by(f64::total_cmp);
        d
    }

    pub fn median_delta(&self) -> f64 {
        median(&self.deltas())
    }

    pub fn max_delta(&self) -> f64 {
        self.deltas().last().copied().unwrap_or(f64::NAN)
    }

    pub fn summary(&self) -> MatchSummary {
        MatchSummary {
            parent_side: self.parent_side,
            ell: self.side,
            ell_prime: self.buffer,
            window: self.window,
            eligible: self.eligible(),
            matched_fraction: self.matched_fraction(),
            median_de: self.median_delta(),
            max_de: self.max_delta(),
            n_multi_cubes: self.multi_cubes.len(),
            n_unmatched: self.unmatched.len(),
            n_outside: self.outside,
            n_borderline: self.borderline,
            tol: self.tol,
            asymptotic_bound: self.asymptotic_bound,
        }
    }

    pub fn write_pairs_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["big_index", "energy", "cube", "cube_energy", "delta"])?;
        for p in &self.pairs {
            out.write_record([
                p.big_index.to_string(),
                format!("{:e}", p.energy),
                p.cube.to_string(),
                format!("{:e}", p.cube_energy),
                format!("{:e}", p.delta),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Median of a sorted slice; NaN when empty.
pub fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    match n {
        0 => f64::NAN,
        _ if n % 2 == 1 => sorted[n / 2],
        _ => 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]),
    }
}

/// Order-preserving injection of sorted `a` into sorted `b` (`a.len() <=
/// b.len()`) minimizing the total distance. Returns `assign[i]`, an index
/// into `b`.
fn monotone_assignment(a: &[f64], b: &[f64]) -> Vec<usize> {
    let (m, n) = (a.len(), b.len());
    debug_assert!(m <= n);
    // cost[i][j]: best cost for a[..i] inside b[..j]
    let mut cost = vec![vec![f64::INFINITY; n + 1]; m + 1];
    cost[0].iter_mut().for_each(|c| *c = 0.0);
    for i in 1..=m {
        for j in i..=n {
            let take = cost[i - 1][j - 1] + (a[i - 1] - b[j - 1]).abs();
            cost[i][j] = cost[i][j - 1].min(take);
        }
    }
    let mut assign = vec![0; m];
    let (mut i, mut j) = (m, n);
    while i > 0 {
        if j > i && cost[i][j] == cost[i][j - 1] {
            j -= 1;
        } else {
            assign[i - 1] = j - 1;
            i -= 1;
            j -= 1;
        }
    }
    assign
}

/// Matches the in-window levels of the big box to sub-cube eigenvalues.
///
/// A level is eligible when its center lies in the inner region of some
/// cube; the eligible levels of each cube are paired with that cube's
/// eigenvalues by the monotone assignment, and a pair counts as matched when
/// `|ΔE| ≤ tol`.
pub fn match_spectra(
    big: &SpectralData,
    big_centers: &[CenterRecord],
    decomp: &Decomposition,
    cubes: &[CubeSpectrum],
    window: Interval,
    tol: f64,
) -> Result<MatchReport> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive (got {tol})")));
    }
    if big_centers.len() != big.len() {
        return Err(Error::InvalidArgument("centers must be aligned with the big-box levels".into()));
    }
    if cubes.len() != decomp.cube_count() {
        return Err(Error::InvalidArgument("one spectrum per sub-cube is required".into()));
    }
    let mut per_cube: Vec<Vec<(usize, f64)>> = vec![Vec::new(); cubes.len()];
    let mut outside = 0;
    let mut borderline = 0;
    for (k, &e) in big.eigenvalues().iter().enumerate() {
        if !window.contains(e) {
            continue;
        }
        match decomp.locate_inner(&big_centers[k].coords) {
            Some((j, edge)) => {
                borderline += edge as usize;
                per_cube[j].push((big.global_index(k), e));
            }
            None => outside += 1,
        }
    }

    let mut pairs = Vec::new();
    let mut unmatched = Vec::new();
    for (j, levels) in per_cube.iter().enumerate() {
        let a: Vec<f64> = levels.iter().map(|l| l.1).collect();
        let b = &cubes[j].eigenvalues;
        let assignment: Vec<Option<usize>> = if a.len() <= b.len() {
            monotone_assignment(&a, b).into_iter().map(Some).collect()
        } else {
            let mut back = vec![None; a.len()];
            for (jb, ia) in monotone_assignment(b, &a).into_iter().enumerate() {
                back[ia] = Some(jb);
            }
            back
        };
        for (&(index, e), partner) in levels.iter().zip(assignment) {
            match partner.map(|p| (p, (e - b[p]).abs())) {
                Some((p, delta)) if delta <= tol => {
                    pairs.push(MatchPair { big_index: index, energy: e, cube: j, cube_energy: b[p], delta })
                }
                _ => unmatched.push(index),
            }
        }
    }
    pairs.sort_by_key(|p| p.big_index);
    unmatched.sort_unstable();

    Ok(MatchReport {
        parent_side: decomp.parent_side,
        side: decomp.side,
        buffer: decomp.buffer,
        window,
        tol,
        asymptotic_bound: (-(decomp.buffer as f64)).exp(),
        pairs,
        unmatched,
        outside,
        borderline,
        multi_cubes: cubes.iter().filter(|c| c.in_window >= 2).map(|c| c.index).collect(),
        x: cubes.iter().map(|c| c.x).collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BernoulliReport {
    pub cubes: usize,
    pub successes: usize,
    pub p_hat: f64,
    /// 95% Wilson interval for `P(X = 1)`.
    pub interval: (f64, f64),
    /// `N(I) ℓ^d`
    pub expected: f64,
    /// Fraction of cubes with two or more in-window eigenvalues.
    pub p_multi: f64,
}

/// Smallest ensemble accepted by [`bernoulli_stats`].
pub const MIN_CUBES: usize = 50;

/// Compares the empirical `P(X = 1)` over an ensemble of sub-cubes with
/// `N(I) ℓ^d`.
pub fn bernoulli_stats(cubes: &[CubeSpectrum], mass: f64, side: usize, dim: usize) -> Result<BernoulliReport> {
    if cubes.len() < MIN_CUBES {
        return Err(Error::InsufficientData(format!(
            "{} sub-cubes; at least {MIN_CUBES} are needed",
            cubes.len()
        )));
    }
    let n = cubes.len();
    let successes = cubes.iter().filter(|c| c.x).count();
    let multi = cubes.iter().filter(|c| c.in_window >= 2).count();
    Ok(BernoulliReport {
        cubes: n,
        successes,
        p_hat: successes as f64 / n as f64,
        interval: wilson_interval(successes, n, 1.959_963_984_540_054),
        expected: mass * (side as f64).powi(dim as i32),
        p_multi: multi as f64 / n as f64,
    })
}
