//! Empirical integrated density of states `N(E)`, its generalized inverse and
//! a smoothed density `ν(E)`.
//!
//! Two estimators are available. [`estimate_ids`] pools every eigenvalue of
//! `R` independent periodic boxes and takes their empirical CDF per site.
//! [`estimate_ids_counting`] instead evaluates the eigenvalue counts of each
//! box on a fixed energy grid with inertia counts, which reaches much larger
//! boxes and ensembles because no box is ever diagonalized.

use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::disorder::{sample_potential, DisorderConfig};
use crate::eigensolve::{counts_below, full_spectrum, Interval};
use crate::error::{Error, Result};
use crate::hamiltonian::assemble;
use crate::lattice::{Boundary, LatticeCube};

/// Upper bound on the number of knots kept from the pooled order statistics.
pub const MAX_KNOTS: usize = 20_000;

/// Pools smaller than this many eigenvalues are flagged as statistically weak.
pub const WEAK_POOL: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IdsEstimator {
    /// Empirical CDF of pooled eigenvalues.
    Pooled,
    /// Eigenvalue counts on a fixed energy grid.
    Counting,
    /// Built directly from supplied knots and values.
    Tabulated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdsMetadata {
    pub estimator: IdsEstimator,
    pub dim: usize,
    pub side: usize,
    pub boundary: Boundary,
    pub realizations: usize,
    pub pooled_sites: usize,
    pub disorder_digest: String,
    /// Set when fewer than [`WEAK_POOL`] eigenvalues went into the estimate.
    pub weak: bool,
}

impl IdsMetadata {
    fn tabulated() -> Self {
        IdsMetadata {
            estimator: IdsEstimator::Tabulated,
            dim: 0,
            side: 0,
            boundary: Boundary::Periodic,
            realizations: 0,
            pooled_sites: 0,
            disorder_digest: String::new(),
            weak: false,
        }
    }
}

/// Piecewise-linear, nondecreasing model of `N(E)` with values in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdsModel {
    knots: Vec<f64>,
    values: Vec<f64>,
    meta: IdsMetadata,
}

impl IdsModel {
    /// Model from explicit knots (strictly increasing) and values
    /// (nondecreasing, within `[0, 1]`).
    pub fn from_table(knots: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        Self::with_metadata(knots, values, IdsMetadata::tabulated())
    }

    fn with_metadata(knots: Vec<f64>, values: Vec<f64>, meta: IdsMetadata) -> Result<Self> {
        if knots.len() != values.len() || knots.len() < 2 {
            return Err(Error::InvalidArgument("an IDS table needs at least two matching knots".into()));
        }
        if knots.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidArgument("IDS knots must be strictly increasing".into()));
        }
        if values.windows(2).any(|w| w[0] > w[1]) || values.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::InvalidArgument("IDS values must be nondecreasing within [0, 1]".into()));
        }
        Ok(IdsModel { knots, values, meta })
    }

    /// Empirical CDF of a pool of eigenvalues, normalized per site.
    ///
    /// The `i`-th order statistic of `M` values becomes the knot
    /// `(v_i, i / (M - 1))`, so the model is 0 at the smallest and 1 at the
    /// largest observed eigenvalue. Tied values keep the largest level, and
    /// at most [`MAX_KNOTS`] evenly spaced order statistics are retained.
    pub fn from_eigenvalues(mut pool: Vec<f64>, meta: IdsMetadata) -> Result<Self> {
        if pool.len() < 2 {
            return Err(Error::InsufficientData("need at least two eigenvalues for an IDS".into()));
        }
        pool.sort_by(f64::total_cmp);
        let m = pool.len();
        let keep = m.min(MAX_KNOTS);
        let mut knots: Vec<f64> = Vec::with_capacity(keep);
        let mut values: Vec<f64> = Vec::with_capacity(keep);
        for k in 0..keep {
            let i = if keep == m { k } else { ((k as f64) * (m - 1) as f64 / (keep - 1) as f64).round() as usize };
            let (e, y) = (pool[i], i as f64 / (m - 1) as f64);
            match knots.last() {
                Some(&last) if last == e => *values.last_mut().unwrap() = y,
                _ => {
                    knots.push(e);
                    values.push(y);
                }
            }
        }
        if knots.len() < 2 {
            return Err(Error::InsufficientData("all pooled eigenvalues coincide".into()));
        }
        // ties at the top collapse onto the last knot; make sure it reads 1
        *values.last_mut().unwrap() = 1.0;
        Self::with_metadata(knots, values, meta)
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn metadata(&self) -> &IdsMetadata {
        &self.meta
    }

    /// `(min knot, max knot)`.
    pub fn span(&self) -> (f64, f64) {
        (self.knots[0], *self.knots.last().unwrap())
    }

    /// Mean distance between neighbouring knots.
    pub fn mean_knot_spacing(&self) -> f64 {
        let (a, b) = self.span();
        (b - a) / (self.knots.len() - 1) as f64
    }

    /// Default bandwidth for [`density`](Self::density): four mean knot spacings.
    pub fn default_bandwidth(&self) -> f64 {
        4.0 * (self.span().1 - self.span().0) / self.knots.len() as f64
    }

    /// `N(E)`: clamped piecewise-linear interpolation.
    pub fn evaluate(&self, e: f64) -> f64 {
        let (a, b) = self.span();
        if e <= a {
            return self.values[0];
        }
        if e >= b {
            return *self.values.last().unwrap();
        }
        let i = self.knots.partition_point(|&k| k <= e);
        let (x0, x1) = (self.knots[i - 1], self.knots[i]);
        let (y0, y1) = (self.values[i - 1], self.values[i]);
        y0 + (y1 - y0) * (e - x0) / (x1 - x0)
    }

    /// Smallest `E` with `N(E) >= y` (the generalized inverse).
    pub fn inverse(&self, y: f64) -> f64 {
        let y = y.clamp(0.0, 1.0);
        let i = self.values.partition_point(|&v| v < y);
        if i == 0 {
            return self.knots[0];
        }
        if i == self.values.len() {
            return *self.knots.last().unwrap();
        }
        let (x0, x1) = (self.knots[i - 1], self.knots[i]);
        let (y0, y1) = (self.values[i - 1], self.values[i]);
        (x0 + (x1 - x0) * (y - y0) / (y1 - y0)).min(x1)
    }

    /// IDS mass `N(hi) - N(lo)` of an interval.
    pub fn mass(&self, interval: Interval) -> f64 {
        self.evaluate(interval.hi) - self.evaluate(interval.lo)
    }

    /// `N^{-1}(N(E0) + [-half_mass, half_mass])`.
    pub fn mass_window(&self, e0: f64, half_mass: f64) -> Interval {
        let y = self.evaluate(e0);
        Interval { lo: self.inverse(y - half_mass), hi: self.inverse(y + half_mass) }
    }

    /// Energy interval of `|Λ|^{-α}` IDS mass on either side of `N(E0)`.
    pub fn alpha_window(&self, e0: f64, volume: usize, alpha: f64) -> Interval {
        self.mass_window(e0, (volume as f64).powf(-alpha))
    }

    /// Symmetric difference quotient `(N(E+h) - N(E-h)) / 2h`, floored at 0.
    pub fn density(&self, e: f64, h: f64) -> Result<f64> {
        if !(h > 0.0) {
            return Err(Error::InvalidArgument(format!("bandwidth must be positive (got {h})")));
        }
        if h < self.mean_knot_spacing() {
            return Err(Error::InvalidArgument(format!(
                "bandwidth {h} is below the mean knot spacing {}",
                self.mean_knot_spacing()
            )));
        }
        Ok(((self.evaluate(e + h) - self.evaluate(e - h)) / (2.0 * h)).max(0.0))
    }

    /// Slopes of `log |N(E0 + ε) - N(E0)|` against `log ε` between
    /// consecutive scales: a diagnostic of the local regularity of `N`.
    pub fn local_exponents(&self, e0: f64, scales: &[f64]) -> Vec<(f64, f64)> {
        let n0 = self.evaluate(e0);
        let pts: Vec<(f64, f64)> = scales
            .iter()
            .map(|&eps| (eps.ln(), (self.evaluate(e0 + eps) - n0).abs().max(f64::MIN_POSITIVE).ln()))
            .collect();
        pts.windows(2)
            .zip(scales.iter().skip(1))
            .map(|(w, &eps)| (eps, (w[1].1 - w[0].1) / (w[1].0 - w[0].0)))
            .collect()
    }

    /// Largest pointwise difference between two models. Both are piecewise
    /// linear, so the maximum is attained at a knot of one of them.
    pub fn sup_distance(&self, other: &IdsModel) -> f64 {
        self.knots
            .iter()
            .chain(other.knots.iter())
            .map(|&e| (self.evaluate(e) - other.evaluate(e)).abs())
            .fold(0.0, f64::max)
    }

    /// `knot,value` rows.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["knot", "value"])?;
        for (k, v) in self.knots.iter().zip(&self.values) {
            out.write_record([format!("{k:e}"), format!("{v:e}")])?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn write_metadata_json<W: Write>(&self, w: W) -> Result<()> {
        serde_json::to_writer_pretty(w, &self.meta)?;
        Ok(())
    }

    /// Reads a table written by [`write_csv`](Self::write_csv) together with
    /// its metadata.
    pub fn read<R1: Read, R2: Read>(csv_reader: R1, meta_reader: R2) -> Result<Self> {
        let meta: IdsMetadata = serde_json::from_reader(meta_reader)?;
        let mut rdr = csv::Reader::from_reader(csv_reader);
        let mut knots = Vec::new();
        let mut values = Vec::new();
        for rec in rdr.deserialize() {
            let (k, v): (f64, f64) = rec?;
            knots.push(k);
            values.push(v);
        }
        Self::with_metadata(knots, values, meta)
    }
}

fn ids_box(dim: usize, side: usize, boundary: Boundary) -> Result<LatticeCube> {
    LatticeCube::new(dim, side, boundary)
}

/// Pooled-eigenvalue IDS from `realizations` independent boxes of side
/// `side`. Realization `r` uses `disorder.realization(r)`.
pub fn estimate_ids(
    dim: usize,
    side: usize,
    boundary: Boundary,
    disorder: &DisorderConfig,
    realizations: usize,
) -> Result<IdsModel> {
    if realizations == 0 {
        return Err(Error::InvalidArgument("IDS estimation needs at least one realization".into()));
    }
    let cube = ids_box(dim, side, boundary)?;
    let spectra: Vec<Vec<f64>> = (0..realizations)
        .into_par_iter()
        .map(|r| -> Result<Vec<f64>> {
            let field = sample_potential(&cube, &disorder.realization(r as u64))?;
            Ok(full_spectrum(&assemble(&cube, &field)?, false)?.eigenvalues().to_vec())
        })
        .collect::<Result<_>>()?;
    let pool: Vec<f64> = spectra.into_iter().flatten().collect();
    let meta = IdsMetadata {
        estimator: IdsEstimator::Pooled,
        dim,
        side,
        boundary,
        realizations,
        pooled_sites: pool.len(),
        disorder_digest: disorder.digest(),
        weak: pool.len() < WEAK_POOL,
    };
    IdsModel::from_eigenvalues(pool, meta)
}

/// Counting IDS on `grid_points` equally spaced energies spanning a bound on
/// every possible spectrum (the scaled disorder support widened by `2d`).
pub fn estimate_ids_counting(
    dim: usize,
    side: usize,
    boundary: Boundary,
    disorder: &DisorderConfig,
    realizations: usize,
    grid_points: usize,
) -> Result<IdsModel> {
    if realizations == 0 {
        return Err(Error::InvalidArgument("IDS estimation needs at least one realization".into()));
    }
    if grid_points < 3 {
        return Err(Error::InvalidArgument("the counting grid needs at least three points".into()));
    }
    let cube = ids_box(dim, side, boundary)?;
    let (a, b) = disorder.scaled_support();
    let (lo, hi) = (a - 2.0 * dim as f64, b + 2.0 * dim as f64);
    let grid: Vec<f64> =
        (0..grid_points).map(|i| lo + (hi - lo) * i as f64 / (grid_points - 1) as f64).collect();
    let inner = &grid[1..grid_points - 1];
    let counts: Vec<Vec<usize>> = (0..realizations)
        .into_par_iter()
        .map(|r| -> Result<Vec<usize>> {
            let field = sample_potential(&cube, &disorder.realization(r as u64))?;
            Ok(counts_below(&assemble(&cube, &field)?, inner))
        })
        .collect::<Result<_>>()?;
    let total = (realizations * cube.volume()) as f64;
    let mut values = vec![0.0; grid_points];
    for c in &counts {
        for (v, &k) in values[1..grid_points - 1].iter_mut().zip(c) {
            *v += k as f64;
        }
    }
    values.iter_mut().for_each(|v| *v /= total);
    values[grid_points - 1] = 1.0;
    let meta = IdsMetadata {
        estimator: IdsEstimator::Counting,
        dim,
        side,
        boundary,
        realizations,
        pooled_sites: total as usize,
        disorder_digest: disorder.digest(),
        weak: (total as usize) < WEAK_POOL,
    };
    IdsModel::with_metadata(grid, values, meta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::disorder::SiteDistribution;
    use std::f64::consts::PI;

    fn free() -> DisorderConfig {
        DisorderConfig::new(SiteDistribution::Uniform { lo: -1.0, hi: 1.0 }, 0.0, 1).unwrap()
    }

    #[test]
    fn free_chain_closed_forms() {
        let ids = estimate_ids(1, 500, Boundary::Periodic, &free(), 1).unwrap();
        assert!((ids.evaluate(0.0) - 0.5).abs() < 0.01);
        // band edges ±2 are attained up to roundoff
        assert!(ids.evaluate(-2.0) < 1e-12);
        assert!(ids.evaluate(2.0) > 1.0 - 1e-12);
        let n1 = 1.0 - (0.5f64).acos() / PI;
        assert!((ids.evaluate(1.0) - n1).abs() < 0.01);
        // ν(E) = 1 / (π sqrt(4 - E²)), so ν(0) = 1/(2π); an open chain avoids
        // the paired levels of the ring so the difference quotient sees an
        // even staircase
        let open = estimate_ids(1, 1000, Boundary::Dirichlet, &free(), 1).unwrap();
        let nu = open.density(0.0, 0.1).unwrap();
        assert!((nu - 0.5 / PI).abs() < 0.005, "{nu}");
    }

    #[test]
    fn counting_matches_pooled_on_free_chain() {
        let c = estimate_ids_counting(1, 997, Boundary::Periodic, &free(), 1, 401).unwrap();
        let n1 = 1.0 - (0.5f64).acos() / PI;
        assert!((c.evaluate(1.0) - n1).abs() < 0.01);
        assert!((c.evaluate(0.0) - 0.5).abs() < 0.01);
    }

    #[test]
    fn linear_model() {
        let grid: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
        let m = IdsModel::from_table(grid.clone(), grid).unwrap();
        assert_eq!(m.evaluate(-1.0), 0.0);
        assert_eq!(m.evaluate(2.0), 1.0);
        assert_eq!(m.evaluate(0.25), 0.25);
        assert!((m.density(0.5, 1.0).unwrap() - 0.5).abs() < 1e-15); // clamped on both sides
        assert!((m.density(0.5, 0.5).unwrap() - 1.0).abs() < 1e-15);
        assert!(m.density(0.5, 0.05).is_err());
        assert_eq!(m.inverse(0.3), 0.3);
    }

    #[test]
    fn flat_piece_inverse_takes_smallest_preimage() {
        let knots = vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.0];
        let m = IdsModel::from_table(knots, vec![0.0, 0.5, 0.5, 0.5, 0.5, 1.0]).unwrap();
        assert_eq!(m.inverse(0.5), 1.0);
        assert_eq!(m.inverse(0.0), 0.0);
        assert_eq!(m.inverse(1.0), 5.0);
        assert_eq!(m.density(2.5, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn pooled_ties_keep_top_level() {
        let meta = IdsMetadata::tabulated();
        let m = IdsModel::from_eigenvalues(vec![0.0, 1.0, 1.0, 2.0, 3.0], meta).unwrap();
        assert_eq!(m.knots(), &[0.0, 1.0, 2.0, 3.0]);
        assert_eq!(m.values(), &[0.0, 0.5, 0.75, 1.0]);
    }

    #[test]
    fn csv_round_trip() {
        let ids = estimate_ids(1, 20, Boundary::Periodic, &free(), 5).unwrap();
        assert!(!ids.metadata().weak);
        let (mut a, mut b) = (Vec::new(), Vec::new());
        ids.write_csv(&mut a).unwrap();
        ids.write_metadata_json(&mut b).unwrap();
        assert_eq!(IdsModel::read(a.as_slice(), b.as_slice()).unwrap(), ids);
        let small = estimate_ids(1, 5, Boundary::Periodic, &free(), 2).unwrap();
        assert!(small.metadata().weak);
    }
}
