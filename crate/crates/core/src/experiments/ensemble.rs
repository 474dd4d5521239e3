//! Disorder ensembles and the per-realization pipelines behind every
//! statistic.

use rayon::prelude::*;

use crate::disorder::{sample_potential, DisorderConfig, PotentialField};
use crate::eigensolve::{counts_below, full_spectrum, windowed_spectrum, Interval, SpectralData};
use crate::error::{Error, Result};
use crate::hamiltonian::{assemble, HamiltonianMatrix};
use crate::ids::{estimate_ids, estimate_ids_counting, IdsModel};
use crate::lattice::{Boundary, LatticeCube};
use crate::localization::{center_records, CenterRecord};
use crate::statistics::{dcs, dls, dls_macroscopic, CountRecord, SpacingOptions, StepFunction};
use crate::two_scale::{local_eigen, match_spectra, CubeSpectrum, Decomposition, MatchReport};

use super::config::{ExperimentConfig, IdsMethod, WindowConfig};

/// Mixed into the master seed for the IDS boxes so that they never share a
/// disorder stream with the ensemble.
pub const IDS_SEED_SALT: u64 = 0x1d5e_ed5a_17ab_cdef;

/// Largest volume diagonalized densely when only a window is wanted in
/// dimension two or more.
pub const DENSE_WINDOW_LIMIT: usize = 4096;

/// A box and a disorder law; realization `r` draws its potential from
/// `disorder.realization(r)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    cube: LatticeCube,
    disorder: DisorderConfig,
}

impl Model {
    pub fn new(cube: LatticeCube, disorder: DisorderConfig) -> Result<Self> {
        disorder.validate()?;
        Ok(Model { cube, disorder })
    }

    pub fn from_config(cfg: &ExperimentConfig) -> Result<Self> {
        let cube = LatticeCube::new(cfg.model.dim, cfg.model.side, cfg.model.boundary)?;
        Self::new(cube, cfg.disorder()?)
    }

    pub fn cube(&self) -> &LatticeCube {
        &self.cube
    }

    pub fn disorder(&self) -> &DisorderConfig {
        &self.disorder
    }

    pub fn volume(&self) -> usize {
        self.cube.volume()
    }

    pub fn field(&self, r: u64) -> Result<PotentialField> {
        sample_potential(&self.cube, &self.disorder.realization(r))
    }

    pub fn hamiltonian(&self, r: u64) -> Result<HamiltonianMatrix> {
        assemble(&self.cube, &self.field(r)?)
    }

    /// Same law on a box of another side.
    pub fn with_side(&self, side: usize) -> Result<Self> {
        let cube = LatticeCube::new(self.cube.dim(), side, self.cube.boundary())?;
        Self::new(cube, self.disorder.clone())
    }
}

/// Maps `f` over realizations `0..realizations` on a pool of `workers`
/// threads (0 for the default). Results come back in realization order, so
/// the outcome does not depend on the worker count.
pub fn ensemble_map<T, F>(realizations: usize, workers: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("cannot start worker pool: {e}")))?;
    pool.install(|| (0..realizations as u64).into_par_iter().map(&f).collect())
}

/// IDS of the model's law on boxes of side `side`, seeded away from the
/// ensemble.
pub fn model_ids(
    model: &Model,
    side: usize,
    realizations: usize,
    method: IdsMethod,
    grid_points: usize,
    workers: usize,
) -> Result<IdsModel> {
    let mut disorder = model.disorder.clone();
    disorder.master_seed ^= IDS_SEED_SALT;
    let (d, b) = (model.cube.dim(), model.cube.boundary());
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("cannot start worker pool: {e}")))?;
    pool.install(|| match method {
        IdsMethod::Pooled => estimate_ids(d, side, b, &disorder, realizations),
        IdsMethod::Counting => estimate_ids_counting(d, side, b, &disorder, realizations, grid_points),
    })
}

/// Energy window described by `cfg` for a box of `volume` sites.
pub fn resolve_window(ids: &IdsModel, volume: usize, cfg: &WindowConfig) -> Result<Interval> {
    let w = match *cfg {
        WindowConfig::Alpha { e0, alpha } => ids.alpha_window(e0, volume, alpha),
        WindowConfig::Count { e0, expected } => ids.mass_window(e0, 0.5 * expected / volume as f64),
        WindowConfig::Interval { lo, hi } => Interval::new(lo, hi)?,
    };
    if !(w.lo < w.hi) {
        return Err(Error::InvalidArgument(format!("window [{}, {}] is empty", w.lo, w.hi)));
    }
    Ok(w)
}

/// Energy intervals whose unfolded images at `e0` are `[a, b]`.
pub fn unfolded_intervals(ids: &IdsModel, e0: f64, volume: usize, spans: &[[f64; 2]]) -> Result<Vec<Interval>> {
    let n0 = ids.evaluate(e0);
    let v = volume as f64;
    spans
        .iter()
        .map(|[a, b]| Interval::new(ids.inverse(n0 + a / v), ids.inverse(n0 + b / v)))
        .collect()
}

/// Eigenpairs of `h` in `window` (and the next level above it when
/// `include_next`). One-dimensional and large boxes go through the sparse
/// windowed solver; small boxes in higher dimension are diagonalized densely.
pub fn window_spectrum(
    h: &HamiltonianMatrix,
    window: Interval,
    want_vectors: bool,
    include_next: bool,
) -> Result<SpectralData> {
    if h.cube().dim() == 1 || h.dim() > DENSE_WINDOW_LIMIT {
        return windowed_spectrum(h, window, want_vectors, include_next);
    }
    let full = full_spectrum(h, want_vectors)?;
    let e = full.eigenvalues();
    let a = e.partition_point(|&x| x < window.lo);
    let mut b = e.partition_point(|&x| x <= window.hi);
    if include_next && b < e.len() {
        b += 1;
    }
    let vectors = full.vectors().map(|v| v[a..b].to_vec());
    SpectralData::new(h.cube().clone(), a, e[a..b].to_vec(), vectors)
}

/// Per-realization local spacing distributions.
pub fn spacing_ensemble(
    model: &Model,
    ids: &IdsModel,
    window: Interval,
    realizations: usize,
    workers: usize,
    opts: SpacingOptions,
) -> Result<Vec<StepFunction>> {
    ensemble_map(realizations, workers, |r| {
        let spec = window_spectrum(&model.hamiltonian(r)?, window, false, true)?;
        dls(&spec, ids, window, opts)
    })
}

/// Per-realization macroscopic spacing distributions on `j`.
pub fn macroscopic_ensemble(
    model: &Model,
    ids: &IdsModel,
    j: Interval,
    realizations: usize,
    workers: usize,
    opts: SpacingOptions,
) -> Result<Vec<StepFunction>> {
    ensemble_map(realizations, workers, |r| {
        let spec = window_spectrum(&model.hamiltonian(r)?, j, false, true)?;
        dls_macroscopic(&spec, ids, j, opts)
    })
}

/// Windowed eigenpairs and their localization centers, per realization.
pub fn center_ensemble(
    model: &Model,
    window: Interval,
    realizations: usize,
    workers: usize,
    decay_xi: Option<f64>,
) -> Result<Vec<(SpectralData, Vec<CenterRecord>)>> {
    ensemble_map(realizations, workers, |r| {
        let spec = window_spectrum(&model.hamiltonian(r)?, window, true, false)?;
        let recs = center_records(&spec, decay_xi)?;
        Ok((spec, recs))
    })
}

/// Per-realization center-spacing distributions. Realizations with fewer
/// than two in-window centers contribute nothing.
pub fn dcs_ensemble(
    model: &Model,
    mass: f64,
    window: Interval,
    realizations: usize,
    workers: usize,
) -> Result<Vec<StepFunction>> {
    let per = ensemble_map(realizations, workers, |r| {
        let spec = window_spectrum(&model.hamiltonian(r)?, window, true, false)?;
        let coords: Vec<Vec<usize>> = center_records(&spec, None)?.into_iter().map(|c| c.coords).collect();
        if coords.len() < 2 {
            return Ok(None);
        }
        dcs(&coords, mass, model.cube()).map(Some)
    })?;
    Ok(per.into_iter().flatten().collect())
}

/// Eigenvalue counts in each interval, per realization, from inertia counts.
pub fn count_ensemble(
    model: &Model,
    intervals: &[Interval],
    realizations: usize,
    workers: usize,
) -> Result<Vec<CountRecord>> {
    let mut energies = Vec::with_capacity(2 * intervals.len());
    for i in intervals {
        energies.push(i.lo);
        energies.push(i.hi.next_up());
    }
    ensemble_map(realizations, workers, |r| {
        let c = counts_below(&model.hamiltonian(r)?, &energies);
        Ok(CountRecord { realization: r, counts: c.chunks(2).map(|p| p[1] - p[0]).collect() })
    })
}

/// Big-box window, sub-cube spectra and their matching for realization `r`.
pub fn two_scale_realization(
    model: &Model,
    decomp: &Decomposition,
    window: Interval,
    tol: f64,
    sub_boundary: Boundary,
    r: u64,
) -> Result<(MatchReport, Vec<CubeSpectrum>)> {
    let field = model.field(r)?;
    let big = window_spectrum(&assemble(model.cube(), &field)?, window, true, false)?;
    let recs = center_records(&big, None)?;
    let cubes = local_eigen(&field, decomp, window, sub_boundary)?;
    let report = match_spectra(&big, &recs, decomp, &cubes, window, tol)?;
    Ok((report, cubes))
}

/// Sub-cube spectra of every realization, concatenated in realization order.
pub fn bernoulli_ensemble(
    model: &Model,
    decomp: &Decomposition,
    window: Interval,
    sub_boundary: Boundary,
    realizations: usize,
    workers: usize,
) -> Result<Vec<CubeSpectrum>> {
    let per = ensemble_map(realizations, workers, |r| local_eigen(&model.field(r)?, decomp, window, sub_boundary))?;
    Ok(per.into_iter().flatten().collect())
}
