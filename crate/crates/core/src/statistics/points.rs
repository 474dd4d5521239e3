//! Unfolded local point processes and box counts.

use serde::{Deserialize, Serialize};

use crate::eigensolve::{Interval, SpectralData};
use crate::error::{Error, Result};
use crate::ids::IdsModel;
use crate::localization::CenterRecord;

/// Unfolded eigenvalues of one window, optionally paired with rescaled
/// center positions (index-aligned with `xi`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointSample {
    pub reference: f64,
    pub window: Interval,
    pub scale: f64,
    pub xi: Vec<f64>,
    pub positions: Option<Vec<Vec<f64>>>,
}

impl PointSample {
    pub fn len(&self) -> usize {
        self.xi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xi.is_empty()
    }
}

/// `ξ_j = scale (N(E_j) - N(reference))` for every eigenvalue in `window`.
///
/// With `scale = |Λ|` this is the usual local unfolding at `reference`; a
/// sub-box unfolding uses `scale = 1 / N(I)` and `reference` at the lower
/// end of the window.
pub fn unfold(spec: &SpectralData, ids: &IdsModel, reference: f64, window: Interval, scale: f64) -> PointSample {
    let n0 = ids.evaluate(reference);
    let xi = spec.window(window).eigenvalues().iter().map(|&e| scale * (ids.evaluate(e) - n0)).collect();
    PointSample { reference, window, scale, xi, positions: None }
}

/// Local level process at `E₀` over the window `E₀ + I_Λ`, scaled by `|Λ|`.
pub fn local_process(spec: &SpectralData, ids: &IdsModel, e0: f64, offsets: Interval) -> Result<PointSample> {
    let window = Interval::new(e0 + offsets.lo, e0 + offsets.hi)?;
    Ok(unfold(spec, ids, e0, window, spec.dim() as f64))
}

/// Joint energy/position process: pairs `(ℓ^d (N(E_j) - N(E₀)), x_j / ℓ̃)`
/// for the eigenpairs in `window`, where `x_j` is the center measured from
/// the middle site `floor(L/2)` of each axis.
///
/// `centers` must be index-aligned with the eigenpairs of `spec`.
pub fn joint_process(
    spec: &SpectralData,
    ids: &IdsModel,
    centers: &[CenterRecord],
    e0: f64,
    window: Interval,
    ell: f64,
    ell_tilde: f64,
) -> Result<PointSample> {
    if !(ell >= 1.0 && ell_tilde >= 1.0) {
        return Err(Error::InvalidArgument(format!("scales must be at least 1 (got {ell}, {ell_tilde})")));
    }
    if centers.len() != spec.len() {
        return Err(Error::InvalidArgument(format!(
            "{} centers for {} eigenpairs",
            centers.len(),
            spec.len()
        )));
    }
    let cube = spec.cube();
    let d = cube.dim();
    let mid = (cube.side() / 2) as f64;
    let scale = ell.powi(d as i32);
    let n0 = ids.evaluate(e0);
    let e = spec.eigenvalues();
    let a = e.partition_point(|&x| x < window.lo);
    let b = e.partition_point(|&x| x <= window.hi);
    let mut xi = Vec::with_capacity(b - a);
    let mut positions = Vec::with_capacity(b - a);
    for k in a..b {
        let rec = &centers[k];
        if rec.index != spec.global_index(k) {
            return Err(Error::InvalidArgument(format!(
                "center record {} does not belong to eigenvalue {}",
                rec.index,
                spec.global_index(k)
            )));
        }
        xi.push(scale * (ids.evaluate(e[k]) - n0));
        positions.push(rec.coords.iter().map(|&c| (c as f64 - mid) / ell_tilde).collect());
    }
    Ok(PointSample { reference: e0, window, scale, xi, positions: Some(positions) })
}

/// Rectangle `I × C` in unfolded energy and rescaled position. Every range
/// is half-open `[lo, hi)`; leave `space` empty to count energies only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxRegion {
    pub energy: (f64, f64),
    pub space: Vec<(f64, f64)>,
}

impl BoxRegion {
    pub fn energy_only(lo: f64, hi: f64) -> Self {
        BoxRegion { energy: (lo, hi), space: Vec::new() }
    }

    /// Lebesgue measure `|I| |C|`.
    pub fn measure(&self) -> f64 {
        self.space.iter().fold(self.energy.1 - self.energy.0, |m, (a, b)| m * (b - a))
    }

    fn contains(&self, xi: f64, pos: Option<&[f64]>) -> bool {
        if !(xi >= self.energy.0 && xi < self.energy.1) {
            return false;
        }
        match pos {
            _ if self.space.is_empty() => true,
            Some(p) => p.len() == self.space.len() && p.iter().zip(&self.space).all(|(&x, &(a, b))| x >= a && x < b),
            None => false,
        }
    }
}

/// Number of sample points in each box.
pub fn count_in_boxes(sample: &PointSample, boxes: &[BoxRegion]) -> Vec<usize> {
    boxes
        .iter()
        .map(|bx| {
            (0..sample.len())
                .filter(|&j| bx.contains(sample.xi[j], sample.positions.as_ref().map(|p| p[j].as_slice())))
                .count()
        })
        .collect()
}
