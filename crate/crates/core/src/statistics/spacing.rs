//! Level-spacing and center-spacing distributions.

use serde::{Deserialize, Serialize};

use super::{StepFunction, StepKind};
use crate::eigensolve::{Interval, SpectralData};
use crate::error::{Error, Result};
use crate::ids::IdsModel;
use crate::lattice::LatticeCube;

/// Number of eigenvalues in `interval`, with multiplicity.
pub fn counting(spec: &SpectralData, interval: Interval) -> usize {
    spec.count_in(interval)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpacingOptions {
    /// Leave out the spacing of the topmost in-window level (whose partner
    /// lies outside the window) and shrink the denominator to match.
    pub drop_last: bool,
}

/// For every in-window level, the next eigenvalue of the full spectrum.
/// Levels at the very top of the spectrum have no successor and yield `None`.
fn successors(spec: &SpectralData, window: Interval) -> Result<Vec<(f64, Option<f64>)>> {
    let e = spec.eigenvalues();
    let a = e.partition_point(|&x| x < window.lo);
    let b = e.partition_point(|&x| x <= window.hi);
    (a..b)
        .map(|k| {
            if k + 1 < e.len() {
                Ok((e[k], Some(e[k + 1])))
            } else if spec.global_index(k) + 1 == spec.dim() {
                Ok((e[k], None))
            } else {
                Err(Error::InsufficientData(format!(
                    "eigenvalue {} has a successor outside the supplied spectrum; \
                     request the window with its next level",
                    e[k]
                )))
            }
        })
        .collect()
}

fn spacing_step(
    pairs: Vec<(f64, Option<f64>)>,
    opts: SpacingOptions,
    transform: impl Fn(f64, f64) -> f64,
) -> Result<StepFunction> {
    let mut denominator = pairs.len();
    if denominator == 0 {
        return Err(Error::InsufficientData("no eigenvalues in the window".into()));
    }
    // the top level of the whole spectrum has no successor and is given a
    // zero spacing, so that every in-window level is counted at x = 0
    let mut spacings: Vec<f64> = pairs.iter().map(|&(e, next)| next.map_or(0.0, |n| transform(e, n))).collect();
    if opts.drop_last {
        spacings.pop();
        denominator -= 1;
        if denominator == 0 {
            return Err(Error::InsufficientData("no spacings left after dropping the last".into()));
        }
    }
    StepFunction::new(spacings, denominator as f64, StepKind::Survival)
}

/// Unfolded level spacings `|Λ| (N(E_{j+1}) - N(E_j))` of the levels in
/// `window`, as a survival function over the number of in-window levels.
///
/// `E_{j+1}` is the next level of the full spectrum, which may lie outside
/// the window; `spec` must therefore contain it (see
/// [`crate::eigensolve::windowed_spectrum`] with `include_next`).
pub fn dls(spec: &SpectralData, ids: &IdsModel, window: Interval, opts: SpacingOptions) -> Result<StepFunction> {
    let vol = spec.dim() as f64;
    spacing_step(successors(spec, window)?, opts, |e, n| (vol * (ids.evaluate(n) - ids.evaluate(e))).max(0.0))
}

/// Spacings `(N(J) / |J|) |Λ| (E_{j+1} - E_j)` of the levels in `J`.
pub fn dls_macroscopic(
    spec: &SpectralData,
    ids: &IdsModel,
    j: Interval,
    opts: SpacingOptions,
) -> Result<StepFunction> {
    let mass = ids.mass(j);
    if !(mass > 0.0) || j.length() <= 0.0 {
        return Err(Error::InvalidArgument(format!("interval [{}, {}] carries no IDS mass", j.lo, j.hi)));
    }
    let factor = mass / j.length() * spec.dim() as f64;
    spacing_step(successors(spec, j)?, opts, |e, n| factor * (n - e))
}

/// All unfolded spacings of a complete spectrum.
pub fn unfolded_spacings(spec: &SpectralData, ids: &IdsModel) -> Vec<f64> {
    let vol = spec.dim() as f64;
    spec.eigenvalues().windows(2).map(|w| vol * (ids.evaluate(w[1]) - ids.evaluate(w[0]))).collect()
}

/// Tabulated limit law `g(x) = ∫_J exp(-ν_J(E) |J| x) ν_J(E) dE` with
/// `ν_J = ν / N(J)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitTable {
    pub xs: Vec<f64>,
    pub values: Vec<f64>,
    /// Largest change when the quadrature uses every other node only.
    pub refinement_error: f64,
}

impl LimitTable {
    /// Linear interpolation in the table, clamped at the ends.
    pub fn evaluate(&self, x: f64) -> f64 {
        let i = self.xs.partition_point(|&t| t <= x);
        if i == 0 {
            return self.values[0];
        }
        if i == self.xs.len() {
            return *self.values.last().unwrap();
        }
        let (x0, x1) = (self.xs[i - 1], self.xs[i]);
        let (y0, y1) = (self.values[i - 1], self.values[i]);
        y0 + (y1 - y0) * (x - x0) / (x1 - x0)
    }
}

/// Trapezoid quadrature of the limit law on the IDS knots inside `J` (plus
/// the ends of `J`), with the density smoothed at `bandwidth`.
///
/// The weights are normalized by their own quadrature so that `g(0) = 1`
/// exactly; the normalization error this absorbs is of the same order as the
/// reported refinement error.
pub fn limit_g(ids: &IdsModel, j: Interval, xs: &[f64], bandwidth: f64) -> Result<LimitTable> {
    let mass = ids.mass(j);
    if !(mass > 0.0) || j.length() <= 0.0 {
        return Err(Error::InvalidArgument(format!("interval [{}, {}] carries no IDS mass", j.lo, j.hi)));
    }
    let mut nodes = vec![j.lo];
    nodes.extend(ids.knots().iter().copied().filter(|&k| k > j.lo && k < j.hi));
    nodes.push(j.hi);
    let dens: Vec<f64> = nodes.iter().map(|&e| ids.density(e, bandwidth)).collect::<Result<_>>()?;
    let rates: Vec<f64> = dens.iter().map(|d| d / mass * j.length()).collect();

    let quad = |stride: usize, x: f64| -> f64 {
        let idx: Vec<usize> = (0..nodes.len()).step_by(stride).chain(std::iter::once(nodes.len() - 1)).collect();
        let mut total = 0.0;
        let mut norm = 0.0;
        for w in idx.windows(2) {
            let (a, b) = (w[0], w[1]);
            if a == b {
                continue;
            }
            let h = nodes[b] - nodes[a];
            total += 0.5 * h * (dens[a] * (-rates[a] * x).exp() + dens[b] * (-rates[b] * x).exp());
            norm += 0.5 * h * (dens[a] + dens[b]);
        }
        if norm > 0.0 {
            total / norm
        } else {
            f64::NAN
        }
    };
    let values: Vec<f64> = xs.iter().map(|&x| quad(1, x)).collect();
    if values.iter().any(|v| v.is_nan()) {
        return Err(Error::InsufficientData("the smoothed density vanishes on the interval".into()));
    }
    let refinement_error = xs.iter().zip(&values).map(|(&x, v)| (quad(2, x) - v).abs()).fold(0.0, f64::max);
    Ok(LimitTable { xs: xs.to_vec(), values, refinement_error })
}

/// Rescaled nearest-center distances `mass^{1/d} min_{i != j} dist(x_i, x_j)`
/// as a survival function.
pub fn dcs(centers: &[Vec<usize>], mass: f64, cube: &LatticeCube) -> Result<StepFunction> {
    if centers.len() < 2 {
        return Err(Error::InsufficientData("center spacings need at least two centers".into()));
    }
    if !(mass > 0.0) {
        return Err(Error::InvalidArgument("IDS mass must be positive".into()));
    }
    let scale = mass.powf(1.0 / cube.dim() as f64);
    let s: Vec<f64> = centers
        .iter()
        .enumerate()
        .map(|(j, xj)| {
            centers
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != j)
                .map(|(_, xi)| cube.distance(xi, xj))
                .fold(f64::INFINITY, f64::min)
                * scale
        })
        .collect();
    StepFunction::survival(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigensolve::{full_spectrum, SpectralData};
    use crate::hamiltonian::build_laplacian;
    use crate::lattice::{Boundary, LatticeCube};

    fn identity_ids() -> IdsModel {
        IdsModel::from_table(vec![0.0, 1.0], vec![0.0, 1.0]).unwrap()
    }

    fn spectrum(values: Vec<f64>) -> SpectralData {
        let cube = LatticeCube::new(1, values.len(), Boundary::Dirichlet).unwrap();
        SpectralData::new(cube, 0, values, None).unwrap()
    }

    #[test]
    fn dls_hand_enumeration() {
        // ten sites so that |Λ| = 10; the window holds 0.1, 0.2, 0.4, 0.7
        let mut e = vec![0.1, 0.2, 0.4, 0.7, 1.0];
        e.extend([1.1, 1.2, 1.3, 1.4, 1.5]);
        let spec = spectrum(e);
        let w = Interval::new(0.05, 0.75).unwrap();
        let s = dls(&spec, &identity_ids(), w, SpacingOptions::default()).unwrap();
        let mut got = s.values().to_vec();
        got.iter_mut().for_each(|v| *v = (*v * 1e9).round() / 1e9);
        assert_eq!(got, vec![1.0, 2.0, 3.0, 3.0]);
        assert_eq!(s.evaluate(1.5), 0.75);
        assert_eq!(s.evaluate(0.0), 1.0);
    }

    #[test]
    fn degenerate_and_single() {
        let spec = spectrum(vec![0.5; 4]);
        let s = dls(&spec, &identity_ids(), Interval::new(0.0, 1.0).unwrap(), SpacingOptions::default()).unwrap();
        assert_eq!(s.evaluate(0.0), 1.0);
        assert_eq!(s.evaluate(1e-9), 0.0);

        let spec = spectrum(vec![0.1, 0.5, 0.9]);
        let s = dls(&spec, &identity_ids(), Interval::new(0.4, 0.6).unwrap(), SpacingOptions::default()).unwrap();
        assert_eq!(s.len(), 1);
        assert!(dls(&spec, &identity_ids(), Interval::new(0.6, 0.7).unwrap(), SpacingOptions::default()).is_err());
    }

    #[test]
    fn truncated_spectrum_is_rejected() {
        let full = spectrum(vec![0.1, 0.2, 0.3, 0.4]);
        let part = full.window(Interval::new(0.0, 0.25).unwrap());
        assert!(dls(&part, &identity_ids(), Interval::new(0.0, 0.25).unwrap(), SpacingOptions::default()).is_err());
    }

    #[test]
    fn drop_last_switch() {
        let spec = spectrum(vec![0.1, 0.2, 0.4, 0.7, 1.0]);
        let w = Interval::new(0.0, 0.75).unwrap();
        let s = dls(&spec, &identity_ids(), w, SpacingOptions { drop_last: true }).unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(s.denominator(), 3.0);
    }

    #[test]
    fn macroscopic_scaling() {
        let spec = spectrum(vec![0.1, 0.2, 0.4, 0.7]);
        let j = Interval::new(0.0, 0.5).unwrap();
        let s = dls_macroscopic(&spec, &identity_ids(), j, SpacingOptions::default()).unwrap();
        // N(J)/|J| = 1 and |Λ| = 4
        let got: Vec<f64> = s.values().iter().map(|v| (v * 1e9).round() / 1e9).collect();
        assert_eq!(got, vec![0.4, 0.8, 1.2]);
        let empty = Interval::new(2.0, 3.0).unwrap();
        assert!(dls_macroscopic(&spec, &identity_ids(), empty, SpacingOptions::default()).is_err());
    }

    #[test]
    fn limit_is_exponential_for_flat_density() {
        let knots: Vec<f64> = (0..=100).map(|i| i as f64 / 100.0).collect();
        let ids = IdsModel::from_table(knots.clone(), knots).unwrap();
        let xs = [0.0, 0.5, 1.0, 3.0];
        let t = limit_g(&ids, Interval::new(0.2, 0.8).unwrap(), &xs, 0.05).unwrap();
        for (x, g) in xs.iter().zip(&t.values) {
            assert!((g - (-x).exp()).abs() < 1e-12, "{x} {g}");
        }
    }

    #[test]
    fn limit_two_level_mixture() {
        // ν = 0.5 on [0, 1) and 1.5 on [1, 2): N(J) = 2 on J = [0, 2] with
        // |J| = 2, so g(x) = 0.25 e^{-0.5x} + 0.75 e^{-1.5x}
        let mut knots = Vec::new();
        let mut vals = Vec::new();
        for i in 0..=2000 {
            let e = i as f64 / 1000.0;
            knots.push(e);
            vals.push(if e <= 1.0 { 0.25 * e } else { 0.25 + 0.75 * (e - 1.0) });
        }
        let ids = IdsModel::from_table(knots, vals).unwrap();
        let xs = [0.0, 0.5, 1.0, 2.0];
        let t = limit_g(&ids, Interval::new(0.0, 2.0).unwrap(), &xs, 0.002).unwrap();
        for (x, g) in xs.iter().zip(&t.values) {
            let exact = 0.5 * (0.5 * (-0.5 * x).exp() + 1.5 * (-1.5 * x).exp());
            assert!((g - exact).abs() < 5e-3, "{x}: {g} vs {exact}");
        }
    }

    #[test]
    fn dcs_hand_torus() {
        let cube = LatticeCube::new(1, 10, Boundary::Periodic).unwrap();
        let s = dcs(&[vec![0], vec![2], vec![7]], 0.1, &cube).unwrap();
        let got: Vec<f64> = s.values().iter().map(|v| (v * 1e12).round() / 1e12).collect();
        assert_eq!(got, vec![0.2, 0.2, 0.3]);
        assert!((s.evaluate(0.25) - 1.0 / 3.0).abs() < 1e-15);
        let anti = dcs(&[vec![1], vec![6]], 0.1, &cube).unwrap();
        assert_eq!(anti.values(), &[0.5, 0.5]);
        assert!(dcs(&[vec![1]], 0.1, &cube).is_err());
    }

    #[test]
    fn free_chain_window_count() {
        let cube = LatticeCube::new(1, 4, Boundary::Periodic).unwrap();
        let spec = full_spectrum(&build_laplacian(&cube).unwrap(), false).unwrap();
        assert_eq!(counting(&spec, Interval::new(-0.5, 0.5).unwrap()), 2);
        assert_eq!(counting(&spec, Interval::new(2.5, 3.0).unwrap()), 0);
    }
}
