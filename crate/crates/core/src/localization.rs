//! Localization centers of eigenvectors and fits of their decay profiles.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::eigensolve::SpectralData;
use crate::error::{Error, Result};
use crate::lattice::LatticeCube;

/// Relative tolerance for a site to tie with the maximal amplitude.
pub const TIE_TOLERANCE: f64 = 1e-10;

/// Amplitudes at or below this value are left out of decay fits. Vectors
/// from inverse iteration carry absolute noise around 1e-15, which would
/// otherwise dominate the far tail.
pub const AMPLITUDE_FLOOR: f64 = 1e-12;

/// Least-squares fit of `log|φ(x)| ≈ c - γ dist(x, x_c)^ξ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub c: f64,
    pub gamma: f64,
    pub xi: f64,
    /// RMS residual in the log domain.
    pub residual: f64,
    pub sites_used: usize,
}

impl DecayFit {
    pub fn is_localized(&self) -> bool {
        self.gamma > 0.0
    }
}

/// Localization data of one eigenvector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CenterRecord {
    /// Global eigenvalue index.
    pub index: usize,
    pub energy: f64,
    /// Designated center: the lexicographically smallest maximizer.
    pub center: usize,
    /// Local coordinates of the center.
    pub coords: Vec<usize>,
    /// Every site whose amplitude ties with the maximum.
    pub center_set: Vec<usize>,
    pub decay: Option<DecayFit>,
}

/// Set of maximal-amplitude sites of a unit vector on `cube`.
///
/// Sites within a relative [`TIE_TOLERANCE`] of the maximum join the set;
/// the designated center is the smallest site index, which is the
/// lexicographically smallest coordinate under the row-major enumeration.
pub fn centers(vector: &[f64], cube: &LatticeCube) -> Result<CenterRecord> {
    if vector.len() != cube.volume() {
        return Err(Error::InvalidArgument(format!(
            "vector has {} entries for {} sites",
            vector.len(),
            cube.volume()
        )));
    }
    let norm_sq: f64 = vector.iter().map(|v| v * v).sum();
    if norm_sq == 0.0 {
        return Err(Error::InvalidArgument("the zero vector has no localization center".into()));
    }
    if (norm_sq.sqrt() - 1.0).abs() > 1e-8 {
        return Err(Error::InvalidArgument(format!("vector is not normalized (norm {})", norm_sq.sqrt())));
    }
    let max = vector.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let threshold = max * (1.0 - TIE_TOLERANCE);
    let center_set: Vec<usize> = (0..vector.len()).filter(|&i| vector[i].abs() >= threshold).collect();
    let center = center_set[0];
    Ok(CenterRecord {
        index: 0,
        energy: f64::NAN,
        center,
        coords: cube.coords(center),
        center_set,
        decay: None,
    })
}

/// Largest pairwise distance within the center set (torus metric under
/// periodic boundary, Euclidean otherwise).
pub fn center_diameter(record: &CenterRecord, cube: &LatticeCube) -> f64 {
    let pts: Vec<Vec<usize>> = record.center_set.iter().map(|&i| cube.coords(i)).collect();
    let mut best = 0.0f64;
    for i in 0..pts.len() {
        for j in 0..i {
            best = best.max(cube.distance(&pts[i], &pts[j]));
        }
    }
    best
}

/// Reference scale `c (log |Λ|)^{1/ξ}` for center-set diameters.
pub fn diameter_bound(cube: &LatticeCube, c: f64, xi: f64) -> f64 {
    c * (cube.volume() as f64).ln().powf(1.0 / xi)
}

/// Fits `log|φ(x)| ≈ c - γ dist(x, center)^ξ` over sites above `floor`.
pub fn decay_fit(vector: &[f64], cube: &LatticeCube, center: usize, xi: f64, floor: f64) -> Result<DecayFit> {
    if !(xi > 0.0 && xi <= 1.0) {
        return Err(Error::InvalidArgument(format!("stretch exponent must lie in (0, 1] (got {xi})")));
    }
    let c0 = cube.coords(center);
    let mut t = Vec::new();
    let mut y = Vec::new();
    for (i, &v) in vector.iter().enumerate() {
        if v.abs() > floor {
            t.push(cube.distance(&cube.coords(i), &c0).powf(xi));
            y.push(v.abs().ln());
        }
    }
    let n = t.len();
    if n < 4 {
        return Err(Error::InsufficientData(format!("only {n} sites above the amplitude floor")));
    }
    let nf = n as f64;
    let tm = t.iter().sum::<f64>() / nf;
    let ym = y.iter().sum::<f64>() / nf;
    let stt: f64 = t.iter().map(|a| (a - tm) * (a - tm)).sum();
    let sty: f64 = t.iter().zip(&y).map(|(a, b)| (a - tm) * (b - ym)).sum();
    if stt == 0.0 {
        return Err(Error::InsufficientData("all usable sites are equidistant from the center".into()));
    }
    let slope = sty / stt;
    let c = ym - slope * tm;
    let residual = (t.iter().zip(&y).map(|(a, b)| (b - c - slope * a).powi(2)).sum::<f64>() / nf).sqrt();
    Ok(DecayFit { c, gamma: -slope, xi, residual, sites_used: n })
}

/// Center records (and optional decay fits) for every eigenvector of a
/// spectrum.
pub fn center_records(spec: &SpectralData, xi: Option<f64>) -> Result<Vec<CenterRecord>> {
    let vectors = spec
        .vectors()
        .ok_or_else(|| Error::InvalidArgument("localization centers need eigenvectors".into()))?;
    vectors
        .iter()
        .enumerate()
        .map(|(k, v)| {
            let mut rec = centers(v, spec.cube())?;
            rec.index = spec.global_index(k);
            rec.energy = spec.eigenvalues()[k];
            if let Some(xi) = xi {
                rec.decay = decay_fit(v, spec.cube(), rec.center, xi, AMPLITUDE_FLOOR).ok();
            }
            Ok(rec)
        })
        .collect()
}

/// Rows `j,energy,x0..,gamma,residual`; fit columns are empty when absent.
pub fn write_centers_csv<W: Write>(records: &[CenterRecord], dim: usize, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let mut header = vec!["j".to_string(), "energy".to_string()];
    header.extend((0..dim).map(|a| format!("x{a}")));
    header.extend(["gamma".to_string(), "residual".to_string()]);
    out.write_record(&header)?;
    for r in records {
        let mut row = vec![r.index.to_string(), format!("{:e}", r.energy)];
        row.extend(r.coords.iter().map(|c| c.to_string()));
        match r.decay {
            Some(f) => row.extend([format!("{:e}", f.gamma), format!("{:e}", f.residual)]),
            None => row.extend([String::new(), String::new()]),
        }
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}
