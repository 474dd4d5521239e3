//! Ensemble ratios for Wegner and Minami bounds and the large-deviation
//! check on eigenvalue counts.

use serde::{Deserialize, Serialize};

use super::hypothesis::wilson_interval;
use crate::error::{Error, Result};

fn check_ensemble(counts: &[usize], length: f64, volume: usize) -> Result<()> {
    if counts.is_empty() {
        return Err(Error::InsufficientData("empty ensemble".into()));
    }
    if !(length > 0.0) || volume == 0 {
        return Err(Error::InvalidArgument(format!("need |J| > 0 and |Λ| > 0 (got {length}, {volume})")));
    }
    Ok(())
}

/// `Ê[tr 1_J(H)] / (|J| |Λ|)` from per-realization counts in `J`.
pub fn wegner_estimator(counts: &[usize], length: f64, volume: usize) -> Result<f64> {
    check_ensemble(counts, length, volume)?;
    let mean = counts.iter().sum::<usize>() as f64 / counts.len() as f64;
    Ok(mean / (length * volume as f64))
}

/// `Ê[k (k - 1)] / (|J| |Λ|)^{1 + ρ}` from per-realization counts in `J`.
pub fn minami_estimator(counts: &[usize], length: f64, volume: usize, rho: f64) -> Result<f64> {
    check_ensemble(counts, length, volume)?;
    let pairs = counts.iter().map(|&k| (k * k.saturating_sub(1)) as f64).sum::<f64>() / counts.len() as f64;
    Ok(pairs / (length * volume as f64).powf(1.0 + rho))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LargeDeviationReport {
    /// `N(I) |Λ|`
    pub expected: f64,
    /// `N(I) |Λ| (log |Λ|)^{-δ}`
    pub threshold: f64,
    pub violations: usize,
    pub realizations: usize,
    pub fraction: f64,
    /// 95% Wilson interval for the violation probability.
    pub interval: (f64, f64),
}

/// Fraction of realizations whose count strays from `N(I) |Λ|` by at least
/// `N(I) |Λ| (log |Λ|)^{-δ}`.
pub fn large_deviation_check(counts: &[usize], mass: f64, volume: usize, delta: f64) -> Result<LargeDeviationReport> {
    if counts.is_empty() {
        return Err(Error::InsufficientData("empty ensemble".into()));
    }
    let expected = mass * volume as f64;
    if !(expected >= 10.0) {
        return Err(Error::InvalidArgument(format!(
            "the expected count N(I)|Λ| = {expected} is below 10"
        )));
    }
    if !(delta >= 0.0) || volume < 2 {
        return Err(Error::InvalidArgument("need δ ≥ 0 and at least two sites".into()));
    }
    let threshold = expected * (volume as f64).ln().powf(-delta);
    let violations = counts.iter().filter(|&&k| (k as f64 - expected).abs() >= threshold).count();
    Ok(LargeDeviationReport {
        expected,
        threshold,
        violations,
        realizations: counts.len(),
        fraction: violations as f64 / counts.len() as f64,
        interval: wilson_interval(violations, counts.len(), 1.959_963_984_540_054),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigensolve::{full_spectrum, Interval};
    use crate::hamiltonian::build_laplacian;
    use crate::lattice::{Boundary, LatticeCube};
    use statrs::distribution::{Binomial, Discrete};

    #[test]
    fn free_ring_hand_values() {
        let cube = LatticeCube::new(1, 4, Boundary::Periodic).unwrap();
        let spec = full_spectrum(&build_laplacian(&cube).unwrap(), false).unwrap();
        let all = spec.count_in(Interval::new(-3.0, 3.0).unwrap());
        assert!((wegner_estimator(&[all], 6.0, 4).unwrap() - 1.0 / 6.0).abs() < 1e-15);
        let k = spec.count_in(Interval::new(-0.5, 0.5).unwrap());
        assert_eq!(k, 2);
        assert_eq!(minami_estimator(&[k], 1.0, 1, 0.0).unwrap(), 2.0);
        let gap = spec.count_in(Interval::new(2.2, 2.8).unwrap());
        assert_eq!(wegner_estimator(&[gap], 0.6, 4).unwrap(), 0.0);
        assert_eq!(minami_estimator(&[0, 1, 1], 0.6, 4, 0.5).unwrap(), 0.0);
    }

    #[test]
    fn scale_covariance() {
        let counts = [3, 5, 4];
        let a = wegner_estimator(&counts, 0.1, 100).unwrap();
        let b = wegner_estimator(&counts, 0.2, 100).unwrap();
        assert_eq!(a, 2.0 * b);
    }

    #[test]
    fn loose_threshold_and_wrong_mean() {
        let counts = vec![20usize; 50];
        let r = large_deviation_check(&counts, 0.2, 100, 0.0).unwrap();
        assert_eq!(r.threshold, 20.0);
        assert_eq!(r.fraction, 0.0);
        let r = large_deviation_check(&vec![40usize; 50], 0.2, 100, 0.5).unwrap();
        assert_eq!(r.fraction, 1.0);
        assert!(large_deviation_check(&counts, 0.05, 100, 0.5).is_err());
    }

    #[test]
    fn binomial_tail_matches() {
        // counts are exactly Binomial(100, 0.2) quantiles, laid out so the
        // empirical tail equals the binomial tail to within 1/R
        let law = Binomial::new(0.2, 100).unwrap();
        let r = 10_000usize;
        let mut counts = Vec::with_capacity(r);
        let mut cum = 0.0;
        for k in 0..=100u64 {
            cum += law.pmf(k);
            while (counts.len() as f64) < cum * r as f64 - 0.5 {
                counts.push(k as usize);
            }
        }
        let rep = large_deviation_check(&counts, 0.2, 100, 0.5).unwrap();
        let oracle: f64 = (0..=100u64)
            .filter(|&k| (k as f64 - 20.0).abs() >= rep.threshold)
            .map(|k| law.pmf(k))
            .sum();
        assert!((rep.fraction - oracle).abs() < 2e-3, "{} vs {oracle}", rep.fraction);
    }
}
