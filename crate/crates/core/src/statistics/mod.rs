//! Empirical spectral statistics: spacing laws, local point processes,
//! Poisson and independence tests, Wegner/Minami ratios and large-deviation
//! checks.

pub mod estimators;
pub mod hypothesis;
pub mod points;
pub mod spacing;

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use estimators::{large_deviation_check, minami_estimator, wegner_estimator, LargeDeviationReport};
pub use hypothesis::{
    chi_square_sf, independence_test, poisson_count_test, poisson_pmf, wilson_interval, ChiSquareResult,
    CountRecord, IndependenceReport, PoissonTestReport,
};
pub use points::{count_in_boxes, joint_process, local_process, unfold, BoxRegion, PointSample};
pub use spacing::{counting, dcs, dls, dls_macroscopic, limit_g, unfolded_spacings, LimitTable, SpacingOptions};

/// Whether a [`StepFunction`] reports tail or cumulative fractions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepKind {
    /// `#{v >= x} / denominator`
    Survival,
    /// `#{v <= x} / denominator`
    Cdf,
}

/// Empirical survival function or CDF of a sample.
///
/// The denominator is kept separately from the sample size: spacing
/// statistics divide by the number of in-window levels, which can exceed the
/// number of spacings that could be formed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepFunction {
    values: Vec<f64>,
    denominator: f64,
    kind: StepKind,
}

impl StepFunction {
    pub fn new(mut values: Vec<f64>, denominator: f64, kind: StepKind) -> Result<Self> {
        if values.iter().any(|v| v.is_nan()) {
            return Err(Error::InvalidArgument("sample contains NaN".into()));
        }
        if !(denominator > 0.0) || (values.len() as f64) > denominator {
            return Err(Error::InvalidArgument(format!(
                "denominator {denominator} must be positive and at least the sample size {}",
                values.len()
            )));
        }
        values.sort_by(f64::total_cmp);
        Ok(StepFunction { values, denominator, kind })
    }

    pub fn survival(values: Vec<f64>) -> Result<Self> {
        let n = values.len() as f64;
        Self::new(values, n, StepKind::Survival)
    }

    pub fn cdf(values: Vec<f64>) -> Result<Self> {
        let n = values.len() as f64;
        Self::new(values, n, StepKind::Cdf)
    }

    /// Merges samples of the same kind: numerators and denominators add.
    pub fn pool<I: IntoIterator<Item = StepFunction>>(parts: I) -> Result<Self> {
        let mut values = Vec::new();
        let mut denominator = 0.0;
        let mut kind = None;
        for p in parts {
            if kind.is_some_and(|k| k != p.kind) {
                return Err(Error::InvalidArgument("cannot pool survival and CDF samples".into()));
            }
            kind = Some(p.kind);
            values.extend(p.values);
            denominator += p.denominator;
        }
        let kind = kind.ok_or_else(|| Error::InsufficientData("nothing to pool".into()))?;
        Self::new(values, denominator, kind)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn denominator(&self) -> f64 {
        self.denominator
    }

    pub fn kind(&self) -> StepKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn evaluate(&self, x: f64) -> f64 {
        let count = match self.kind {
            StepKind::Survival => self.values.len() - self.values.partition_point(|&v| v < x),
            StepKind::Cdf => self.values.partition_point(|&v| v <= x),
        };
        count as f64 / self.denominator
    }

    /// Value just to the right of `x`.
    fn right_limit(&self, x: f64) -> f64 {
        let count = match self.kind {
            StepKind::Survival => self.values.len() - self.values.partition_point(|&v| v <= x),
            StepKind::Cdf => self.values.partition_point(|&v| v <= x),
        };
        count as f64 / self.denominator
    }

    /// Value just to the left of `x`.
    fn left_limit(&self, x: f64) -> f64 {
        let count = match self.kind {
            StepKind::Survival => self.values.len() - self.values.partition_point(|&v| v < x),
            StepKind::Cdf => self.values.partition_point(|&v| v < x),
        };
        count as f64 / self.denominator
    }

    /// `(x, value)` rows on a grid.
    pub fn write_csv<W: Write>(&self, xs: &[f64], w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["x", "value"])?;
        for &x in xs {
            out.write_record([format!("{x:e}"), format!("{:e}", self.evaluate(x))])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// `sup_{x in [lo, hi]} |F(x) - f(x)|` for a step function `F` and a
/// monotone continuous reference `f`.
///
/// Between jumps `F` is constant, so the supremum is attained at a jump
/// (taking both one-sided limits) or at an end of the range.
pub fn sup_distance<F: Fn(f64) -> f64>(step: &StepFunction, reference: F, lo: f64, hi: f64) -> f64 {
    let mut worst = (step.evaluate(lo) - reference(lo)).abs().max((step.left_limit(hi) - reference(hi)).abs());
    worst = worst.max((step.right_limit(lo) - reference(lo)).abs());
    let a = step.values.partition_point(|&v| v < lo);
    let b = step.values.partition_point(|&v| v <= hi);
    let mut prev = f64::NAN;
    for &v in &step.values[a..b] {
        if v == prev {
            continue;
        }
        prev = v;
        let r = reference(v);
        worst = worst.max((step.left_limit(v) - r).abs()).max((step.right_limit(v) - r).abs());
    }
    worst
}

/// Equally spaced grid of `n` points on `[lo, hi]`.
pub fn linear_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn survival_basics() {
        let s = StepFunction::survival(vec![2.0, 1.0, 3.0, 3.0]).unwrap();
        assert_eq!(s.evaluate(0.0), 1.0);
        assert_eq!(s.evaluate(1.5), 0.75);
        assert_eq!(s.evaluate(3.0), 0.5);
        assert_eq!(s.evaluate(3.5), 0.0);
        let c = StepFunction::cdf(vec![2.0, 1.0]).unwrap();
        assert_eq!(c.evaluate(1.0), 0.5);
    }

    #[test]
    fn denominator_may_exceed_sample() {
        let s = StepFunction::new(vec![1.0], 2.0, StepKind::Survival).unwrap();
        assert_eq!(s.evaluate(0.0), 0.5);
        assert!(StepFunction::new(vec![1.0, 2.0], 1.0, StepKind::Survival).is_err());
    }

    #[test]
    fn two_point_sample_against_exponential() {
        // jumps at 1 and 2; the worst gap is just before the first jump ends
        let s = StepFunction::survival(vec![1.0, 2.0]).unwrap();
        let d = sup_distance(&s, |x| (-x).exp(), 0.0, 6.0);
        assert!((d - (1.0 - (-1.0f64).exp())).abs() < 1e-15);
    }

    #[test]
    fn identical_and_shifted() {
        // a continuous reference that follows the step except on short ramps
        // just before each jump stays within the ramp mismatch
        let s = StepFunction::cdf(vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let ramp = |x: f64| (x.floor() + ((x - x.floor() - 0.9) / 0.1).max(0.0)).clamp(0.0, 4.0) / 4.0;
        assert!(sup_distance(&s, ramp, 0.0, 5.0) <= 0.25 + 1e-12);
        // empirical CDF of the quarter points against the uniform CDF
        let q = StepFunction::cdf(vec![0.25, 0.5, 0.75, 1.0]).unwrap();
        assert!((sup_distance(&q, |x| x, 0.0, 1.0) - 0.25).abs() < 1e-15);
        // shifting a sample by t moves it at most the largest slope times t
        let shifted = StepFunction::cdf(vec![0.3, 0.55, 0.8, 1.05]).unwrap();
        let d0 = sup_distance(&q, |x| x, 0.0, 1.0);
        assert!(sup_distance(&shifted, |x| x, 0.0, 1.0) <= d0 + 0.05 + 1e-12);
    }

    #[test]
    fn pooling_adds_denominators() {
        let a = StepFunction::new(vec![1.0], 2.0, StepKind::Survival).unwrap();
        let b = StepFunction::survival(vec![3.0, 4.0]).unwrap();
        let p = StepFunction::pool([a, b]).unwrap();
        assert_eq!(p.denominator(), 4.0);
        assert_eq!(p.evaluate(2.0), 0.5);
    }
}
