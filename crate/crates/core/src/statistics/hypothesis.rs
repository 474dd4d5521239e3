//! Chi-square tests of Poisson count laws and of independence.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF, Discrete, DiscreteCDF, Poisson};

use crate::eigensolve::Interval;
use crate::error::{Error, Result};

/// Smallest ensemble accepted by [`poisson_count_test`].
pub const MIN_ENSEMBLE: usize = 50;

/// Smallest expected count per chi-square cell.
pub const MIN_EXPECTED: f64 = 5.0;

/// Eigenvalue counts of one realization in a fixed list of intervals.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountRecord {
    pub realization: u64,
    pub counts: Vec<usize>,
}

/// Checks that the intervals are pairwise disjoint (closed intervals that
/// share an endpoint count as overlapping).
pub fn check_disjoint(intervals: &[Interval]) -> Result<()> {
    let mut sorted: Vec<&Interval> = intervals.iter().collect();
    sorted.sort_by(|a, b| a.lo.total_cmp(&b.lo));
    for w in sorted.windows(2) {
        if w[1].lo <= w[0].hi {
            return Err(Error::InvalidArgument(format!(
                "intervals [{}, {}] and [{}, {}] overlap",
                w[0].lo, w[0].hi, w[1].lo, w[1].hi
            )));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChiSquareResult {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    /// Number of cells after pooling.
    pub cells: usize,
}

impl ChiSquareResult {
    fn from_cells(observed: &[f64], expected: &[f64], dof: usize) -> Self {
        let statistic: f64 = observed.iter().zip(expected).map(|(o, e)| (o - e) * (o - e) / e).sum();
        ChiSquareResult { statistic, dof, p_value: chi_square_sf(statistic, dof), cells: observed.len() }
    }
}

/// Upper tail `P(χ²_dof ≥ x)`; one when there are no degrees of freedom.
pub fn chi_square_sf(x: f64, dof: usize) -> f64 {
    if dof == 0 {
        return 1.0;
    }
    ChiSquared::new(dof as f64).map(|c| c.sf(x)).unwrap_or(f64::NAN)
}

pub fn poisson_pmf(mean: f64, k: u64) -> f64 {
    if mean == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    Poisson::new(mean).map(|p| p.pmf(k)).unwrap_or(f64::NAN)
}

/// A run of counts `lo..=hi` (`hi = None` for an open tail) with its
/// probability.
#[derive(Debug, Clone, Copy)]
struct Bin {
    lo: u64,
    hi: Option<u64>,
    prob: f64,
}

impl Bin {
    fn contains(&self, k: u64) -> bool {
        k >= self.lo && self.hi.is_none_or(|h| k <= h)
    }
}

/// Bins of the Poisson law pooled from the left so that each has
/// `n p ≥ MIN_EXPECTED`; the last bin is an open tail.
fn poisson_bins(mean: f64, n: f64) -> Vec<Bin> {
    let law = Poisson::new(mean.max(f64::MIN_POSITIVE)).expect("positive mean");
    let mut bins = Vec::new();
    let mut start = 0u64;
    let mut acc = 0.0;
    let mut k = 0u64;
    loop {
        acc += law.pmf(k);
        let tail = law.sf(k);
        if n * tail < MIN_EXPECTED {
            bins.push(Bin { lo: start, hi: None, prob: acc + tail });
            break;
        }
        if n * acc >= MIN_EXPECTED {
            bins.push(Bin { lo: start, hi: Some(k), prob: acc });
            start = k + 1;
            acc = 0.0;
        }
        k += 1;
    }
    // the open tail may still be thin when the loop stops right after a close
    if bins.len() > 1 && n * bins.last().unwrap().prob < MIN_EXPECTED {
        let last = bins.pop().unwrap();
        let prev = bins.last_mut().unwrap();
        prev.hi = None;
        prev.prob += last.prob;
    }
    bins
}

/// Empirical bins: one per observed value, pooled with neighbours until
/// every bin holds at least `min_count` observations.
fn empirical_bins(values: &[u64], min_count: f64) -> Vec<Bin> {
    let n = values.len() as f64;
    let mut sorted = values.to_vec();
    sorted.sort_unstable();
    let mut bins: Vec<Bin> = Vec::new();
    for &v in &sorted {
        match bins.last_mut() {
            Some(b) if b.hi == Some(v) => b.prob += 1.0 / n,
            _ => bins.push(Bin { lo: v, hi: Some(v), prob: 1.0 / n }),
        }
    }
    while bins.len() > 1 {
        let (i, b) = bins.iter().enumerate().min_by(|a, b| a.1.prob.total_cmp(&b.1.prob)).unwrap();
        if b.prob * n >= min_count {
            break;
        }
        merge_with_neighbour(&mut bins, i);
    }
    // make the bins cover every integer so lookups never miss
    if let Some(first) = bins.first_mut() {
        first.lo = 0;
    }
    for i in 1..bins.len() {
        bins[i].lo = bins[i - 1].hi.unwrap() + 1;
    }
    if let Some(last) = bins.last_mut() {
        last.hi = None;
    }
    bins
}

/// Merges bin `i` into its lighter neighbour.
fn merge_with_neighbour(bins: &mut Vec<Bin>, i: usize) {
    let j = if i == 0 {
        1
    } else if i + 1 == bins.len() || bins[i - 1].prob <= bins[i + 1].prob {
        i - 1
    } else {
        i + 1
    };
    let (a, b) = (i.min(j), i.max(j));
    let right = bins.remove(b);
    bins[a].hi = right.hi;
    bins[a].prob += right.prob;
}

fn bin_of(bins: &[Bin], k: u64) -> usize {
    bins.iter().position(|b| b.contains(k)).expect("bins cover all counts")
}

/// Pools rows and columns of a product table until every cell expects at
/// least `MIN_EXPECTED` observations.
fn pool_product(mut rows: Vec<Bin>, mut cols: Vec<Bin>, n: f64) -> (Vec<Bin>, Vec<Bin>) {
    loop {
        let rmin = rows.iter().enumerate().min_by(|a, b| a.1.prob.total_cmp(&b.1.prob)).unwrap();
        let cmin = cols.iter().enumerate().min_by(|a, b| a.1.prob.total_cmp(&b.1.prob)).unwrap();
        if n * rmin.1.prob * cmin.1.prob >= MIN_EXPECTED {
            break;
        }
        let (ri, ci) = (rmin.0, cmin.0);
        // shrink the axis whose smallest bin is lighter, if it can shrink
        if (rmin.1.prob <= cmin.1.prob && rows.len() > 1) || cols.len() == 1 {
            if rows.len() == 1 {
                break;
            }
            merge_with_neighbour(&mut rows, ri);
        } else {
            merge_with_neighbour(&mut cols, ci);
        }
    }
    (rows, cols)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoissonTestReport {
    pub ensemble_size: usize,
    /// Goodness of fit of each interval's counts to Poisson(|I_n|).
    pub per_interval: Vec<ChiSquareResult>,
    /// For each pair of intervals, a test of the joint counts against the
    /// product of the two Poisson laws.
    pub pairwise: Vec<((usize, usize), ChiSquareResult)>,
}

impl PoissonTestReport {
    pub fn min_p_value(&self) -> f64 {
        self.per_interval.iter().map(|r| r.p_value).fold(f64::INFINITY, f64::min)
    }
}

/// Chi-square tests of the counts in `records` against independent Poisson
/// laws with means `lengths`.
pub fn poisson_count_test(records: &[CountRecord], lengths: &[f64]) -> Result<PoissonTestReport> {
    if records.len() < MIN_ENSEMBLE {
        return Err(Error::InsufficientData(format!(
            "{} realizations; at least {MIN_ENSEMBLE} are needed",
            records.len()
        )));
    }
    if lengths.iter().any(|&l| !(l > 0.0)) {
        return Err(Error::InvalidArgument("interval lengths must be positive".into()));
    }
    if records.iter().any(|r| r.counts.len() != lengths.len()) {
        return Err(Error::InvalidArgument("every record needs one count per interval".into()));
    }
    let n = records.len() as f64;
    let column = |i: usize| records.iter().map(move |r| r.counts[i] as u64);
    let bins: Vec<Vec<Bin>> = lengths.iter().map(|&m| poisson_bins(m, n)).collect();

    let per_interval = (0..lengths.len())
        .map(|i| {
            let mut observed = vec![0.0; bins[i].len()];
            for k in column(i) {
                observed[bin_of(&bins[i], k)] += 1.0;
            }
            let expected: Vec<f64> = bins[i].iter().map(|b| n * b.prob).collect();
            ChiSquareResult::from_cells(&observed, &expected, bins[i].len() - 1)
        })
        .collect();

    let mut pairwise = Vec::new();
    for i in 0..lengths.len() {
        for j in i + 1..lengths.len() {
            let (rows, cols) = pool_product(bins[i].clone(), bins[j].clone(), n);
            let mut observed = vec![0.0; rows.len() * cols.len()];
            for (a, b) in column(i).zip(column(j)) {
                observed[bin_of(&rows, a) * cols.len() + bin_of(&cols, b)] += 1.0;
            }
            let expected: Vec<f64> =
                rows.iter().flat_map(|r| cols.iter().map(move |c| n * r.prob * c.prob)).collect();
            let dof = observed.len() - 1;
            pairwise.push(((i, j), ChiSquareResult::from_cells(&observed, &expected, dof)));
        }
    }
    Ok(PoissonTestReport { ensemble_size: records.len(), per_interval, pairwise })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndependenceReport {
    /// Pearson correlation; NaN when either sample is constant.
    pub pearson_r: f64,
    /// Contingency test against the product of the empirical marginals.
    pub chi_square: ChiSquareResult,
}

/// Correlation and contingency chi-square of paired counts.
pub fn independence_test(a: &[u64], b: &[u64]) -> Result<IndependenceReport> {
    if a.len() != b.len() || a.len() < 2 {
        return Err(Error::InvalidArgument("need two equally long samples of size at least 2".into()));
    }
    let n = a.len() as f64;
    let ma = a.iter().sum::<u64>() as f64 / n;
    let mb = b.iter().sum::<u64>() as f64 / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (&x, &y) in a.iter().zip(b) {
        let (dx, dy) = (x as f64 - ma, y as f64 - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    let pearson_r = if saa > 0.0 && sbb > 0.0 { sab / (saa * sbb).sqrt() } else { f64::NAN };

    let (rows, cols) = pool_product(empirical_bins(a, MIN_EXPECTED), empirical_bins(b, MIN_EXPECTED), n);
    let mut observed = vec![0.0; rows.len() * cols.len()];
    for (&x, &y) in a.iter().zip(b) {
        observed[bin_of(&rows, x) * cols.len() + bin_of(&cols, y)] += 1.0;
    }
    let expected: Vec<f64> = rows.iter().flat_map(|r| cols.iter().map(move |c| n * r.prob * c.prob)).collect();
    let dof = (rows.len() - 1) * (cols.len() - 1);
    Ok(IndependenceReport { pearson_r, chi_square: ChiSquareResult::from_cells(&observed, &expected, dof) })
}

/// Wilson score interval for a binomial proportion at normal quantile `z`.
pub fn wilson_interval(successes: usize, trials: usize, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let centre = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
    let half = z / (1.0 + z2 / n) * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((centre - half).max(0.0), (centre + half).min(1.0))
}
