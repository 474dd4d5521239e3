//! Chi-square tests of unfolded eigenvalue counts against Poisson laws, and
//! of counts at two distant energies against independence.

use anderson_spectra::disorder::{DisorderConfig, SiteDistribution};
use anderson_spectra::experiments::ensemble::{count_ensemble, unfolded_intervals};
use anderson_spectra::experiments::{model_ids, IdsMethod, Model};
use anderson_spectra::lattice::{Boundary, LatticeCube};
use anderson_spectra::statistics::{independence_test, poisson_count_test};

fn main() -> anderson_spectra::error::Result<()> {
    let disorder = DisorderConfig::new(SiteDistribution::Uniform { lo: -1.0, hi: 1.0 }, 5.0, 21)?;
    let model = Model::new(LatticeCube::new(1, 600, Boundary::Periodic)?, disorder)?;
    let ids = model_ids(&model, 600, 100, IdsMethod::Counting, 500, 0)?;
    let v = model.volume();

    let intervals = unfolded_intervals(&ids, 0.0, v, &[[0.0, 1.0], [2.0, 3.0], [4.0, 6.0]])?;
    let records = count_ensemble(&model, &intervals, 300, 0)?;
    let report = poisson_count_test(&records, &[1.0, 1.0, 2.0])?;
    for (i, r) in report.per_interval.iter().enumerate() {
        println!("interval {i}: chi2={:.2} dof={} p={:.3}", r.statistic, r.dof, r.p_value);
    }
    for ((a, b), r) in &report.pairwise {
        println!("pair ({a},{b}): p={:.3}", r.p_value);
    }

    let e1 = ids.inverse(ids.evaluate(0.0) + 80.0 / v as f64);
    let mut far = unfolded_intervals(&ids, 0.0, v, &[[0.0, 2.0]])?;
    far.extend(unfolded_intervals(&ids, e1, v, &[[0.0, 2.0]])?);
    let records = count_ensemble(&model, &far, 300, 0)?;
    let a: Vec<u64> = records.iter().map(|r| r.counts[0] as u64).collect();
    let b: Vec<u64> = records.iter().map(|r| r.counts[1] as u64).collect();
    let ind = independence_test(&a, &b)?;
    println!("independence at E0=0 and E0'={e1:.4}: r={:.4}, p={:.3}", ind.pearson_r, ind.chi_square.p_value);
    Ok(())
}
