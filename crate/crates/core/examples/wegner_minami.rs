//! Wegner and Minami ratios on shrinking windows at band center, and the
//! large-deviation check of window counts.

use anderson_spectra::disorder::{DisorderConfig, SiteDistribution};
use anderson_spectra::eigensolve::Interval;
use anderson_spectra::experiments::ensemble::count_ensemble;
use anderson_spectra::experiments::{model_ids, resolve_window, IdsMethod, Model, WindowConfig};
use anderson_spectra::lattice::{Boundary, LatticeCube};
use anderson_spectra::statistics::{large_deviation_check, minami_estimator, wegner_estimator};

fn main() -> anderson_spectra::error::Result<()> {
    let disorder = DisorderConfig::new(SiteDistribution::Uniform { lo: -1.0, hi: 1.0 }, 5.0, 4)?;
    let model = Model::new(LatticeCube::new(1, 800, Boundary::Periodic)?, disorder)?;
    let v = model.volume();
    let ids = model_ids(&model, 800, 100, IdsMethod::Counting, 500, 0)?;

    let widths = [0.4, 0.2, 0.1, 0.05];
    let windows: Vec<Interval> = widths.iter().map(|w| Interval::around(0.0, w / 2.0)).collect::<Result<_, _>>()?;
    let records = count_ensemble(&model, &windows, 200, 0)?;
    println!("{:>6} {:>8} {:>8} {:>8}", "|J|", "wegner", "minami", "nu");
    for (i, (&w, j)) in widths.iter().zip(&windows).enumerate() {
        let counts: Vec<usize> = records.iter().map(|r| r.counts[i]).collect();
        println!(
            "{w:>6} {:>8.4} {:>8.4} {:>8.4}",
            wegner_estimator(&counts, w, v)?,
            minami_estimator(&counts, w, v, 1.0)?,
            ids.mass(*j) / w
        );
    }

    let window = resolve_window(&ids, v, &WindowConfig::Count { e0: 0.0, expected: 80.0 })?;
    let counts: Vec<usize> = count_ensemble(&model, &[window], 200, 0)?.iter().map(|r| r.counts[0]).collect();
    let ldp = large_deviation_check(&counts, ids.mass(window), v, 0.3)?;
    println!(
        "counts below {:.1} (expected {:.1}): {} of {}",
        ldp.threshold, ldp.expected, ldp.violations, ldp.realizations
    );
    Ok(())
}
