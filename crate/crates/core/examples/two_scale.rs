//! Sub-cube decomposition of one chain and matching of its in-window
//! eigenvalues with those of the sub-cubes, for two buffer widths.

use anderson_spectra::disorder::{DisorderConfig, SiteDistribution};
use anderson_spectra::experiments::ensemble::two_scale_realization;
use anderson_spectra::experiments::{model_ids, resolve_window, IdsMethod, Model, WindowConfig};
use anderson_spectra::lattice::{Boundary, LatticeCube};
use anderson_spectra::two_scale::Decomposition;

fn main() -> anderson_spectra::error::Result<()> {
    let disorder = DisorderConfig::new(SiteDistribution::Uniform { lo: -1.0, hi: 1.0 }, 5.0, 8)?;
    let model = Model::new(LatticeCube::new(1, 1200, Boundary::Periodic)?, disorder)?;
    let ids = model_ids(&model, 600, 60, IdsMethod::Counting, 500, 0)?;
    let window = resolve_window(&ids, model.volume(), &WindowConfig::Count { e0: 0.0, expected: 40.0 })?;

    for buffer in [5, 10, 20] {
        let decomp = Decomposition::from_scales(1, 1200, 100, buffer)?;
        let (report, cubes) = two_scale_realization(&model, &decomp, window, 1e-6, Boundary::Periodic, 0)?;
        println!(
            "l'={buffer:>2}: {} cubes, {} eligible, matched {:.3}, median |dE| {:.1e}, max |dE| {:.1e}",
            cubes.len(),
            report.eligible(),
            report.matched_fraction(),
            report.median_delta(),
            report.max_delta()
        );
    }
    Ok(())
}
