//! Localization centers and decay fits of the eigenvectors near band center.

use anderson_spectra::disorder::{DisorderConfig, SiteDistribution};
use anderson_spectra::eigensolve::{windowed_spectrum, Interval};
use anderson_spectra::experiments::Model;
use anderson_spectra::lattice::{Boundary, LatticeCube};
use anderson_spectra::localization::center_records;

fn main() -> anderson_spectra::error::Result<()> {
    let disorder = DisorderConfig::new(SiteDistribution::Uniform { lo: -1.0, hi: 1.0 }, 3.0, 5)?;
    let model = Model::new(LatticeCube::new(1, 600, Boundary::Periodic)?, disorder)?;
    let spec = windowed_spectrum(&model.hamiltonian(0)?, Interval::new(-0.2, 0.2)?, true, false)?;

    println!("{:>6} {:>10} {:>7} {:>8} {:>8}", "index", "energy", "center", "gamma", "resid");
    for rec in center_records(&spec, Some(1.0))? {
        let fit = rec.decay.expect("decay fit requested");
        println!(
            "{:>6} {:>10.5} {:>7} {:>8.3} {:>8.3}",
            rec.index, rec.energy, rec.center, fit.gamma, fit.residual
        );
    }
    Ok(())
}
