//! Rescaled nearest-center distances for two disorder strengths.
//!
//! For independent centers on a ring the survival function is e^{-2s}; at
//! moderate disorder, nearby resonant sites hybridize and leave the window,
//! which thins out short distances.

use anderson_spectra::disorder::{DisorderConfig, SiteDistribution};
use anderson_spectra::experiments::ensemble::dcs_ensemble;
use anderson_spectra::experiments::{model_ids, resolve_window, IdsMethod, Model, WindowConfig};
use anderson_spectra::lattice::{Boundary, LatticeCube};
use anderson_spectra::statistics::{sup_distance, StepFunction};

fn main() -> anderson_spectra::error::Result<()> {
    for coupling in [5.0, 50.0] {
        let disorder = DisorderConfig::new(SiteDistribution::Uniform { lo: -1.0, hi: 1.0 }, coupling, 9)?;
        let model = Model::new(LatticeCube::new(1, 800, Boundary::Periodic)?, disorder)?;
        let ids = model_ids(&model, 800, 60, IdsMethod::Counting, 500, 0)?;
        let window = resolve_window(&ids, model.volume(), &WindowConfig::Count { e0: 0.0, expected: 20.0 })?;
        let pooled = StepFunction::pool(dcs_ensemble(&model, ids.mass(window), window, 80, 0)?)?;
        println!(
            "lambda={coupling}: {} distances, DCS(0.25)={:.3}, sup to e^-2s {:.3}, sup to e^-s {:.3}",
            pooled.len(),
            pooled.evaluate(0.25),
            sup_distance(&pooled, |s| (-2.0 * s).exp(), 0.0, 6.0),
            sup_distance(&pooled, |s| (-s).exp(), 0.0, 6.0),
        );
    }
    Ok(())
}
