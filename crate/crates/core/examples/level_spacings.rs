//! Pooled unfolded level spacings in a small window, against e^{-x}.

use anderson_spectra::disorder::{DisorderConfig, SiteDistribution};
use anderson_spectra::experiments::ensemble::spacing_ensemble;
use anderson_spectra::experiments::{model_ids, resolve_window, IdsMethod, Model, WindowConfig};
use anderson_spectra::lattice::{Boundary, LatticeCube};
use anderson_spectra::statistics::{linear_grid, sup_distance, SpacingOptions, StepFunction};

fn main() -> anderson_spectra::error::Result<()> {
    let disorder = DisorderConfig::new(SiteDistribution::Uniform { lo: -1.0, hi: 1.0 }, 5.0, 3)?;
    let model = Model::new(LatticeCube::new(1, 500, Boundary::Periodic)?, disorder)?;
    let ids = model_ids(&model, 500, 100, IdsMethod::Counting, 500, 0)?;
    let window = resolve_window(&ids, model.volume(), &WindowConfig::Count { e0: 0.0, expected: 50.0 })?;

    let parts = spacing_ensemble(&model, &ids, window, 40, 0, SpacingOptions::default())?;
    let pooled = StepFunction::pool(parts)?;
    println!("{} spacings in [{:.4}, {:.4}]", pooled.len(), window.lo, window.hi);
    for x in linear_grid(0.0, 3.0, 7) {
        println!("  x={x:.1}  DLS={:.4}  e^-x={:.4}", pooled.evaluate(x), (-x).exp());
    }
    println!("sup distance on [0, 6]: {:.4}", sup_distance(&pooled, |x| (-x).exp(), 0.0, 6.0));
    Ok(())
}
