//! Integrated density of states of the free chain and of a disordered chain.

use anderson_spectra::disorder::{DisorderConfig, SiteDistribution};
use anderson_spectra::ids::{estimate_ids, estimate_ids_counting};
use anderson_spectra::lattice::Boundary;

fn main() -> anderson_spectra::error::Result<()> {
    let uniform = SiteDistribution::Uniform { lo: -1.0, hi: 1.0 };

    let free = estimate_ids(1, 400, Boundary::Periodic, &DisorderConfig::new(uniform, 0.0, 1)?, 1)?;
    println!("free chain, N(E) against 1 - arccos(E/2)/pi");
    for e in [-1.5, -1.0, 0.0, 1.0, 1.5] {
        println!("  E={e:5.2}  N={:.4}  exact={:.4}", free.evaluate(e), 1.0 - (e / 2.0f64).acos() / std::f64::consts::PI);
    }

    let disordered = DisorderConfig::new(uniform, 5.0, 2)?;
    let ids = estimate_ids_counting(1, 1000, Boundary::Periodic, &disordered, 50, 400)?;
    let h = ids.default_bandwidth();
    println!("lambda=5, counting estimator on {} grid points", ids.knots().len());
    for e in [-4.0, -2.0, 0.0, 2.0, 4.0] {
        println!("  E={e:5.2}  N={:.4}  density={:.4}", ids.evaluate(e), ids.density(e, h)?);
    }
    let window = ids.mass_window(0.0, 0.05);
    println!("central window of IDS mass 0.1: [{:.4}, {:.4}]", window.lo, window.hi);
    Ok(())
}
