//! The sparse window solver against dense diagonalization on one disordered
//! chain, then alone on a chain too long for the dense path.

use std::time::Instant;

use anderson_spectra::disorder::{DisorderConfig, SiteDistribution};
use anderson_spectra::eigensolve::{full_spectrum, windowed_spectrum, Interval};
use anderson_spectra::experiments::Model;
use anderson_spectra::lattice::{Boundary, LatticeCube};

fn main() -> anderson_spectra::error::Result<()> {
    let disorder = DisorderConfig::new(SiteDistribution::Uniform { lo: -1.0, hi: 1.0 }, 5.0, 11)?;
    let window = Interval::new(-0.3, 0.3)?;

    let small = Model::new(LatticeCube::new(1, 400, Boundary::Periodic)?, disorder.clone())?;
    let h = small.hamiltonian(0)?;
    let dense = full_spectrum(&h, false)?.window(window);
    let sparse = windowed_spectrum(&h, window, false, false)?;
    let err = dense.eigenvalues().iter().zip(sparse.eigenvalues()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    println!(
        "L=400: {} levels in {:?}, first global index {} / {}, max |dense - sparse| = {err:.1e}",
        sparse.len(),
        (window.lo, window.hi),
        sparse.first_index(),
        dense.first_index()
    );

    let big = Model::new(LatticeCube::new(1, 20_000, Boundary::Periodic)?, disorder)?;
    let start = Instant::now();
    let spec = windowed_spectrum(&big.hamiltonian(0)?, Interval::new(-0.05, 0.05)?, true, false)?;
    println!(
        "L=20000: {} levels with eigenvectors in {:.2} s",
        spec.len(),
        start.elapsed().as_secs_f64()
    );
    Ok(())
}
