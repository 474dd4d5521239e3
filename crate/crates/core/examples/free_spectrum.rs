//! Spectrum of the free Laplacian on small periodic cubes, compared with the
//! closed form 2 Σ cos(2π k_i / L).

use anderson_spectra::eigensolve::full_spectrum;
use anderson_spectra::hamiltonian::build_laplacian;
use anderson_spectra::lattice::{Boundary, LatticeCube};

fn main() -> anderson_spectra::error::Result<()> {
    for (dim, side) in [(1, 4), (1, 6), (2, 4)] {
        let cube = LatticeCube::new(dim, side, Boundary::Periodic)?;
        let spec = full_spectrum(&build_laplacian(&cube)?, false)?;

        let ring: Vec<f64> =
            (0..side).map(|k| 2.0 * (2.0 * std::f64::consts::PI * k as f64 / side as f64).cos()).collect();
        let mut exact = ring.clone();
        for _ in 1..dim {
            exact = exact.iter().flat_map(|a| ring.iter().map(move |b| a + b)).collect();
        }
        exact.sort_by(f64::total_cmp);

        let err = spec.eigenvalues().iter().zip(&exact).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        println!("d={dim} L={side}: {} levels, max deviation from closed form {err:.1e}", spec.len());
        if cube.volume() <= 6 {
            println!("  {:?}", spec.eigenvalues().iter().map(|e| (e * 1e12).round() / 1e12).collect::<Vec<_>>());
        }
    }
    Ok(())
}
