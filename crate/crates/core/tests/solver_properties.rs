use anderson_spectra::disorder::{sample_potential, DisorderConfig, SiteDistribution};
use anderson_spectra::eigensolve::{counts_below, eigh, full_spectrum, windowed_spectrum, DenseMatrix, Interval};
use anderson_spectra::hamiltonian::{assemble, HamiltonianMatrix};
use anderson_spectra::lattice::{Boundary, LatticeCube};
use proptest::prelude::*;

fn symmetric(n: usize) -> impl Strategy<Value = DenseMatrix> {
    prop::collection::vec(-3.0f64..3.0, n * n).prop_map(move |raw| {
        let mut rows = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..=i {
                rows[i][j] = raw[i * n + j];
                rows[j][i] = raw[i * n + j];
            }
        }
        DenseMatrix::from_rows(&rows).unwrap()
    })
}

fn anderson(dim: usize, side: usize, boundary: Boundary, coupling: f64, seed: u64) -> HamiltonianMatrix {
    let cube = LatticeCube::new(dim, side, boundary).unwrap();
    let cfg = DisorderConfig::new(SiteDistribution::Uniform { lo: -1.0, hi: 1.0 }, coupling, seed).unwrap();
    assemble(&cube, &sample_potential(&cube, &cfg).unwrap()).unwrap()
}

/// Coefficients of det(xI - A) by Faddeev-LeVerrier, highest power first.
fn char_poly(a: &DenseMatrix) -> Vec<f64> {
    let n = a.dim();
    let rows = a.to_rows();
    let mul = |x: &Vec<Vec<f64>>, y: &Vec<Vec<f64>>| -> Vec<Vec<f64>> {
        (0..n).map(|i| (0..n).map(|j| (0..n).map(|k| x[i][k] * y[k][j]).sum()).collect()).collect()
    };
    let mut coeffs = vec![1.0];
    let mut m = vec![vec![0.0; n]; n];
    for k in 1..=n {
        for (i, row) in m.iter_mut().enumerate() {
            row[i] += coeffs[k - 1];
        }
        m = mul(&rows, &m);
        let tr: f64 = (0..n).map(|i| m[i][i]).sum();
        coeffs.push(-tr / k as f64);
    }
    coeffs
}

/// Elementary symmetric polynomials of the roots, signed like `char_poly`.
fn poly_from_roots(roots: &[f64]) -> Vec<f64> {
    let mut p = vec![1.0];
    for &r in roots {
        let mut next = p.clone();
        next.push(0.0);
        for i in 1..next.len() {
            next[i] -= r * p[i - 1];
        }
        p = next;
    }
    p
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn trace_and_frobenius(a in symmetric(12)) {
        let (values, _) = eigh(&a, false).unwrap();
        let fro = a.frobenius_sq();
        let scale = fro.sqrt().max(1.0);
        prop_assert!((values.iter().sum::<f64>() - a.trace()).abs() <= 1e-8 * scale);
        prop_assert!((values.iter().map(|e| e * e).sum::<f64>() - fro).abs() <= 1e-8 * fro.max(1.0));
        prop_assert!(values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn gram_and_residual(a in symmetric(10)) {
        let (values, vectors) = eigh(&a, true).unwrap();
        let vectors = vectors.unwrap();
        let rows = a.to_rows();
        let norm = a.frobenius_sq().sqrt().max(1.0);
        for (i, v) in vectors.iter().enumerate() {
            for (j, w) in vectors.iter().enumerate() {
                let dot: f64 = v.iter().zip(w).map(|(x, y)| x * y).sum();
                let delta = if i == j { 1.0 } else { 0.0 };
                prop_assert!((dot - delta).abs() <= 1e-8);
            }
            let res: f64 = rows
                .iter()
                .enumerate()
                .map(|(r, row)| {
                    let hv: f64 = row.iter().zip(v).map(|(x, y)| x * y).sum();
                    (hv - values[i] * v[r]).powi(2)
                })
                .sum::<f64>()
                .sqrt();
            prop_assert!(res <= 1e-8 * norm);
        }
    }

    #[test]
    fn five_by_five_characteristic_polynomial(a in symmetric(5)) {
        let (values, _) = eigh(&a, false).unwrap();
        let want = char_poly(&a);
        let got = poly_from_roots(&values);
        for (k, (w, g)) in want.iter().zip(&got).enumerate() {
            let scale = 3.0f64 * 5.0;
            prop_assert!((w - g).abs() <= 1e-8 * scale.powi(k as i32), "coefficient {}: {} vs {}", k, w, g);
        }
    }

    #[test]
    fn window_matches_scan(seed in 0u64..1000, side in 20usize..120, lo in -4.0f64..3.0, width in 0.05f64..2.0) {
        let h = anderson(1, side, Boundary::Periodic, 3.0, seed);
        let full = full_spectrum(&h, false).unwrap();
        let window = Interval::new(lo, lo + width).unwrap();
        let scan = full.eigenvalues().iter().filter(|&&e| window.contains(e)).count();
        prop_assert_eq!(full.window(window).len(), scan);
        let sparse = windowed_spectrum(&h, window, false, false).unwrap();
        prop_assert_eq!(sparse.len(), scan);
        for (a, b) in sparse.eigenvalues().iter().zip(full.window(window).eigenvalues()) {
            prop_assert!((a - b).abs() <= 1e-10);
        }
        let counts = counts_below(&h, &[lo, lo + width]);
        let below = full.eigenvalues().iter().filter(|&&e| e < lo).count();
        prop_assert_eq!(counts[0], below);
    }

    #[test]
    fn hamiltonian_invariants(seed in 0u64..1000, dim in 1usize..=3, coupling in 0.0f64..8.0) {
        let side = [30, 6, 4][dim - 1];
        let h = anderson(dim, side, Boundary::Periodic, coupling, seed);
        prop_assert_eq!(h.max_asymmetry(), 0.0);
        let diag: f64 = h.diagonal().iter().sum();
        prop_assert!((h.trace() - diag).abs() <= 1e-12 * diag.abs().max(1.0));
        for i in 0..h.dim() {
            let off: f64 = h.row(i).filter(|&(j, _)| j != i).map(|(_, v)| v).sum();
            prop_assert_eq!(off, 2.0 * dim as f64);
        }
    }
}

#[test]
fn dirichlet_rows_sum_to_at_most_2d() {
    let h = anderson(2, 5, Boundary::Dirichlet, 0.0, 1);
    let sums: Vec<f64> = (0..h.dim()).map(|i| h.row(i).map(|(_, v)| v).sum()).collect();
    assert!(sums.iter().all(|&s| s <= 4.0));
    assert_eq!(sums.iter().filter(|&&s| s == 4.0).count(), 9);
}

#[test]
fn tensor_sum_oracle_two_dimensions() {
    for boundary in [Boundary::Periodic, Boundary::Dirichlet] {
        let side = 5;
        let ring = full_spectrum(&anderson(1, side, boundary, 0.0, 0), false).unwrap();
        let mut oracle: Vec<f64> =
            ring.eigenvalues().iter().flat_map(|a| ring.eigenvalues().iter().map(move |b| a + b)).collect();
        oracle.sort_by(f64::total_cmp);
        let square = full_spectrum(&anderson(2, side, boundary, 0.0, 0), false).unwrap();
        for (a, b) in square.eigenvalues().iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-10);
        }
    }
}
