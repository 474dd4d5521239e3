use anderson_spectra::disorder::{sample_potential, DisorderConfig, SiteDistribution};
use anderson_spectra::lattice::{Boundary, LatticeCube};
use proptest::prelude::*;

fn distribution() -> impl Strategy<Value = SiteDistribution> {
    prop_oneof![
        (-3.0f64..0.0, 0.1f64..3.0).prop_map(|(lo, w)| SiteDistribution::Uniform { lo, hi: lo + w }),
        (-1.0f64..1.0, 0.1f64..2.0).prop_map(|(center, halfwidth)| SiteDistribution::SmoothBump { center, halfwidth }),
    ]
}

proptest! {
    #[test]
    fn index_map_is_a_row_major_bijection(dim in 1usize..=3, side in 3usize..9) {
        let cube = LatticeCube::new(dim, side, Boundary::Periodic).unwrap();
        let mut prev: Option<Vec<usize>> = None;
        for i in 0..cube.volume() {
            let c = cube.coords(i);
            prop_assert_eq!(cube.index(&c), i);
            if let Some(p) = prev {
                prop_assert!(p < c);
            }
            prev = Some(c);
        }
        prop_assert_eq!(cube.volume(), side.pow(dim as u32));
    }

    #[test]
    fn potential_is_reproducible_and_in_support(dist in distribution(), coupling in 0.0f64..10.0, seed: u64, r in 0u64..1000) {
        let cube = LatticeCube::new(2, 7, Boundary::Periodic).unwrap();
        let cfg = DisorderConfig::new(dist, coupling, seed).unwrap().realization(r);
        let a = sample_potential(&cube, &cfg).unwrap();
        let b = sample_potential(&cube, &cfg).unwrap();
        prop_assert_eq!(
            a.values().iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
            b.values().iter().map(|v| v.to_bits()).collect::<Vec<_>>()
        );
        let (lo, hi) = cfg.scaled_support();
        prop_assert!(a.values().iter().all(|&v| lo <= v && v <= hi));
    }
}

#[test]
fn small_periodic_cubes_are_rejected() {
    assert!(LatticeCube::new(1, 2, Boundary::Periodic).is_err());
    assert!(LatticeCube::new(2, 3, Boundary::Periodic).is_ok());
}
