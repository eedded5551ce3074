//! Randomized invariants across the crate.

use ehf::fcs::{self, Jet};
use ehf::gaussian::{self, spectral_decompose};
use ehf::hyperfine;
use ehf::lattice::{CorrelationMatrix, SiteIndex};
use ehf::linalg::{reassemble, CMatrix, C64};
use ehf::{fock, io, recon, sampling};
use proptest::prelude::*;

fn state(seed: u64, dim: usize) -> CorrelationMatrix {
    sampling::random_state(dim, &mut sampling::rng(seed)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn contour_sums_to_entropy(seed in any::<u64>(), dim in 1usize..24, n in 0.3f64..5.0, refined in any::<bool>()) {
        let sd = spectral_decompose(&state(seed, dim)).unwrap();
        let s = gaussian::entropy(&sd, n, refined).unwrap().value;
        let field = gaussian::contour(&sd, n, refined).unwrap();
        prop_assert!((field.total() - s).abs() <= 1e-10);
        prop_assert!(field.values.iter().all(|&v| v >= -1e-14));
    }

    #[test]
    fn renyi_entropies_do_not_increase_with_order(seed in any::<u64>(), dim in 1usize..20) {
        let sd = spectral_decompose(&state(seed, dim)).unwrap();
        let s: Vec<f64> = [0.5, 1.0, 2.0, 3.0, 4.0].iter().map(|&n| gaussian::entropy(&sd, n, false).unwrap().value).collect();
        for w in s.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-12);
        }
    }

    #[test]
    fn cumulant_fields_sum_to_region_cumulants(seed in any::<u64>(), dim in 1usize..20) {
        let sd = spectral_decompose(&state(seed, dim)).unwrap();
        let chi = fcs::cumulants_from_chi(&sd, 8).unwrap();
        for k in 1..=8 {
            let total: f64 = hyperfine::cumulant_density_field(&sd, k).unwrap().values.iter().sum();
            prop_assert!((total - chi[k - 1]).abs() <= 1e-10, "k = {}: {} vs {}", k, total, chi[k - 1]);
            // Per-mode bound.
            let bound = sd.len() as f64 * (0..=200).map(|i| hyperfine::kappa(k, i as f64 / 200.0).abs()).fold(0.0, f64::max);
            prop_assert!(chi[k - 1].abs() <= bound * (1.0 + 1e-9) + 1e-12);
        }
    }

    #[test]
    fn generating_function_route_matches_direct_density(seed in any::<u64>(), dim in 1usize..12, k in 1usize..9) {
        let sd = spectral_decompose(&state(seed, dim)).unwrap();
        let direct = hyperfine::cumulant_density_field(&sd, k).unwrap();
        for j in 0..dim {
            let via_g = fcs::cumulant_density_from_g(&sd, j, k).unwrap();
            prop_assert!((via_g - direct.values[j]).abs() <= 1e-9);
        }
    }

    #[test]
    fn jet_division_inverts_multiplication(re in proptest::collection::vec(-2.0f64..2.0, 7), im in proptest::collection::vec(-2.0f64..2.0, 7), g0 in 0.5f64..3.0) {
        let f = Jet { c: re.iter().zip(&im).map(|(&a, &b)| C64::new(a, b)).collect() };
        let mut g = Jet { c: im.iter().zip(&re).map(|(&a, &b)| C64::new(a, -b)).collect() };
        g.c[0] = C64::new(g0, 0.3);
        let back = (&f * &g).div(&g).unwrap();
        for (a, b) in back.c.iter().zip(&f.c) {
            prop_assert!((a - b).norm() <= 1e-12 * (1.0 + b.norm()));
        }
    }

    #[test]
    fn mirror_symmetric_states_give_mirror_symmetric_fields(seed in any::<u64>(), dim in 2usize..14, k in prop::sample::select(vec![2usize, 4, 6])) {
        let m = sampling::mirror_symmetrize(&state(seed, dim)).unwrap();
        let sd = spectral_decompose(&m).unwrap();
        let h = hyperfine::hyperfine_field(&sd, 2.0, k).unwrap();
        for j in 0..dim {
            prop_assert!((h.values[j] - h.values[dim - 1 - j]).abs() <= 1e-10);
        }
    }

    #[test]
    fn local_phases_leave_fields_unchanged(seed in any::<u64>(), dim in 1usize..12, phases in proptest::collection::vec(0.0f64..6.3, 12)) {
        let m = state(seed, dim);
        let u = CMatrix::from_fn(dim, dim, |i, j| if i == j { C64::from_polar(1.0, phases[i]) } else { C64::new(0.0, 0.0) });
        let rotated = CorrelationMatrix::chain_dense(&u * m.to_dense() * u.adjoint(), "rotated").unwrap();
        let a = spectral_decompose(&m).unwrap();
        let b = spectral_decompose(&rotated).unwrap();
        for n in [1.0, 2.0] {
            let (fa, fb) = (gaussian::contour(&a, n, false).unwrap(), gaussian::contour(&b, n, false).unwrap());
            for (x, y) in fa.values.iter().zip(&fb.values) {
                prop_assert!((x - y).abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn general_local_unitary_preserves_the_block_sum(seed in any::<u64>(), dim in 2usize..12, block in 1usize..6) {
        let block = block.min(dim);
        let mut rng = sampling::rng(seed ^ 0x5eed);
        let m = state(seed, dim);
        let mut u = CMatrix::identity(dim, dim);
        u.view_mut((0, 0), (block, block)).copy_from(&sampling::random_unitary(block, &mut rng));
        let rotated = CorrelationMatrix::chain_dense(&u * m.to_dense() * u.adjoint(), "rotated").unwrap();
        let fa = gaussian::contour(&spectral_decompose(&m).unwrap(), 1.0, false).unwrap();
        let fb = gaussian::contour(&spectral_decompose(&rotated).unwrap(), 1.0, false).unwrap();
        let positions: Vec<usize> = (0..block).collect();
        prop_assert!((fa.sum_over(&positions) - fb.sum_over(&positions)).abs() <= 1e-10);
    }

    #[test]
    fn spectrum_round_trip(xi in proptest::collection::vec(0.05f64..0.95, 1..=4)) {
        let u = sampling::random_unitary(xi.len(), &mut sampling::rng(xi.len() as u64));
        let m = CorrelationMatrix::chain_dense(reassemble(&xi, &u), "planted").unwrap();
        let sd = spectral_decompose(&m).unwrap();
        let t = recon::traces_from_spectrum(&sd, recon::MAX_DIMENSION).unwrap();
        let r = recon::reconstruct_spectrum(&t).unwrap();
        let want = fock::product_spectrum(&sd.xi);
        prop_assert_eq!(r.roots.len(), want.len());
        for (a, b) in r.roots.iter().zip(&want) {
            prop_assert!((a - b).abs() <= 1e-6, "{} vs {}", a, b);
        }
        prop_assert!((r.roots.iter().sum::<f64>() - 1.0).abs() <= 1e-8);
    }

    #[test]
    fn traces_match_renyi_entropies(seed in any::<u64>(), dim in 1usize..=6) {
        let sd = spectral_decompose(&state(seed, dim)).unwrap();
        let t = recon::traces_from_spectrum(&sd, 8).unwrap();
        for n in 2..=t.dimension() {
            let s = gaussian::entropy(&sd, n as f64, false).unwrap();
            prop_assert!((t.values[n - 1] - s.trace.unwrap()).abs() <= 1e-12);
        }
    }

    #[test]
    fn field_csv_round_trips_exactly(values in proptest::collection::vec(-1e3f64..1e3, 1..30), n in 0.5f64..4.0) {
        let f = gaussian::ContourField {
            sites: (0..values.len()).map(SiteIndex::chain).collect(),
            values: values.clone(),
            n: Some(n),
            kind: gaussian::FieldKind::Renyi,
        };
        let rows = io::parse_field_csv(&io::field_csv(&f)).unwrap();
        prop_assert_eq!(rows.len(), values.len());
        for (r, v) in rows.iter().zip(&values) {
            prop_assert_eq!(r.value, *v);
            prop_assert_eq!(r.n, Some(n));
        }
    }
}
