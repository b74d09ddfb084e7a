//! Property tests of the structural identities, on seeded random fields.

use barotropic::effective::{FluidState, PressureLaw};
use barotropic::lp::{besov_value, BesovParams, DyadicFilterBank};
use barotropic::paradiff::{bony_decomposition, lame_commutator, transport_commutator};
use barotropic::rng::{random_smooth_field, SmoothFieldSpec};
use barotropic::spectral::{
    apply_multiplier, dealiased_product, inv_laplacian_mean_free, lame_operator, laplacian, transform, Direction,
    Field, Grid, ViscosityParams,
};
use num_complex::Complex64;
use proptest::prelude::*;

fn grid() -> Grid {
    Grid::periodic(2, 32).unwrap()
}

fn smooth(key: u64, components: usize) -> Field {
    random_smooth_field(&grid(), components, &SmoothFieldSpec::default(), key)
}

fn rough(values: Vec<f64>) -> Field {
    Field::from_values(&grid(), 1, values).unwrap()
}

fn config() -> ProptestConfig {
    ProptestConfig { cases: 24, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn transform_round_trip(values in prop::collection::vec(-1e3f64..1e3, 1024)) {
        let u = rough(values);
        let back = transform(&transform(&u, Direction::Forward), Direction::Inverse);
        prop_assert!(back.max_abs_diff(&u) <= 1e-12 * u.max_abs().max(1e-300));
    }

    #[test]
    fn multiplier_is_linear(k1: u64, k2: u64, a in -5.0f64..5.0, b in -5.0f64..5.0) {
        let (u, v) = (smooth(k1, 1), smooth(k2, 1));
        let sym = |k: &[f64]| Complex64::new(-(k[0] * k[0] + 3.0 * k[1] * k[1]), k[0]);
        let lhs = apply_multiplier(&u.scale(a).axpy(b, &v), sym).unwrap();
        let rhs = apply_multiplier(&u, sym).unwrap().scale(a).axpy(b, &apply_multiplier(&v, sym).unwrap());
        prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-11 * (1.0 + rhs.max_abs()));
    }

    #[test]
    fn lame_symbol_splits_along_and_across_k(k0 in -10i32..=10, k1 in -10i32..=10, mu in 0.01f64..2.0, lam in 0.0f64..2.0) {
        prop_assume!(k0 != 0 || k1 != 0);
        let g = grid();
        let visc = ViscosityParams::new(mu, lam).unwrap();
        let (kx, ky) = (f64::from(k0), f64::from(k1));
        let k2 = kx * kx + ky * ky;
        let phase = |x: &[f64]| (kx * x[0] + ky * x[1]).cos();
        let along = Field::from_fn(&g, 2, |x, c| phase(x) * if c == 0 { kx } else { ky });
        let across = Field::from_fn(&g, 2, |x, c| phase(x) * if c == 0 { -ky } else { kx });
        let la = lame_operator(&along, &visc).unwrap();
        let lc = lame_operator(&across, &visc).unwrap();
        let scale = (2.0 * mu + lam) * k2 * k2.sqrt();
        prop_assert!(la.max_abs_diff(&along.scale(-(lam + 2.0 * mu) * k2)) <= 1e-10 * scale);
        prop_assert!(lc.max_abs_diff(&across.scale(-mu * k2)) <= 1e-10 * scale);
    }

    #[test]
    fn inverse_laplacian_undoes_laplacian(key: u64) {
        let u = smooth(key, 1);
        let back = inv_laplacian_mean_free(&laplacian(&u));
        prop_assert!(back.max_abs_diff(&u.mean_free()) <= 1e-12 * u.max_abs());
    }

    #[test]
    fn blocks_reconstruct_and_are_quasi_orthogonal(values in prop::collection::vec(-1.0f64..1.0, 1024)) {
        let u = rough(values);
        let bank = DyadicFilterBank::with_default_alpha(&grid()).unwrap();
        let blocks = bank.blocks(&u);
        let mut sum = Field::zeros(&grid(), 1);
        for b in &blocks {
            sum = &sum + b;
        }
        prop_assert!(sum.max_abs_diff(&u) < 1e-10 * u.max_abs());
        for (i, l) in bank.levels().enumerate() {
            for m in bank.levels().filter(|m| (l - m).abs() >= 2) {
                prop_assert!(bank.block(&blocks[i], m).max_abs() < 1e-12 * u.max_abs());
            }
        }
    }

    #[test]
    fn besov_monotone_in_r_and_homogeneous(key: u64, s in -1.0f64..2.0, p in prop::sample::select(vec![1.0, 2.0, 4.0, f64::INFINITY]), amp in 0.01f64..100.0) {
        let u = smooth(key, 1);
        let bank = DyadicFilterBank::with_default_alpha(&grid()).unwrap();
        let b1 = besov_value(&u, BesovParams::new(s, p, 1.0).unwrap(), &bank).unwrap();
        let binf = besov_value(&u, BesovParams::new(s, p, f64::INFINITY).unwrap(), &bank).unwrap();
        prop_assert!(binf <= b1);
        let scaled = besov_value(&u.scale(amp), BesovParams::new(s, p, 1.0).unwrap(), &bank).unwrap();
        prop_assert!((scaled - amp * b1).abs() <= 1e-12 * amp * b1);
    }

    #[test]
    fn bony_pieces_sum_to_the_product(k1: u64, k2: u64) {
        let (u, v) = (smooth(k1, 1), smooth(k2, 1));
        let bank = DyadicFilterBank::with_default_alpha(&grid()).unwrap();
        let parts = bony_decomposition(&u, &v, &bank).unwrap();
        let exact = dealiased_product(&u, &v);
        prop_assert!(parts.sum().max_abs_diff(&exact) < 1e-10 * (1.0 + exact.max_abs()));
    }

    #[test]
    fn commutators_vanish_for_constant_coefficients(key: u64, c in -3.0f64..3.0, q in -1i32..4) {
        let bank = DyadicFilterBank::with_default_alpha(&grid()).unwrap();
        let a = smooth(key, 1);
        let w = smooth(key ^ 0x5555, 2);
        let v = Field::constant(&grid(), 2, c);
        prop_assert!(transport_commutator(&v, &a, q, &bank).unwrap().max_abs() < 1e-12 * (1.0 + a.max_abs()));
        let k = Field::constant(&grid(), 1, c);
        prop_assert!(lame_commutator(&k, &w, 0, q, &bank).unwrap().max_abs() < 1e-12 * (1.0 + w.max_abs()));
    }

    #[test]
    fn decoupling_and_effective_round_trip(key: u64, amp in 0.01f64..0.5, gamma in 1.0f64..2.0) {
        let bump = smooth(key, 1).mean_free();
        let rho = bump.scale(amp / bump.max_abs()).map(|x| 1.0 + x);
        let u = smooth(key.wrapping_add(1), 2);
        let visc = ViscosityParams::new(0.1, 0.05).unwrap();
        let law = PressureLaw::new(1.0, gamma, 1.0).unwrap();
        let s = FluidState::new(rho.clone(), u.clone(), visc, law).unwrap();
        let (lap, lame) = s.decoupling_residuals().unwrap();
        prop_assert!(lap < 1e-10 && lame < 1e-10, "{lap} {lame}");
        let v1 = s.to_effective().unwrap();
        let back = FluidState::from_effective(rho, &v1, visc, law).unwrap();
        prop_assert!(back.u.max_abs_diff(&u) <= 1e-14 * (1.0 + u.max_abs()));
    }
}
