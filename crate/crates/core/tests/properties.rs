use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use analyticity_lab::diagnostics::{lemma_leibniz_check, radius_estimate, shift_recurrence_check, PolynomialInT};
use analyticity_lab::extension::{extend_flux, extend_solution, parity_defect, restrict, BoundaryMode};
use analyticity_lab::kernels::{eval_query, KernelId, KernelQuery, QuadratureSpec};
use analyticity_lab::mild::{chebyshev_nodes, graded_nodes, merge_nodes};
use analyticity_lab::numerics::io::{field_from_str, field_to_string};
use analyticity_lab::numerics::{Field, Grid};

fn half_grid(nx: usize, ny: usize) -> Grid {
    Grid::new(2, vec![nx, ny], vec![-1.0, 0.0], 0.2, true).unwrap()
}

fn mode() -> impl Strategy<Value = BoundaryMode> {
    prop_oneof![Just(BoundaryMode::Dirichlet), Just(BoundaryMode::Conormal)]
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn field_text_round_trip_is_exact(nx in 4usize..9, ny in 4usize..9, comps in prop::sample::select(vec![1usize, 2, 4]), seed in any::<u64>()) {
        let g = half_grid(nx, ny);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values: Vec<f64> = (0..g.len() * comps).map(|_| rand::Rng::gen_range(&mut rng, -1e6..1e6)).collect();
        let f = Field::new(g, comps, values).unwrap();
        prop_assert_eq!(field_from_str(&field_to_string(&f)).unwrap(), f);
    }

    #[test]
    fn extension_restricts_back_with_parity(nx in 4usize..10, ny in 4usize..10, a in -2.0f64..2.0, b in -2.0f64..2.0, m in mode()) {
        let g = half_grid(nx, ny);
        let u = match m {
            BoundaryMode::Dirichlet => Field::scalar_from_fn(&g, |x| x[1] * (a + b * x[0] + x[1] * x[1])),
            BoundaryMode::Conormal => Field::scalar_from_fn(&g, |x| a + b * x[0] * x[0] + x[1]),
        };
        let e = extend_solution(&u, m, Some(f64::INFINITY)).unwrap();
        let sign = if m == BoundaryMode::Dirichlet { -1.0 } else { 1.0 };
        prop_assert_eq!(parity_defect(&e, 0, sign), 0.0);
        prop_assert_eq!(restrict(&e, &g).unwrap(), u);
    }

    #[test]
    fn flux_normal_component_has_opposite_parity(nx in 4usize..8, ny in 4usize..8, a in -2.0f64..2.0, m in mode()) {
        let g = half_grid(nx, ny);
        let f = Field::from_fn(&g, 2, |x, out| {
            out[0] = a + x[0];
            out[1] = x[1] * (1.0 + a * x[0]);
        });
        let e = extend_flux(&f, m).unwrap();
        let s = if m == BoundaryMode::Dirichlet { -1.0 } else { 1.0 };
        prop_assert_eq!(parity_defect(&e, 0, s), 0.0);
        prop_assert_eq!(parity_defect(&e, 1, -s), 0.0);
    }

    #[test]
    fn exact_identities_hold(seed in any::<u64>(), j in 1usize..9, k in 1usize..9) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = PolynomialInT::random(&mut rng, 8);
        let g = PolynomialInT::random(&mut rng, 8);
        prop_assert!(lemma_leibniz_check(&f, &g, k).unwrap());
        prop_assert!(shift_recurrence_check(&f, j, k).unwrap());
    }

    #[test]
    fn radius_of_geometric_ladder(delta in 0.05f64..5.0) {
        let mut fact = 1.0;
        let d: Vec<f64> = (0..14).map(|k| {
            if k > 0 { fact *= k as f64; }
            fact / delta.powi(k)
        }).collect();
        let r = radius_estimate(&d, 1e3).unwrap();
        prop_assert!((r.delta - delta).abs() < 1e-9 * delta, "{} vs {}", r.delta, delta);
        prop_assert!(!r.capped);
    }

    #[test]
    fn heat_kernel_is_symmetric_and_positive(t in 0.01f64..10.0, x in prop::array::uniform2(-2.0f64..2.0), y in prop::array::uniform2(-2.0f64..2.0)) {
        let q = |a: [f64; 2], b: [f64; 2]| KernelQuery { kernel: KernelId::Gamma, indices: [0, 0, 0], t: Some(t), x: a.to_vec(), y: b.to_vec(), sign: None, deriv: 0 };
        let spec = QuadratureSpec::default();
        let v = eval_query(&q(x, y), &spec).unwrap();
        prop_assert!(v > 0.0);
        prop_assert_eq!(v, eval_query(&q(y, x), &spec).unwrap());
        let r2 = (x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2);
        let exact = (-r2 / (4.0 * t)).exp() / (4.0 * std::f64::consts::PI * t);
        prop_assert!((v - exact).abs() <= 1e-13 * exact.max(1e-300));
    }

    #[test]
    fn time_nodes_are_sorted_and_anchored(t in 0.05f64..2.0, m in 2usize..30, c in 3usize..40) {
        let g = graded_nodes(t, m);
        let w = chebyshev_nodes(0.25 * t, t, c);
        prop_assert_eq!(g[0], 0.0);
        prop_assert!((g[g.len() - 1] - t).abs() < 1e-15 * t);
        prop_assert_eq!(w.len(), c);
        prop_assert!((w[0] - 0.25 * t).abs() < 1e-15 && (w[c - 1] - t).abs() < 1e-15);
        let all = merge_nodes(&[&g, &w]);
        prop_assert!(all.windows(2).all(|p| p[0] < p[1]));
        prop_assert!(all.len() <= g.len() + w.len());
    }
}
