use isrp_core::data::{Series, TrajectoryMatrix};
use isrp_core::fit::{aic, nls_fit, Curve, FitProblem};
use isrp_core::isrp::{delta_variance, grad_k, grad_r, isrp_k, isrp_r, MeanTriplet};
use isrp_core::models::{self, ModelId, Parent};
use isrp_core::select::{moving_average, RateForm};
use isrp_core::sim::{cholesky_lower, koopman_matrix, KoopmanCov};
use isrp_core::{ParameterSet, TimeGrid};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn spd(q: usize, seed: &[f64]) -> DMatrix<f64> {
    let a = DMatrix::from_fn(q, q, |i, j| seed[(i * q + j) % seed.len()]);
    &a * a.transpose() + DMatrix::identity(q, q) * 0.1
}

fn logistic_window(r: f64, k: f64, x0: f64, t: f64, h: f64) -> [f64; 3] {
    let m = ModelId::constant(Parent::Logistic);
    let p = ParameterSet::logistic(r, k, x0);
    [0.0, 1.0, 2.0].map(|i| models::size(m, &p, t + i * h).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn delta_variance_is_even_and_homogeneous(
        g in prop::collection::vec(-10.0f64..10.0, 3),
        seed in prop::collection::vec(-1.0f64..1.0, 9),
        scale in 0.01f64..100.0,
        n in 1usize..5000,
    ) {
        let sigma = spd(3, &seed);
        let v = delta_variance(&g, &sigma, n).unwrap();
        let neg: Vec<f64> = g.iter().map(|x| -x).collect();
        prop_assert!(v >= 0.0);
        prop_assert!((delta_variance(&neg, &sigma, n).unwrap() - v).abs() <= 1e-12 * v.max(1e-300));
        let scaled = delta_variance(&g, &(sigma.clone() * scale), n).unwrap();
        prop_assert!((scaled - scale * v).abs() <= 1e-10 * (scale * v).max(1e-300));
        let twice = delta_variance(&g, &sigma, 2 * n).unwrap();
        prop_assert!((2.0 * twice - v).abs() <= 1e-12 * v.max(1e-300));
    }

    #[test]
    fn logistic_isrp_recovers_rate_and_capacity(
        r in 0.05f64..1.0,
        k in 20.0f64..500.0,
        frac in 0.02f64..0.6,
        t in 0.0f64..4.0,
        h in 0.2f64..1.5,
    ) {
        let x0 = frac * k;
        let mu = logistic_window(r, k, x0, t, h);
        let rh = isrp_r(Parent::Logistic, &mu, 0, h, 1.0).unwrap();
        prop_assert!((rh - r).abs() < 1e-7);
        let kh = isrp_k(Parent::Logistic, &mu, x0, 0, h, t, 1.0).unwrap();
        prop_assert!((kh - k).abs() / k < 1e-6);
    }

    #[test]
    fn rate_gradient_matches_differences(
        r in 0.05f64..1.0,
        k in 20.0f64..500.0,
        frac in 0.02f64..0.6,
        t in 0.0f64..4.0,
        h in 0.2f64..1.5,
    ) {
        let mu = logistic_window(r, k, frac * k, t, h);
        let g = grad_r(Parent::Logistic, &mu, h, 1.0).unwrap();
        for i in 0..3 {
            let step = 1e-6 * mu[i];
            let mut up = mu;
            let mut dn = mu;
            up[i] += step;
            dn[i] -= step;
            let fd = (isrp_r(Parent::Logistic, &up, 0, h, 1.0).unwrap()
                - isrp_r(Parent::Logistic, &dn, 0, h, 1.0).unwrap()) / (2.0 * step);
            let scale = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            prop_assert!((fd - g[i]).abs() <= 1e-4 * scale, "{i}: {fd} vs {}", g[i]);
        }
    }

    #[test]
    fn capacity_increases_along_its_gradient(
        r in 0.05f64..1.0,
        k in 20.0f64..500.0,
        frac in 0.05f64..0.5,
        t in 0.0f64..3.0,
        h in 0.3f64..1.0,
    ) {
        let x0 = frac * k;
        let mu = logistic_window(r, k, x0, t, h);
        let g = grad_k(Parent::Logistic, &MeanTriplet::new(mu, t, h), x0, 1.0).unwrap();
        let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        let eps = 1e-7 * mu[0] / norm.max(1e-12);
        let shifted: Vec<f64> = mu.iter().zip(&g).map(|(m, d)| m + eps * d).collect();
        let k1 = isrp_k(Parent::Logistic, &shifted, x0, 0, h, t, 1.0).unwrap();
        let k0 = isrp_k(Parent::Logistic, &mu, x0, 0, h, t, 1.0).unwrap();
        prop_assert!(k1 >= k0);
    }

    #[test]
    fn moving_average_commutes_with_affine_maps(
        y in prop::collection::vec(-100.0f64..100.0, 5..40),
        half in 0usize..4,
        a in -5.0f64..5.0,
        b in -50.0f64..50.0,
    ) {
        let window = 2 * half + 1;
        prop_assume!(window <= y.len());
        let t: Vec<f64> = (0..y.len()).map(|i| i as f64).collect();
        let s = Series::new(t.clone(), y.clone()).unwrap();
        let mapped = Series::new(t, y.iter().map(|v| a * v + b).collect()).unwrap();
        let lhs = moving_average(&mapped, window).unwrap();
        let rhs = moving_average(&s, window).unwrap();
        prop_assert_eq!(lhs.len(), y.len() - window + 1);
        for (l, r) in lhs.y.iter().zip(&rhs.y) {
            prop_assert!((l - (a * r + b)).abs() <= 1e-9 * (1.0 + l.abs()));
        }
    }

    #[test]
    fn aic_orders_like_rss_for_equal_k(
        r1 in 1e-6f64..1e6,
        r2 in 1e-6f64..1e6,
        m in 3usize..200,
        k in 0usize..3,
    ) {
        let a1 = aic(r1, m, k).unwrap();
        let a2 = aic(r2, m, k).unwrap();
        prop_assert_eq!(r1 < r2, a1 < a2);
    }

    #[test]
    fn koopman_matrix_is_positive_definite(
        sigma2 in 1e-6f64..10.0,
        rho in -0.95f64..0.95,
        q in 1usize..25,
    ) {
        let m = koopman_matrix(&KoopmanCov::new(sigma2, rho).unwrap(), q).unwrap();
        let l = cholesky_lower(&m).unwrap();
        let back = &l * l.transpose();
        prop_assert!((back - m).abs().max() <= 1e-12 * sigma2);
    }

    #[test]
    fn closed_forms_start_at_x0(idx in 0usize..64, x0 in 1.0f64..20.0) {
        let rows: Vec<_> = models::catalog().iter().filter(|e| e.has_closed_form).collect();
        let entry = rows[idx % rows.len()];
        let p = ParameterSet { x0, ..models::reference_params(entry.id) };
        prop_assume!(models::validate(entry.id, &p).is_ok());
        let v = models::size(entry.id, &p, 0.0).unwrap();
        prop_assert!((v - x0).abs() <= 1e-12 * x0);
    }

    #[test]
    fn logistic_solution_is_monotone_and_bounded(
        r in 0.01f64..2.0,
        k in 10.0f64..1000.0,
        frac in 0.01f64..0.99,
    ) {
        let m = ModelId::constant(Parent::Logistic);
        let p = ParameterSet::logistic(r, k, frac * k);
        let grid = TimeGrid::new(0.0, 0.5, 40).unwrap();
        let xs = models::size_on_grid(m, &p, &grid).unwrap();
        prop_assert!(xs.windows(2).all(|w| w[1] >= w[0]));
        prop_assert!(xs.iter().all(|x| *x > 0.0 && *x <= k * (1.0 + 1e-12)));
    }

    #[test]
    fn wide_csv_roundtrips(
        rows in prop::collection::vec(prop::collection::vec(0.1f64..1e4, 4), 1..6),
        t0 in 0.0f64..5.0,
    ) {
        let grid = TimeGrid::new(t0, 1.0, 4).unwrap();
        let data = TrajectoryMatrix::from_rows(grid, &rows).unwrap();
        let mut buf = Vec::new();
        data.write_wide_csv(&mut buf).unwrap();
        let back = TrajectoryMatrix::read_wide_csv(buf.as_slice()).unwrap();
        prop_assert_eq!(back.values(), data.values());
        prop_assert_eq!(back.ids(), data.ids());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn fit_is_invariant_to_data_order(
        r in 0.1f64..0.8,
        k in 50.0f64..200.0,
        noise in prop::collection::vec(-0.02f64..0.02, 12),
        shift in 1usize..11,
    ) {
        let m = ModelId::constant(Parent::Logistic);
        let truth = ParameterSet::logistic(r, k, 10.0);
        let t: Vec<f64> = (0..12).map(|i| i as f64).collect();
        let y: Vec<f64> = t
            .iter()
            .zip(&noise)
            .map(|(&s, e)| models::size(m, &truth, s).unwrap() * (1.0 + e))
            .collect();
        let init = ParameterSet::logistic(0.3, 1.05 * y.iter().copied().fold(0.0, f64::max), y[0]);
        let a = nls_fit(&FitProblem::new(Curve::Size(m), t.clone(), y.clone(), init).unwrap()).unwrap();
        let mut tp = t.clone();
        let mut yp = y.clone();
        tp.rotate_left(shift);
        yp.rotate_left(shift);
        let b = nls_fit(&FitProblem::new(Curve::Size(m), tp, yp, init).unwrap()).unwrap();
        for p in &a.free {
            let (x, z) = (a.estimates.get(*p), b.estimates.get(*p));
            prop_assert!((x - z).abs() <= 1e-8 * (1.0 + x.abs()), "{p}: {x} vs {z}");
        }
    }

    #[test]
    fn rate_forms_evaluate_finitely_inside_their_bounds(
        r0 in 0.01f64..2.0,
        c in 0.0f64..3.0,
        t in 0.01f64..30.0,
    ) {
        let p = ParameterSet { r0, c, b: 0.5, ..Default::default() };
        for form in RateForm::ALL {
            prop_assert!(form.value(&p, t).is_finite(), "{form}");
        }
    }
}
