use approx::assert_relative_eq;
use npfisher::density::{DensityEstimate, Estimator, GridSpec};
use npfisher::fim::{
    calibrate_delta, epsilon_radius, estimate_diagonal, fim_entry, fim_matrix,
    overlap_probability, quadratic_form, suggest_delta, CalibrationOptions, Displacement,
    FimOptions, NormalSampler, ParameterPoint, Scheme, Stencil, Verdict,
};
use npfisher::models::normal_pdf;
use proptest::prelude::*;

fn exact_stencil(mu: f64, sigma: f64, dmu: f64, dsigma: f64) -> Stencil {
    let grid = GridSpec::new(mu - 16.0 * sigma, mu + 16.0 * sigma, 3001).unwrap();
    let d = |m: f64, s: f64| DensityEstimate::analytic(grid, |x| normal_pdf(x, m, s)).unwrap();
    Stencil::new(
        ParameterPoint::new([("mu", mu), ("sigma", sigma)]).unwrap(),
        d(mu, sigma),
        vec![
            Displacement { name: "mu".into(), delta: dmu, plus: d(mu + dmu, sigma), minus: d(mu - dmu, sigma) },
            Displacement {
                name: "sigma".into(),
                delta: dsigma,
                plus: d(mu, sigma + dsigma),
                minus: d(mu, sigma - dsigma),
            },
        ],
        10_000,
    )
    .unwrap()
}

fn opts(scheme: Scheme, cutoff: f64) -> FimOptions {
    FimOptions { scheme, cutoff, ..Default::default() }
}

#[test]
fn both_schemes_converge_to_the_normal_matrix() {
    for scheme in [Scheme::DensityDiff, Scheme::LogDiff] {
        let f = fim_matrix(&exact_stencil(0.3, 1.5, 0.01, 0.01), &opts(scheme, 1e-20)).unwrap();
        assert_relative_eq!(f.matrix[0][0], 1.0 / 2.25, max_relative = 1e-3);
        assert_relative_eq!(f.matrix[1][1], 2.0 / 2.25, max_relative = 1e-3);
        assert!(f.matrix[0][1].abs() < 1e-6);
        assert_eq!(f.matrix[0][1], f.matrix[1][0]);
    }
}

#[test]
fn verdicts_follow_the_radius() {
    let f = fim_matrix(&exact_stencil(0.0, 1.0, 0.2, 0.2), &FimOptions::default()).unwrap();
    // N = 1e4, g_mumu ~ 1, delta 0.2: eps ~ sqrt(2 / 400) ~ 0.07.
    assert_eq!(f.epsilon[0][0].verdict, Verdict::Ok);
    let tiny = fim_matrix(&exact_stencil(0.0, 1.0, 0.01, 0.01), &FimOptions::default()).unwrap();
    assert_eq!(tiny.epsilon[0][0].verdict, Verdict::TooLarge);
}

#[test]
fn sampled_diagonal_is_close_to_two() {
    let theta = ParameterPoint::new([("sigma", 1.0)]).unwrap();
    let d = suggest_delta(2.0, 10_000, 0.05).unwrap();
    let g = estimate_diagonal(
        &NormalSampler,
        &theta,
        "sigma",
        d,
        10_000,
        &Estimator::Deft(Default::default()),
        &opts(Scheme::DensityDiff, 1e-10),
        17,
    )
    .unwrap();
    assert!((g - 2.0).abs() < 0.4, "g = {g}");
}

#[test]
fn calibration_reaches_its_target() {
    let theta = ParameterPoint::new([("mu", 0.0), ("sigma", 1.0)]).unwrap();
    let cal = calibrate_delta(
        &NormalSampler,
        &theta,
        "mu",
        &Estimator::Deft(Default::default()),
        &FimOptions::default(),
        &CalibrationOptions { n: 5_000, target_eps: 0.1, initial_delta: 0.005, max_iters: 12, seed: 3 },
    )
    .unwrap();
    assert!(cal.epsilon <= 0.1);
    assert!(cal.history.windows(2).all(|w| w[1].delta > w[0].delta));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn radius_and_step_are_inverse(g in 1e-4f64..1e4, n in 1usize..10_000_000, eps in 1e-4f64..1.0) {
        let d = suggest_delta(g, n, eps).unwrap();
        prop_assert!((epsilon_radius(&[vec![g]], &[d], n) - eps).abs() <= 1e-12 * eps.max(1.0));
        prop_assert!((overlap_probability(&[vec![g]], &[d], n, eps) - (-1.0f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn quadratic_form_is_scale_covariant(a in 0.1f64..5.0, b in -0.5f64..0.5, c in 0.1f64..5.0, x in -1.0f64..1.0, y in -1.0f64..1.0, k in 0.1f64..10.0) {
        let g = vec![vec![a, b], vec![b, c]];
        let q = quadratic_form(&g, &[x, y]);
        prop_assert!((quadratic_form(&g, &[k * x, k * y]) - k * k * q).abs() <= 1e-9 * (1.0 + q.abs() * k * k));
    }

    #[test]
    fn diagonal_entries_shrink_as_cutoff_grows(sigma in 0.2f64..5.0, rel in 0.02f64..0.4, lo in -20i32..-6, hi in -5i32..-2) {
        let st = exact_stencil(0.0, sigma, rel * sigma, rel * sigma);
        for scheme in [Scheme::DensityDiff, Scheme::LogDiff] {
            let small = fim_entry(&st, "sigma", "sigma", &opts(scheme, 10f64.powi(lo))).unwrap();
            let large = fim_entry(&st, "sigma", "sigma", &opts(scheme, 10f64.powi(hi))).unwrap();
            prop_assert!(small >= 0.0 && large >= 0.0);
            prop_assert!(large <= small * (1.0 + 1e-12));
        }
    }

    #[test]
    fn swapping_plus_and_minus_keeps_the_entry(sigma in 0.2f64..5.0, rel in 0.02f64..0.4) {
        let st = exact_stencil(0.0, sigma, rel * sigma, rel * sigma);
        let d = &st.displacements()[1];
        let swapped = Stencil::new(
            st.center().clone(),
            st.density().clone(),
            vec![Displacement { name: d.name.clone(), delta: d.delta, plus: d.minus.clone(), minus: d.plus.clone() }],
            st.n(),
        ).unwrap();
        for scheme in [Scheme::DensityDiff, Scheme::LogDiff] {
            let a = fim_entry(&st, "sigma", "sigma", &opts(scheme, 1e-10)).unwrap();
            let b = fim_entry(&swapped, "sigma", "sigma", &opts(scheme, 1e-10)).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
        }
    }
}
