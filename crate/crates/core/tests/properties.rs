//! Randomized invariants across the library.

use approx::assert_relative_eq;
use proptest::prelude::*;

use g2lab::fields::{DecayRow, DecayTable};
use g2lab::forms::{dim, hodge, interior, pullback, rel_error, wedge};
use g2lab::g2::{coassociative, euclidean_phi, metric_from_phi};
use g2lab::linalg::mul7;
use g2lab::rescale::{c5_deviation, family, rescale_phi, ScaleMap};
use g2lab::solver::{
    abelian_problem, assemble, fit_decay_rate, optimise, LambdaChoice, RadialMesh, RadialProfilePair, SolverConfig,
};
use g2lab::{KForm, Mat7, MetricTensor};

fn form(degree: usize) -> impl Strategy<Value = KForm> {
    prop::collection::vec(-1.0..1.0f64, dim(degree)).prop_map(move |c| KForm::from_coeffs(degree, c).unwrap())
}

fn any_form() -> impl Strategy<Value = KForm> {
    (0usize..=7).prop_flat_map(form)
}

fn matrix(lo: f64, hi: f64) -> impl Strategy<Value = Mat7> {
    prop::collection::vec(lo..hi, 49).prop_map(|v| {
        let mut m = [[0.0; 7]; 7];
        for (i, x) in v.into_iter().enumerate() {
            m[i / 7][i % 7] = x;
        }
        m
    })
}

/// `AᵀA + I/2`.
fn metric() -> impl Strategy<Value = MetricTensor> {
    matrix(-1.0, 1.0).prop_map(|a| {
        let mut g = [[0.0; 7]; 7];
        for i in 0..7 {
            for j in 0..7 {
                g[i][j] = (0..7).map(|k| a[k][i] * a[k][j]).sum::<f64>() + if i == j { 0.5 } else { 0.0 };
            }
        }
        MetricTensor::new(g).unwrap()
    })
}

/// `I + εN`, orientation preserving.
fn near_identity() -> impl Strategy<Value = Mat7> {
    matrix(-0.1, 0.1).prop_map(|mut m| {
        for (i, row) in m.iter_mut().enumerate() {
            row[i] += 1.0;
        }
        m
    })
}

fn close(a: &KForm, b: &KForm, tol: f64) -> bool {
    rel_error(a, b, 1.0) <= tol
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn wedge_is_graded_commutative(a in any_form(), b in any_form()) {
        prop_assume!(a.degree() + b.degree() <= 7);
        let sign = if (a.degree() * b.degree()) % 2 == 0 { 1.0 } else { -1.0 };
        let ab = wedge(&a, &b).unwrap();
        let ba = wedge(&b, &a).unwrap().scale(sign);
        prop_assert!(close(&ab, &ba, 1e-12));
    }

    #[test]
    fn wedge_is_associative(a in form(1), b in form(2), c in form(2)) {
        let left = wedge(&wedge(&a, &b).unwrap(), &c).unwrap();
        let right = wedge(&a, &wedge(&b, &c).unwrap()).unwrap();
        prop_assert!(close(&left, &right, 1e-12));
    }

    #[test]
    fn double_star_is_identity(g in metric(), a in any_form()) {
        prop_assert!(close(&hodge(&g, &hodge(&g, &a)), &a, 1e-10));
    }

    #[test]
    fn star_pairing_is_symmetric(g in metric(), (a, b) in (0usize..=7).prop_flat_map(|k| (form(k), form(k)))) {
        let ab = wedge(&a, &hodge(&g, &b)).unwrap();
        let ba = wedge(&b, &hodge(&g, &a)).unwrap();
        prop_assert!(close(&ab, &ba, 1e-10));
    }

    #[test]
    fn interior_is_an_antiderivation(v in prop::array::uniform7(-1.0..1.0f64), a in form(2), b in form(3)) {
        let lhs = interior(&v, &wedge(&a, &b).unwrap()).unwrap();
        let rhs = &wedge(&interior(&v, &a).unwrap(), &b).unwrap() + &wedge(&a, &interior(&v, &b).unwrap()).unwrap();
        prop_assert!(close(&lhs, &rhs, 1e-12));
    }

    #[test]
    fn pullback_is_multiplicative_and_functorial(m1 in matrix(-1.0, 1.0), m2 in matrix(-1.0, 1.0), a in form(2), b in form(3)) {
        let lhs = pullback(&m1, &wedge(&a, &b).unwrap()).unwrap();
        let rhs = wedge(&pullback(&m1, &a).unwrap(), &pullback(&m1, &b).unwrap()).unwrap();
        prop_assert!(close(&lhs, &rhs, 1e-10));
        let composed = pullback(&mul7(&m1, &m2), &a).unwrap();
        let stepwise = pullback(&m2, &pullback(&m1, &a).unwrap()).unwrap();
        prop_assert!(close(&composed, &stepwise, 1e-10));
    }

    #[test]
    fn phi_wedge_psi_is_seven_volumes(m in near_identity()) {
        let phi = pullback(&m, &euclidean_phi()).unwrap();
        let g = metric_from_phi(&phi).unwrap();
        let top = wedge(&phi, &coassociative(&phi).unwrap()).unwrap();
        assert_relative_eq!(top.coeffs()[0], 7.0 * g.det().sqrt(), max_relative = 1e-10);
    }

    #[test]
    fn rescaling_composes(a in 1.0..20.0f64, b in 1.0..20.0f64, name in prop::sample::select(vec!["quadratic", "cubic", "diffeo"])) {
        let phi = family(name).unwrap();
        let twice = rescale_phi(&rescale_phi(&phi, ScaleMap::new(a).unwrap()), ScaleMap::new(b).unwrap());
        let once = rescale_phi(&phi, ScaleMap::new(a * b).unwrap());
        let y = [0.1, -0.2, 0.05, 0.2, 0.0, -0.1, 0.15];
        prop_assert!(close(&twice.eval(&y), &once.eval(&y), 1e-13));
    }

    #[test]
    fn rescaled_derivatives_follow_the_chain_rule(lambda in 2.0..100.0f64, name in prop::sample::select(vec!["linear-perturb", "quadratic"])) {
        let r = c5_deviation(&family(name).unwrap(), ScaleMap::new(lambda).unwrap(), 1.0).unwrap();
        for k in 0..r.s.len() {
            prop_assert!((r.t[k] - r.s[k] / lambda.powi(k as i32)).abs() <= 1e-9 * r.t[k].max(1e-300) + 1e-300);
            prop_assert!(r.margins[k] >= 0.0);
        }
    }

    #[test]
    fn mesh_derivative_is_exact_on_quadratics(n in 3usize..40, a in 0.001..0.1f64, ratio in 2.0..100.0f64, c in prop::array::uniform3(-5.0..5.0f64)) {
        let mesh = RadialMesh::log(n, a, a * ratio).unwrap();
        let f: Vec<f64> = mesh.points().iter().map(|r| c[0] + c[1] * r + c[2] * r * r).collect();
        for (d, r) in mesh.derivative(&f).iter().zip(mesh.points()) {
            assert_relative_eq!(*d, c[1] + 2.0 * c[2] * r, epsilon = 1e-7 * (1.0 + c[1].abs() + c[2].abs()));
        }
    }

    #[test]
    fn decay_fit_recovers_power_laws(e in 0.05..1.5f64, amp in 0.01..100.0f64, n in 4usize..12) {
        let rows = (0..n)
            .map(|i| {
                let r = 0.01 * 30f64.powf(i as f64 / (n - 1) as f64);
                DecayRow { r, l: 0, coord_sup: amp * r.powf(e - 1.0), cov_sup: 0.0 }
            })
            .collect();
        let table = DecayTable { rows, samples_per_sphere: 1, fitted_constant: 0.0 };
        let fit = fit_decay_rate(&table, 0.5).unwrap();
        assert_relative_eq!(fit.slope, e, epsilon = 1e-10);
        assert_relative_eq!(fit.intercept, amp.ln(), epsilon = 1e-9);
        let round = DecayTable::from_csv(&table.to_csv()).unwrap();
        prop_assert_eq!(round.series(0), table.series(0));
    }

    #[test]
    fn config_text_round_trips(theta in 0.05..0.95f64, frac in 0.05..0.95f64, gamma in 0.0..2.0f64, lambda in prop::option::of(1.0..1e3f64), points in 3usize..300, pin in any::<bool>()) {
        let cfg = SolverConfig {
            theta,
            p: -2.5 + frac * theta,
            gauge_penalty: gamma,
            lambda: lambda.map_or(LambdaChoice::Auto, LambdaChoice::Fixed),
            pin_inner: pin,
            mesh: g2lab::solver::MeshSpec { points, r_in: 1.0 / 64.0, r_out: 0.25 },
            ..SolverConfig::default()
        };
        cfg.validate().unwrap();
        prop_assert_eq!(SolverConfig::parse(&cfg.to_text()).unwrap(), cfg);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    /// Accepted steps never increase the objective, from any start.
    #[test]
    fn accepted_steps_descend(amp in prop::collection::vec(-1.0..1.0f64, 4), gamma in 0.0..1.0f64) {
        let text = format!("problem = abelian\nmesh = log 16 0.015625 0.25\nsphere_samples = 12\ngauge_penalty = {gamma}\nmax_iter = 20\n");
        let cfg = SolverConfig::parse(&text).unwrap();
        let problem = abelian_problem(&cfg, true).unwrap();
        let mesh = cfg.mesh.build().unwrap();
        let grams = assemble(&problem.ingredients, &mesh, cfg.sphere_samples, cfg.weight_exponent()).unwrap();
        let mut init = RadialProfilePair::zeros(mesh.clone(), 1);
        for (i, r) in mesh.points().iter().enumerate() {
            let s = (r / mesh.r_in()).ln();
            init.f[0][i] = amp[0] * s + amp[1] * s * s;
            init.u[i] = amp[2] * s + amp[3] * s.sin();
        }
        let (_, rep) = optimise(&problem, &grams, &cfg, &init).unwrap();
        prop_assert!(rep.objective_history.windows(2).all(|w| w[1] <= w[0]));
        prop_assert!(rep.final_residual <= rep.initial_residual + 1e-15);
        prop_assert_eq!(rep.residual_history.len(), rep.iterations + 1);
    }
}
