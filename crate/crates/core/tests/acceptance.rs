//! Acceptance gate. Runs every criterion in order, prints one PASS/FAIL
//! line each (written past the test harness capture) and fails if any
//! criterion fails.

use std::io::Write;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use g2lab::fields::{
    decay_profile, DecayOptions, FieldPair, LieField, PowerProfile, Profile, ProfileField, ScaledField, ZeroField,
};
use g2lab::forms::{basis, hodge, pullback, rel_error, MultiIndex};
use g2lab::g2::{coassociative, euclidean_phi, metric_from_phi, normalize, NormalizeOptions};
use g2lab::lie::so_basis;
use g2lab::linalg::inverse7;
use g2lab::model::{canonical_connection, instanton_defect, pullback_to_cone};
use g2lab::random;
use g2lab::rescale::{c5_deviation, covariance_suite, family, pullback_monopole, ScaleMap, FAMILIES};
use g2lab::sampling::sphere_points;
use g2lab::solver::{abelian_problem, default_init, perturbed_problem, solve_monopole, RotationTemplate, SolverConfig};
use g2lab::{KForm, MetricTensor, Point};

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn within(elapsed: Duration, limit: Duration) -> bool {
    elapsed <= limit
}

/// Sign of the permutation taking `(I, J)` to `(1, …, 7)`.
fn permutation_sign(seq: &[usize]) -> f64 {
    let mut inversions = 0;
    for i in 0..seq.len() {
        for j in i + 1..seq.len() {
            if seq[i] > seq[j] {
                inversions += 1;
            }
        }
    }
    if inversions % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Euclidean Hodge star by direct permutation signs.
fn oracle_star(a: &KForm) -> KForm {
    let mut out = KForm::zero(7 - a.degree());
    for (idx, c) in a.terms() {
        let axes = idx.axes();
        let comp = idx.complement();
        let seq: Vec<usize> = axes.iter().chain(comp.axes().iter()).copied().collect();
        out.set(comp, out.get(comp) + permutation_sign(&seq) * c);
    }
    out
}

fn criterion_1() -> Verdict {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst_double: f64 = 0.0;
    let mut worst_scale: f64 = 0.0;
    for _ in 0..200 {
        let g = random::spd::<f64, _>(&mut rng);
        let k = rng.gen_range(0..=7);
        let a = random::kform::<f64, _>(&mut rng, k);
        let lambda: f64 = rng.gen_range(0.3..4.0);
        let star = hodge(&g, &a);
        worst_double = worst_double.max(rel_error(&hodge(&g, &star), &a, 1e-300));
        let scaled = hodge(&g.scaled(lambda * lambda).unwrap(), &a);
        let expected = star.scale(lambda.powi(7 - 2 * k as i32));
        worst_scale = worst_scale.max(rel_error(&scaled, &expected, 1e-300));
    }
    let el = t.elapsed();
    let pass = worst_double <= 1e-10 && worst_scale <= 1e-10 && within(el, Duration::from_secs(5));
    verdict(pass, format!("⋆⋆ error {worst_double:.2e}, scaling error {worst_scale:.2e}, {el:.2?}"))
}

fn criterion_2() -> Verdict {
    let t = Instant::now();
    let phi0 = euclidean_phi::<f64>();
    let g = metric_from_phi(&phi0).unwrap();
    let mut metric_err: f64 = 0.0;
    for i in 0..7 {
        for j in 0..7 {
            metric_err = metric_err.max((g.entries()[i][j] - if i == j { 1.0 } else { 0.0 }).abs());
        }
    }
    let psi = coassociative(&phi0).unwrap();
    let oracle = oracle_star(&phi0);
    let pinned: [(&[usize], f64); 7] = [
        (&[4, 5, 6, 7], 1.0),
        (&[2, 3, 6, 7], -1.0),
        (&[2, 3, 4, 5], -1.0),
        (&[1, 3, 5, 7], -1.0),
        (&[1, 3, 4, 6], 1.0),
        (&[1, 2, 5, 6], -1.0),
        (&[1, 2, 4, 7], -1.0),
    ];
    let mut expansion = KForm::zero(4);
    for (axes, c) in pinned {
        expansion.set(MultiIndex::new(axes).unwrap(), c);
    }
    let exact = psi == oracle && oracle == expansion && psi.terms().count() == 7;

    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let psi0 = coassociative(&phi0).unwrap();
    let mut natural: f64 = 0.0;
    for _ in 0..100 {
        let m = random::with_singular_values::<f64, _>(&mut rng, 0.5, 2.0);
        let phi = pullback(&m, &phi0).unwrap();
        let gm = metric_from_phi(&phi).unwrap();
        let expected = MetricTensor::euclidean().pullback(&m).unwrap();
        let scale = expected.entries().iter().flatten().fold(0.0f64, |a, b| a.max(b.abs()));
        for i in 0..7 {
            for j in 0..7 {
                natural = natural.max((gm.entries()[i][j] - expected.entries()[i][j]).abs() / scale);
            }
        }
        let psi_m = coassociative(&phi).unwrap();
        natural = natural.max(rel_error(&psi_m, &pullback(&m, &psi0).unwrap(), 1e-300));
    }
    let el = t.elapsed();
    let pass = metric_err <= 1e-12 && exact && natural <= 1e-8 && within(el, Duration::from_secs(10));
    verdict(
        pass,
        format!(
            "|g − I| {metric_err:.1e}, ψ₀ matches oracle and expansion: {exact}, naturality {natural:.2e}, {el:.2?}"
        ),
    )
}

fn criterion_3() -> Verdict {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let phi0 = euclidean_phi::<f64>();
    let mut worst: f64 = 0.0;
    let mut most_restarts = 0;
    let mut failures = 0;
    for i in 0..50 {
        let m = random::with_singular_values::<f64, _>(&mut rng, 0.5, 2.0);
        let phi = pullback(&inverse7(&m).unwrap(), &phi0).unwrap();
        let opts = NormalizeOptions { seed: i, restarts: 16, ..NormalizeOptions::default() };
        match normalize(&phi, &opts) {
            Ok(r) => {
                worst = worst.max(r.residual);
                most_restarts = most_restarts.max(r.restarts_run);
                let back = pullback(&r.l, &phi).unwrap();
                worst = worst.max((&back - &phi0).norm());
            }
            Err(_) => failures += 1,
        }
    }
    let el = t.elapsed();
    let pass = failures == 0 && worst <= 1e-8 && most_restarts <= 16 && within(el, Duration::from_secs(120));
    verdict(pass, format!("worst residual {worst:.2e}, max restarts {most_restarts}, failures {failures}, {el:.2?}"))
}

fn criterion_4() -> Verdict {
    // φ₀ itself has zero deviation and a zero bound; the strict inequality
    // is checked on the perturbed families and exact vanishing on φ₀.
    let mut min_margin = f64::INFINITY;
    let mut worst_family = String::new();
    let mut reference_zero = true;
    for name in FAMILIES {
        let phi = family(name).unwrap();
        for lambda in [4.0, 16.0, 64.0] {
            let r = c5_deviation(&phi, ScaleMap::new(lambda).unwrap(), 1.0).unwrap();
            if name == "euclidean" {
                reference_zero &= r.t.iter().chain(&r.s).all(|&v| v == 0.0);
            } else if r.min_margin() < min_margin {
                min_margin = r.min_margin();
                worst_family = format!("{name} at λ = {lambda}");
            }
        }
    }
    let lin = family("linear-perturb").unwrap();
    let mut halving: f64 = 0.0;
    for lambda in [4.0, 8.0, 16.0, 32.0] {
        let a = c5_deviation(&lin, ScaleMap::new(lambda).unwrap(), 1.0).unwrap();
        let b = c5_deviation(&lin, ScaleMap::new(2.0 * lambda).unwrap(), 1.0).unwrap();
        halving = halving.max((b.t[0] - a.t[0] / 2.0).abs() / (a.t[0] / 2.0));
        halving = halving.max((b.s[0] - a.s[0] / 2.0).abs() / (a.s[0] / 2.0));
    }
    let pass = min_margin > 0.0 && reference_zero && halving <= 1e-10;
    verdict(
        pass,
        format!("min margin {min_margin:.3e} ({worst_family}), φ₀ deviation zero: {reference_zero}, halving error {halving:.1e}"),
    )
}

fn criterion_5() -> Verdict {
    let mut worst: f64 = 0.0;
    let mut n = 0;
    for (i, name) in ["linear-perturb", "quadratic", "cubic", "diffeo"].into_iter().enumerate() {
        let lambda = [3.0, 7.0, 16.0, 40.0][i];
        let rows =
            covariance_suite(&family(name).unwrap(), ScaleMap::new(lambda).unwrap(), 50 + i as u64, 500).unwrap();
        n += rows.len();
        worst = worst.max(rows.iter().map(|r| r.rel_error).fold(0.0, f64::max));
    }
    verdict(worst <= 1e-9, format!("{n} points over 4 families, worst relative error {worst:.2e}"))
}

fn criterion_6() -> Verdict {
    let t = Instant::now();
    let cone: Arc<dyn LieField> = Arc::new(pullback_to_cone(canonical_connection(6).unwrap()));
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut homog: f64 = 0.0;
    for _ in 0..100 {
        let r: f64 = rng.gen_range(0.05..3.0);
        let x: Point = random::unit_vector(&mut rng).map(|c| c * r);
        let lambda: f64 = rng.gen_range(0.1..10.0);
        let pulled = ScaledField::new(cone.clone(), lambda).unwrap().eval(&x).unwrap();
        let base = cone.eval(&x).unwrap();
        let num: f64 = pulled.iter().zip(&base).map(|(a, b)| (a - b).norm_squared()).sum::<f64>().sqrt();
        let den: f64 = base.iter().map(|b| b.norm_squared()).sum::<f64>().sqrt();
        homog = homog.max(num / den);
    }
    let defect = instanton_defect(cone.as_ref(), &euclidean_phi(), &sphere_points(200)).unwrap().defect;
    let el = t.elapsed();
    let pass = homog <= 1e-10 && defect <= 1e-6 && within(el, Duration::from_secs(60));
    verdict(pass, format!("homogeneity {homog:.2e}, instanton defect {defect:.2e}, {el:.2?}"))
}

fn criterion_7() -> Verdict {
    let cfg = SolverConfig::parse("problem = abelian\ntol = 1e-14\n").unwrap();
    let problem = abelian_problem(&cfg, true).unwrap();
    let init = default_init(&problem, &cfg).unwrap();
    let (out, rep) = solve_monopole(&problem, &cfg, &init).unwrap();
    let err = out.max_difference(problem.target.as_ref().unwrap());
    let pass = err <= 1e-6 && rep.iterations <= 200;
    verdict(pass, format!("{}-point mesh, profile error {err:.2e} after {} iterations", out.mesh.len(), rep.iterations))
}

fn criterion_8() -> Verdict {
    let t = Instant::now();
    // The exact solution has f_k(r_in) = λ^{-k}, so the inner value is left free.
    let cfg = SolverConfig::parse("theta = 0.5\npin_inner = false\n").unwrap();
    let problem = match perturbed_problem(&cfg) {
        Ok(p) => p,
        Err(e) => return verdict(false, format!("problem setup failed: {e}")),
    };
    let init = default_init(&problem, &cfg).unwrap();
    let (out, rep) = solve_monopole(&problem, &cfg, &init).unwrap();
    let el = t.elapsed();
    let slope = rep.decay.as_ref().map_or(f64::NAN, |d| d.slope);
    let target = (1.0 - cfg.theta) - 0.1;
    let dev = problem.info.c0_deviation;
    let pass = rep.reduction() >= 1e3
        && slope >= target
        && (dev - 0.02).abs() < 1e-6
        && dev <= cfg.delta0
        && out.mesh.len() == 128
        && within(el, Duration::from_secs(600));
    verdict(
        pass,
        format!(
            "C⁰ deviation {dev:.4}, λ = {:.2}, residual {:.2e} → {:.2e} (×{:.2e}), slope {slope:.3}, inner mismatch {:.2e}, {el:.1?}",
            problem.info.lambda,
            rep.initial_residual,
            rep.final_residual,
            rep.reduction(),
            rep.boundary_mismatch
        ),
    )
}

fn criterion_9() -> Verdict {
    let theta = 0.5;
    let cone: Arc<dyn LieField> = Arc::new(pullback_to_cone(canonical_connection(6).unwrap()));
    let template: Arc<dyn LieField> = Arc::new(RotationTemplate::new(so_basis(6).remove(3)));
    let profile: Arc<dyn Profile> = Arc::new(PowerProfile { amplitude: 0.3, exponent: 1.0 - theta });
    let a = Arc::new(ProfileField::new(Some(cone.clone()), vec![(profile, template)]).unwrap());
    let pair = FieldPair::new(a, Arc::new(ZeroField { rank: 6, degree: 0 }), 1e-4, 1.0).unwrap();
    let radii = [0.002, 0.005, 0.01, 0.02, 0.05];
    let opts = DecayOptions { samples_per_sphere: 24, ..DecayOptions::default() };
    let base = decay_profile(&pair, cone.as_ref(), &radii, &opts).unwrap();
    let mut worst: f64 = 0.0;
    for lambda in [2.0f64, 8.0] {
        let small = pullback_monopole(&pair, ScaleMap::new(lambda).unwrap()).unwrap();
        let pulled = decay_profile(&small, cone.as_ref(), &radii, &opts).unwrap();
        let factor = lambda.powf(1.0 - theta);
        for ((r, a), (_, b)) in base.series(0).into_iter().zip(pulled.series(0)) {
            assert!(a > 0.0, "zero deviation at r = {r}");
            worst = worst.max((b / a - factor).abs() / factor);
        }
    }
    verdict(worst <= 1e-8, format!("|y|·sup|Γ*A − A₀| ratio vs λ^(1−θ), worst relative error {worst:.2e}"))
}

#[test]
fn acceptance_criteria() {
    let criteria: [(&str, fn() -> Verdict); 9] = [
        ("Hodge suite", criterion_1),
        ("G2 derivation", criterion_2),
        ("normalization", criterion_3),
        ("rescale bound", criterion_4),
        ("residual covariance", criterion_5),
        ("cone model", criterion_6),
        ("manufactured abelian solve", criterion_7),
        ("perturbed nonabelian solve", criterion_8),
        ("decay transform", criterion_9),
    ];
    let mut failed = Vec::new();
    for (i, (name, run)) in criteria.iter().enumerate() {
        let v = run();
        let line = format!("criterion {} ({name}): {}: {}\n", i + 1, if v.pass { "PASS" } else { "FAIL" }, v.detail);
        let mut out = std::io::stdout().lock();
        out.write_all(line.as_bytes()).unwrap();
        out.flush().unwrap();
        if !v.pass {
            failed.push(i + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}

#[test]
fn hodge_oracle_agrees_with_the_kernel_on_basis_forms() {
    for k in 0..=7 {
        for &mask in basis(k) {
            let a = KForm::monomial(&MultiIndex::from_mask(mask).axes(), 1.0).unwrap();
            assert_eq!(hodge(&MetricTensor::euclidean(), &a), oracle_star(&a));
        }
    }
}
