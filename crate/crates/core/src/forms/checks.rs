//! Randomized invariant suite for the exterior algebra.
//!
//! Used by the `algebra-check` command and the acceptance tests. Each check
//! reports its worst relative error and, on failure, the offending input.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{hodge, pullback, rel_error, wedge, write_form, MetricTensor};
use crate::random;

#[derive(Debug, Clone, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub trials: usize,
    pub max_error: f64,
    pub tolerance: f64,
    /// Description of the worst input when the check failed.
    pub witness: Option<String>,
}

struct Tracker {
    name: &'static str,
    tol: f64,
    trials: usize,
    worst: f64,
    witness: Option<String>,
}

impl Tracker {
    fn new(name: &'static str, tol: f64) -> Self {
        Self { name, tol, trials: 0, worst: 0.0, witness: None }
    }

    fn record(&mut self, err: f64, describe: impl FnOnce() -> String) {
        self.trials += 1;
        if err > self.worst || err.is_nan() {
            self.worst = if err.is_nan() { f64::INFINITY } else { err };
            if self.worst > self.tol {
                self.witness = Some(describe());
            }
        }
    }

    fn finish(self) -> CheckOutcome {
        CheckOutcome {
            name: self.name.into(),
            passed: self.worst <= self.tol,
            trials: self.trials,
            max_error: self.worst,
            tolerance: self.tol,
            witness: self.witness,
        }
    }
}

fn describe_metric(g: &MetricTensor<f64>) -> String {
    format!("g = {:?}", g.entries())
}

/// Runs every algebra invariant `trials` times with inputs drawn from `seed`.
pub fn run_suite(seed: u64, trials: usize) -> Vec<CheckOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tiny = 1e-300;

    let mut double = Tracker::new("double Hodge star is the identity", 1e-10);
    let mut scaling = Tracker::new("hodge(c²g, a) = c^(7-2k) hodge(g, a)", 1e-10);
    let mut anti = Tracker::new("a∧b = (-1)^(kl) b∧a", 1e-12);
    let mut pull_wedge = Tracker::new("pullback commutes with wedge", 1e-10);
    let mut pull_hodge = Tracker::new("pullback(M, ⋆_g a) = ⋆_(MᵀgM) pullback(M, a)", 1e-10);
    let mut functorial = Tracker::new("pullback(M1·M2, a) = pullback(M2, pullback(M1, a))", 1e-10);

    for _ in 0..trials {
        let g = random::spd::<f64, _>(&mut rng);
        let k = rng.gen_range(0..=7);
        let a = random::kform::<f64, _>(&mut rng, k);

        let twice = hodge(&g, &hodge(&g, &a));
        double.record(rel_error(&twice, &a, tiny), || format!("{}; a = {}", describe_metric(&g), write_form(&a)));

        let c: f64 = rng.gen_range(0.2..5.0);
        let lhs = hodge(&g.scaled(c * c).unwrap(), &a);
        let rhs = hodge(&g, &a).scale(c.powi(7 - 2 * k as i32));
        scaling.record(rel_error(&lhs, &rhs, tiny), || {
            format!("c = {c}; {}; a = {}", describe_metric(&g), write_form(&a))
        });

        let l = rng.gen_range(0..=(7 - k));
        let b = random::kform::<f64, _>(&mut rng, l);
        let ab = wedge(&a, &b).unwrap();
        let ba = wedge(&b, &a).unwrap().scale(if (k * l) % 2 == 0 { 1.0 } else { -1.0 });
        anti.record(rel_error(&ab, &ba, tiny), || format!("a = {}b = {}", write_form(&a), write_form(&b)));

        let m = random::near_identity::<f64, _>(&mut rng, 0.3);
        let lhs = pullback(&m, &ab).unwrap();
        let rhs = wedge(&pullback(&m, &a).unwrap(), &pullback(&m, &b).unwrap()).unwrap();
        pull_wedge
            .record(rel_error(&lhs, &rhs, tiny), || format!("M = {m:?}; a = {}b = {}", write_form(&a), write_form(&b)));

        let lhs = pullback(&m, &hodge(&g, &a)).unwrap();
        let rhs = hodge(&g.pullback(&m).unwrap(), &pullback(&m, &a).unwrap());
        pull_hodge.record(rel_error(&lhs, &rhs, tiny), || {
            format!("M = {m:?}; {}; a = {}", describe_metric(&g), write_form(&a))
        });

        let m2 = random::near_identity::<f64, _>(&mut rng, 0.3);
        let lhs = pullback(&crate::linalg::mul7(&m, &m2), &a).unwrap();
        let rhs = pullback(&m2, &pullback(&m, &a).unwrap()).unwrap();
        functorial.record(rel_error(&lhs, &rhs, tiny), || format!("M1 = {m:?}; M2 = {m2:?}; a = {}", write_form(&a)));
    }

    vec![
        double.finish(),
        scaling.finish(),
        anti.finish(),
        pull_wedge.finish(),
        pull_hodge.finish(),
        functorial.finish(),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_passes_and_is_deterministic() {
        let a = run_suite(7, 50);
        let b = run_suite(7, 50);
        for (x, y) in a.iter().zip(&b) {
            assert!(x.passed, "{} failed: {:e} {:?}", x.name, x.max_error, x.witness);
            assert_eq!(x.max_error.to_bits(), y.max_error.to_bits());
        }
    }
}
