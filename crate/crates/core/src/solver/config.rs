//! Plain-text `key = value` solver configuration.
//!
//! ```text
//! # perturbed canonical problem at θ = 1/2
//! problem = perturbed
//! theta = 0.5
//! lambda = auto
//! mesh = log 128 0.015625 0.25
//! ```

use serde::Serialize;

use super::mesh::RadialMesh;
use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ProblemKind {
    /// so(2) over the flat model with a manufactured target residual.
    Abelian,
    /// Canonical so(6) connection against a diffeomorphism-perturbed `φ`.
    Perturbed,
}

/// How `λ` is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LambdaChoice {
    Fixed(f64),
    /// Smallest `λ` whose rescaled structure has the target `C⁰` deviation.
    Auto,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeshSpec {
    pub points: usize,
    pub r_in: f64,
    pub r_out: f64,
}

impl MeshSpec {
    pub fn build(&self) -> Result<RadialMesh> {
        RadialMesh::log(self.points, self.r_in, self.r_out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolverConfig {
    pub problem: ProblemKind,
    pub theta: f64,
    /// Weight exponent; the radial weight is `r^{−2p−7}`.
    pub p: f64,
    /// Admitted `C⁰` size of `φ̃ − φ₀` on `B(1/4)`.
    pub delta0: f64,
    pub lambda: LambdaChoice,
    /// `C⁰` deviation targeted by `lambda = auto`.
    pub target_deviation: f64,
    /// The universal constant in `c_φ`.
    pub constant: f64,
    pub gauge_penalty: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub mesh: MeshSpec,
    pub sphere_samples: usize,
    pub taylor_order: usize,
    /// Pin `f(r_in) = 0`.
    pub pin_inner: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let theta = 0.5;
        Self {
            problem: ProblemKind::Perturbed,
            theta,
            p: default_p(theta),
            delta0: 0.05,
            lambda: LambdaChoice::Auto,
            target_deviation: 0.02,
            constant: 1.0,
            gauge_penalty: 0.0,
            tol: 1e-10,
            max_iter: 200,
            mesh: MeshSpec { points: 128, r_in: 1.0 / 64.0, r_out: 0.25 },
            sphere_samples: 200,
            taylor_order: 3,
            pin_inner: true,
        }
    }
}

/// Midpoint of the admissible interval `(−5/2, θ − 5/2)`.
pub fn default_p(theta: f64) -> f64 {
    -2.5 + 0.5 * theta
}

impl SolverConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        let mut p_set = false;
        let mut seen = std::collections::BTreeSet::new();
        for (n, raw) in text.lines().enumerate() {
            let line = n + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let bad = |msg: String| Error::Parse { line, msg };
            let (key, value) = content
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| bad(format!("expected key = value, got `{content}`")))?;
            if !seen.insert(key.to_string()) {
                return Err(bad(format!("duplicate key `{key}`")));
            }
            let num = |v: &str| v.parse::<f64>().map_err(|_| bad(format!("`{key}` needs a number, got `{v}`")));
            let int = |v: &str| v.parse::<usize>().map_err(|_| bad(format!("`{key}` needs an integer, got `{v}`")));
            match key {
                "problem" => {
                    cfg.problem = match value {
                        "abelian" => ProblemKind::Abelian,
                        "perturbed" => ProblemKind::Perturbed,
                        _ => return Err(bad(format!("unknown problem `{value}`"))),
                    }
                }
                "theta" => cfg.theta = num(value)?,
                "p" => {
                    cfg.p = num(value)?;
                    p_set = true;
                }
                "delta0" => cfg.delta0 = num(value)?,
                "lambda" => {
                    cfg.lambda = if value == "auto" { LambdaChoice::Auto } else { LambdaChoice::Fixed(num(value)?) }
                }
                "target_deviation" => cfg.target_deviation = num(value)?,
                "constant" => cfg.constant = num(value)?,
                "gauge_penalty" => cfg.gauge_penalty = num(value)?,
                "tol" => cfg.tol = num(value)?,
                "max_iter" => cfg.max_iter = int(value)?,
                "sphere_samples" => cfg.sphere_samples = int(value)?,
                "taylor_order" => cfg.taylor_order = int(value)?,
                "pin_inner" => {
                    cfg.pin_inner =
                        value.parse().map_err(|_| bad(format!("`pin_inner` needs true or false, got `{value}`")))?
                }
                "mesh" => {
                    let t: Vec<&str> = value.split_whitespace().collect();
                    if t.len() != 4 || t[0] != "log" {
                        return Err(bad("mesh must read `log <points> <r_in> <r_out>`".into()));
                    }
                    cfg.mesh = MeshSpec { points: int(t[1])?, r_in: num(t[2])?, r_out: num(t[3])? };
                }
                _ => return Err(bad(format!("unknown key `{key}`"))),
            }
        }
        if !p_set {
            cfg.p = default_p(cfg.theta);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let t = self.theta;
        if !(t > 0.0 && t < 1.0) {
            return invalid(format!("theta must lie in (0, 1), got {t}"));
        }
        if !(self.p > -2.5 && self.p < t - 2.5) {
            return invalid(format!("p must lie in (−5/2, θ − 5/2) = (−2.5, {}), got {}", t - 2.5, self.p));
        }
        if !(self.delta0 > 0.0) {
            return invalid("delta0 must be positive");
        }
        if let LambdaChoice::Fixed(l) = self.lambda {
            if !(l >= 1.0 && l.is_finite()) {
                return invalid(format!("lambda must be ≥ 1, got {l}"));
            }
        }
        if !(self.target_deviation > 0.0 && self.target_deviation <= self.delta0) {
            return invalid("target_deviation must lie in (0, delta0]");
        }
        if !(self.constant > 0.0) {
            return invalid("constant must be positive");
        }
        if !(self.gauge_penalty >= 0.0) {
            return invalid("gauge_penalty must be ≥ 0");
        }
        if !(self.tol > 0.0) {
            return invalid("tol must be positive");
        }
        if self.sphere_samples == 0 {
            return invalid("sphere_samples must be positive");
        }
        if !(1..=3).contains(&self.taylor_order) {
            return invalid("taylor_order must be 1, 2 or 3");
        }
        self.mesh.build()?;
        Ok(())
    }

    /// `r^{−2p−7}`.
    pub fn weight_exponent(&self) -> f64 {
        -2.0 * self.p - 7.0
    }

    pub fn to_text(&self) -> String {
        let lambda = match self.lambda {
            LambdaChoice::Auto => "auto".to_string(),
            LambdaChoice::Fixed(l) => l.to_string(),
        };
        let problem = match self.problem {
            ProblemKind::Abelian => "abelian",
            ProblemKind::Perturbed => "perturbed",
        };
        format!(
            "problem = {problem}\ntheta = {}\np = {}\ndelta0 = {}\nlambda = {lambda}\ntarget_deviation = {}\n\
             constant = {}\ngauge_penalty = {}\ntol = {}\nmax_iter = {}\nmesh = log {} {} {}\n\
             sphere_samples = {}\ntaylor_order = {}\npin_inner = {}\n",
            self.theta,
            self.p,
            self.delta0,
            self.target_deviation,
            self.constant,
            self.gauge_penalty,
            self.tol,
            self.max_iter,
            self.mesh.points,
            self.mesh.r_in,
            self.mesh.r_out,
            self.sphere_samples,
            self.taylor_order,
            self.pin_inner
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_parse_and_round_trip() {
        let cfg = SolverConfig::parse("").unwrap();
        assert_eq!(cfg, SolverConfig::default());
        assert_eq!(cfg.p, -2.25);
        assert_eq!(SolverConfig::parse(&cfg.to_text()).unwrap(), cfg);
    }

    #[test]
    fn p_follows_theta_unless_given() {
        let cfg = SolverConfig::parse("theta = 0.8\n").unwrap();
        assert!((cfg.p - (-2.1)).abs() < 1e-15);
        assert!(SolverConfig::parse("theta = 0.8\np = -1.6\n").is_err());
        assert!(SolverConfig::parse("theta = 0.8\np = -2.3 # fine\n").is_ok());
    }

    #[test]
    fn rejects_unknown_and_malformed_keys() {
        assert!(SolverConfig::parse("speed = 3\n").is_err());
        assert!(SolverConfig::parse("theta 0.5\n").is_err());
        assert!(SolverConfig::parse("theta = 0.5\ntheta = 0.4\n").is_err());
        assert!(SolverConfig::parse("theta = 1.5\n").is_err());
        assert!(SolverConfig::parse("mesh = lin 10 0.1 1\n").is_err());
        assert!(SolverConfig::parse("lambda = 0.5\n").is_err());
        let cfg = SolverConfig::parse("lambda = 16\nmesh = log 32 0.02 0.25\npin_inner = false\n").unwrap();
        assert_eq!(cfg.lambda, LambdaChoice::Fixed(16.0));
        assert_eq!(cfg.mesh.points, 32);
        assert!(!cfg.pin_inner);
    }
}
