//! Least-squares solution of the monopole equation on an annulus with the
//! radial ansatz `A = A₀ + Σ_k f_k(r)·T_k`, `σ = u(r)·Σ₀`.
//!
//! The weighted objective
//!
//! ```text
//! Φ = Σ_r w(r) ⟨|res|²⟩_{S_r} + γ Σ_r w(r) ⟨|d⋆_{A₀}(A − A₀)|²⟩_{S_r},   w = r^{−2p−7}·r⁶·Δr
//! ```
//!
//! is a quadratic form in per-radius monomials of the profiles, so the
//! sphere sums are assembled once and the optimiser works on Gram matrices.

pub mod assemble;
mod config;
mod fit;
mod mesh;
mod templates;

use std::sync::Arc;

use nalgebra::{Cholesky, DMatrix, DVector};
use serde::Serialize;

pub use assemble::{assemble, Grams, Ingredients, Layout};
pub use config::{default_p, LambdaChoice, MeshSpec, ProblemKind, SolverConfig};
pub use fit::{fit_decay_rate, DecayFit, FitStatus};
pub use mesh::RadialMesh;
pub use templates::{
    AnsatzField, FieldTemplates, RadialHiggs, RotationTemplate, TaylorTemplate, TaylorTemplates, TemplateSet,
    TAYLOR_STEP,
};

use crate::error::{invalid, Error, Result};
use crate::fields::{
    decay_profile, ConstantStructure, DecayOptions, DecayTable, FieldPair, LieField, NodalProfile, Profile,
    ProfileField, ZeroField,
};
use crate::g2::euclidean_phi;
use crate::lie::so_basis;
use crate::model::{canonical_connection, pullback_to_cone, CanonicalHiggs};
use crate::poly::PolyFormField;
use crate::rescale::{c0_deviation, c5_deviation, diffeo_quadratic, family, rescale_phi, C5Report, ScaleMap};

/// Profiles `f_k` and `u` on a radial mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialProfilePair {
    pub mesh: RadialMesh,
    pub f: Vec<Vec<f64>>,
    pub u: Vec<f64>,
}

impl RadialProfilePair {
    pub fn zeros(mesh: RadialMesh, templates: usize) -> Self {
        let n = mesh.len();
        Self { mesh, f: vec![vec![0.0; n]; templates], u: vec![0.0; n] }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.mesh.len();
        if self.f.is_empty() || self.f.iter().any(|f| f.len() != n) || self.u.len() != n {
            return invalid("profile lengths must match the mesh");
        }
        if self.f.iter().flatten().chain(&self.u).any(|v| !v.is_finite()) {
            return invalid("profiles must be finite");
        }
        Ok(())
    }

    /// `max |f_k − g_k|, |u − v|` over the mesh.
    pub fn max_difference(&self, other: &Self) -> f64 {
        let a = self.f.iter().flatten().chain(&self.u);
        let b = other.f.iter().flatten().chain(&other.u);
        a.zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }

    /// CSV with header `r,f,u` (one template) or `r,f1,…,fK,u`.
    pub fn to_csv(&self) -> String {
        let k = self.f.len();
        let mut s = String::from("r,");
        if k == 1 {
            s.push_str("f,");
        } else {
            for i in 1..=k {
                s.push_str(&format!("f{i},"));
            }
        }
        s.push_str("u\n");
        for (i, r) in self.mesh.points().iter().enumerate() {
            s.push_str(&r.to_string());
            for f in &self.f {
                s.push_str(&format!(",{}", f[i]));
            }
            s.push_str(&format!(",{}\n", self.u[i]));
        }
        s
    }

    /// The pair `(A₀ + Σ f_k T_k, u·Σ₀)` with spline-interpolated profiles.
    pub fn field_pair(&self, ing: &Ingredients) -> Result<FieldPair> {
        let r = self.mesh.points().to_vec();
        let profiles = self
            .f
            .iter()
            .map(|f| Ok(Arc::new(NodalProfile::new(r.clone(), f.clone())?) as Arc<dyn Profile>))
            .collect::<Result<Vec<_>>>()?;
        let a = Arc::new(AnsatzField::new(ing.a0.clone(), ing.templates.clone(), profiles)?);
        let sigma: Arc<dyn LieField> = match &ing.higgs {
            Some(h) => {
                let u: Arc<dyn Profile> = Arc::new(NodalProfile::new(r, self.u.clone())?);
                Arc::new(ProfileField::new(None, vec![(u, h.clone())])?)
            }
            None => Arc::new(ZeroField { rank: ing.a0.rank(), degree: 0 }),
        };
        FieldPair::new(a, sigma, self.mesh.r_in(), self.mesh.r_out())
    }
}

/// Where a problem came from.
#[derive(Debug, Clone, Serialize)]
pub struct ProblemInfo {
    pub kind: ProblemKind,
    pub lambda: f64,
    /// `sup_{B(1/4)} |φ̃ − φ₀|`.
    pub c0_deviation: f64,
    pub c5: Option<C5Report>,
    /// `c_φ/λ < δ₀/2`, the smallness condition on the `C⁵` bound.
    pub c5_condition_met: Option<bool>,
}

/// A radial problem: ingredients, an optional manufactured target and, when
/// known, the exact profiles.
#[derive(Clone)]
pub struct Problem {
    pub ingredients: Ingredients,
    /// Minimise `res(f, u) − res(f†, u†)` instead of `res(f, u)`.
    pub target: Option<RadialProfilePair>,
    pub exact: Option<RadialProfilePair>,
    pub info: ProblemInfo,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Converged,
    MaxIterations,
    /// No Armijo step was found, or `Φ` stopped decreasing in relative terms.
    Stagnated,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    pub status: SolveStatus,
    pub iterations: usize,
    /// `√(residual part of Φ)` at the start and end.
    pub initial_residual: f64,
    pub final_residual: f64,
    /// `√(residual part)` after each accepted step, starting with the initial value.
    pub residual_history: Vec<f64>,
    /// `Φ` after each accepted step; non-increasing.
    pub objective_history: Vec<f64>,
    pub gauge_term: f64,
    pub gradient_steps: usize,
    /// `max_k |f_k(r_in)|`.
    pub boundary_mismatch: f64,
    pub decay: Option<DecayFit>,
    /// The table behind `decay`, written separately as CSV.
    #[serde(skip)]
    pub decay_table: Option<DecayTable>,
    pub problem: ProblemInfo,
}

impl SolveReport {
    pub fn reduction(&self) -> f64 {
        self.initial_residual / self.final_residual
    }
}

/// `Φ` as a function of the free profile values.
struct Objective<'a> {
    grams: &'a Grams,
    mesh: &'a RadialMesh,
    /// Target monomials `m_i†` per radius.
    target: Option<Vec<Vec<f64>>>,
    gamma: f64,
    free: Vec<usize>,
    n: usize,
}

struct Evaluation {
    residual: f64,
    gauge: f64,
}

impl Evaluation {
    fn total(&self) -> f64 {
        self.residual + self.gauge
    }
}

impl<'a> Objective<'a> {
    fn layout(&self) -> Layout {
        self.grams.layout
    }

    fn split<'b>(&self, x: &'b [f64]) -> (Vec<&'b [f64]>, Option<&'b [f64]>) {
        let k = self.layout().templates;
        let n = self.n;
        let f = (0..k).map(|i| &x[i * n..(i + 1) * n]).collect();
        let u = self.layout().higgs.then(|| &x[k * n..(k + 1) * n]);
        (f, u)
    }

    fn monomials(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let (f, u) = self.split(x);
        let df: Vec<Vec<f64>> = f.iter().map(|f| self.mesh.derivative(f)).collect();
        let du = u.map(|u| self.mesh.derivative(u));
        (0..self.n)
            .map(|i| {
                let fi: Vec<f64> = f.iter().map(|f| f[i]).collect();
                let dfi: Vec<f64> = df.iter().map(|d| d[i]).collect();
                let (ui, dui) = match (u, &du) {
                    (Some(u), Some(du)) => (u[i], du[i]),
                    _ => (0.0, 0.0),
                };
                self.layout().monomials(&fi, &dfi, ui, dui)
            })
            .collect()
    }

    fn shifted(&self, m: &[Vec<f64>]) -> Vec<Vec<f64>> {
        match &self.target {
            Some(t) => m.iter().zip(t).map(|(a, b)| a.iter().zip(b).map(|(x, y)| x - y).collect()).collect(),
            None => m.to_vec(),
        }
    }

    fn evaluate(&self, x: &[f64]) -> Evaluation {
        let m = self.monomials(x);
        let dm = self.shifted(&m);
        let mut residual = 0.0;
        let mut gauge = 0.0;
        for i in 0..self.n {
            let d = DVector::from_column_slice(&dm[i]);
            residual += d.dot(&(&self.grams.residual[i] * &d));
            if self.gamma > 0.0 {
                let v = DVector::from_column_slice(&m[i]);
                gauge += self.gamma * v.dot(&(&self.grams.gauge[i] * &v));
            }
        }
        Evaluation { residual: residual.max(0.0), gauge: gauge.max(0.0) }
    }

    /// `∂m_i/∂x_j` as `(j, column)` pairs for the nodes `j` that touch radius `i`.
    fn monomial_jacobian(&self, x: &[f64], i: usize) -> Vec<(usize, Vec<f64>)> {
        let l = self.layout();
        let (f, u) = self.split(x);
        let n = self.n;
        let st = self.mesh.stencil(i);
        let mut out = Vec::new();
        for k in 0..l.templates {
            for &(j, c) in &st {
                let mut col = vec![0.0; l.len()];
                col[l.df(k)] = c;
                if j == i {
                    col[l.f(k)] = 1.0;
                    for q in 0..l.templates {
                        let idx = l.ff(k, q);
                        col[idx] += if q == k { 2.0 * f[k][i] } else { f[q][i] };
                    }
                    if let Some(u) = u {
                        col[l.fu(k)] = u[i];
                    }
                }
                out.push((k * n + j, col));
            }
        }
        if u.is_some() {
            for &(j, c) in &st {
                let mut col = vec![0.0; l.len()];
                col[l.du()] = c;
                if j == i {
                    col[l.u()] = 1.0;
                    for k in 0..l.templates {
                        col[l.fu(k)] = f[k][i];
                    }
                }
                out.push((l.templates * n + j, col));
            }
        }
        out
    }

    /// Gauss–Newton normal matrix and gradient of `Φ` over the free variables.
    fn normal_equations(&self, x: &[f64]) -> (DMatrix<f64>, DVector<f64>) {
        let nf = self.free.len();
        let mut pos = vec![usize::MAX; x.len()];
        for (p, &v) in self.free.iter().enumerate() {
            pos[v] = p;
        }
        let m = self.monomials(x);
        let dm = self.shifted(&m);
        let mut h = DMatrix::zeros(nf, nf);
        let mut g = DVector::zeros(nf);
        for i in 0..self.n {
            let jac: Vec<(usize, DVector<f64>)> = self
                .monomial_jacobian(x, i)
                .into_iter()
                .filter(|(j, _)| pos[*j] != usize::MAX)
                .map(|(j, c)| (pos[j], DVector::from_vec(c)))
                .collect();
            let gi = &self.grams.residual[i];
            let qi = &self.grams.gauge[i];
            let rd = gi * DVector::from_column_slice(&dm[i]);
            let rq = qi * DVector::from_column_slice(&m[i]) * self.gamma;
            for (a, ca) in &jac {
                g[*a] += 2.0 * ca.dot(&(&rd + &rq));
                let ha = gi * ca + qi * ca * self.gamma;
                for (b, cb) in &jac {
                    h[(*a, *b)] += 2.0 * cb.dot(&ha);
                }
            }
        }
        (h, g)
    }
}

/// Solves `(H + μ·diag(H))δ = −g` with increasing `μ` until Cholesky succeeds.
fn damped_step(h: &DMatrix<f64>, g: &DVector<f64>) -> Option<DVector<f64>> {
    let n = g.len();
    let scale: Vec<f64> = (0..n).map(|i| h[(i, i)].max(f64::MIN_POSITIVE).sqrt()).collect();
    let hs = DMatrix::from_fn(n, n, |i, j| h[(i, j)] / (scale[i] * scale[j]));
    let gs = DVector::from_fn(n, |i, _| g[i] / scale[i]);
    let mut mu = 1e-12;
    while mu < 1e8 {
        let mut a = hs.clone();
        for i in 0..n {
            a[(i, i)] += mu;
        }
        if let Some(c) = Cholesky::new(a) {
            let d = c.solve(&(-&gs));
            if d.iter().all(|v| v.is_finite()) {
                return Some(DVector::from_fn(n, |i, _| d[i] / scale[i]));
            }
        }
        mu *= 100.0;
    }
    None
}

const ARMIJO: f64 = 1e-4;
const BACKTRACK: f64 = 0.5;
const MAX_HALVINGS: usize = 40;
/// Relative decrease of `Φ` below which a step counts as stalled.
const STALL_GAIN: f64 = 1e-10;
const STALL_STEPS: usize = 3;

fn line_search(
    obj: &Objective,
    x: &[f64],
    phi: f64,
    g: &DVector<f64>,
    d: &DVector<f64>,
    alpha0: f64,
) -> Option<(Vec<f64>, Evaluation)> {
    let slope = g.dot(d);
    if !(slope < 0.0) {
        return None;
    }
    let mut alpha = alpha0;
    for _ in 0..MAX_HALVINGS {
        let mut trial = x.to_vec();
        for (p, &v) in obj.free.iter().enumerate() {
            trial[v] += alpha * d[p];
        }
        let e = obj.evaluate(&trial);
        if e.total() <= phi + ARMIJO * alpha * slope {
            return Some((trial, e));
        }
        alpha *= BACKTRACK;
    }
    None
}

/// Damped Gauss–Newton with Armijo backtracking and a gradient fallback.
pub fn solve_monopole(
    problem: &Problem,
    cfg: &SolverConfig,
    init: &RadialProfilePair,
) -> Result<(RadialProfilePair, SolveReport)> {
    cfg.validate()?;
    init.validate()?;
    let ing = &problem.ingredients;
    ing.validate()?;
    if init.f.len() != ing.templates.len() {
        return invalid(format!("init has {} profiles for {} templates", init.f.len(), ing.templates.len()));
    }
    let grams = assemble(ing, &init.mesh, cfg.sphere_samples, cfg.weight_exponent())?;
    let (profiles, mut report) = optimise(problem, &grams, cfg, init)?;
    if let Ok(table) = solution_decay_table(problem, &profiles) {
        report.decay = fit_decay_rate(&table, cfg.theta).ok();
        report.decay_table = Some(table);
    }
    Ok((profiles, report))
}

/// The optimiser on pre-assembled Gram matrices.
pub fn optimise(
    problem: &Problem,
    grams: &Grams,
    cfg: &SolverConfig,
    init: &RadialProfilePair,
) -> Result<(RadialProfilePair, SolveReport)> {
    let mesh = &init.mesh;
    let n = mesh.len();
    let layout = grams.layout;
    if grams.residual.len() != n {
        return invalid("Gram matrices do not match the mesh");
    }
    let k = layout.templates;
    let mut x: Vec<f64> = init.f.iter().flatten().copied().collect();
    if layout.higgs {
        x.extend(&init.u);
    }
    let blocks = k + usize::from(layout.higgs);
    let free: Vec<usize> = (0..blocks * n).filter(|v| !(cfg.pin_inner && v % n == 0)).collect();
    if cfg.pin_inner {
        for b in 0..blocks {
            x[b * n] = 0.0;
        }
    }
    let target = match &problem.target {
        Some(t) => {
            t.validate()?;
            if t.mesh != *mesh || t.f.len() != k {
                return invalid("target profiles must share the mesh and template count");
            }
            let mut tx: Vec<f64> = t.f.iter().flatten().copied().collect();
            if layout.higgs {
                tx.extend(&t.u);
            }
            let probe = Objective { grams, mesh, target: None, gamma: 0.0, free: vec![], n };
            Some(probe.monomials(&tx))
        }
        None => None,
    };
    let obj = Objective { grams, mesh, target, gamma: cfg.gauge_penalty, free, n };

    let mut e = obj.evaluate(&x);
    let initial_residual = e.residual.sqrt();
    let mut residual_history = vec![initial_residual];
    let mut objective_history = vec![e.total()];
    let mut status = SolveStatus::MaxIterations;
    let mut iterations = 0;
    let mut gradient_steps = 0;
    let mut stalled = 0;
    while iterations < cfg.max_iter {
        if e.residual.sqrt() <= cfg.tol {
            status = SolveStatus::Converged;
            break;
        }
        let (h, g) = obj.normal_equations(&x);
        let phi = e.total();
        let mut accepted = damped_step(&h, &g).and_then(|d| line_search(&obj, &x, phi, &g, &d, 1.0));
        if accepted.is_none() {
            // Exact minimiser along −g of the Gauss–Newton model.
            let curv = g.dot(&(&h * &g));
            let alpha = if curv > 0.0 { g.norm_squared() / curv } else { 1.0 };
            accepted = line_search(&obj, &x, phi, &g, &(-&g), alpha);
            if accepted.is_some() {
                gradient_steps += 1;
            }
        }
        let Some((nx, ne)) = accepted else {
            status = SolveStatus::Stagnated;
            break;
        };
        iterations += 1;
        let gain = (phi - ne.total()) / phi;
        stalled = if gain < STALL_GAIN { stalled + 1 } else { 0 };
        x = nx;
        e = ne;
        residual_history.push(e.residual.sqrt());
        objective_history.push(e.total());
        if stalled >= STALL_STEPS {
            status = SolveStatus::Stagnated;
            break;
        }
    }
    if status != SolveStatus::Converged && e.residual.sqrt() <= cfg.tol {
        status = SolveStatus::Converged;
    }
    let f: Vec<Vec<f64>> = (0..k).map(|i| x[i * n..(i + 1) * n].to_vec()).collect();
    let u = if layout.higgs { x[k * n..(k + 1) * n].to_vec() } else { vec![0.0; n] };
    let boundary_mismatch = f.iter().map(|f| f[0].abs()).fold(0.0, f64::max);
    let profiles = RadialProfilePair { mesh: mesh.clone(), f, u };
    let report = SolveReport {
        status,
        iterations,
        initial_residual,
        final_residual: e.residual.sqrt(),
        residual_history,
        objective_history,
        gauge_term: e.gauge,
        gradient_steps,
        boundary_mismatch,
        decay: None,
        decay_table: None,
        problem: problem.info.clone(),
    };
    Ok((profiles, report))
}

/// Radii used for the decay table of a solution: log-spaced strictly inside
/// the annulus.
pub fn decay_radii(mesh: &RadialMesh, count: usize) -> Vec<f64> {
    let (a, b) = (mesh.r_in() * 1.02, mesh.r_out() / 1.02);
    (0..count).map(|i| a * (b / a).powf(i as f64 / (count - 1) as f64)).collect()
}

/// Sphere samples for the solution's decay table.
pub const DECAY_SAMPLES: usize = 32;

pub fn solution_decay_table(problem: &Problem, profiles: &RadialProfilePair) -> Result<DecayTable> {
    let pair = profiles.field_pair(&problem.ingredients)?;
    let opts = DecayOptions { samples_per_sphere: DECAY_SAMPLES, ..DecayOptions::default() };
    decay_profile(&pair, problem.ingredients.a0.as_ref(), &decay_radii(&profiles.mesh, 10), &opts)
}

/// `λ ≥ 1` at which `sup_{B(1/4)}|rescale(φ, λ) − φ₀|` equals `target`.
pub fn tune_lambda(phi: &PolyFormField, target: f64) -> Result<f64> {
    let phi0 = euclidean_phi();
    let dev = |l: f64| c0_deviation(&rescale_phi(phi, ScaleMap::new(l)?), &phi0, 0.25);
    if dev(1.0)? <= target {
        return Ok(1.0);
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while dev(hi.exp())? > target {
        lo = hi;
        hi *= 2.0;
        if hi > 40.0 {
            return Err(Error::Precondition(format!("no λ ≤ e⁴⁰ reaches C⁰ deviation {target}")));
        }
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if dev(mid.exp())? > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi.exp())
}

/// so(2) over the flat model with `Θ = J(y₁dy² − y₂dy¹)/r²` and `Σ₀ = J/r`.
pub fn abelian_ingredients() -> Result<Ingredients> {
    let j = so_basis(2).remove(0);
    Ok(Ingredients {
        structure: Arc::new(ConstantStructure::new(euclidean_phi())?),
        a0: Arc::new(ZeroField { rank: 2, degree: 1 }),
        templates: Arc::new(FieldTemplates::new(vec![Arc::new(RotationTemplate::new(j.clone()))])?),
        higgs: Some(Arc::new(RadialHiggs::new(j))),
    })
}

/// Smooth manufactured profiles vanishing at `r_in`.
pub fn manufactured_profiles(mesh: &RadialMesh) -> RadialProfilePair {
    let (a, b) = (mesh.r_in(), mesh.r_out());
    let s = |r: f64| (r - a) / (b - a);
    let f = mesh.points().iter().map(|&r| 0.3 * (std::f64::consts::PI * s(r)).sin() + 0.1 * s(r)).collect();
    let u = mesh.points().iter().map(|&r| 0.2 * s(r) * (1.0 - 0.5 * s(r))).collect();
    RadialProfilePair { mesh: mesh.clone(), f: vec![f], u }
}

/// The abelian problem, with the manufactured target when `manufactured`.
pub fn abelian_problem(cfg: &SolverConfig, manufactured: bool) -> Result<Problem> {
    let mesh = cfg.mesh.build()?;
    let target = manufactured.then(|| manufactured_profiles(&mesh));
    Ok(Problem {
        ingredients: abelian_ingredients()?,
        exact: Some(target.clone().unwrap_or_else(|| RadialProfilePair::zeros(mesh, 1))),
        target,
        info: ProblemInfo {
            kind: ProblemKind::Abelian,
            lambda: 1.0,
            c0_deviation: 0.0,
            c5: None,
            c5_condition_met: None,
        },
    })
}

/// The canonical so(6) cone against `φ̃ = rescale(Ψ₁*φ₀, λ) = Ψ_{1/λ}*φ₀`.
///
/// Checks the precondition `sup_{B(1/4)}|φ̃ − φ₀| ≤ δ₀` and records the
/// `C⁵` report; the exact solution is `(Ψ_{1/λ}*A₀, 0)`.
pub fn perturbed_problem(cfg: &SolverConfig) -> Result<Problem> {
    let phi = family("diffeo")?;
    let lambda = match cfg.lambda {
        LambdaChoice::Fixed(l) => l,
        LambdaChoice::Auto => tune_lambda(&phi, cfg.target_deviation)?,
    };
    let s = ScaleMap::new(lambda)?;
    let tilde = rescale_phi(&phi, s);
    let dev = c0_deviation(&tilde, &euclidean_phi(), 0.25)?;
    if dev > cfg.delta0 {
        return Err(Error::Precondition(format!(
            "rescaled structure deviates by {dev:.4} from φ₀ on B(1/4), above δ₀ = {}",
            cfg.delta0
        )));
    }
    let c5 = c5_deviation(&phi, s, cfg.constant)?;
    let c5_condition_met = Some(c5.c_phi / lambda < cfg.delta0 / 2.0);
    let a0: Arc<dyn LieField> = Arc::new(pullback_to_cone(canonical_connection(6)?));
    let templates = Arc::new(TaylorTemplates::new(a0.clone(), diffeo_quadratic(), cfg.taylor_order)?);
    let mesh = cfg.mesh.build()?;
    let t = 1.0 / lambda;
    let exact = RadialProfilePair {
        f: (1..=cfg.taylor_order).map(|k| vec![t.powi(k as i32); mesh.len()]).collect(),
        u: vec![0.0; mesh.len()],
        mesh,
    };
    Ok(Problem {
        ingredients: Ingredients { structure: Arc::new(tilde), a0, templates, higgs: Some(Arc::new(CanonicalHiggs)) },
        target: None,
        exact: Some(exact),
        info: ProblemInfo { kind: ProblemKind::Perturbed, lambda, c0_deviation: dev, c5: Some(c5), c5_condition_met },
    })
}

/// The problem named by `cfg.problem`.
pub fn build_problem(cfg: &SolverConfig) -> Result<Problem> {
    match cfg.problem {
        ProblemKind::Abelian => abelian_problem(cfg, true),
        ProblemKind::Perturbed => perturbed_problem(cfg),
    }
}

/// Starting profiles: `(A₀, 0)` for the perturbed problem, a perturbation
/// of the target for the manufactured one.
pub fn default_init(problem: &Problem, cfg: &SolverConfig) -> Result<RadialProfilePair> {
    let mesh = cfg.mesh.build()?;
    let k = problem.ingredients.templates.len();
    match &problem.target {
        Some(t) => {
            let mut init = t.clone();
            let (a, b) = (mesh.r_in(), mesh.r_out());
            for (i, &r) in mesh.points().iter().enumerate() {
                let s = (r - a) / (b - a);
                for f in init.f.iter_mut() {
                    f[i] += 0.2 * s * (1.0 - s) + 0.05 * s;
                }
                init.u[i] -= 0.1 * s;
            }
            Ok(init)
        }
        None => Ok(RadialProfilePair::zeros(mesh, k)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_cfg(text: &str) -> SolverConfig {
        SolverConfig::parse(&format!("mesh = log 24 0.015625 0.25\nsphere_samples = 24\n{text}")).unwrap()
    }

    #[test]
    fn gram_form_matches_direct_residual() {
        let cfg = small_cfg("problem = abelian\n");
        let p = abelian_problem(&cfg, false).unwrap();
        let mesh = cfg.mesh.build().unwrap();
        let grams = assemble(&p.ingredients, &mesh, 24, cfg.weight_exponent()).unwrap();
        let (f, df, u, du) = ([0.3], [-1.2], 0.7, 2.0);
        let m = grams.layout.monomials(&f, &df, u, du);
        let i = 5;
        let r = mesh.points()[i];
        let w = r.powf(cfg.weight_exponent()) * r.powi(6) * mesh.cell_widths()[i];
        let v = DVector::from_vec(m);
        let gram = v.dot(&(&grams.residual[i] * &v));
        let direct = assemble::direct_residual_at(&p.ingredients, r, 24, &f, &df, u, du).unwrap() * w;
        assert!((gram - direct).abs() <= 1e-12 * direct, "{gram} vs {direct}");
    }
}
