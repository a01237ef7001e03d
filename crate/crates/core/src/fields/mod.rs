//! Connections and Higgs fields on annuli of ℝ⁷, their curvature and
//! covariant derivatives, the monopole residual `F_A ∧ ψ + ⋆_g d_A σ`, and
//! decay profiling against a model connection.
//!
//! Every field is an so(m)-valued 0- or 1-form evaluated pointwise. Fields
//! built from a two-chart bundle report which chart (gauge) they use at a
//! point; derivative stencils always stay in the chart of their centre.

mod decay;
mod grid;
mod profile;

use std::sync::Arc;

use serde::Serialize;

pub use decay::{decay_profile, DecayOptions, DecayRow, DecayTable};
pub use grid::GridField;
pub use profile::{NodalProfile, PowerProfile, Profile, ProfileField};

use crate::error::{invalid, Result};
use crate::forms::MultiIndex;
use crate::lie::{commutator, zero_mat, LieForm, LieMat};
use crate::sampling::norm;
use crate::{G2Structure, KForm, Point};

/// Which stereographic trivialization a value is expressed in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Chart {
    /// Excludes `+e₇`.
    North,
    /// Excludes `−e₇`.
    South,
}

/// Relative finite-difference step `h = 1e-4·|x|`.
pub const FD_REL_STEP: f64 = 1e-4;

/// An so(m)-valued 0-form (`degree() == 0`, one component) or 1-form
/// (`degree() == 1`, seven components `a_i` of `Σ a_i dy^i`).
pub trait LieField: Send + Sync {
    fn rank(&self) -> usize;

    fn degree(&self) -> usize;

    fn chart_at(&self, _x: &Point) -> Chart {
        Chart::North
    }

    fn eval_in(&self, chart: Chart, x: &Point) -> Result<Vec<LieMat>>;

    /// `jac[i][c] = ∂_i` of component `c`. Defaults to centered differences.
    fn jacobian_in(&self, chart: Chart, x: &Point) -> Result<Vec<Vec<LieMat>>> {
        fd_jacobian(self, chart, x, FD_REL_STEP, 2)
    }

    fn eval(&self, x: &Point) -> Result<Vec<LieMat>> {
        self.eval_in(self.chart_at(x), x)
    }
}

pub(crate) fn n_components(degree: usize) -> usize {
    if degree == 0 {
        1
    } else {
        7
    }
}

pub(crate) fn step_for(x: &Point, rel: f64) -> f64 {
    let r = norm(x);
    rel * if r > 0.0 { r } else { 1.0 }
}

fn shifted(x: &Point, i: usize, d: f64) -> Point {
    let mut y = *x;
    y[i] += d;
    y
}

/// Centered differences of order 2 or 4 with step `rel·|x|`.
pub fn fd_jacobian<F: LieField + ?Sized>(
    f: &F,
    chart: Chart,
    x: &Point,
    rel: f64,
    order: usize,
) -> Result<Vec<Vec<LieMat>>> {
    let h = step_for(x, rel);
    let mut jac = Vec::with_capacity(7);
    for i in 0..7 {
        let row = match order {
            2 => {
                let p = f.eval_in(chart, &shifted(x, i, h))?;
                let m = f.eval_in(chart, &shifted(x, i, -h))?;
                p.iter().zip(&m).map(|(p, m)| (p - m) / (2.0 * h)).collect()
            }
            4 => {
                let p2 = f.eval_in(chart, &shifted(x, i, 2.0 * h))?;
                let p1 = f.eval_in(chart, &shifted(x, i, h))?;
                let m1 = f.eval_in(chart, &shifted(x, i, -h))?;
                let m2 = f.eval_in(chart, &shifted(x, i, -2.0 * h))?;
                (0..p1.len()).map(|c| (&m2[c] - &p2[c] + (&p1[c] - &m1[c]) * 8.0) / (12.0 * h)).collect()
            }
            _ => return invalid(format!("finite-difference order {order} unsupported")),
        };
        jac.push(row);
    }
    Ok(jac)
}

/// `F_ij = ∂_i A_j − ∂_j A_i + [A_i, A_j]` from values and first derivatives.
pub fn curvature_from(a: &[LieMat], jac: &[Vec<LieMat>]) -> LieForm {
    let m = a[0].nrows();
    let mut f = LieForm::zero(2, m);
    for i in 0..7 {
        for j in i + 1..7 {
            let idx = MultiIndex::from_mask((1 << i) | (1 << j));
            *f.coeff_mut(idx) = &jac[i][j] - &jac[j][i] + commutator(&a[i], &a[j]);
        }
    }
    f
}

/// `(d_A σ)_i = ∂_i σ + [A_i, σ]`.
pub fn covariant_d_from(a: &[LieMat], sigma: &LieMat, dsigma: &[Vec<LieMat>]) -> LieForm {
    let comps = (0..7).map(|i| &dsigma[i][0] + commutator(&a[i], sigma)).collect();
    LieForm::one_form(sigma.nrows(), comps).expect("seven square blocks")
}

/// A 3-form field `x ↦ φ(x)` with its induced G₂-structure.
pub trait StructureField: Send + Sync {
    fn phi_at(&self, x: &Point) -> Result<KForm>;

    fn structure_at(&self, x: &Point) -> Result<G2Structure> {
        G2Structure::from_phi(self.phi_at(x)?)
    }
}

/// A constant 3-form.
#[derive(Debug, Clone)]
pub struct ConstantStructure {
    g2: G2Structure,
}

impl ConstantStructure {
    pub fn new(phi: KForm) -> Result<Self> {
        Ok(Self { g2: G2Structure::from_phi(phi)? })
    }
}

impl StructureField for ConstantStructure {
    fn phi_at(&self, _x: &Point) -> Result<KForm> {
        Ok(self.g2.phi.clone())
    }

    fn structure_at(&self, _x: &Point) -> Result<G2Structure> {
        Ok(self.g2.clone())
    }
}

/// A connection `A` and Higgs field `σ` on the annulus `r_in ≤ |x| ≤ r_out`.
#[derive(Clone)]
pub struct FieldPair {
    pub a: Arc<dyn LieField>,
    pub sigma: Arc<dyn LieField>,
    pub r_in: f64,
    pub r_out: f64,
}

impl std::fmt::Debug for FieldPair {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FieldPair")
            .field("rank", &self.a.rank())
            .field("r_in", &self.r_in)
            .field("r_out", &self.r_out)
            .finish()
    }
}

impl FieldPair {
    pub fn new(a: Arc<dyn LieField>, sigma: Arc<dyn LieField>, r_in: f64, r_out: f64) -> Result<Self> {
        if a.degree() != 1 || sigma.degree() != 0 {
            return invalid("a FieldPair needs a 1-form connection and a 0-form Higgs field");
        }
        if a.rank() != sigma.rank() {
            return invalid(format!("rank mismatch: A is so({}), σ is so({})", a.rank(), sigma.rank()));
        }
        if !(r_in > 0.0 && r_in < r_out && r_out.is_finite()) {
            return invalid(format!("annulus needs 0 < r_in < r_out, got [{r_in}, {r_out}]"));
        }
        Ok(Self { a, sigma, r_in, r_out })
    }

    pub fn rank(&self) -> usize {
        self.a.rank()
    }

    pub fn chart_at(&self, x: &Point) -> Chart {
        self.a.chart_at(x)
    }

    /// Rejects points whose stencil leaves the annulus.
    pub fn check_point(&self, x: &Point) -> Result<()> {
        let r = norm(x);
        let h = 2.0 * FD_REL_STEP * r;
        if r - h < self.r_in * (1.0 - 1e-12) || r + h > self.r_out * (1.0 + 1e-12) {
            return invalid(format!(
                "point at radius {r} leaves the annulus [{}, {}] with its stencil",
                self.r_in, self.r_out
            ));
        }
        Ok(())
    }
}

/// Curvature of a single connection at `x` in the given chart.
pub fn curvature_of(a: &dyn LieField, chart: Chart, x: &Point) -> Result<LieForm> {
    let v = a.eval_in(chart, x)?;
    let jac = a.jacobian_in(chart, x)?;
    Ok(curvature_from(&v, &jac))
}

pub fn curvature(p: &FieldPair, x: &Point) -> Result<LieForm> {
    p.check_point(x)?;
    curvature_of(p.a.as_ref(), p.chart_at(x), x)
}

pub fn covariant_d(p: &FieldPair, x: &Point) -> Result<LieForm> {
    p.check_point(x)?;
    let chart = p.chart_at(x);
    let a = p.a.eval_in(chart, x)?;
    let s = p.sigma.eval_in(chart, x)?;
    let ds = p.sigma.jacobian_in(chart, x)?;
    Ok(covariant_d_from(&a, &s[0], &ds))
}

/// `F_A ∧ ψ + ⋆_g(d_A σ)` at `x`; an so(m)-valued 6-form.
pub fn monopole_residual(p: &FieldPair, g: &dyn StructureField, x: &Point) -> Result<LieForm> {
    p.check_point(x)?;
    let st = g.structure_at(x)?;
    let chart = p.chart_at(x);
    let a = p.a.eval_in(chart, x)?;
    let ja = p.a.jacobian_in(chart, x)?;
    let s = p.sigma.eval_in(chart, x)?;
    let js = p.sigma.jacobian_in(chart, x)?;
    residual_from(&a, &ja, &s[0], &js, &st)
}

pub(crate) fn residual_from(
    a: &[LieMat],
    ja: &[Vec<LieMat>],
    s: &LieMat,
    js: &[Vec<LieMat>],
    st: &G2Structure,
) -> Result<LieForm> {
    let f = curvature_from(a, ja);
    let mut r = f.wedge_scalar(&st.psi)?;
    let d = covariant_d_from(a, s, js);
    r.axpy(1.0, &d.hodge(&st.g));
    Ok(r)
}

/// The zero field of the given degree and rank.
#[derive(Debug, Clone)]
pub struct ZeroField {
    pub rank: usize,
    pub degree: usize,
}

impl LieField for ZeroField {
    fn rank(&self) -> usize {
        self.rank
    }

    fn degree(&self) -> usize {
        self.degree
    }

    fn eval_in(&self, _chart: Chart, _x: &Point) -> Result<Vec<LieMat>> {
        Ok(vec![zero_mat(self.rank); n_components(self.degree)])
    }

    fn jacobian_in(&self, _chart: Chart, _x: &Point) -> Result<Vec<Vec<LieMat>>> {
        Ok(vec![vec![zero_mat(self.rank); n_components(self.degree)]; 7])
    }
}

/// Constant coefficients `a_i` (or a constant Higgs value).
#[derive(Debug, Clone)]
pub struct ConstantField {
    comps: Vec<LieMat>,
}

impl ConstantField {
    pub fn new(comps: Vec<LieMat>) -> Result<Self> {
        if comps.len() != 1 && comps.len() != 7 {
            return invalid("a constant field has 1 or 7 components");
        }
        let m = comps[0].nrows();
        if comps.iter().any(|c| c.nrows() != m || c.ncols() != m) {
            return invalid("components must share one square shape");
        }
        Ok(Self { comps })
    }
}

impl LieField for ConstantField {
    fn rank(&self) -> usize {
        self.comps[0].nrows()
    }

    fn degree(&self) -> usize {
        usize::from(self.comps.len() == 7)
    }

    fn eval_in(&self, _chart: Chart, _x: &Point) -> Result<Vec<LieMat>> {
        Ok(self.comps.clone())
    }

    fn jacobian_in(&self, _chart: Chart, _x: &Point) -> Result<Vec<Vec<LieMat>>> {
        Ok(vec![vec![zero_mat(self.rank()); self.comps.len()]; 7])
    }
}

/// Dilation pullback `y ↦ λ·f(λy)`: the 1-form pullback `Γ*A` for
/// connections and the rescaled Higgs field `λ·σ(λy)` for 0-forms.
pub struct ScaledField {
    inner: Arc<dyn LieField>,
    lambda: f64,
}

impl ScaledField {
    pub fn new(inner: Arc<dyn LieField>, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return invalid(format!("scale factor must be positive, got {lambda}"));
        }
        Ok(Self { inner, lambda })
    }
}

impl LieField for ScaledField {
    fn rank(&self) -> usize {
        self.inner.rank()
    }

    fn degree(&self) -> usize {
        self.inner.degree()
    }

    fn chart_at(&self, y: &Point) -> Chart {
        self.inner.chart_at(&y.map(|c| c * self.lambda))
    }

    fn eval_in(&self, chart: Chart, y: &Point) -> Result<Vec<LieMat>> {
        let v = self.inner.eval_in(chart, &y.map(|c| c * self.lambda))?;
        Ok(v.into_iter().map(|m| m * self.lambda).collect())
    }

    fn jacobian_in(&self, chart: Chart, y: &Point) -> Result<Vec<Vec<LieMat>>> {
        let l2 = self.lambda * self.lambda;
        let j = self.inner.jacobian_in(chart, &y.map(|c| c * self.lambda))?;
        Ok(j.into_iter().map(|row| row.into_iter().map(|m| m * l2).collect()).collect())
    }
}

/// `a + b`, evaluated in a shared chart chosen by `a`.
pub struct SumField {
    a: Arc<dyn LieField>,
    b: Arc<dyn LieField>,
}

impl SumField {
    pub fn new(a: Arc<dyn LieField>, b: Arc<dyn LieField>) -> Result<Self> {
        if a.rank() != b.rank() || a.degree() != b.degree() {
            return invalid("summands must share rank and degree");
        }
        Ok(Self { a, b })
    }
}

impl LieField for SumField {
    fn rank(&self) -> usize {
        self.a.rank()
    }

    fn degree(&self) -> usize {
        self.a.degree()
    }

    fn chart_at(&self, x: &Point) -> Chart {
        self.a.chart_at(x)
    }

    fn eval_in(&self, chart: Chart, x: &Point) -> Result<Vec<LieMat>> {
        let a = self.a.eval_in(chart, x)?;
        let b = self.b.eval_in(chart, x)?;
        Ok(a.into_iter().zip(b).map(|(a, b)| a + b).collect())
    }

    fn jacobian_in(&self, chart: Chart, x: &Point) -> Result<Vec<Vec<LieMat>>> {
        let a = self.a.jacobian_in(chart, x)?;
        let b = self.b.jacobian_in(chart, x)?;
        Ok(a.into_iter().zip(b).map(|(ra, rb)| ra.into_iter().zip(rb).map(|(a, b)| a + b).collect()).collect())
    }
}
