//! Angular templates `T_k` for the ansatz `A = A₀ + Σ_k f_k(r)·T_k`.

use std::sync::Arc;

use crate::error::{invalid, Result};
use crate::fields::{step_for, Chart, LieField, Profile, FD_REL_STEP};
use crate::lie::{zero_mat, LieMat};
use crate::poly::Poly7;
use crate::sampling::norm;
use crate::Point;

/// A family of so(m)-valued 1-form templates evaluated together, so that
/// shared work is done once per point.
pub trait TemplateSet: Send + Sync {
    fn rank(&self) -> usize;

    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `values[k][c]`, component `c` of `T_k`.
    fn values(&self, chart: Chart, x: &Point) -> Result<Vec<Vec<LieMat>>>;

    /// `jac[k][i][c] = ∂_i (T_k)_c`, by centered differences unless overridden.
    fn jacobians(&self, chart: Chart, x: &Point) -> Result<Vec<Vec<Vec<LieMat>>>> {
        let h = step_for(x, FD_REL_STEP);
        let mut out = vec![Vec::with_capacity(7); self.len()];
        for i in 0..7 {
            let mut p = *x;
            let mut m = *x;
            p[i] += h;
            m[i] -= h;
            let (vp, vm) = (self.values(chart, &p)?, self.values(chart, &m)?);
            for (k, (a, b)) in vp.iter().zip(&vm).enumerate() {
                out[k].push(a.iter().zip(b).map(|(a, b)| (a - b) / (2.0 * h)).collect());
            }
        }
        Ok(out)
    }
}

/// Independent template fields.
pub struct FieldTemplates {
    fields: Vec<Arc<dyn LieField>>,
    rank: usize,
}

impl FieldTemplates {
    pub fn new(fields: Vec<Arc<dyn LieField>>) -> Result<Self> {
        let Some(first) = fields.first() else {
            return invalid("at least one template is required");
        };
        let rank = first.rank();
        if fields.iter().any(|f| f.rank() != rank || f.degree() != 1) {
            return invalid("templates must be so(m)-valued 1-forms of one rank");
        }
        Ok(Self { fields, rank })
    }
}

impl TemplateSet for FieldTemplates {
    fn rank(&self) -> usize {
        self.rank
    }

    fn len(&self) -> usize {
        self.fields.len()
    }

    fn values(&self, chart: Chart, x: &Point) -> Result<Vec<Vec<LieMat>>> {
        self.fields.iter().map(|f| f.eval_in(chart, x)).collect()
    }

    fn jacobians(&self, chart: Chart, x: &Point) -> Result<Vec<Vec<Vec<LieMat>>>> {
        self.fields.iter().map(|f| f.jacobian_in(chart, x)).collect()
    }
}

/// Taylor coefficients `T_k = (1/k!)·∂ₜᵏ A_t |_{t=0}` of the pulled-back
/// connection `A_t = Ψ_t*A₀`, `Ψ_t(y) = y + t·P(y)`, by five-point
/// differences in `t`.
///
/// For `φ = Ψ_t*φ₀` the exact solution `(Ψ_t*A₀, 0)` has profiles `f_k = tᵏ`
/// up to the truncation order.
pub struct TaylorTemplates {
    a0: Arc<dyn LieField>,
    generator: [Poly7; 7],
    /// `dp[i][j] = ∂_i P_j`.
    dp: Vec<Vec<Poly7>>,
    order: usize,
    step: f64,
}

/// Step in `t` for the Taylor stencils.
pub const TAYLOR_STEP: f64 = 1e-2;

impl TaylorTemplates {
    pub fn new(a0: Arc<dyn LieField>, generator: [Poly7; 7], order: usize) -> Result<Self> {
        if a0.degree() != 1 {
            return invalid("the model must be a connection");
        }
        if !(1..=3).contains(&order) {
            return invalid("Taylor order must be 1, 2 or 3");
        }
        let dp = (0..7).map(|i| (0..7).map(|j| generator[j].derivative(i)).collect()).collect();
        Ok(Self { a0, generator, dp, order, step: TAYLOR_STEP })
    }

    /// `A_t(y)` in the chart of the caller.
    pub fn pulled(&self, chart: Chart, y: &Point, t: f64) -> Result<Vec<LieMat>> {
        let z: Point = std::array::from_fn(|j| y[j] + t * self.generator[j].eval(y));
        let a = self.a0.eval_in(chart, &z)?;
        if t == 0.0 {
            return Ok(a);
        }
        Ok((0..7)
            .map(|i| {
                let mut out = a[i].clone();
                for j in 0..7 {
                    let c = self.dp[i][j].eval(y);
                    if c != 0.0 {
                        out += &a[j] * (t * c);
                    }
                }
                out
            })
            .collect())
    }

    pub fn field(self: &Arc<Self>, k: usize) -> Arc<dyn LieField> {
        Arc::new(TaylorTemplate { set: self.clone(), k })
    }
}

impl TemplateSet for TaylorTemplates {
    fn rank(&self) -> usize {
        self.a0.rank()
    }

    fn len(&self) -> usize {
        self.order
    }

    fn values(&self, chart: Chart, y: &Point) -> Result<Vec<Vec<LieMat>>> {
        let d = self.step;
        let p1 = self.pulled(chart, y, d)?;
        let m1 = self.pulled(chart, y, -d)?;
        let p2 = self.pulled(chart, y, 2.0 * d)?;
        let m2 = self.pulled(chart, y, -2.0 * d)?;
        let c0 = if self.order >= 2 { Some(self.pulled(chart, y, 0.0)?) } else { None };
        let mut out = Vec::with_capacity(self.order);
        out.push((0..7).map(|c| (&m2[c] - &p2[c] + (&p1[c] - &m1[c]) * 8.0) / (12.0 * d)).collect());
        if let Some(c0) = &c0 {
            out.push(
                (0..7)
                    .map(|c| (-(&p2[c] + &m2[c]) + (&p1[c] + &m1[c]) * 16.0 - &c0[c] * 30.0) / (24.0 * d * d))
                    .collect(),
            );
        }
        if self.order >= 3 {
            out.push((0..7).map(|c| (&p2[c] - &m2[c] - (&p1[c] - &m1[c]) * 2.0) / (12.0 * d * d * d)).collect());
        }
        Ok(out)
    }
}

/// A single Taylor template as a field.
pub struct TaylorTemplate {
    set: Arc<TaylorTemplates>,
    k: usize,
}

impl LieField for TaylorTemplate {
    fn rank(&self) -> usize {
        self.set.rank()
    }

    fn degree(&self) -> usize {
        1
    }

    fn chart_at(&self, x: &Point) -> Chart {
        self.set.a0.chart_at(x)
    }

    fn eval_in(&self, chart: Chart, x: &Point) -> Result<Vec<LieMat>> {
        Ok(self.set.values(chart, x)?.swap_remove(self.k))
    }
}

/// `J·(y₁dy² − y₂dy¹)/|y|²` for a fixed so(m) element `J`: homogeneous of
/// degree −1, divergence free and without radial part.
#[derive(Debug, Clone)]
pub struct RotationTemplate {
    j: LieMat,
}

impl RotationTemplate {
    pub fn new(j: LieMat) -> Self {
        Self { j }
    }
}

impl LieField for RotationTemplate {
    fn rank(&self) -> usize {
        self.j.nrows()
    }

    fn degree(&self) -> usize {
        1
    }

    fn eval_in(&self, _chart: Chart, y: &Point) -> Result<Vec<LieMat>> {
        let r2: f64 = y.iter().map(|v| v * v).sum();
        if !(r2 > 0.0) {
            return invalid("rotation template is undefined at the origin");
        }
        let mut out = vec![zero_mat(self.rank()); 7];
        out[0] = &self.j * (-y[1] / r2);
        out[1] = &self.j * (y[0] / r2);
        Ok(out)
    }
}

/// `J/|y|` for a fixed so(m) element `J`.
#[derive(Debug, Clone)]
pub struct RadialHiggs {
    j: LieMat,
}

impl RadialHiggs {
    pub fn new(j: LieMat) -> Self {
        Self { j }
    }
}

impl LieField for RadialHiggs {
    fn rank(&self) -> usize {
        self.j.nrows()
    }

    fn degree(&self) -> usize {
        0
    }

    fn eval_in(&self, _chart: Chart, y: &Point) -> Result<Vec<LieMat>> {
        let r = norm(y);
        if !(r > 0.0) {
            return invalid("radial Higgs template is undefined at the origin");
        }
        Ok(vec![&self.j / r])
    }
}

/// `A₀ + Σ_k f_k(|x|)·T_k(x)` with jointly evaluated templates.
pub struct AnsatzField {
    a0: Arc<dyn LieField>,
    set: Arc<dyn TemplateSet>,
    profiles: Vec<Arc<dyn Profile>>,
}

impl AnsatzField {
    pub fn new(a0: Arc<dyn LieField>, set: Arc<dyn TemplateSet>, profiles: Vec<Arc<dyn Profile>>) -> Result<Self> {
        if profiles.len() != set.len() || a0.rank() != set.rank() || a0.degree() != 1 {
            return invalid("ansatz needs one profile per template and matching ranks");
        }
        Ok(Self { a0, set, profiles })
    }
}

impl LieField for AnsatzField {
    fn rank(&self) -> usize {
        self.a0.rank()
    }

    fn degree(&self) -> usize {
        1
    }

    fn chart_at(&self, x: &Point) -> Chart {
        self.a0.chart_at(x)
    }

    fn eval_in(&self, chart: Chart, x: &Point) -> Result<Vec<LieMat>> {
        let r = norm(x);
        let mut out = self.a0.eval_in(chart, x)?;
        for (f, t) in self.profiles.iter().zip(self.set.values(chart, x)?) {
            let fv = f.value(r);
            for (o, v) in out.iter_mut().zip(t) {
                *o += v * fv;
            }
        }
        Ok(out)
    }

    fn jacobian_in(&self, chart: Chart, x: &Point) -> Result<Vec<Vec<LieMat>>> {
        let r = norm(x);
        let mut out = self.a0.jacobian_in(chart, x)?;
        let vals = self.set.values(chart, x)?;
        let jacs = self.set.jacobians(chart, x)?;
        for ((f, tv), tj) in self.profiles.iter().zip(&vals).zip(&jacs) {
            let (fv, fd) = (f.value(r), f.derivative(r));
            for i in 0..7 {
                let radial = fd * x[i] / r;
                for c in 0..7 {
                    out[i][c] += &tj[i][c] * fv + &tv[c] * radial;
                }
            }
        }
        Ok(out)
    }
}
