use std::sync::Arc;

use super::{Chart, LieField};
use crate::error::{invalid, Result};
use crate::lie::LieMat;
use crate::sampling::norm;
use crate::Point;

/// A scalar radial profile `r ↦ f(r)`.
pub trait Profile: Send + Sync {
    fn value(&self, r: f64) -> f64;
    fn derivative(&self, r: f64) -> f64;
}

/// `amplitude · r^exponent`.
#[derive(Debug, Clone, Copy)]
pub struct PowerProfile {
    pub amplitude: f64,
    pub exponent: f64,
}

impl Profile for PowerProfile {
    fn value(&self, r: f64) -> f64 {
        self.amplitude * r.powf(self.exponent)
    }

    fn derivative(&self, r: f64) -> f64 {
        self.amplitude * self.exponent * r.powf(self.exponent - 1.0)
    }
}

/// Natural cubic spline through nodal values on a strictly increasing mesh.
/// Outside the mesh the end pieces are continued.
#[derive(Debug, Clone)]
pub struct NodalProfile {
    mesh: Vec<f64>,
    values: Vec<f64>,
    m2: Vec<f64>,
}

impl NodalProfile {
    pub fn new(mesh: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let n = mesh.len();
        if n < 2 || values.len() != n {
            return invalid("a nodal profile needs at least two nodes and one value per node");
        }
        if mesh.windows(2).any(|w| !(w[1] > w[0])) {
            return invalid("mesh must be strictly increasing");
        }
        if values.iter().any(|v| !v.is_finite()) {
            return invalid("non-finite profile value");
        }
        // Tridiagonal system for the second derivatives, natural ends.
        let mut m2 = vec![0.0; n];
        if n > 2 {
            let mut diag = vec![0.0; n];
            let mut rhs = vec![0.0; n];
            let mut upper = vec![0.0; n];
            for i in 1..n - 1 {
                let h0 = mesh[i] - mesh[i - 1];
                let h1 = mesh[i + 1] - mesh[i];
                let lower = h0 / 6.0;
                diag[i] = (h0 + h1) / 3.0;
                upper[i] = h1 / 6.0;
                rhs[i] = (values[i + 1] - values[i]) / h1 - (values[i] - values[i - 1]) / h0;
                if i > 1 {
                    let w = lower / diag[i - 1];
                    diag[i] -= w * upper[i - 1];
                    rhs[i] -= w * rhs[i - 1];
                }
            }
            for i in (1..n - 1).rev() {
                let next = if i + 1 < n - 1 { m2[i + 1] } else { 0.0 };
                m2[i] = (rhs[i] - upper[i] * next) / diag[i];
            }
        }
        Ok(Self { mesh, values, m2 })
    }

    pub fn mesh(&self) -> &[f64] {
        &self.mesh
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn piece(&self, r: f64) -> usize {
        let n = self.mesh.len();
        match self.mesh.partition_point(|&m| m <= r) {
            0 => 0,
            k if k >= n => n - 2,
            k => k - 1,
        }
    }
}

impl Profile for NodalProfile {
    fn value(&self, r: f64) -> f64 {
        let i = self.piece(r);
        let (x0, x1) = (self.mesh[i], self.mesh[i + 1]);
        let h = x1 - x0;
        let a = (x1 - r) / h;
        let b = (r - x0) / h;
        a * self.values[i]
            + b * self.values[i + 1]
            + ((a * a * a - a) * self.m2[i] + (b * b * b - b) * self.m2[i + 1]) * h * h / 6.0
    }

    fn derivative(&self, r: f64) -> f64 {
        let i = self.piece(r);
        let (x0, x1) = (self.mesh[i], self.mesh[i + 1]);
        let h = x1 - x0;
        let a = (x1 - r) / h;
        let b = (r - x0) / h;
        (self.values[i + 1] - self.values[i]) / h
            + (-(3.0 * a * a - 1.0) * self.m2[i] + (3.0 * b * b - 1.0) * self.m2[i + 1]) * h / 6.0
    }
}

/// `base + Σ_k f_k(|x|)·T_k(x)` for radial profiles `f_k` and templates `T_k`.
#[derive(Clone)]
pub struct ProfileField {
    base: Option<Arc<dyn LieField>>,
    terms: Vec<(Arc<dyn Profile>, Arc<dyn LieField>)>,
    rank: usize,
    degree: usize,
}

impl ProfileField {
    pub fn new(base: Option<Arc<dyn LieField>>, terms: Vec<(Arc<dyn Profile>, Arc<dyn LieField>)>) -> Result<Self> {
        let head = base.as_ref().or_else(|| terms.first().map(|t| &t.1));
        let Some(head) = head else {
            return invalid("a profile field needs a base or at least one template");
        };
        let (rank, degree) = (head.rank(), head.degree());
        if terms.iter().any(|(_, t)| t.rank() != rank || t.degree() != degree) {
            return invalid("templates must share the rank and degree of the base");
        }
        Ok(Self { base, terms, rank, degree })
    }

    pub fn base(&self) -> Option<&Arc<dyn LieField>> {
        self.base.as_ref()
    }
}

impl LieField for ProfileField {
    fn rank(&self) -> usize {
        self.rank
    }

    fn degree(&self) -> usize {
        self.degree
    }

    fn chart_at(&self, x: &Point) -> Chart {
        match &self.base {
            Some(b) => b.chart_at(x),
            None => self.terms[0].1.chart_at(x),
        }
    }

    fn eval_in(&self, chart: Chart, x: &Point) -> Result<Vec<LieMat>> {
        let r = norm(x);
        let mut out = match &self.base {
            Some(b) => b.eval_in(chart, x)?,
            None => vec![LieMat::zeros(self.rank, self.rank); super::n_components(self.degree)],
        };
        for (f, t) in &self.terms {
            let fv = f.value(r);
            for (o, v) in out.iter_mut().zip(t.eval_in(chart, x)?) {
                *o += v * fv;
            }
        }
        Ok(out)
    }

    fn jacobian_in(&self, chart: Chart, x: &Point) -> Result<Vec<Vec<LieMat>>> {
        let r = norm(x);
        let nc = super::n_components(self.degree);
        let mut out = match &self.base {
            Some(b) => b.jacobian_in(chart, x)?,
            None => vec![vec![LieMat::zeros(self.rank, self.rank); nc]; 7],
        };
        for (f, t) in &self.terms {
            let (fv, fd) = (f.value(r), f.derivative(r));
            let tv = t.eval_in(chart, x)?;
            let tj = t.jacobian_in(chart, x)?;
            for i in 0..7 {
                let radial = fd * x[i] / r;
                for c in 0..nc {
                    out[i][c] += &tj[i][c] * fv + &tv[c] * radial;
                }
            }
        }
        Ok(out)
    }
}
