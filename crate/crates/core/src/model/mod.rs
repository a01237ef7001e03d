//! Model connections on bundles over S⁶ in a two-chart stereographic atlas,
//! their scale-invariant pullback to ℝ⁷∖{O}, and the G₂-instanton defect.

mod sphere;

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

pub use sphere::{chart_coords, coords_jacobian, cross, frame, Frame};

use crate::error::{invalid, Error, Result};
use crate::fields::{fd_jacobian, Chart, LieField, FD_REL_STEP};
use crate::g2::coassociative;
use crate::lie::{antisymmetry_defect, zero_mat, LieMat};
use crate::sampling::norm;
use crate::{KForm, Point};

/// A connection on a rank-m bundle over S⁶, given by its potentials in the
/// north and south stereographic charts and the gauge transition between them.
pub trait ChartModel: Send + Sync {
    fn rank(&self) -> usize;

    fn name(&self) -> String;

    /// `ω_a(u)`, `a = 0..6`, such that `∇_{∂_a} e_c = Σ_b (ω_a)_{bc} e_b`.
    fn potential(&self, chart: Chart, u: &[f64; 6]) -> Vec<LieMat>;

    /// `g(n)` with `A_S = g A_N g⁻¹ − dg g⁻¹` at the unit vector `n`.
    fn transition(&self, n: &[f64; 7]) -> LieMat;
}

pub type ChartConnection = Arc<dyn ChartModel>;

/// The G₂-invariant canonical connection on TS⁶: Levi-Civita minus
/// `½ J(∇J)`, with `J = n × ·` from the octonionic cross product of `φ₀`.
#[derive(Debug, Clone, Copy)]
pub struct Canonical;

/// `canonical_connection(6)`; other ranks are rejected.
pub fn canonical_connection(m: usize) -> Result<ChartConnection> {
    if m != 6 {
        return invalid(format!("the canonical connection lives on TS⁶ (rank 6), not rank {m}"));
    }
    Ok(Arc::new(Canonical))
}

impl ChartModel for Canonical {
    fn rank(&self) -> usize {
        6
    }

    fn name(&self) -> String {
        "canonical".into()
    }

    fn potential(&self, chart: Chart, u: &[f64; 6]) -> Vec<LieMat> {
        let f = frame(chart, u);
        (0..6)
            .map(|c| {
                let mut w = zero_mat(6);
                let jx: Vec<[f64; 7]> = (0..6).map(|e| cross(&f.x, &cross(&f.dx[c], &f.e[e]))).collect();
                for b in 0..6 {
                    for e in 0..6 {
                        w[(b, e)] = dot(&f.e[b], &f.de[c][e]) - 0.5 * dot(&f.e[b], &jx[e]);
                    }
                }
                w
            })
            .collect()
    }

    fn transition(&self, n: &[f64; 7]) -> LieMat {
        let fnorth = frame(Chart::North, &chart_coords(Chart::North, n));
        let fsouth = frame(Chart::South, &chart_coords(Chart::South, n));
        LieMat::from_fn(6, 6, |b, c| dot(&fsouth.e[b], &fnorth.e[c]))
    }
}

/// The trivial connection on the product bundle of rank `m`.
#[derive(Debug, Clone, Copy)]
pub struct Flat {
    pub m: usize,
}

impl ChartModel for Flat {
    fn rank(&self) -> usize {
        self.m
    }

    fn name(&self) -> String {
        "flat".into()
    }

    fn potential(&self, _chart: Chart, _u: &[f64; 6]) -> Vec<LieMat> {
        vec![zero_mat(self.m); 6]
    }

    fn transition(&self, _n: &[f64; 7]) -> LieMat {
        LieMat::identity(self.m, self.m)
    }
}

/// `Σ_i T_i dn_i` on the product bundle, with constant `T_i ∈ so(m)`.
#[derive(Debug, Clone)]
pub struct Linear {
    t: Vec<LieMat>,
}

impl Linear {
    pub fn new(t: Vec<LieMat>) -> Result<Self> {
        if t.len() != 7 {
            return invalid(format!("a linear model needs 7 matrices, got {}", t.len()));
        }
        let m = t[0].nrows();
        for (i, ti) in t.iter().enumerate() {
            if ti.nrows() != m || ti.ncols() != m {
                return invalid(format!("T{} is not {m}×{m}", i + 1));
            }
            if antisymmetry_defect(ti) > 1e-12 {
                return invalid(format!("T{} is not antisymmetric", i + 1));
            }
        }
        Ok(Self { t })
    }

    /// Text form: `rank m`, then seven m×m matrices as rows of numbers.
    /// `#` starts a comment; blank lines are ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut rank = None;
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = |msg: String| Error::Parse { line: n + 1, msg };
            if rank.is_none() {
                let mut it = line.split_whitespace();
                if it.next() != Some("rank") {
                    return Err(bad("expected `rank m` header".into()));
                }
                let m: usize =
                    it.next().and_then(|s| s.parse().ok()).filter(|&m| m >= 1).ok_or_else(|| bad("bad rank".into()))?;
                rank = Some(m);
                continue;
            }
            let row: Vec<f64> = line
                .split_whitespace()
                .map(|s| s.parse::<f64>().map_err(|_| bad(format!("bad number `{s}`"))))
                .collect::<Result<_>>()?;
            if row.len() != rank.unwrap() || row.iter().any(|v| !v.is_finite()) {
                return Err(bad(format!("expected {} finite numbers", rank.unwrap())));
            }
            rows.push(row);
        }
        let m = rank.ok_or(Error::Parse { line: 0, msg: "empty connection file".into() })?;
        if rows.len() != 7 * m {
            return Err(Error::Parse { line: 0, msg: format!("expected {} matrix rows, got {}", 7 * m, rows.len()) });
        }
        let t = rows.chunks(m).map(|c| LieMat::from_fn(m, m, |i, j| c[i][j])).collect();
        Self::new(t)
    }
}

impl ChartModel for Linear {
    fn rank(&self) -> usize {
        self.t[0].nrows()
    }

    fn name(&self) -> String {
        "linear".into()
    }

    fn potential(&self, chart: Chart, u: &[f64; 6]) -> Vec<LieMat> {
        let f = frame(chart, u);
        (0..6)
            .map(|a| {
                let mut w = zero_mat(self.rank());
                for (i, ti) in self.t.iter().enumerate() {
                    w += ti * f.dx[a][i];
                }
                w
            })
            .collect()
    }

    fn transition(&self, _n: &[f64; 7]) -> LieMat {
        LieMat::identity(self.rank(), self.rank())
    }
}

/// A constant gauge rotation `k ∈ SO(m)` applied in both charts.
pub struct GaugeRotated {
    inner: ChartConnection,
    k: LieMat,
}

impl GaugeRotated {
    pub fn new(inner: ChartConnection, k: LieMat) -> Result<Self> {
        let m = inner.rank();
        if k.nrows() != m || k.ncols() != m {
            return invalid("gauge rotation has the wrong size");
        }
        if (&k * k.transpose() - LieMat::identity(m, m)).amax() > 1e-12 {
            return invalid("gauge rotation must be orthogonal");
        }
        Ok(Self { inner, k })
    }
}

impl ChartModel for GaugeRotated {
    fn rank(&self) -> usize {
        self.inner.rank()
    }

    fn name(&self) -> String {
        format!("{}-rotated", self.inner.name())
    }

    fn potential(&self, chart: Chart, u: &[f64; 6]) -> Vec<LieMat> {
        let kt = self.k.transpose();
        self.inner.potential(chart, u).into_iter().map(|w| &self.k * w * &kt).collect()
    }

    fn transition(&self, n: &[f64; 7]) -> LieMat {
        &self.k * self.inner.transition(n) * self.k.transpose()
    }
}

/// Chart used at `x`: north (excluding `+e₇`) on the closed lower half-space.
pub fn default_chart(x: &Point) -> Chart {
    if x[6] <= 0.0 {
        Chart::North
    } else {
        Chart::South
    }
}

/// The pullback of a [`ChartModel`] along `x ↦ x/|x|`.
#[derive(Clone)]
pub struct ConeConnection {
    base: ChartConnection,
}

pub fn pullback_to_cone(a0: ChartConnection) -> ConeConnection {
    ConeConnection { base: a0 }
}

impl ConeConnection {
    pub fn base(&self) -> &ChartConnection {
        &self.base
    }
}

pub(crate) fn unit(x: &Point) -> Result<(f64, [f64; 7])> {
    let r = norm(x);
    if !(r > 0.0) || !r.is_finite() {
        return invalid("cone fields are undefined at the origin");
    }
    Ok((r, x.map(|c| c / r)))
}

fn chart_ok(chart: Chart, n: &[f64; 7]) -> Result<()> {
    let s = if chart == Chart::North { 1.0 } else { -1.0 };
    if 1.0 - s * n[6] < 1e-8 {
        return invalid(format!("{chart:?} chart is singular at {n:?}"));
    }
    Ok(())
}

impl LieField for ConeConnection {
    fn rank(&self) -> usize {
        self.base.rank()
    }

    fn degree(&self) -> usize {
        1
    }

    fn chart_at(&self, x: &Point) -> Chart {
        default_chart(x)
    }

    fn eval_in(&self, chart: Chart, x: &Point) -> Result<Vec<LieMat>> {
        let (r, n) = unit(x)?;
        chart_ok(chart, &n)?;
        let u = chart_coords(chart, &n);
        let w = self.base.potential(chart, &u);
        let du = coords_jacobian(chart, &n, r);
        Ok((0..7)
            .map(|i| {
                let mut a = zero_mat(self.rank());
                for (wa, dua) in w.iter().zip(&du) {
                    a += wa * dua[i];
                }
                a
            })
            .collect())
    }
}

/// `Σ₀(x)/|x|` with `(Σ₀)_{bc} = ⟨E_b, n × E_c⟩`: the almost-complex
/// structure of S⁶ as an so(6)-valued Higgs template, homogeneous of
/// degree −1.
#[derive(Debug, Clone, Copy)]
pub struct CanonicalHiggs;

pub fn j_matrix(chart: Chart, n: &[f64; 7]) -> LieMat {
    let f = frame(chart, &chart_coords(chart, n));
    let jn: Vec<[f64; 7]> = (0..6).map(|c| cross(n, &f.e[c])).collect();
    LieMat::from_fn(6, 6, |b, c| dot(&f.e[b], &jn[c]))
}

impl LieField for CanonicalHiggs {
    fn rank(&self) -> usize {
        6
    }

    fn degree(&self) -> usize {
        0
    }

    fn chart_at(&self, x: &Point) -> Chart {
        default_chart(x)
    }

    fn eval_in(&self, chart: Chart, x: &Point) -> Result<Vec<LieMat>> {
        let (r, n) = unit(x)?;
        chart_ok(chart, &n)?;
        Ok(vec![j_matrix(chart, &n) / r])
    }
}

pub(crate) fn dot(a: &[f64; 7], b: &[f64; 7]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[derive(Debug, Clone, Serialize)]
pub struct DefectPoint {
    pub point: Point,
    pub chart: Chart,
    pub defect: f64,
    pub curvature_norm: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DefectReport {
    pub defect: f64,
    pub points: Vec<DefectPoint>,
}

/// `max_x |F_{A₀} ∧ ψ(φ)|` over the sample points.
pub fn instanton_defect(a0: &dyn LieField, phi: &KForm, samples: &[Point]) -> Result<DefectReport> {
    if a0.degree() != 1 {
        return invalid("instanton defect needs a connection");
    }
    let psi = coassociative(phi)?;
    let points: Vec<DefectPoint> = samples
        .par_iter()
        .map(|x| {
            let chart = a0.chart_at(x);
            let f = crate::fields::curvature_of(a0, chart, x)?;
            let d = f.wedge_scalar(&psi)?.norm();
            Ok(DefectPoint { point: *x, chart, defect: d, curvature_norm: f.norm() })
        })
        .collect::<Result<_>>()?;
    let defect = points.iter().map(|p| p.defect).fold(0.0, f64::max);
    Ok(DefectReport { defect, points })
}

/// Largest entry of `A_S − (g A_N g⁻¹ − dg g⁻¹)` over the sample points,
/// with `dg` from fourth-order differences.
pub fn transition_residual(model: &ChartConnection, samples: &[Point]) -> Result<f64> {
    struct G(ChartConnection);
    impl LieField for G {
        fn rank(&self) -> usize {
            self.0.rank()
        }
        fn degree(&self) -> usize {
            0
        }
        fn eval_in(&self, _c: Chart, x: &Point) -> Result<Vec<LieMat>> {
            Ok(vec![self.0.transition(&unit(x)?.1)])
        }
    }
    let cone = pullback_to_cone(model.clone());
    let g = G(model.clone());
    let mut worst: f64 = 0.0;
    for x in samples {
        let an = cone.eval_in(Chart::North, x)?;
        let asouth = cone.eval_in(Chart::South, x)?;
        let gx = g.eval_in(Chart::North, x)?.remove(0);
        let gi = gx.clone().try_inverse().ok_or_else(|| Error::Degenerate("singular transition".into()))?;
        let dg = fd_jacobian(&g, Chart::North, x, 10.0 * FD_REL_STEP, 4)?;
        for i in 0..7 {
            let expect = &gx * &an[i] * &gi - &dg[i][0] * &gi;
            worst = worst.max((&asouth[i] - expect).amax());
        }
    }
    Ok(worst)
}
