//! The dilation `Γ(y) = λy` from `B(1/(4λ))` onto `B(1/4)`.
//!
//! A structure `φ = Σ φ_I dy^I` on the small ball becomes `φ̃ = Σ φ_I(x/λ) dx^I`
//! on the unit-scale ball, monopole data are pulled back by `Γ`, and the
//! monopole residual transforms by `Γ*res(A, σ; φ̃) = λ⁴·res(Γ*A, λΓ*σ; φ)`.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::fields::{monopole_residual, FieldPair, ScaledField};
use crate::forms::{hodge, pullback, MultiIndex};
use crate::g2::euclidean_phi;
use crate::linalg::{identity7, scale7};
use crate::poly::{pullback_constant, total_degree, Exponents, Poly7, PolyFormField};
use crate::random;
use crate::sampling::ball_grid;
use crate::{KForm, MetricTensor, Point};

/// Highest derivative order tracked by the deviation report.
pub const MAX_ORDER: usize = 5;

/// Directions and rings of the sampling grid used above degree 2.
pub const GRID_DIRECTIONS: usize = 1000;
pub const GRID_RINGS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScaleMap {
    lambda: f64,
}

impl ScaleMap {
    pub fn new(lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return invalid(format!("scale factor must be positive and finite, got {lambda}"));
        }
        Ok(Self { lambda })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn apply(&self, y: &Point) -> Point {
        y.map(|c| c * self.lambda)
    }

    /// Radius of the small ball mapped onto `B(1/4)`.
    pub fn small_radius(&self) -> f64 {
        0.25 / self.lambda
    }
}

/// `φ̃(x) = Σ φ_I(x/λ) dx^I`.
pub fn rescale_phi(phi: &PolyFormField, s: ScaleMap) -> PolyFormField {
    let l = s.lambda();
    phi.map_coeffs(|p| p.map_by_degree(|d| l.powi(-(d as i32))))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SupMethod {
    /// Trust-region maximisation, exact up to rounding.
    Exact,
    /// Maximum over a radial-angular grid; a lower estimate of the true supremum.
    Sampled { points: usize },
}

/// Deviation bookkeeping for `φ` on `B(1/(4λ))` and `φ̃` on `B(1/4)`.
#[derive(Debug, Clone, Serialize)]
pub struct C5Report {
    pub lambda: f64,
    pub constant: f64,
    pub poly_degree: u32,
    pub method: SupMethod,
    /// `s_k = Σ_I sup_{B(1/(4λ))} |∇ᵏ(φ_I − φ_I(O))|`.
    pub s: [f64; MAX_ORDER + 1],
    /// `c_φ = C·Σ_k s_k`.
    pub c_phi: f64,
    /// `t_k = Σ_I sup_{B(1/4)} |∇ᵏ(φ̃_I − φ̃_I(O))|`, computed on `φ̃` directly.
    pub t: [f64; MAX_ORDER + 1],
    /// `c_φ/λ` for `k = 0` and `c_φ/λᵏ` otherwise.
    pub bounds: [f64; MAX_ORDER + 1],
    pub margins: [f64; MAX_ORDER + 1],
}

impl C5Report {
    pub fn min_margin(&self) -> f64 {
        self.margins.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// The `C⁵` deviation `Σ_k t_k` against its bound `c_φ/λ`.
    pub fn total(&self) -> (f64, f64) {
        (self.t.iter().sum(), self.bounds[0])
    }
}

pub fn c5_deviation(phi: &PolyFormField, s: ScaleMap, constant: f64) -> Result<C5Report> {
    if !(constant > 0.0 && constant.is_finite()) {
        return invalid(format!("the constant C must be positive, got {constant}"));
    }
    let lambda = s.lambda();
    let tilde = rescale_phi(phi, s);
    let poly_degree = phi.poly_degree();
    let (sv, method) = sup_norms(phi, s.small_radius())?;
    let (tv, _) = sup_norms(&tilde, 0.25)?;
    let c_phi = constant * sv.iter().sum::<f64>();
    let mut bounds = [0.0; MAX_ORDER + 1];
    let mut margins = [0.0; MAX_ORDER + 1];
    for k in 0..=MAX_ORDER {
        bounds[k] = c_phi / lambda.powi(k.max(1) as i32);
        margins[k] = bounds[k] - tv[k];
        if tv[k] > bounds[k] * (1.0 + 1e-12) {
            return Err(Error::Inconsistency(format!(
                "order-{k} deviation {} exceeds c_φ/λ^{} = {} (λ = {lambda}, C = {constant})",
                tv[k],
                k.max(1),
                bounds[k]
            )));
        }
    }
    Ok(C5Report { lambda, constant, poly_degree, method, s: sv, c_phi, t: tv, bounds, margins })
}

/// `Σ_I sup_{B(ρ)} |∇ᵏ(p_I − p_I(O))|` for `k = 0..=5`.
fn sup_norms(phi: &PolyFormField, rho: f64) -> Result<([f64; MAX_ORDER + 1], SupMethod)> {
    let centred: Vec<Poly7> = phi.coeffs().iter().map(Poly7::without_constant).filter(|p| !p.is_zero()).collect();
    let mut out = [0.0; MAX_ORDER + 1];
    if phi.poly_degree() <= 2 {
        for p in &centred {
            let (b, h) = p.quadratic_parts().expect("degree ≤ 2");
            out[0] += abs_sup(&b, &h, rho);
            out[1] += gradient_sup(&b, &h, rho);
            out[2] += h.iter().map(|v| v * v).sum::<f64>().sqrt();
        }
        return Ok((out, SupMethod::Exact));
    }
    let grid = ball_grid(rho, GRID_DIRECTIONS, GRID_RINGS);
    for p in &centred {
        let parts = derivative_table(p);
        let sup = grid
            .par_iter()
            .map(|y| {
                let mut n = [0.0; MAX_ORDER + 1];
                for (k, terms) in parts.iter().enumerate() {
                    n[k] = terms.iter().map(|(m, q)| m * q.eval(y).powi(2)).sum::<f64>().sqrt();
                }
                n
            })
            .reduce(|| [0.0; MAX_ORDER + 1], |a, b| std::array::from_fn(|k| a[k].max(b[k])));
        for k in 0..=MAX_ORDER {
            out[k] += sup[k];
        }
    }
    Ok((out, SupMethod::Sampled { points: grid.len() }))
}

/// For each order `k`, the nonzero partials `∂^α p` with `|α| = k` paired
/// with the number of ordered index tuples giving `α`.
fn derivative_table(p: &Poly7) -> Vec<Vec<(f64, Poly7)>> {
    (0..=MAX_ORDER)
        .map(|k| {
            exponents_of_order(k as u32)
                .into_iter()
                .filter_map(|a| {
                    let q = p.partial(&a);
                    (!q.is_zero()).then(|| (multinomial(&a), q))
                })
                .collect()
        })
        .collect()
}

fn exponents_of_order(k: u32) -> Vec<Exponents> {
    fn rec(axis: usize, left: u32, cur: &mut Exponents, out: &mut Vec<Exponents>) {
        if axis == 6 {
            cur[6] = left as u8;
            out.push(*cur);
            return;
        }
        for n in 0..=left {
            cur[axis] = n as u8;
            rec(axis + 1, left - n, cur, out);
        }
    }
    let mut out = Vec::new();
    rec(0, k, &mut [0; 7], &mut out);
    out
}

fn multinomial(a: &Exponents) -> f64 {
    let fact = |n: u32| (1..=n).map(f64::from).product::<f64>();
    fact(total_degree(a)) / a.iter().map(|&n| fact(n as u32)).product::<f64>()
}

/// `sup_{|y|≤ρ} |b·y + ½yᵀHy|`.
fn abs_sup(b: &[f64; 7], h: &[f64; 49], rho: f64) -> f64 {
    let nb = b.map(|v| -v);
    let nh = h.map(|v| -v);
    trs_max(h, b, rho).max(trs_max(&nh, &nb, rho)).max(0.0)
}

/// `sup_{|y|≤ρ} |b + Hy|`, from `|b + Hy|² = |b|² + 2(Hb)·y + yᵀH²y`.
fn gradient_sup(b: &[f64; 7], h: &[f64; 49], rho: f64) -> f64 {
    let hm = DMatrix::from_row_slice(7, 7, h);
    let bv = DVector::from_column_slice(b);
    let q = &hm * &hm * 2.0;
    let c = &hm * &bv * 2.0;
    let q: [f64; 49] = std::array::from_fn(|i| q[(i / 7, i % 7)]);
    let c: [f64; 7] = std::array::from_fn(|i| c[i]);
    (bv.norm_squared() + trs_max(&q, &c, rho)).max(0.0).sqrt()
}

/// `max_{|y|≤ρ} ½yᵀQy + c·y` for symmetric `Q`.
///
/// Minimises `½yᵀAy + d·y` with `A = −Q`, `d = −c`: the minimiser solves
/// `(A + μI)y = −d` with `A + μI ⪰ 0`, `μ ≥ 0` and `μ(ρ − |y|) = 0`.
pub fn trs_max(q: &[f64; 49], c: &[f64; 7], rho: f64) -> f64 {
    let a = DMatrix::from_row_slice(7, 7, q).map(|v| -v);
    let d = DVector::from_column_slice(c).map(|v| -v);
    let eig = SymmetricEigen::new(a.clone());
    let vals = eig.eigenvalues;
    let vecs = eig.eigenvectors;
    let dt = vecs.transpose() * &d;
    let dn = d.norm();
    let scale = vals.amax() + dn + f64::MIN_POSITIVE;
    let objective = |y: &DVector<f64>| -(0.5 * y.dot(&(&a * y)) + d.dot(y));
    let solve = |mu: f64, skip: &[bool]| {
        let mut y = DVector::zeros(7);
        for i in 0..7 {
            let den = vals[i] + mu;
            if !skip[i] && den > 0.0 {
                y -= vecs.column(i) * (dt[i] / den);
            }
        }
        y
    };
    let none = [false; 7];
    let (imin, lmin) =
        vals.iter().cloned().enumerate().fold((0, f64::INFINITY), |acc, (i, v)| if v < acc.1 { (i, v) } else { acc });
    let tol = 1e-12 * scale;
    if lmin > tol {
        let y = solve(0.0, &none);
        if y.norm() <= rho {
            return objective(&y);
        }
    }
    let lo = (-lmin).max(0.0);
    if lmin <= tol {
        let skip: [bool; 7] = std::array::from_fn(|i| vals[i] - lmin <= tol);
        let on_min: f64 = (0..7).filter(|&i| skip[i]).map(|i| dt[i] * dt[i]).sum::<f64>().sqrt();
        if on_min <= 1e-13 * dn.max(f64::MIN_POSITIVE) {
            let y = solve(lo, &skip);
            let n = y.norm();
            if n <= rho {
                // Hard case: move along the bottom eigenvector to the boundary.
                let tau = (rho * rho - n * n).max(0.0).sqrt();
                let y = y + vecs.column(imin) * tau;
                return objective(&y);
            }
        }
    }
    let (mut lo, mut hi) = (lo, lo + dn / rho);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if solve(mid, &none).norm() > rho {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    objective(&solve(hi, &none))
}

/// `sup_{B(ρ)} |φ(x) − reference|` over the sampling grid.
pub fn c0_deviation(phi: &PolyFormField, reference: &KForm, rho: f64) -> Result<f64> {
    if phi.degree() != reference.degree() {
        return invalid("degree mismatch");
    }
    let grid = ball_grid(rho, GRID_DIRECTIONS, GRID_RINGS);
    Ok(grid.par_iter().map(|x| (&phi.eval(x) - reference).norm()).reduce(|| 0.0, f64::max))
}

/// `(Γ*A, λ·Γ*σ)` on the annulus scaled by `1/λ`.
pub fn pullback_monopole(p: &FieldPair, s: ScaleMap) -> Result<FieldPair> {
    let l = s.lambda();
    FieldPair::new(
        Arc::new(ScaledField::new(p.a.clone(), l)?),
        Arc::new(ScaledField::new(p.sigma.clone(), l)?),
        p.r_in / l,
        p.r_out / l,
    )
}

/// `|Γ*(⋆_{g̃}α) − λ⁵⋆_g(Γ*α)|` with `g̃` the metric satisfying `Γ*g̃ = λ²g`.
pub fn check_star_covariance(g: &MetricTensor, s: ScaleMap, a: &KForm) -> Result<f64> {
    if a.degree() != 1 {
        return invalid("star covariance is stated for 1-forms");
    }
    let l = s.lambda();
    let m = scale7(&identity7(), l);
    let g_tilde = g.pullback(&scale7(&identity7(), 1.0 / l))?.scaled(l * l)?;
    let lhs = pullback(&m, &hodge(&g_tilde, a))?;
    let rhs = hodge(g, &pullback(&m, a)?).scale(l.powi(5));
    Ok((&lhs - &rhs).norm())
}

/// One sample of the residual covariance identity.
#[derive(Debug, Clone, Serialize)]
pub struct CovarianceSample {
    pub y: Point,
    /// `|Γ*res(A, σ; φ̃)|` at `y`.
    pub big_ball: f64,
    pub rel_error: f64,
}

/// Compares `λ⁶·res(A, σ; φ̃)(λy)` with `λ⁴·res(Γ*A, λΓ*σ; φ)(y)` at each
/// small-ball point `y`.
pub fn residual_covariance(
    p: &FieldPair,
    phi: &PolyFormField,
    s: ScaleMap,
    points: &[Point],
) -> Result<Vec<CovarianceSample>> {
    let l = s.lambda();
    let tilde = rescale_phi(phi, s);
    let small = pullback_monopole(p, s)?;
    let pairs: Vec<(Point, f64, f64)> = points
        .par_iter()
        .map(|y| {
            let lhs = monopole_residual(p, &tilde, &s.apply(y))?.scale(l.powi(6));
            let rhs = monopole_residual(&small, phi, y)?.scale(l.powi(4));
            let diff = (&lhs - &rhs).norm();
            Ok((*y, lhs.norm(), diff))
        })
        .collect::<Result<_>>()?;
    let floor = 1e-12 * pairs.iter().map(|t| t.1).fold(0.0, f64::max);
    Ok(pairs
        .into_iter()
        .map(|(y, n, diff)| CovarianceSample { y, big_ball: n, rel_error: diff / n.max(floor).max(f64::MIN_POSITIVE) })
        .collect())
}

/// [`residual_covariance`] for a seeded random polynomial so(3) pair at
/// `points` random points of the small annulus `[0.02, 0.24]/λ`.
pub fn covariance_suite(phi: &PolyFormField, s: ScaleMap, seed: u64, points: usize) -> Result<Vec<CovarianceSample>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = Arc::new(random::poly_lie_field(&mut rng, 3, 1, 2, 3));
    let sigma = Arc::new(random::poly_lie_field(&mut rng, 3, 0, 2, 3));
    let pair = FieldPair::new(a, sigma, 0.01, 0.25)?;
    let l = s.lambda();
    let ys: Vec<Point> = (0..points)
        .map(|_| {
            let r = rng.gen_range(0.02..0.24) / l;
            random::unit_vector(&mut rng).map(|c| c * r)
        })
        .collect();
    residual_covariance(&pair, phi, s, &ys)
}

/// Names of the shipped polynomial families.
pub const FAMILIES: [&str; 5] = ["euclidean", "linear-perturb", "quadratic", "cubic", "diffeo"];

/// A shipped test family by name.
pub fn family(name: &str) -> Result<PolyFormField> {
    let phi0 = PolyFormField::constant(&euclidean_phi());
    let term = |axes: &[usize], c: f64, e: Exponents| -> Result<PolyFormField> {
        let mut f = PolyFormField::zero(3);
        f.coeff_mut(MultiIndex::new(axes)?).add_term(e, c);
        Ok(f)
    };
    match name {
        "euclidean" => Ok(phi0),
        "linear-perturb" => phi0.add(&term(&[1, 2, 3], 1.0, [1, 0, 0, 0, 0, 0, 0])?),
        "quadratic" => phi0
            .add(&term(&[1, 4, 5], 1.0, [1, 1, 0, 0, 0, 0, 0])?)?
            .add(&term(&[2, 4, 6], -0.5, [0, 0, 2, 0, 0, 0, 0])?)?
            .add(&term(&[3, 5, 6], 0.3, [0, 0, 0, 0, 0, 0, 1])?),
        "cubic" => phi0
            .add(&term(&[1, 2, 3], 1.0, [1, 1, 1, 0, 0, 0, 0])?)?
            .add(&term(&[2, 5, 7], 0.5, [0, 0, 0, 2, 0, 0, 0])?)?
            .add(&term(&[1, 6, 7], 1.0, [0, 0, 0, 0, 0, 1, 0])?),
        "diffeo" => diffeo_phi(1.0),
        _ => invalid(format!("unknown family `{name}` (expected one of {})", FAMILIES.join(", "))),
    }
}

/// The fixed homogeneous quadratic `P` behind the diffeomorphism family.
pub fn diffeo_quadratic() -> [Poly7; 7] {
    let mono = |pairs: &[(usize, usize, f64)]| {
        let mut p = Poly7::zero();
        for &(i, j, c) in pairs {
            let mut e = [0u8; 7];
            e[i] += 1;
            e[j] += 1;
            p.add_term(e, c);
        }
        p
    };
    [
        mono(&[(1, 2, 1.0), (6, 6, 0.5)]),
        mono(&[(0, 0, 1.0), (3, 4, -0.5)]),
        mono(&[(3, 4, -1.0), (0, 6, 0.5)]),
        mono(&[(5, 5, 1.0), (1, 2, 0.5)]),
        mono(&[(0, 6, 1.0), (2, 2, -0.5)]),
        mono(&[(2, 2, -1.0), (0, 1, 0.5)]),
        mono(&[(1, 5, 1.0), (4, 4, -0.5)]),
    ]
}

/// `Ψ_t(y) = y + t·P(y)`.
pub fn diffeo_map(t: f64) -> [Poly7; 7] {
    let p = diffeo_quadratic();
    std::array::from_fn(|i| Poly7::var(i).add(&p[i].scale(t)))
}

/// `Ψ_t*φ₀`, a torsion-free structure that is polynomial in `y`.
/// Rescaling by `λ` gives `Ψ_{t/λ}*φ₀`.
pub fn diffeo_phi(t: f64) -> Result<PolyFormField> {
    pullback_constant(&diffeo_map(t), &euclidean_phi())
}

#[cfg(test)]
mod tests {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::fields::{ConstantField, ZeroField};
    use crate::lie::{so_basis, LieMat};
    use crate::random;
    use crate::sampling::sphere_points;

    /// Multi-start projected gradient ascent.
    fn ascent_max(q: &[f64; 49], c: &[f64; 7], rho: f64, rng: &mut ChaCha8Rng) -> f64 {
        let f = |y: &Point| {
            let mut v = 0.0;
            for i in 0..7 {
                v += c[i] * y[i];
                for j in 0..7 {
                    v += 0.5 * q[i * 7 + j] * y[i] * y[j];
                }
            }
            v
        };
        let lip = q.iter().map(|v| v.abs()).sum::<f64>() + 1.0;
        let mut best = f64::NEG_INFINITY;
        for _ in 0..40 {
            let mut y = random::unit_vector(rng).map(|v| v * rho * rng.gen_range(0.0..1.0));
            for _ in 0..5000 {
                let mut g = *c;
                for i in 0..7 {
                    for j in 0..7 {
                        g[i] += q[i * 7 + j] * y[j];
                    }
                }
                for i in 0..7 {
                    y[i] += g[i] / lip;
                }
                let n = crate::sampling::norm(&y);
                if n > rho {
                    y = y.map(|v| v * rho / n);
                }
            }
            best = best.max(f(&y));
        }
        best
    }

    #[test]
    fn trust_region_agrees_with_dense_sampling() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for case in 0..12 {
            let mut q = [0.0; 49];
            for i in 0..7 {
                for j in 0..=i {
                    let v = rng.gen_range(-1.0..1.0);
                    q[i * 7 + j] = v;
                    q[j * 7 + i] = v;
                }
            }
            let c: [f64; 7] = if case % 3 == 0 { [0.0; 7] } else { std::array::from_fn(|_| rng.gen_range(-1.0..1.0)) };
            let rho = rng.gen_range(0.1..2.0);
            let exact = trs_max(&q, &c, rho);
            let ascent = ascent_max(&q, &c, rho, &mut rng);
            assert!((exact - ascent).abs() <= 1e-8 * exact.abs().max(1.0), "case {case}: {exact} vs {ascent}");
        }
    }

    #[test]
    fn trust_region_closed_forms() {
        let c = [3.0, 4.0, 0.0, 0.0, 0.0, 0.0, 0.0];
        assert!((trs_max(&[0.0; 49], &c, 0.5) - 2.5).abs() < 1e-14);
        // Negative definite, interior maximiser at y = −Q⁻¹c.
        let mut q = [0.0; 49];
        for i in 0..7 {
            q[i * 8] = -2.0;
        }
        assert!((trs_max(&q, &c, 10.0) - 6.25).abs() < 1e-12);
        // Pure quadratic: ½·λ_max·ρ².
        q[8] = 3.0;
        assert!((trs_max(&q, &[0.0; 7], 2.0) - 6.0).abs() < 1e-12);
    }

    #[test]
    fn constant_phi_is_fixed_and_has_zero_deviation() {
        let phi = family("euclidean").unwrap();
        let s = ScaleMap::new(2.0).unwrap();
        assert_eq!(rescale_phi(&phi, s), phi);
        let rep = c5_deviation(&phi, s, 1.0).unwrap();
        assert_eq!(rep.c_phi, 0.0);
        assert!(rep.margins.iter().all(|&m| m == 0.0));
    }

    #[test]
    fn linear_family_substitutes_and_scales() {
        let phi = family("linear-perturb").unwrap();
        let lam = 8.0;
        let tilde = rescale_phi(&phi, ScaleMap::new(lam).unwrap());
        let x = [0.1, 0.2, 0.0, 0.0, 0.0, 0.0, 0.0];
        let v = tilde.eval(&x);
        let want = &euclidean_phi::<f64>() + &KForm::monomial(&[1, 2, 3], x[0] / lam).unwrap();
        assert!((&v - &want).norm() < 1e-16);

        let eps = 0.3;
        let scaled = phi
            .map_coeffs(|p| p.without_constant().scale(eps))
            .add(&PolyFormField::constant(&euclidean_phi()))
            .unwrap();
        let rep = c5_deviation(&scaled, ScaleMap::new(10.0).unwrap(), 1.0).unwrap();
        assert_eq!(rep.method, SupMethod::Exact);
        assert!((rep.s[0] - eps / 40.0).abs() < 1e-15);
        assert!((rep.s[1] - eps).abs() < 1e-15);
        assert!((rep.c_phi - eps * (1.0 / 40.0 + 1.0)).abs() < 1e-15);
        assert!((rep.t[0] - eps / 40.0).abs() < 1e-15);
        assert!(rep.min_margin() > 0.0);
    }

    #[test]
    fn doubling_lambda_halves_the_zeroth_order_deviation() {
        let phi = family("linear-perturb").unwrap();
        let t0 = |l: f64| c5_deviation(&phi, ScaleMap::new(l).unwrap(), 1.0).unwrap().t[0];
        for l in [4.0, 16.0, 5.0] {
            assert!((t0(l) / t0(2.0 * l) - 2.0).abs() < 1e-10);
        }
    }

    #[test]
    fn shipped_families_keep_a_positive_margin() {
        for name in FAMILIES.iter().filter(|n| **n != "euclidean") {
            let phi = family(name).unwrap();
            for l in [4.0, 16.0, 64.0] {
                let rep = c5_deviation(&phi, ScaleMap::new(l).unwrap(), 1.0).unwrap();
                assert!(rep.min_margin() > 0.0, "{name} λ={l}: {:?}", rep.margins);
                for k in 0..=MAX_ORDER {
                    let chain = rep.s[k] / l.powi(k as i32);
                    assert!((rep.t[k] - chain).abs() <= 1e-9 * chain.max(1e-300), "{name} k={k}");
                }
            }
        }
    }

    #[test]
    fn tiny_constant_is_reported_as_inconsistent() {
        let phi = family("quadratic").unwrap();
        assert!(matches!(c5_deviation(&phi, ScaleMap::new(4.0).unwrap(), 1e-3), Err(Error::Inconsistency(_))));
        assert!(c5_deviation(&phi, ScaleMap::new(4.0).unwrap(), 0.0).is_err());
    }

    #[test]
    fn diffeo_family_rescales_to_a_smaller_parameter() {
        let lam = 4.0;
        let a = rescale_phi(&diffeo_phi(1.0).unwrap(), ScaleMap::new(lam).unwrap());
        let b = diffeo_phi(1.0 / lam).unwrap();
        for y in sphere_points(20).into_iter().map(|n| n.map(|c| 0.2 * c)) {
            assert!((&a.eval(&y) - &b.eval(&y)).norm() < 1e-14);
        }
        let dev = c0_deviation(&b, &euclidean_phi(), 0.25).unwrap();
        assert!(dev > 0.0 && dev < 1.0);
    }

    #[test]
    fn pullback_of_constant_data() {
        let j = so_basis(3).remove(1);
        let c = Arc::new(ConstantField::new(vec![j.clone()]).unwrap());
        let a: Vec<LieMat> = (0..7).map(|i| &j * (i as f64)).collect();
        let pair = FieldPair::new(Arc::new(ConstantField::new(a.clone()).unwrap()), c, 0.01, 0.25).unwrap();
        let lam = 3.0;
        let pb = pullback_monopole(&pair, ScaleMap::new(lam).unwrap()).unwrap();
        let y = [0.01, 0.0, 0.0, 0.0, 0.0, 0.0, 0.02];
        assert!((&pb.sigma.eval(&y).unwrap()[0] - &j * lam).amax() < 1e-15);
        for (got, want) in pb.a.eval(&y).unwrap().iter().zip(&a) {
            assert!((got - want * lam).amax() < 1e-15);
        }
        assert!((pb.r_out - 0.25 / lam).abs() < 1e-16);

        let zero = FieldPair::new(Arc::new(ZeroField { rank: 3, degree: 1 }), pb.sigma.clone(), 0.1, 1.0).unwrap();
        let back = pullback_monopole(&zero, ScaleMap::new(2.0).unwrap()).unwrap();
        assert_eq!(back.a.eval(&y).unwrap()[4].amax(), 0.0);
    }

    #[test]
    fn star_covariance() {
        let e1 = KForm::monomial(&[1], 1.0).unwrap();
        assert!(check_star_covariance(&MetricTensor::euclidean(), ScaleMap::new(2.0).unwrap(), &e1).unwrap() <= 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..10 {
            let g = random::spd::<f64, _>(&mut rng);
            let a = random::kform::<f64, _>(&mut rng, 1);
            assert!(check_star_covariance(&g, ScaleMap::new(3.0).unwrap(), &a).unwrap() <= 1e-10);
            assert_eq!(check_star_covariance(&g, ScaleMap::new(1.0).unwrap(), &a).unwrap(), 0.0);
        }
    }

    #[test]
    fn residual_is_covariant_for_polynomial_fields() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let a = Arc::new(random::poly_lie_field(&mut rng, 3, 1, 2, 3));
        let s = Arc::new(random::poly_lie_field(&mut rng, 3, 0, 2, 3));
        let pair = FieldPair::new(a, s, 0.01, 0.25).unwrap();
        let lam = 7.0;
        let sm = ScaleMap::new(lam).unwrap();
        let pts: Vec<Point> = sphere_points(40)
            .into_iter()
            .enumerate()
            .map(|(i, n)| n.map(|c| c * (0.02 + 0.2 * (i as f64 / 40.0)) / lam))
            .collect();
        for name in ["quadratic", "diffeo"] {
            let rows = residual_covariance(&pair, &family(name).unwrap(), sm, &pts).unwrap();
            let worst = rows.iter().map(|r| r.rel_error).fold(0.0, f64::max);
            assert!(worst <= 1e-9, "{name}: {worst}");
            assert!(rows.iter().all(|r| r.big_ball > 0.0));
        }
    }

    #[test]
    fn rejects_bad_scale() {
        assert!(ScaleMap::new(0.0).is_err());
        assert!(ScaleMap::new(f64::NAN).is_err());
        assert!(family("nope").is_err());
    }
}
