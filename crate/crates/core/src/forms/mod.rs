//! Alternating forms on ℝ⁷ with a metric-dependent Hodge star, interior
//! products and linear pullbacks.
//!
//! Orientation is fixed by `dy^{1…7}`. Coefficients are stored densely over
//! the lexicographic basis of each degree (at most 35 entries).

mod basis;
pub mod checks;
mod text;

use std::ops::{Add, Mul, Neg, Sub};

pub(crate) use basis::wedge_table;
pub use basis::{basis, dim, shuffle_sign, MultiIndex, DIM};

use crate::error::{invalid, Error, Result};
use crate::linalg::{self, Mat7};
use crate::scalar::Scalar;

/// Degree-`k` alternating form with dense coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct KForm<T> {
    degree: usize,
    coeffs: Vec<T>,
}

impl<T: Scalar> KForm<T> {
    pub fn zero(degree: usize) -> Self {
        assert!(degree <= DIM, "degree {degree} > 7");
        Self { degree, coeffs: vec![T::zero(); dim(degree)] }
    }

    pub fn from_coeffs(degree: usize, coeffs: Vec<T>) -> Result<Self> {
        if degree > DIM {
            return invalid(format!("degree {degree} > 7"));
        }
        if coeffs.len() != dim(degree) {
            return invalid(format!("degree {degree} needs {} coefficients, got {}", dim(degree), coeffs.len()));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return invalid("non-finite coefficient");
        }
        Ok(Self { degree, coeffs })
    }

    /// The constant 0-form `c`.
    pub fn scalar(c: T) -> Self {
        Self { degree: 0, coeffs: vec![c] }
    }

    /// `c · dy^{a₁} ∧ … ∧ dy^{a_k}` for 1-based axes in any order.
    ///
    /// Repeated axes give the zero form; out-of-order axes pick up the
    /// permutation sign.
    pub fn monomial(axes: &[usize], c: T) -> Result<Self> {
        let mut out = Self::zero(axes.len());
        let mut sorted = axes.to_vec();
        let mut sign = T::one();
        // bubble sort to track parity
        for i in 0..sorted.len() {
            for j in 0..sorted.len() - 1 - i {
                if sorted[j] > sorted[j + 1] {
                    sorted.swap(j, j + 1);
                    sign = -sign;
                }
            }
        }
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Ok(out);
        }
        let idx = MultiIndex::new(&sorted)?;
        out.coeffs[idx.position()] = sign * c;
        Ok(out)
    }

    /// The volume form `dy^{1234567}`.
    pub fn volume() -> Self {
        Self { degree: 7, coeffs: vec![T::one()] }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [T] {
        &mut self.coeffs
    }

    pub fn get(&self, idx: MultiIndex) -> T {
        debug_assert_eq!(idx.degree(), self.degree);
        self.coeffs[idx.position()]
    }

    pub fn set(&mut self, idx: MultiIndex, v: T) {
        debug_assert_eq!(idx.degree(), self.degree);
        self.coeffs[idx.position()] = v;
    }

    /// Nonzero terms as `(multi-index, coefficient)`.
    pub fn terms(&self) -> impl Iterator<Item = (MultiIndex, T)> + '_ {
        basis(self.degree)
            .iter()
            .zip(&self.coeffs)
            .filter(|(_, c)| **c != T::zero())
            .map(|(&m, &c)| (MultiIndex::from_mask(m), c))
    }

    pub fn scale(&self, s: T) -> Self {
        Self { degree: self.degree, coeffs: self.coeffs.iter().map(|&c| c * s).collect() }
    }

    /// Euclidean coefficient inner product (the `g = I` pairing).
    pub fn dot(&self, other: &Self) -> T {
        assert_eq!(self.degree, other.degree);
        self.coeffs.iter().zip(&other.coeffs).fold(T::zero(), |s, (&a, &b)| s + a * b)
    }

    pub fn norm(&self) -> T {
        self.dot(self).sqrt()
    }

    pub fn max_abs(&self) -> T {
        self.coeffs.iter().fold(T::zero(), |m, c| m.max(c.abs()))
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(T) -> U) -> KForm<U> {
        KForm { degree: self.degree, coeffs: self.coeffs.iter().map(|&c| f(c)).collect() }
    }
}

impl<T: Scalar> Add for &KForm<T> {
    type Output = KForm<T>;
    fn add(self, rhs: Self) -> KForm<T> {
        assert_eq!(self.degree, rhs.degree, "adding forms of different degree");
        KForm { degree: self.degree, coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(&a, &b)| a + b).collect() }
    }
}

impl<T: Scalar> Sub for &KForm<T> {
    type Output = KForm<T>;
    fn sub(self, rhs: Self) -> KForm<T> {
        assert_eq!(self.degree, rhs.degree, "subtracting forms of different degree");
        KForm { degree: self.degree, coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(&a, &b)| a - b).collect() }
    }
}

impl<T: Scalar> Neg for &KForm<T> {
    type Output = KForm<T>;
    fn neg(self) -> KForm<T> {
        self.scale(-T::one())
    }
}

impl<T: Scalar> Mul<T> for &KForm<T> {
    type Output = KForm<T>;
    fn mul(self, rhs: T) -> KForm<T> {
        self.scale(rhs)
    }
}

/// Symmetric positive-definite metric on ℝ⁷.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricTensor<T> {
    entries: Mat7<T>,
    inverse: Mat7<T>,
    det: T,
    euclidean: bool,
}

impl<T: Scalar> MetricTensor<T> {
    pub fn new(entries: Mat7<T>) -> Result<Self> {
        let mut scale = T::zero();
        for i in 0..7 {
            for j in 0..7 {
                if !entries[i][j].is_finite() {
                    return invalid("non-finite metric entry");
                }
                scale = scale.max(entries[i][j].abs());
            }
        }
        let tol = T::c(1e-12).max(T::epsilon() * T::c(64.0)) * scale.max(T::one());
        for i in 0..7 {
            for j in 0..i {
                if (entries[i][j] - entries[j][i]).abs() > tol {
                    return invalid(format!("metric not symmetric at ({}, {})", i + 1, j + 1));
                }
            }
        }
        let (vals, _) = linalg::sym_eigen7(&entries);
        if !(vals[0] > T::zero()) {
            return invalid(format!("metric not positive definite (smallest eigenvalue {})", vals[0]));
        }
        let inverse = linalg::inverse7(&entries).ok_or_else(|| Error::InvalidInput("metric is singular".into()))?;
        let det = linalg::det7(&entries);
        let euclidean = entries == linalg::identity7();
        Ok(Self { entries, inverse, det, euclidean })
    }

    pub fn euclidean() -> Self {
        let id = linalg::identity7();
        Self { entries: id, inverse: id, det: T::one(), euclidean: true }
    }

    pub fn entries(&self) -> &Mat7<T> {
        &self.entries
    }

    pub fn inverse(&self) -> &Mat7<T> {
        &self.inverse
    }

    pub fn det(&self) -> T {
        self.det
    }

    pub fn scaled(&self, s: T) -> Result<Self> {
        Self::new(linalg::scale7(&self.entries, s))
    }

    /// `Mᵀ g M`, the metric pulled back along `v ↦ M v`.
    pub fn pullback(&self, m: &Mat7<T>) -> Result<Self> {
        let mt = linalg::transpose7(m);
        let mut out = linalg::mul7(&linalg::mul7(&mt, &self.entries), m);
        symmetrize(&mut out);
        Self::new(out)
    }
}

pub(crate) fn symmetrize<T: Scalar>(m: &mut Mat7<T>) {
    let half = T::c(0.5);
    for i in 0..7 {
        for j in 0..i {
            let v = (m[i][j] + m[j][i]) * half;
            m[i][j] = v;
            m[j][i] = v;
        }
    }
}

/// `a ∧ b`.
pub fn wedge<T: Scalar>(a: &KForm<T>, b: &KForm<T>) -> Result<KForm<T>> {
    let k = a.degree + b.degree;
    if k > DIM {
        return invalid(format!("wedge degree {} + {} exceeds 7", a.degree, b.degree));
    }
    let mut out = KForm::zero(k);
    for &(pa, pb, pc, s) in wedge_table(a.degree, b.degree) {
        let ca = a.coeffs[pa as usize];
        let cb = b.coeffs[pb as usize];
        if ca == T::zero() || cb == T::zero() {
            continue;
        }
        let term = ca * cb;
        let slot = &mut out.coeffs[pc as usize];
        *slot = if s > 0 { *slot + term } else { *slot - term };
    }
    Ok(out)
}

/// Minor `det(m[rows, cols])` for row/column masks of equal size.
fn minor<T: Scalar>(m: &Mat7<T>, rows: u8, cols: u8) -> T {
    let r: Vec<usize> = (0..7).filter(|i| rows & (1 << i) != 0).collect();
    let c: Vec<usize> = (0..7).filter(|i| cols & (1 << i) != 0).collect();
    let n = r.len();
    let mut flat = Vec::with_capacity(n * n);
    for &i in &r {
        for &j in &c {
            flat.push(m[i][j]);
        }
    }
    linalg::det(&flat, n)
}

/// Matrix of the Hodge star on `k`-forms: row = output index (degree 7−k),
/// column = input index (degree k).
pub fn hodge_matrix<T: Scalar>(g: &MetricTensor<T>, k: usize) -> Vec<Vec<T>> {
    let src = basis(k);
    let dst_dim = dim(DIM - k);
    let mut out = vec![vec![T::zero(); src.len()]; dst_dim];
    if g.euclidean {
        for (pk, &mk) in src.iter().enumerate() {
            let comp = basis::TOP & !mk;
            let s = shuffle_sign(mk, comp);
            out[MultiIndex::from_mask(comp).position()][pk] = T::c(s as f64);
        }
        return out;
    }
    let vol = g.det.sqrt();
    for &mk in src {
        let comp = basis::TOP & !mk;
        let s = T::c(shuffle_sign(mk, comp) as f64) * vol;
        let row = MultiIndex::from_mask(comp).position();
        for (pi, &mi) in src.iter().enumerate() {
            out[row][pi] = s * minor(&g.inverse, mk, mi);
        }
    }
    out
}

/// `⋆_g a`, defined by `β ∧ ⋆a = ⟨β, a⟩_g vol_g`.
pub fn hodge<T: Scalar>(g: &MetricTensor<T>, a: &KForm<T>) -> KForm<T> {
    let k = a.degree;
    if g.euclidean {
        let mut out = KForm::zero(DIM - k);
        for (pk, &mk) in basis(k).iter().enumerate() {
            let comp = basis::TOP & !mk;
            let s = shuffle_sign(mk, comp);
            let c = a.coeffs[pk];
            out.coeffs[MultiIndex::from_mask(comp).position()] = if s > 0 { c } else { -c };
        }
        return out;
    }
    let h = hodge_matrix(g, k);
    let coeffs = h.iter().map(|row| row.iter().zip(&a.coeffs).fold(T::zero(), |s, (&m, &c)| s + m * c)).collect();
    KForm { degree: DIM - k, coeffs }
}

/// `ι_v a`.
pub fn interior<T: Scalar>(v: &[T; 7], a: &KForm<T>) -> Result<KForm<T>> {
    if a.degree == 0 {
        return invalid("interior product of a 0-form");
    }
    let mut out = KForm::zero(a.degree - 1);
    for (pk, &mk) in basis(a.degree).iter().enumerate() {
        let c = a.coeffs[pk];
        if c == T::zero() {
            continue;
        }
        let mut position = 0;
        for i in 0..DIM {
            if mk & (1 << i) == 0 {
                continue;
            }
            let rest = mk & !(1 << i);
            let term = v[i] * c;
            let slot = &mut out.coeffs[MultiIndex::from_mask(rest).position()];
            *slot = if position % 2 == 0 { *slot + term } else { *slot - term };
            position += 1;
        }
    }
    Ok(out)
}

/// Pullback of `a` along the linear map `v ↦ M v`: `(M*a)_J = Σ_I a_I det M[I, J]`.
pub fn pullback<T: Scalar>(m: &Mat7<T>, a: &KForm<T>) -> Result<KForm<T>> {
    let d = linalg::det7(m);
    if !(d.abs() > T::zero()) || !d.is_finite() {
        return invalid("pullback along a singular matrix");
    }
    let k = a.degree;
    let mut out = KForm::zero(k);
    if k == 0 {
        out.coeffs[0] = a.coeffs[0];
        return Ok(out);
    }
    for (pj, &mj) in basis(k).iter().enumerate() {
        let mut s = T::zero();
        for (pi, &mi) in basis(k).iter().enumerate() {
            let c = a.coeffs[pi];
            if c != T::zero() {
                s = s + c * minor(m, mi, mj);
            }
        }
        out.coeffs[pj] = s;
    }
    Ok(out)
}

/// Relative distance `|a − b| / max(|b|, floor)`.
pub fn rel_error<T: Scalar>(a: &KForm<T>, b: &KForm<T>, floor: T) -> T {
    (a - b).norm() / b.norm().max(floor)
}

pub(crate) use text::parse_raw;
pub use text::{parse_form, write_form};
