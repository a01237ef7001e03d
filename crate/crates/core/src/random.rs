//! Seeded random inputs shared by the property suites, tests and the CLI.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::forms::{dim, KForm, MetricTensor};
use crate::lie::{so_basis, LieMat};
use crate::linalg::{self, Mat7};
use crate::poly::{Poly7, PolyLieField};
use crate::scalar::Scalar;

pub fn kform<T: Scalar, R: Rng + ?Sized>(rng: &mut R, degree: usize) -> KForm<T> {
    let coeffs = (0..dim(degree)).map(|_| T::c(rng.gen_range(-1.0..1.0))).collect();
    KForm::from_coeffs(degree, coeffs).expect("finite")
}

/// `AᵀA + ½I` with `A` uniform in `[-½, ½]`.
pub fn spd<T: Scalar, R: Rng + ?Sized>(rng: &mut R) -> MetricTensor<T> {
    let mut a = [[T::zero(); 7]; 7];
    for row in a.iter_mut() {
        for v in row.iter_mut() {
            *v = T::c(rng.gen_range(-0.5..0.5));
        }
    }
    let mut g = linalg::mul7(&linalg::transpose7(&a), &a);
    for (i, row) in g.iter_mut().enumerate() {
        row[i] = row[i] + T::c(0.5);
    }
    crate::forms::symmetrize(&mut g);
    MetricTensor::new(g).expect("SPD by construction")
}

/// Haar-ish rotation in SO(7) via Gram–Schmidt on a Gaussian matrix.
pub fn rotation<T: Scalar, R: Rng + ?Sized>(rng: &mut R) -> Mat7<T> {
    let mut cols = [[0.0f64; 7]; 7];
    for c in cols.iter_mut() {
        for v in c.iter_mut() {
            *v = rng.sample(StandardNormal);
        }
    }
    for j in 0..7 {
        for k in 0..j {
            let d: f64 = (0..7).map(|i| cols[j][i] * cols[k][i]).sum();
            for i in 0..7 {
                cols[j][i] -= d * cols[k][i];
            }
        }
        let n: f64 = cols[j].iter().map(|x| x * x).sum::<f64>().sqrt();
        for v in cols[j].iter_mut() {
            *v /= n;
        }
    }
    let mut m = [[T::zero(); 7]; 7];
    for i in 0..7 {
        for j in 0..7 {
            m[i][j] = T::c(cols[j][i]);
        }
    }
    if linalg::det7(&m) < T::zero() {
        for row in m.iter_mut() {
            row[0] = -row[0];
        }
    }
    m
}

/// `U diag(s) V` with rotations `U, V` and singular values drawn from `[lo, hi]`.
pub fn with_singular_values<T: Scalar, R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> Mat7<T> {
    let u = rotation::<T, _>(rng);
    let v = rotation::<T, _>(rng);
    let mut d = [[T::zero(); 7]; 7];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = T::c(rng.gen_range(lo..=hi));
    }
    linalg::mul7(&linalg::mul7(&u, &d), &v)
}

/// `I + eps·N` with `N` uniform in `[-1, 1]`; orientation preserving for small `eps`.
pub fn near_identity<T: Scalar, R: Rng + ?Sized>(rng: &mut R, eps: f64) -> Mat7<T> {
    let mut m = linalg::identity7::<T>();
    for row in m.iter_mut() {
        for v in row.iter_mut() {
            *v = *v + T::c(eps * rng.gen_range(-1.0..1.0));
        }
    }
    m
}

pub fn unit_vector<R: Rng + ?Sized>(rng: &mut R) -> [f64; 7] {
    let mut v = [0.0; 7];
    for x in v.iter_mut() {
        *x = rng.sample(StandardNormal);
    }
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.map(|x| x / n)
}

/// Random element of SO(n) as a dense matrix.
pub fn orthogonal<R: Rng + ?Sized>(rng: &mut R, n: usize) -> LieMat {
    let g = LieMat::from_fn(n, n, |_, _| rng.sample(StandardNormal));
    let mut q = g.qr().q();
    if q.determinant() < 0.0 {
        q.column_mut(0).neg_mut();
    }
    q
}

/// Polynomial so(m)-valued field: each component is a sum of
/// `terms` random monomials of total degree ≤ `max_degree`, each times a
/// random so(m) element.
pub fn poly_lie_field<R: Rng + ?Sized>(
    rng: &mut R,
    rank: usize,
    degree: usize,
    max_degree: u32,
    terms: usize,
) -> PolyLieField {
    let basis = so_basis(rank);
    let comps = (0..if degree == 0 { 1 } else { 7 })
        .map(|_| {
            (0..terms)
                .map(|_| {
                    let mut e = [0u8; 7];
                    for _ in 0..rng.gen_range(0..=max_degree) {
                        e[rng.gen_range(0..7)] += 1;
                    }
                    let mut m = LieMat::zeros(rank, rank);
                    for b in &basis {
                        m += b * rng.gen_range(-1.0..1.0);
                    }
                    (Poly7::monomial(e, rng.gen_range(-1.0..1.0)), m)
                })
                .collect()
        })
        .collect();
    PolyLieField::new(rank, degree, comps).expect("valid shapes")
}
