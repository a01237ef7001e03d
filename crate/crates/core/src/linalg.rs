//! Small dense linear algebra on row-major slices and fixed 7×7 arrays.
//!
//! Everything here is generic over [`Scalar`] so the form layer can run in
//! `f32` or `f64`. Sizes never exceed a few dozen, so plain Gaussian
//! elimination and cyclic Jacobi are all that is needed.

use crate::scalar::Scalar;

pub type Mat7<T> = [[T; 7]; 7];

pub fn identity7<T: Scalar>() -> Mat7<T> {
    let mut m = [[T::zero(); 7]; 7];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = T::one();
    }
    m
}

pub fn scaled_identity7<T: Scalar>(s: T) -> Mat7<T> {
    let mut m = [[T::zero(); 7]; 7];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = s;
    }
    m
}

pub fn mul7<T: Scalar>(a: &Mat7<T>, b: &Mat7<T>) -> Mat7<T> {
    let mut c = [[T::zero(); 7]; 7];
    for i in 0..7 {
        for k in 0..7 {
            let aik = a[i][k];
            if aik == T::zero() {
                continue;
            }
            for j in 0..7 {
                c[i][j] = c[i][j] + aik * b[k][j];
            }
        }
    }
    c
}

pub fn transpose7<T: Scalar>(a: &Mat7<T>) -> Mat7<T> {
    let mut t = [[T::zero(); 7]; 7];
    for i in 0..7 {
        for j in 0..7 {
            t[j][i] = a[i][j];
        }
    }
    t
}

pub fn scale7<T: Scalar>(a: &Mat7<T>, s: T) -> Mat7<T> {
    let mut out = *a;
    for row in out.iter_mut() {
        for v in row.iter_mut() {
            *v = *v * s;
        }
    }
    out
}

/// Frobenius norm of `a - b`.
pub fn dist7<T: Scalar>(a: &Mat7<T>, b: &Mat7<T>) -> T {
    let mut s = T::zero();
    for i in 0..7 {
        for j in 0..7 {
            let d = a[i][j] - b[i][j];
            s = s + d * d;
        }
    }
    s.sqrt()
}

pub fn frobenius7<T: Scalar>(a: &Mat7<T>) -> T {
    dist7(a, &[[T::zero(); 7]; 7])
}

pub fn to_flat<T: Scalar>(a: &Mat7<T>) -> Vec<T> {
    a.iter().flat_map(|r| r.iter().copied()).collect()
}

pub fn from_flat<T: Scalar>(v: &[T]) -> Mat7<T> {
    let mut m = [[T::zero(); 7]; 7];
    for i in 0..7 {
        m[i].copy_from_slice(&v[7 * i..7 * i + 7]);
    }
    m
}

/// Determinant of an `n×n` row-major matrix by partial-pivot elimination.
pub fn det<T: Scalar>(a: &[T], n: usize) -> T {
    debug_assert_eq!(a.len(), n * n);
    match n {
        0 => return T::one(),
        1 => return a[0],
        2 => return a[0] * a[3] - a[1] * a[2],
        _ => {}
    }
    let mut m = a.to_vec();
    let mut d = T::one();
    for col in 0..n {
        let mut piv = col;
        let mut best = m[col * n + col].abs();
        for r in col + 1..n {
            let v = m[r * n + col].abs();
            if v > best {
                best = v;
                piv = r;
            }
        }
        if best == T::zero() {
            return T::zero();
        }
        if piv != col {
            for c in 0..n {
                m.swap(col * n + c, piv * n + c);
            }
            d = -d;
        }
        let p = m[col * n + col];
        d = d * p;
        for r in col + 1..n {
            let f = m[r * n + col] / p;
            if f == T::zero() {
                continue;
            }
            for c in col + 1..n {
                m[r * n + c] = m[r * n + c] - f * m[col * n + c];
            }
        }
    }
    d
}

pub fn det7<T: Scalar>(a: &Mat7<T>) -> T {
    det(&to_flat(a), 7)
}

/// Solves `a x = b` for square `a`; `None` when a pivot vanishes.
pub fn solve<T: Scalar>(a: &[T], b: &[T], n: usize) -> Option<Vec<T>> {
    let mut m = a.to_vec();
    let mut x = b.to_vec();
    for col in 0..n {
        let mut piv = col;
        let mut best = m[col * n + col].abs();
        for r in col + 1..n {
            let v = m[r * n + col].abs();
            if v > best {
                best = v;
                piv = r;
            }
        }
        if !(best > T::zero()) {
            return None;
        }
        if piv != col {
            for c in 0..n {
                m.swap(col * n + c, piv * n + c);
            }
            x.swap(col, piv);
        }
        let p = m[col * n + col];
        for r in col + 1..n {
            let f = m[r * n + col] / p;
            if f == T::zero() {
                continue;
            }
            for c in col..n {
                m[r * n + c] = m[r * n + c] - f * m[col * n + c];
            }
            x[r] = x[r] - f * x[col];
        }
    }
    for col in (0..n).rev() {
        let mut s = x[col];
        for c in col + 1..n {
            s = s - m[col * n + c] * x[c];
        }
        x[col] = s / m[col * n + col];
    }
    Some(x)
}

pub fn inverse7<T: Scalar>(a: &Mat7<T>) -> Option<Mat7<T>> {
    let flat = to_flat(a);
    let mut inv = [[T::zero(); 7]; 7];
    for j in 0..7 {
        let mut e = vec![T::zero(); 7];
        e[j] = T::one();
        let col = solve(&flat, &e, 7)?;
        for i in 0..7 {
            inv[i][j] = col[i];
        }
    }
    Some(inv)
}

/// Cyclic Jacobi eigen-decomposition of a symmetric `n×n` matrix.
///
/// Returns eigenvalues (ascending) and the row-major matrix whose columns are
/// the matching unit eigenvectors.
pub fn sym_eigen<T: Scalar>(a: &[T], n: usize) -> (Vec<T>, Vec<T>) {
    let mut m = a.to_vec();
    let mut v = vec![T::zero(); n * n];
    for i in 0..n {
        v[i * n + i] = T::one();
    }
    let two = T::c(2.0);
    for _sweep in 0..100 {
        let mut off = T::zero();
        let mut total = T::zero();
        for i in 0..n {
            for j in 0..n {
                let x = m[i * n + j] * m[i * n + j];
                total = total + x;
                if i != j {
                    off = off + x;
                }
            }
        }
        if off <= total * T::epsilon() * T::epsilon() || off == T::zero() {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[p * n + q];
                if apq == T::zero() {
                    continue;
                }
                let app = m[p * n + p];
                let aqq = m[q * n + q];
                let theta = (aqq - app) / (two * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[k * n + p];
                    let mkq = m[k * n + q];
                    m[k * n + p] = c * mkp - s * mkq;
                    m[k * n + q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[p * n + k];
                    let mqk = m[q * n + k];
                    m[p * n + k] = c * mpk - s * mqk;
                    m[q * n + k] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[i * n + i].partial_cmp(&m[j * n + j]).unwrap_or(std::cmp::Ordering::Equal));
    let vals = order.iter().map(|&i| m[i * n + i]).collect();
    let mut vecs = vec![T::zero(); n * n];
    for (new, &old) in order.iter().enumerate() {
        for k in 0..n {
            vecs[k * n + new] = v[k * n + old];
        }
    }
    (vals, vecs)
}

pub fn sym_eigen7<T: Scalar>(a: &Mat7<T>) -> ([T; 7], Mat7<T>) {
    let (vals, vecs) = sym_eigen(&to_flat(a), 7);
    let mut out = [T::zero(); 7];
    out.copy_from_slice(&vals);
    (out, from_flat(&vecs))
}

/// Applies `f` to the spectrum of a symmetric matrix.
pub fn sym_fn7<T: Scalar>(a: &Mat7<T>, f: impl Fn(T) -> T) -> Mat7<T> {
    let (vals, vecs) = sym_eigen7(a);
    let mut out = [[T::zero(); 7]; 7];
    for i in 0..7 {
        for j in 0..7 {
            let mut s = T::zero();
            for k in 0..7 {
                s = s + vecs[i][k] * f(vals[k]) * vecs[j][k];
            }
            out[i][j] = s;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn det_of_permutation_and_triangular() {
        let a: [f64; 9] = [0.0, 1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0];
        assert_eq!(det(&a, 3), -1.0);
        let b: [f64; 9] = [2.0, 1.0, 4.0, 0.0, 3.0, 5.0, 0.0, 0.0, 0.5];
        assert!((det(&b, 3) - 3.0).abs() < 1e-15);
    }

    #[test]
    fn inverse_round_trip() {
        let mut a = identity7::<f64>();
        for i in 0..7 {
            for j in 0..7 {
                a[i][j] += 0.1 * ((i * 7 + j) as f64).sin();
            }
        }
        let inv = inverse7(&a).unwrap();
        assert!(dist7(&mul7(&a, &inv), &identity7()) < 1e-12);
    }

    #[test]
    fn jacobi_reconstructs_symmetric_matrix() {
        let mut a = [[0.0f64; 7]; 7];
        for i in 0..7 {
            for j in 0..=i {
                let v = ((i + 2 * j) as f64).cos();
                a[i][j] = v;
                a[j][i] = v;
            }
        }
        let (vals, vecs) = sym_eigen7(&a);
        for w in vals.windows(2) {
            assert!(w[0] <= w[1]);
        }
        let back = sym_fn7(&a, |x| x);
        assert!(dist7(&a, &back) < 1e-12);
        let vtv = mul7(&transpose7(&vecs), &vecs);
        assert!(dist7(&vtv, &identity7()) < 1e-12);
    }

    #[test]
    fn singular_solve_is_none() {
        let a: [f64; 4] = [1.0, 2.0, 2.0, 4.0];
        assert!(solve(&a, &[1.0, 1.0], 2).is_none());
    }
}
