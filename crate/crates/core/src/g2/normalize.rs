//! Linear normalization `L` with `L*φ = φ₀`.
//!
//! Stage one whitens by `g^{-1/2}` so the induced metric is the identity.
//! Stage two aligns the whitened form with `φ₀` by Levenberg–Marquardt over
//! `so(7)` with a Cayley retraction back onto SO(7). The minimizers form a
//! 14-dimensional G₂-orbit and the landscape has saddles, so several
//! random starts are tried.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{euclidean_phi, metric_from_phi};
use crate::error::{Error, Result};
use crate::forms::{basis, pullback, KForm};
use crate::linalg::{self, Mat7};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy)]
pub struct NormalizeOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for NormalizeOptions {
    fn default() -> Self {
        Self { tol: 1e-8, max_iter: 500, restarts: 16, seed: 0 }
    }
}

#[derive(Debug, Clone)]
pub struct NormalizationResult<T> {
    pub l: Mat7<T>,
    /// `|pullback(L, φ) − φ₀|`.
    pub residual: T,
    /// Index of the restart that produced `l`.
    pub restart: usize,
    /// Restarts actually run.
    pub restarts_run: usize,
}

const BATCH: usize = 4;

/// Finds `L` with `pullback(L, φ) = φ₀` up to `opts.tol`.
///
/// On failure the error carries the best residual reached over all restarts.
pub fn normalize<T: Scalar>(phi: &KForm<T>, opts: &NormalizeOptions) -> Result<NormalizationResult<T>> {
    let g = metric_from_phi(phi)?;
    let w = linalg::sym_fn7(g.entries(), |x| T::one() / x.sqrt());
    let white = pullback(&w, phi)?;
    let target = euclidean_phi::<T>();
    let tol = T::c(opts.tol);

    let mut best: Option<NormalizationResult<T>> = None;
    let mut run = 0;
    while run < opts.restarts.max(1) {
        let batch: Vec<usize> = (run..(run + BATCH).min(opts.restarts.max(1))).collect();
        let results: Vec<(usize, Mat7<T>, T)> = batch
            .par_iter()
            .map(|&r| {
                let start = if r == 0 {
                    linalg::identity7()
                } else {
                    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_mul(0x9E37_79B9).wrapping_add(r as u64));
                    crate::random::rotation::<T, _>(&mut rng)
                };
                let (q, res) = align(&white, &target, start, tol, opts.max_iter);
                (r, q, res)
            })
            .collect();
        run += batch.len();
        for (r, q, _) in results {
            let l = linalg::mul7(&w, &q);
            let residual = (&pullback(&l, phi)? - &target).norm();
            let better = match &best {
                None => true,
                Some(b) => residual < b.residual,
            };
            if better {
                best = Some(NormalizationResult { l, residual, restart: r, restarts_run: 0 });
            }
        }
        if best.as_ref().is_some_and(|b| b.residual <= tol) {
            break;
        }
    }
    let mut best = best.expect("at least one restart");
    best.restarts_run = run;
    if best.residual <= tol {
        Ok(best)
    } else {
        Err(Error::NotConverged { iterations: opts.max_iter * run, best_residual: best.residual.to_f64_lossy() })
    }
}

/// Basis of so(7): `E_ab − E_ba` for `a < b`.
fn so7_pairs() -> Vec<(usize, usize)> {
    let mut v = Vec::with_capacity(21);
    for a in 0..7 {
        for b in a + 1..7 {
            v.push((a, b));
        }
    }
    v
}

/// Derivative of `t ↦ pullback(I + tX, ψ)` at 0 for `X = E_ab − E_ba`:
/// every `dy^a` is replaced by `dy^b` and every `dy^b` by `−dy^a`.
fn derivation<T: Scalar>(psi: &KForm<T>, a: usize, b: usize) -> KForm<T> {
    let k = psi.degree();
    let mut out = KForm::zero(k);
    for (idx, c) in psi.terms() {
        let axes: Vec<usize> = idx.axes().iter().map(|x| x - 1).collect();
        for (slot, &ax) in axes.iter().enumerate() {
            let (to, sign) = if ax == a {
                (b, T::one())
            } else if ax == b {
                (a, -T::one())
            } else {
                continue;
            };
            let mut new_axes: Vec<usize> = axes.iter().map(|x| x + 1).collect();
            new_axes[slot] = to + 1;
            let term = KForm::monomial(&new_axes, c * sign).expect("valid axes");
            out = &out + &term;
        }
    }
    out
}

fn cayley<T: Scalar>(x: &Mat7<T>) -> Mat7<T> {
    let half = T::c(0.5);
    let mut minus = linalg::identity7::<T>();
    let mut plus = linalg::identity7::<T>();
    for i in 0..7 {
        for j in 0..7 {
            minus[i][j] = minus[i][j] - half * x[i][j];
            plus[i][j] = plus[i][j] + half * x[i][j];
        }
    }
    let inv = linalg::inverse7(&minus).expect("I − X/2 invertible for antisymmetric X");
    linalg::mul7(&inv, &plus)
}

/// Levenberg–Marquardt on SO(7) minimizing `|pullback(Q, white) − target|`.
fn align<T: Scalar>(white: &KForm<T>, target: &KForm<T>, start: Mat7<T>, tol: T, max_iter: usize) -> (Mat7<T>, T) {
    let pairs = so7_pairs();
    let n = pairs.len();
    let m = basis(3).len();
    let mut q = start;
    let mut psi = pullback(&q, white).expect("rotation is invertible");
    let mut r = &psi - target;
    let mut cost = r.norm();
    let mut mu = T::c(1e-3);
    for _ in 0..max_iter {
        if cost <= tol {
            break;
        }
        let cols: Vec<KForm<T>> = pairs.iter().map(|&(a, b)| derivation(&psi, a, b)).collect();
        let mut jtj = vec![T::zero(); n * n];
        let mut jtr = vec![T::zero(); n];
        for i in 0..n {
            jtr[i] = cols[i].dot(&r);
            for j in i..n {
                let v = cols[i].dot(&cols[j]);
                jtj[i * n + j] = v;
                jtj[j * n + i] = v;
            }
        }
        let mut improved = false;
        for _ in 0..30 {
            let mut a = jtj.clone();
            for i in 0..n {
                a[i * n + i] = a[i * n + i] + mu * (T::one() + jtj[i * n + i]);
            }
            let rhs: Vec<T> = jtr.iter().map(|&v| -v).collect();
            let Some(step) = linalg::solve(&a, &rhs, n) else {
                mu = mu * T::c(10.0);
                continue;
            };
            let mut x = [[T::zero(); 7]; 7];
            for (k, &(a_, b_)) in pairs.iter().enumerate() {
                x[a_][b_] = step[k];
                x[b_][a_] = -step[k];
            }
            let q_new = linalg::mul7(&q, &cayley(&x));
            let psi_new = pullback(&q_new, white).expect("rotation is invertible");
            let r_new = &psi_new - target;
            let c_new = r_new.norm();
            if c_new < cost {
                q = q_new;
                psi = psi_new;
                r = r_new;
                cost = c_new;
                mu = (mu / T::c(3.0)).max(T::c(1e-12));
                improved = true;
                break;
            }
            mu = mu * T::c(4.0);
        }
        if !improved {
            break;
        }
    }
    debug_assert_eq!(r.coeffs().len(), m);
    (q, cost)
}
