//! G₂-structures: the metric, coassociative form and volume induced by a
//! 3-form, and linear normalization of a pointwise G₂-form to `φ₀`.

mod normalize;

pub use normalize::{normalize, NormalizationResult, NormalizeOptions};

use crate::error::{Error, Result};
use crate::forms::{hodge, interior, wedge, KForm, MetricTensor};
use crate::linalg::{self, Mat7};
use crate::scalar::Scalar;

const PHI0_TERMS: [([usize; 3], f64); 7] = [
    ([1, 2, 3], 1.0),
    ([1, 4, 5], -1.0),
    ([1, 6, 7], -1.0),
    ([2, 4, 6], -1.0),
    ([2, 5, 7], 1.0),
    ([3, 4, 7], -1.0),
    ([3, 5, 6], -1.0),
];

/// `dy¹²³ − dy¹⁴⁵ − dy¹⁶⁷ − dy²⁴⁶ + dy²⁵⁷ − dy³⁴⁷ − dy³⁵⁶`.
pub fn euclidean_phi<T: Scalar>() -> KForm<T> {
    let mut phi = KForm::zero(3);
    for (axes, s) in PHI0_TERMS {
        let idx = crate::forms::MultiIndex::new(&axes).expect("static index");
        phi.set(idx, T::c(s));
    }
    phi
}

/// Fully antisymmetric components `φ_{ijk}` (0-based) of a 3-form.
pub fn phi_tensor<T: Scalar>(phi: &KForm<T>) -> [[[T; 7]; 7]; 7] {
    assert_eq!(phi.degree(), 3);
    let mut t = [[[T::zero(); 7]; 7]; 7];
    for (idx, c) in phi.terms() {
        let a = idx.axes();
        let (i, j, k) = (a[0] - 1, a[1] - 1, a[2] - 1);
        t[i][j][k] = c;
        t[j][k][i] = c;
        t[k][i][j] = c;
        t[j][i][k] = -c;
        t[i][k][j] = -c;
        t[k][j][i] = -c;
    }
    t
}

/// The symmetric bilinear form `B_ij = ⅙ (ι_i φ ∧ ι_j φ ∧ φ) / dy^{1…7}`.
pub fn b_matrix<T: Scalar>(phi: &KForm<T>) -> Result<Mat7<T>> {
    if phi.degree() != 3 {
        return Err(Error::InvalidInput(format!("expected a 3-form, got degree {}", phi.degree())));
    }
    let mut iotas = Vec::with_capacity(7);
    for i in 0..7 {
        let mut e = [T::zero(); 7];
        e[i] = T::one();
        iotas.push(interior(&e, phi)?);
    }
    let fives: Vec<KForm<T>> = iotas.iter().map(|w| wedge(w, phi)).collect::<Result<_>>()?;
    let sixth = T::c(1.0 / 6.0);
    let mut b = [[T::zero(); 7]; 7];
    for i in 0..7 {
        for j in i..7 {
            let top = wedge(&iotas[i], &fives[j])?;
            let v = top.coeffs()[0] * sixth;
            b[i][j] = v;
            b[j][i] = v;
        }
    }
    Ok(b)
}

/// Metric together with the nondegeneracy margin `λ_min(B) / λ_max(B)`.
pub fn metric_with_margin<T: Scalar>(phi: &KForm<T>) -> Result<(MetricTensor<T>, T)> {
    let b = b_matrix(phi)?;
    let (vals, _) = linalg::sym_eigen7(&b);
    if !(vals[0] > T::zero()) {
        return Err(Error::Degenerate(format!(
            "B-matrix not positive definite (eigenvalues {:?}); not a positively oriented G2-form",
            vals.iter().map(|v| v.to_f64_lossy()).collect::<Vec<_>>()
        )));
    }
    let det = vals.iter().fold(T::one(), |p, &v| p * v);
    let s = det.powf(T::c(-1.0 / 9.0));
    let mut g = linalg::scale7(&b, s);
    crate::forms::symmetrize(&mut g);
    let margin = vals[0] / vals[6];
    Ok((MetricTensor::new(g)?, margin))
}

/// `g = B · det(B)^{-1/9}`, normalized so that `φ₀ ↦ I₇`.
pub fn metric_from_phi<T: Scalar>(phi: &KForm<T>) -> Result<MetricTensor<T>> {
    metric_with_margin(phi).map(|(g, _)| g)
}

/// `ψ = ⋆_{g(φ)} φ`.
pub fn coassociative<T: Scalar>(phi: &KForm<T>) -> Result<KForm<T>> {
    let g = metric_from_phi(phi)?;
    Ok(hodge(&g, phi))
}

/// A 3-form with everything it determines.
#[derive(Debug, Clone)]
pub struct G2Structure<T> {
    pub phi: KForm<T>,
    pub g: MetricTensor<T>,
    pub psi: KForm<T>,
    pub vol: KForm<T>,
    /// `λ_min(B) / λ_max(B)`; 1 for the round structure.
    pub margin: T,
}

impl<T: Scalar> G2Structure<T> {
    pub fn from_phi(phi: KForm<T>) -> Result<Self> {
        let (g, margin) = metric_with_margin(&phi)?;
        let psi = hodge(&g, &phi);
        let vol = KForm::volume().scale(g.det().sqrt());
        Ok(Self { phi, g, psi, vol, margin })
    }

    pub fn euclidean() -> Self {
        Self::from_phi(euclidean_phi()).expect("φ₀ is nondegenerate")
    }
}
