//! so(m)-valued alternating forms: curvatures, covariant derivatives and
//! monopole residuals.

use nalgebra::DMatrix;

use crate::error::{invalid, Result};
use crate::forms::{basis, dim, hodge_matrix, shuffle_sign, MultiIndex, DIM};
use crate::{KForm, MetricTensor};

pub type LieMat = DMatrix<f64>;

pub fn zero_mat(m: usize) -> LieMat {
    LieMat::zeros(m, m)
}

pub fn commutator(a: &LieMat, b: &LieMat) -> LieMat {
    a * b - b * a
}

/// Largest entry of `a + aᵀ`.
pub fn antisymmetry_defect(a: &LieMat) -> f64 {
    (a + a.transpose()).amax()
}

/// The standard basis `E_ab − E_ba`, `a < b`, of so(m).
pub fn so_basis(m: usize) -> Vec<LieMat> {
    let mut out = Vec::with_capacity(m * (m.saturating_sub(1)) / 2);
    for a in 0..m {
        for b in a + 1..m {
            let mut e = zero_mat(m);
            e[(a, b)] = 1.0;
            e[(b, a)] = -1.0;
            out.push(e);
        }
    }
    out
}

/// Degree-`k` form whose coefficients are m×m matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct LieForm {
    degree: usize,
    rank: usize,
    coeffs: Vec<LieMat>,
}

impl LieForm {
    pub fn zero(degree: usize, rank: usize) -> Self {
        assert!(degree <= DIM);
        Self { degree, rank, coeffs: vec![zero_mat(rank); dim(degree)] }
    }

    pub fn from_coeffs(degree: usize, rank: usize, coeffs: Vec<LieMat>) -> Result<Self> {
        if degree > DIM || coeffs.len() != dim(degree) {
            return invalid(format!(
                "degree {degree} needs {} coefficients, got {}",
                dim(degree.min(DIM)),
                coeffs.len()
            ));
        }
        if coeffs.iter().any(|c| c.nrows() != rank || c.ncols() != rank) {
            return invalid(format!("coefficients must be {rank}×{rank}"));
        }
        if coeffs.iter().any(|c| c.iter().any(|v| !v.is_finite())) {
            return invalid("non-finite coefficient");
        }
        Ok(Self { degree, rank, coeffs })
    }

    /// `Σ_i a_i dy^i` from seven component matrices.
    pub fn one_form(rank: usize, comps: Vec<LieMat>) -> Result<Self> {
        Self::from_coeffs(1, rank, comps)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn coeffs(&self) -> &[LieMat] {
        &self.coeffs
    }

    pub fn coeff_mut(&mut self, idx: MultiIndex) -> &mut LieMat {
        &mut self.coeffs[idx.position()]
    }

    pub fn get(&self, idx: MultiIndex) -> &LieMat {
        &self.coeffs[idx.position()]
    }

    /// `self ∧ ω` for a scalar form `ω`.
    pub fn wedge_scalar(&self, omega: &KForm) -> Result<Self> {
        let k = self.degree + omega.degree();
        if k > DIM {
            return invalid(format!("wedge degree {k} exceeds 7"));
        }
        let mut out = Self::zero(k, self.rank);
        for (pa, &ma) in basis(self.degree).iter().enumerate() {
            let a = &self.coeffs[pa];
            if a.iter().all(|v| *v == 0.0) {
                continue;
            }
            for (pb, &mb) in basis(omega.degree()).iter().enumerate() {
                let c = omega.coeffs()[pb];
                if c == 0.0 || ma & mb != 0 {
                    continue;
                }
                let s = shuffle_sign(ma, mb) as f64;
                let slot = &mut out.coeffs[MultiIndex::from_mask(ma | mb).position()];
                *slot += a * (s * c);
            }
        }
        Ok(out)
    }

    /// Componentwise Hodge star.
    pub fn hodge(&self, g: &MetricTensor) -> Self {
        let h = hodge_matrix(g, self.degree);
        let coeffs = h
            .iter()
            .map(|row| {
                let mut acc = zero_mat(self.rank);
                for (c, m) in row.iter().zip(&self.coeffs) {
                    if *c != 0.0 {
                        acc += m * *c;
                    }
                }
                acc
            })
            .collect();
        Self { degree: DIM - self.degree, rank: self.rank, coeffs }
    }

    /// `sqrt(Σ_I |M_I|²_F)`.
    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|m| m.norm_squared()).sum::<f64>().sqrt()
    }

    pub fn antisymmetry_defect(&self) -> f64 {
        self.coeffs.iter().map(antisymmetry_defect).fold(0.0, f64::max)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { degree: self.degree, rank: self.rank, coeffs: self.coeffs.iter().map(|m| m * s).collect() }
    }

    pub fn axpy(&mut self, s: f64, other: &Self) {
        assert_eq!((self.degree, self.rank), (other.degree, other.rank));
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += b * s;
        }
    }

    /// All matrix entries, index-major, row-major within each block.
    pub fn flatten_into(&self, out: &mut Vec<f64>) {
        for m in &self.coeffs {
            for i in 0..self.rank {
                for j in 0..self.rank {
                    out.push(m[(i, j)]);
                }
            }
        }
    }
}

impl std::ops::Sub for &LieForm {
    type Output = LieForm;
    fn sub(self, rhs: &LieForm) -> LieForm {
        let mut out = self.clone();
        out.axpy(-1.0, rhs);
        out
    }
}

impl std::ops::Add for &LieForm {
    type Output = LieForm;
    fn add(self, rhs: &LieForm) -> LieForm {
        let mut out = self.clone();
        out.axpy(1.0, rhs);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::g2::euclidean_phi;

    fn dy(axes: &[usize]) -> KForm {
        KForm::monomial(axes, 1.0).unwrap()
    }

    #[test]
    fn so_basis_is_antisymmetric_and_complete() {
        let b = so_basis(4);
        assert_eq!(b.len(), 6);
        assert!(b.iter().all(|m| antisymmetry_defect(m) == 0.0));
    }

    #[test]
    fn wedge_with_scalar_form_follows_shuffle_sign() {
        let e = &so_basis(2)[0];
        let mut a = LieForm::zero(1, 2);
        *a.coeff_mut(MultiIndex::new(&[2]).unwrap()) = e.clone();
        let w = a.wedge_scalar(&dy(&[1])).unwrap();
        assert_eq!(w.get(MultiIndex::new(&[1, 2]).unwrap()), &(e * -1.0));
        assert!(a.wedge_scalar(&KForm::volume()).is_err());
    }

    #[test]
    fn hodge_matches_scalar_hodge_blockwise() {
        let e = &so_basis(3)[1];
        let phi = euclidean_phi::<f64>();
        let coeffs = phi.coeffs().iter().map(|c| e * *c).collect();
        let lf = LieForm::from_coeffs(3, 3, coeffs).unwrap();
        let g = crate::random::spd::<f64, _>(&mut <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(3));
        let star = lf.hodge(&g);
        let scalar = crate::forms::hodge(&g, &phi);
        for (m, c) in star.coeffs().iter().zip(scalar.coeffs()) {
            assert!((m - e * *c).amax() < 1e-14);
        }
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(LieForm::from_coeffs(1, 2, vec![zero_mat(2); 6]).is_err());
        assert!(LieForm::from_coeffs(1, 2, vec![zero_mat(3); 7]).is_err());
    }
}
