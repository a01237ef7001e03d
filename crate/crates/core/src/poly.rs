//! Polynomials in `y₁…y₇` and polynomial-coefficient fields, for which
//! derivatives, dilations and pullbacks are exact.

use std::collections::BTreeMap;

use crate::error::{invalid, Error, Result};
use crate::fields::{Chart, LieField, StructureField};
use crate::forms::{basis, dim, parse_raw, MultiIndex};
use crate::lie::{zero_mat, LieMat};
use crate::{KForm, Point};

pub type Exponents = [u8; 7];

/// A real polynomial in seven variables.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Poly7 {
    terms: BTreeMap<Exponents, f64>,
}

pub fn total_degree(e: &Exponents) -> u32 {
    e.iter().map(|&n| n as u32).sum()
}

impl Poly7 {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: f64) -> Self {
        Self::monomial([0; 7], c)
    }

    pub fn monomial(e: Exponents, c: f64) -> Self {
        let mut p = Self::zero();
        p.add_term(e, c);
        p
    }

    /// `y_i` for a 0-based axis.
    pub fn var(i: usize) -> Self {
        let mut e = [0; 7];
        e[i] = 1;
        Self::monomial(e, 1.0)
    }

    pub fn add_term(&mut self, e: Exponents, c: f64) {
        if c == 0.0 {
            return;
        }
        let slot = self.terms.entry(e).or_insert(0.0);
        *slot += c;
        if *slot == 0.0 {
            self.terms.remove(&e);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponents, &f64)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(total_degree).max().unwrap_or(0)
    }

    pub fn constant_term(&self) -> f64 {
        self.terms.get(&[0; 7]).copied().unwrap_or(0.0)
    }

    pub fn without_constant(&self) -> Self {
        let mut p = self.clone();
        p.terms.remove(&[0; 7]);
        p
    }

    pub fn eval(&self, y: &Point) -> f64 {
        self.terms.iter().map(|(e, c)| c * e.iter().zip(y).map(|(&n, v)| v.powi(n as i32)).product::<f64>()).sum()
    }

    pub fn derivative(&self, i: usize) -> Self {
        let mut out = Self::zero();
        for (e, c) in &self.terms {
            if e[i] > 0 {
                let mut f = *e;
                f[i] -= 1;
                out.add_term(f, c * e[i] as f64);
            }
        }
        out
    }

    /// `∂^α p` for an exponent vector `α`.
    pub fn partial(&self, alpha: &Exponents) -> Self {
        let mut p = self.clone();
        for (i, &n) in alpha.iter().enumerate() {
            for _ in 0..n {
                p = p.derivative(i);
            }
        }
        p
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = Self::zero();
        for (e, c) in &self.terms {
            out.add_term(*e, c * s);
        }
        out
    }

    /// Multiplies the coefficient of each `y^α` by `f(|α|)`.
    pub fn map_by_degree(&self, f: impl Fn(u32) -> f64) -> Self {
        let mut out = Self::zero();
        for (e, c) in &self.terms {
            out.add_term(*e, c * f(total_degree(e)));
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(*e, *c);
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let mut e = [0u8; 7];
                for k in 0..7 {
                    e[k] = ea[k] + eb[k];
                }
                out.add_term(e, ca * cb);
            }
        }
        out
    }

    /// Linear part `b` and Hessian `H` (row-major) of a polynomial of degree ≤ 2.
    pub fn quadratic_parts(&self) -> Option<([f64; 7], [f64; 49])> {
        if self.degree() > 2 {
            return None;
        }
        let mut b = [0.0; 7];
        let mut h = [0.0; 49];
        for (e, c) in &self.terms {
            let axes: Vec<usize> = (0..7).flat_map(|k| std::iter::repeat_n(k, e[k] as usize)).collect();
            match axes.as_slice() {
                [] => {}
                [i] => b[*i] += c,
                [i, j] if i == j => h[i * 7 + i] += 2.0 * c,
                [i, j] => {
                    h[i * 7 + j] += c;
                    h[j * 7 + i] += c;
                }
                _ => unreachable!(),
            }
        }
        Some((b, h))
    }
}

/// A degree-`k` form whose coefficients are polynomials.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyFormField {
    degree: usize,
    coeffs: Vec<Poly7>,
}

impl PolyFormField {
    pub fn zero(degree: usize) -> Self {
        Self { degree, coeffs: vec![Poly7::zero(); dim(degree)] }
    }

    pub fn constant(form: &KForm) -> Self {
        Self { degree: form.degree(), coeffs: form.coeffs().iter().map(|&c| Poly7::constant(c)).collect() }
    }

    pub fn from_coeffs(degree: usize, coeffs: Vec<Poly7>) -> Result<Self> {
        if degree > 7 || coeffs.len() != dim(degree) {
            return invalid("coefficient count does not match the degree");
        }
        if coeffs.iter().any(|p| p.terms().any(|(_, c)| !c.is_finite())) {
            return invalid("non-finite polynomial coefficient");
        }
        Ok(Self { degree, coeffs })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coeffs(&self) -> &[Poly7] {
        &self.coeffs
    }

    pub fn coeff_mut(&mut self, idx: MultiIndex) -> &mut Poly7 {
        &mut self.coeffs[idx.position()]
    }

    /// Largest total degree over all coefficients.
    pub fn poly_degree(&self) -> u32 {
        self.coeffs.iter().map(Poly7::degree).max().unwrap_or(0)
    }

    pub fn eval(&self, y: &Point) -> KForm {
        KForm::from_coeffs(self.degree, self.coeffs.iter().map(|p| p.eval(y)).collect())
            .expect("finite polynomial values")
    }

    pub fn value_at_origin(&self) -> KForm {
        self.eval(&[0.0; 7])
    }

    pub fn map_coeffs(&self, f: impl Fn(&Poly7) -> Poly7) -> Self {
        Self { degree: self.degree, coeffs: self.coeffs.iter().map(f).collect() }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.degree != other.degree {
            return invalid("degree mismatch");
        }
        Ok(Self { degree: self.degree, coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a.add(b)).collect() })
    }

    /// `a ∧ b` with polynomial coefficients.
    pub fn wedge(&self, other: &Self) -> Result<Self> {
        let k = self.degree + other.degree;
        if k > 7 {
            return invalid(format!("wedge degree {k} exceeds 7"));
        }
        let mut out = Self::zero(k);
        for (pa, &ma) in basis(self.degree).iter().enumerate() {
            if self.coeffs[pa].is_zero() {
                continue;
            }
            for (pb, &mb) in basis(other.degree).iter().enumerate() {
                if ma & mb != 0 || other.coeffs[pb].is_zero() {
                    continue;
                }
                let s = crate::forms::shuffle_sign(ma, mb) as f64;
                let idx = MultiIndex::from_mask(ma | mb).position();
                out.coeffs[idx] = out.coeffs[idx].add(&self.coeffs[pa].mul(&other.coeffs[pb]).scale(s));
            }
        }
        Ok(out)
    }

    /// Parses the form text format with optional per-term exponents.
    pub fn parse(text: &str) -> Result<Self> {
        let (degree, terms) = parse_raw(text)?;
        let mut out = Self::zero(degree);
        for t in terms {
            let e = t.exponents.unwrap_or([0; 7]);
            if e.iter().any(|&n| n > 12) {
                return Err(Error::Parse { line: t.line, msg: "exponent above 12".into() });
            }
            out.coeffs[t.index.position()].add_term(e, t.value);
        }
        Ok(out)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("degree {}\n", self.degree);
        for (p, &m) in self.coeffs.iter().zip(basis(self.degree)) {
            let idx = MultiIndex::from_mask(m);
            for (e, c) in p.terms() {
                s.push_str(&format!("{idx} {c}"));
                for n in e {
                    s.push_str(&format!(" {n}"));
                }
                s.push('\n');
            }
        }
        s
    }
}

impl StructureField for PolyFormField {
    fn phi_at(&self, x: &Point) -> Result<KForm> {
        if self.degree != 3 {
            return invalid("a structure field needs a 3-form");
        }
        Ok(self.eval(x))
    }
}

/// The polynomial 1-forms `dΨ^i` of a polynomial map `Ψ`.
pub fn differentials(map: &[Poly7; 7]) -> Vec<PolyFormField> {
    map.iter()
        .map(|p| {
            let mut f = PolyFormField::zero(1);
            for j in 0..7 {
                f.coeffs[j] = p.derivative(j);
            }
            f
        })
        .collect()
}

/// `Ψ*ω` for a constant form `ω` and polynomial map `Ψ`.
pub fn pullback_constant(map: &[Poly7; 7], omega: &KForm) -> Result<PolyFormField> {
    let d = differentials(map);
    let mut out = PolyFormField::zero(omega.degree());
    for (idx, c) in omega.terms() {
        let mut acc = PolyFormField::constant(&KForm::scalar(c));
        for a in idx.axes() {
            acc = acc.wedge(&d[a - 1])?;
        }
        out = out.add(&acc)?;
    }
    Ok(out)
}

/// An so(m)-valued field with polynomial coefficients: component `c` is
/// `Σ_t p_t(y) M_t`.
#[derive(Debug, Clone)]
pub struct PolyLieField {
    rank: usize,
    degree: usize,
    comps: Vec<Vec<(Poly7, LieMat)>>,
}

impl PolyLieField {
    pub fn new(rank: usize, degree: usize, comps: Vec<Vec<(Poly7, LieMat)>>) -> Result<Self> {
        if degree > 1 || comps.len() != crate::fields::n_components(degree) {
            return invalid("polynomial fields have degree 0 (one component) or 1 (seven components)");
        }
        if comps.iter().flatten().any(|(_, m)| m.nrows() != rank || m.ncols() != rank) {
            return invalid(format!("matrices must be {rank}×{rank}"));
        }
        Ok(Self { rank, degree, comps })
    }

    /// `y ↦ λ·f(λy)`, computed on the coefficients.
    pub fn dilated(&self, lambda: f64) -> Self {
        let comps = self
            .comps
            .iter()
            .map(|terms| {
                terms.iter().map(|(p, m)| (p.map_by_degree(|d| lambda.powi(d as i32 + 1)), m.clone())).collect()
            })
            .collect();
        Self { rank: self.rank, degree: self.degree, comps }
    }
}

impl LieField for PolyLieField {
    fn rank(&self) -> usize {
        self.rank
    }

    fn degree(&self) -> usize {
        self.degree
    }

    fn eval_in(&self, _chart: Chart, y: &Point) -> Result<Vec<LieMat>> {
        Ok(self
            .comps
            .iter()
            .map(|terms| {
                let mut acc = zero_mat(self.rank);
                for (p, m) in terms {
                    acc += m * p.eval(y);
                }
                acc
            })
            .collect())
    }

    fn jacobian_in(&self, _chart: Chart, y: &Point) -> Result<Vec<Vec<LieMat>>> {
        Ok((0..7)
            .map(|i| {
                self.comps
                    .iter()
                    .map(|terms| {
                        let mut acc = zero_mat(self.rank);
                        for (p, m) in terms {
                            acc += m * p.derivative(i).eval(y);
                        }
                        acc
                    })
                    .collect()
            })
            .collect())
    }
}
