//! Per-radius Gram matrices of the monopole residual.
//!
//! On the sphere of radius `r` the ansatz `A = A₀ + Σ f_k T_k`, `σ = u·Σ₀`
//! has residual
//!
//! ```text
//! F_{A₀}∧ψ + Σ f_k (d_{A₀}T_k)∧ψ + Σ f_k' (dr∧T_k)∧ψ + Σ f_k f_l [T_k ∧ T_l]∧ψ
//!   + u' ⋆(dr·Σ₀) + u ⋆(d_{A₀}Σ₀) + Σ f_k u ⋆[T_k, Σ₀]
//! ```
//!
//! so its weighted sphere average is a quadratic form in the monomials
//! `m = (1, f, f', f_k f_l, u', u, f_k u)`. The Coulomb penalty
//! `d⋆_{A₀}(A − A₀) = Σ f_k div_{A₀}T_k + f_k' T_k(n)` is linear in `(f, f')`.

use std::sync::Arc;

use nalgebra::DMatrix;
use rayon::prelude::*;

use super::mesh::RadialMesh;
use super::templates::TemplateSet;
use crate::error::{invalid, Result};
use crate::fields::{covariant_d_from, curvature_from, LieField, StructureField};
use crate::forms::MultiIndex;
use crate::lie::{commutator, zero_mat, LieForm, LieMat};
use crate::sampling::sphere_points;
use crate::Point;

/// Positions of the monomials in `m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Layout {
    pub templates: usize,
    pub higgs: bool,
}

impl Layout {
    pub fn f(&self, k: usize) -> usize {
        1 + k
    }

    pub fn df(&self, k: usize) -> usize {
        1 + self.templates + k
    }

    /// `f_k f_l` for `k ≤ l`.
    pub fn ff(&self, k: usize, l: usize) -> usize {
        let (k, l) = if k <= l { (k, l) } else { (l, k) };
        let n = self.templates;
        1 + 2 * n + k * n - k * (k.saturating_sub(1)) / 2 - k + l
    }

    fn quad_end(&self) -> usize {
        let n = self.templates;
        1 + 2 * n + n * (n + 1) / 2
    }

    pub fn du(&self) -> usize {
        self.quad_end()
    }

    pub fn u(&self) -> usize {
        self.quad_end() + 1
    }

    pub fn fu(&self, k: usize) -> usize {
        self.quad_end() + 2 + k
    }

    pub fn len(&self) -> usize {
        if self.higgs {
            self.quad_end() + 2 + self.templates
        } else {
            self.quad_end()
        }
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn monomials(&self, f: &[f64], df: &[f64], u: f64, du: f64) -> Vec<f64> {
        let mut m = vec![0.0; self.len()];
        m[0] = 1.0;
        for k in 0..self.templates {
            m[self.f(k)] = f[k];
            m[self.df(k)] = df[k];
            for l in k..self.templates {
                m[self.ff(k, l)] = f[k] * f[l];
            }
        }
        if self.higgs {
            m[self.du()] = du;
            m[self.u()] = u;
            for k in 0..self.templates {
                m[self.fu(k)] = f[k] * u;
            }
        }
        m
    }
}

/// The structure, model, templates and Higgs template of a radial problem.
#[derive(Clone)]
pub struct Ingredients {
    pub structure: Arc<dyn StructureField>,
    pub a0: Arc<dyn LieField>,
    pub templates: Arc<dyn TemplateSet>,
    pub higgs: Option<Arc<dyn LieField>>,
}

impl Ingredients {
    pub fn validate(&self) -> Result<()> {
        let m = self.a0.rank();
        if self.a0.degree() != 1 || self.templates.rank() != m || self.templates.is_empty() {
            return invalid("model and templates must be so(m)-valued 1-forms of one rank");
        }
        if let Some(h) = &self.higgs {
            if h.degree() != 0 || h.rank() != m {
                return invalid("the Higgs template must be an so(m)-valued 0-form");
            }
        }
        Ok(())
    }

    pub fn layout(&self) -> Layout {
        Layout { templates: self.templates.len(), higgs: self.higgs.is_some() }
    }
}

/// Weighted Gram matrices, one pair per mesh radius.
#[derive(Debug, Clone)]
pub struct Grams {
    pub layout: Layout,
    pub residual: Vec<DMatrix<f64>>,
    pub gauge: Vec<DMatrix<f64>>,
}

fn two_form(rank: usize, f: impl Fn(usize, usize) -> LieMat) -> LieForm {
    let mut out = LieForm::zero(2, rank);
    for i in 0..7 {
        for j in i + 1..7 {
            *out.coeff_mut(MultiIndex::from_mask((1 << i) | (1 << j))) = f(i, j);
        }
    }
    out
}

/// Residual blocks (flattened 6-forms) and gauge blocks (flattened
/// matrices) at one point, indexed by monomial.
fn point_blocks(ing: &Ingredients, layout: &Layout, x: &Point) -> Result<(Vec<Vec<f64>>, Vec<Vec<f64>>)> {
    let m = ing.a0.rank();
    let r = crate::sampling::norm(x);
    let n = x.map(|c| c / r);
    let chart = ing.a0.chart_at(x);
    let st = ing.structure.structure_at(x)?;
    let a0 = ing.a0.eval_in(chart, x)?;
    let ja0 = ing.a0.jacobian_in(chart, x)?;
    let tv = ing.templates.values(chart, x)?;
    let tj = ing.templates.jacobians(chart, x)?;
    let nk = layout.templates;

    let mut res = vec![LieForm::zero(6, m); layout.len()];
    let mut gauge = vec![zero_mat(m); layout.len()];
    res[0] = curvature_from(&a0, &ja0).wedge_scalar(&st.psi)?;
    for k in 0..nk {
        let t = &tv[k];
        let j = &tj[k];
        let lin = two_form(m, |a, b| &j[a][b] - &j[b][a] + commutator(&a0[a], &t[b]) + commutator(&t[a], &a0[b]));
        res[layout.f(k)] = lin.wedge_scalar(&st.psi)?;
        let radial = two_form(m, |a, b| &t[b] * n[a] - &t[a] * n[b]);
        res[layout.df(k)] = radial.wedge_scalar(&st.psi)?;
        for l in k..nk {
            let s = &tv[l];
            let quad = if k == l {
                two_form(m, |a, b| commutator(&t[a], &t[b]))
            } else {
                two_form(m, |a, b| commutator(&t[a], &s[b]) + commutator(&s[a], &t[b]))
            };
            res[layout.ff(k, l)] = quad.wedge_scalar(&st.psi)?;
        }
        let mut div = zero_mat(m);
        let mut tn = zero_mat(m);
        for i in 0..7 {
            div += &j[i][i] + commutator(&a0[i], &t[i]);
            tn += &t[i] * n[i];
        }
        gauge[layout.f(k)] = div;
        gauge[layout.df(k)] = tn;
    }
    if let Some(h) = &ing.higgs {
        let s = h.eval_in(chart, x)?.swap_remove(0);
        let js = h.jacobian_in(chart, x)?;
        let radial = LieForm::one_form(m, (0..7).map(|i| &s * n[i]).collect())?;
        res[layout.du()] = radial.hodge(&st.g);
        res[layout.u()] = covariant_d_from(&a0, &s, &js).hodge(&st.g);
        for k in 0..nk {
            let br = LieForm::one_form(m, (0..7).map(|i| commutator(&tv[k][i], &s)).collect())?;
            res[layout.fu(k)] = br.hodge(&st.g);
        }
    }
    let flat_res = res
        .iter()
        .map(|f| {
            let mut v = Vec::new();
            f.flatten_into(&mut v);
            v
        })
        .collect();
    let flat_gauge = gauge.iter().map(|g| g.as_slice().to_vec()).collect();
    Ok((flat_res, flat_gauge))
}

fn gram(blocks: &[Vec<f64>]) -> DMatrix<f64> {
    let n = blocks.len();
    let mut g = DMatrix::zeros(n, n);
    for a in 0..n {
        for b in a..n {
            let v: f64 = blocks[a].iter().zip(&blocks[b]).map(|(x, y)| x * y).sum();
            g[(a, b)] = v;
            g[(b, a)] = v;
        }
    }
    g
}

/// Sphere averages weighted by `r^{weight_exponent}·r⁶·Δr`.
pub fn assemble(ing: &Ingredients, mesh: &RadialMesh, samples: usize, weight_exponent: f64) -> Result<Grams> {
    ing.validate()?;
    let layout = ing.layout();
    let dirs = sphere_points(samples);
    let widths = mesh.cell_widths();
    let per_radius: Vec<(DMatrix<f64>, DMatrix<f64>)> = mesh
        .points()
        .par_iter()
        .zip(widths.par_iter())
        .map(|(&r, &dr)| {
            let w = r.powf(weight_exponent) * r.powi(6) * dr / dirs.len() as f64;
            let mut g = DMatrix::zeros(layout.len(), layout.len());
            let mut q = DMatrix::zeros(layout.len(), layout.len());
            for d in &dirs {
                let (res, gauge) = point_blocks(ing, &layout, &d.map(|c| c * r))?;
                g += gram(&res);
                q += gram(&gauge);
            }
            Ok((g * w, q * w))
        })
        .collect::<Result<_>>()?;
    let (residual, gauge) = per_radius.into_iter().unzip();
    Ok(Grams { layout, residual, gauge })
}

/// The weighted residual `Σ_points w|res|²` at one radius evaluated
/// directly, used to cross-check the Gram form.
pub fn direct_residual_at(
    ing: &Ingredients,
    r: f64,
    samples: usize,
    f: &[f64],
    df: &[f64],
    u: f64,
    du: f64,
) -> Result<f64> {
    let layout = ing.layout();
    let mono = layout.monomials(f, df, u, du);
    let dirs = sphere_points(samples);
    let mut total = 0.0;
    for d in &dirs {
        let (res, _) = point_blocks(ing, &layout, &d.map(|c| c * r))?;
        let len = res[0].len();
        let combined: Vec<f64> = (0..len).map(|i| res.iter().zip(&mono).map(|(b, c)| b[i] * c).sum()).collect();
        total += combined.iter().map(|v| v * v).sum::<f64>();
    }
    Ok(total / dirs.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_indices_are_a_bijection() {
        for n in 1..=3 {
            for higgs in [false, true] {
                let l = Layout { templates: n, higgs };
                let mut seen = vec![0; l.len()];
                seen[0] += 1;
                for k in 0..n {
                    seen[l.f(k)] += 1;
                    seen[l.df(k)] += 1;
                    for j in k..n {
                        seen[l.ff(k, j)] += 1;
                    }
                    if higgs {
                        seen[l.fu(k)] += 1;
                    }
                }
                if higgs {
                    seen[l.u()] += 1;
                    seen[l.du()] += 1;
                }
                assert!(seen.iter().all(|&c| c == 1), "n={n} higgs={higgs}: {seen:?}");
            }
        }
        assert_eq!(Layout { templates: 3, higgs: true }.len(), 18);
    }
}
