//! Strictly increasing radial meshes and their 3-point derivative.

use crate::error::{invalid, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct RadialMesh {
    r: Vec<f64>,
}

impl RadialMesh {
    pub fn new(r: Vec<f64>) -> Result<Self> {
        if r.len() < 3 {
            return invalid("a radial mesh needs at least 3 points");
        }
        if !(r[0] > 0.0) || r.windows(2).any(|w| !(w[1] > w[0])) || !r[r.len() - 1].is_finite() {
            return invalid("mesh radii must be positive, finite and strictly increasing");
        }
        Ok(Self { r })
    }

    /// `n` log-uniform radii from `r_in` to `r_out`.
    pub fn log(n: usize, r_in: f64, r_out: f64) -> Result<Self> {
        if !(r_in > 0.0 && r_in < r_out) {
            return invalid(format!("log mesh needs 0 < r_in < r_out, got [{r_in}, {r_out}]"));
        }
        let q = (r_out / r_in).ln();
        let mut r: Vec<f64> = (0..n).map(|i| r_in * (q * i as f64 / (n - 1).max(1) as f64).exp()).collect();
        if n >= 2 {
            r[0] = r_in;
            r[n - 1] = r_out;
        }
        Self::new(r)
    }

    pub fn points(&self) -> &[f64] {
        &self.r
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn r_in(&self) -> f64 {
        self.r[0]
    }

    pub fn r_out(&self) -> f64 {
        self.r[self.r.len() - 1]
    }

    /// Weights `(j, c)` with `f'(r_i) ≈ Σ c·f(r_j)`, exact for quadratics.
    pub fn stencil(&self, i: usize) -> [(usize, f64); 3] {
        let n = self.r.len();
        let c = i.clamp(1, n - 2);
        let idx = [c - 1, c, c + 1];
        let x = self.r[i];
        // Derivative of the Lagrange basis through the three nodes, at x.
        std::array::from_fn(|a| {
            let (xa, others) = (self.r[idx[a]], [0, 1, 2].into_iter().filter(|&b| b != a));
            let others: Vec<f64> = others.map(|b| self.r[idx[b]]).collect();
            let den = (xa - others[0]) * (xa - others[1]);
            (idx[a], ((x - others[0]) + (x - others[1])) / den)
        })
    }

    pub fn derivative(&self, f: &[f64]) -> Vec<f64> {
        (0..self.r.len()).map(|i| self.stencil(i).iter().map(|&(j, c)| c * f[j]).sum()).collect()
    }

    /// Trapezoidal cell widths.
    pub fn cell_widths(&self) -> Vec<f64> {
        let n = self.r.len();
        (0..n)
            .map(|i| {
                let lo = if i == 0 { self.r[0] } else { 0.5 * (self.r[i - 1] + self.r[i]) };
                let hi = if i == n - 1 { self.r[n - 1] } else { 0.5 * (self.r[i] + self.r[i + 1]) };
                hi - lo
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_mesh_endpoints_and_ratio() {
        let m = RadialMesh::log(128, 1.0 / 64.0, 0.25).unwrap();
        assert_eq!(m.len(), 128);
        assert_eq!(m.r_in(), 1.0 / 64.0);
        assert_eq!(m.r_out(), 0.25);
        let q = m.points()[1] / m.points()[0];
        assert!((m.points()[70] / m.points()[69] - q).abs() < 1e-12);
        assert!((m.cell_widths().iter().sum::<f64>() - (0.25 - 1.0 / 64.0)).abs() < 1e-15);
    }

    #[test]
    fn derivative_is_exact_on_quadratics() {
        let m = RadialMesh::log(9, 0.1, 2.0).unwrap();
        let f: Vec<f64> = m.points().iter().map(|r| 3.0 * r * r - r + 2.0).collect();
        for (d, r) in m.derivative(&f).iter().zip(m.points()) {
            assert!((d - (6.0 * r - 1.0)).abs() < 1e-11);
        }
    }

    #[test]
    fn rejects_bad_meshes() {
        assert!(RadialMesh::new(vec![0.1, 0.1, 0.2]).is_err());
        assert!(RadialMesh::new(vec![0.1, 0.2]).is_err());
        assert!(RadialMesh::log(10, 0.0, 1.0).is_err());
    }
}
