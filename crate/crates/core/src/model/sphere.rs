//! Stereographic charts of S⁶ ⊂ ℝ⁷ and their orthonormal frames.
//!
//! With `s = 1 + |u|²` and `σ = +1` (north, excluding `+e₇`) or `−1`
//! (south, excluding `−e₇`):
//!
//! * `x(u) = (2u/s, σ(|u|² − 1)/s)`
//! * `E_a = (s/2) ∂_a x`, an orthonormal tangent frame.

use std::sync::OnceLock;

use crate::fields::Chart;
use crate::g2::{euclidean_phi, phi_tensor};

/// Chart point, frame and their first derivatives.
#[derive(Debug, Clone)]
pub struct Frame {
    pub x: [f64; 7],
    /// `E_a`.
    pub e: [[f64; 7]; 6],
    /// `de[c][a] = ∂_c E_a`.
    pub de: [[[f64; 7]; 6]; 6],
    /// `dx[c] = ∂_c x`.
    pub dx: [[f64; 7]; 6],
}

fn sign(chart: Chart) -> f64 {
    match chart {
        Chart::North => 1.0,
        Chart::South => -1.0,
    }
}

pub fn frame(chart: Chart, u: &[f64; 6]) -> Frame {
    let sg = sign(chart);
    let q: f64 = u.iter().map(|v| v * v).sum();
    let s = 1.0 + q;
    let mut x = [0.0; 7];
    for b in 0..6 {
        x[b] = 2.0 * u[b] / s;
    }
    x[6] = sg * (q - 1.0) / s;
    let mut e = [[0.0; 7]; 6];
    let mut dx = [[0.0; 7]; 6];
    let mut de = [[[0.0; 7]; 6]; 6];
    for a in 0..6 {
        for b in 0..6 {
            let d = if a == b { 1.0 } else { 0.0 };
            e[a][b] = d - 2.0 * u[a] * u[b] / s;
        }
        e[a][6] = sg * 2.0 * u[a] / s;
        for k in 0..7 {
            dx[a][k] = 2.0 * e[a][k] / s;
        }
    }
    for c in 0..6 {
        for a in 0..6 {
            let dca = if c == a { 1.0 } else { 0.0 };
            for b in 0..6 {
                let dcb = if c == b { 1.0 } else { 0.0 };
                de[c][a][b] = -2.0 * (dca * u[b] + u[a] * dcb) / s + 4.0 * u[a] * u[b] * u[c] / (s * s);
            }
            de[c][a][6] = sg * (2.0 * dca / s - 4.0 * u[a] * u[c] / (s * s));
        }
    }
    Frame { x, e, de, dx }
}

/// Chart coordinates `u = n_{0..6} / (1 − σ n₆)` of a unit vector.
pub fn chart_coords(chart: Chart, n: &[f64; 7]) -> [f64; 6] {
    let d = 1.0 - sign(chart) * n[6];
    let mut u = [0.0; 6];
    for a in 0..6 {
        u[a] = n[a] / d;
    }
    u
}

/// `∂u_a/∂x_i` for `u = u(x/|x|)`, given `n = x/|x|` and `r = |x|`.
pub fn coords_jacobian(chart: Chart, n: &[f64; 7], r: f64) -> [[f64; 7]; 6] {
    let sg = sign(chart);
    let d = 1.0 - sg * n[6];
    let dn = |j: usize, i: usize| (if i == j { 1.0 } else { 0.0 } - n[i] * n[j]) / r;
    let mut out = [[0.0; 7]; 6];
    for a in 0..6 {
        for i in 0..7 {
            out[a][i] = dn(a, i) / d + n[a] * sg * dn(6, i) / (d * d);
        }
    }
    out
}

fn cross_table() -> &'static Vec<(usize, usize, usize, f64)> {
    static T: OnceLock<Vec<(usize, usize, usize, f64)>> = OnceLock::new();
    T.get_or_init(|| {
        let t = phi_tensor(&euclidean_phi::<f64>());
        let mut out = Vec::new();
        for i in 0..7 {
            for j in 0..7 {
                for k in 0..7 {
                    if t[i][j][k] != 0.0 {
                        out.push((i, j, k, t[i][j][k]));
                    }
                }
            }
        }
        out
    })
}

/// Octonionic cross product `(u × v)_k = Σ φ₀_{ijk} u_i v_j`.
pub fn cross(u: &[f64; 7], v: &[f64; 7]) -> [f64; 7] {
    let mut out = [0.0; 7];
    for &(i, j, k, s) in cross_table() {
        out[k] += s * u[i] * v[j];
    }
    out
}
