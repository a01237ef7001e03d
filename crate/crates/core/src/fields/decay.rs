//! Sphere suprema of `|∇ˡ(A − A₀)|` and `|∇ˡ_{A₀}(A − A₀)|`, `l ≤ 3`.
//!
//! Mixed partials come from tensor-product centered stencils; covariant
//! derivatives are assembled from them by the Leibniz rule on jets.

use std::collections::HashMap;
use std::sync::OnceLock;

use rayon::prelude::*;
use serde::Serialize;

use super::{Chart, FieldPair, LieField};
use crate::error::{invalid, Result};
use crate::lie::{commutator, LieMat};
use crate::sampling::sphere_points;
use crate::Point;

pub const MAX_ORDER: usize = 3;

#[derive(Debug, Clone, Copy)]
pub struct DecayOptions {
    pub samples_per_sphere: usize,
    /// Finite-difference step relative to the radius.
    pub rel_step: f64,
}

impl Default for DecayOptions {
    fn default() -> Self {
        Self { samples_per_sphere: 64, rel_step: 2e-3 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayRow {
    pub r: f64,
    pub l: usize,
    pub coord_sup: f64,
    pub cov_sup: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayTable {
    /// Ordered by decreasing radius, then by `l`.
    pub rows: Vec<DecayRow>,
    pub samples_per_sphere: usize,
    /// Smallest `C` with `cov_sup_l ≤ C · Σ_{l' ≤ l} coord_sup_{l'}` on every
    /// row with a nonzero right-hand side.
    pub fitted_constant: f64,
}

impl DecayTable {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("r,l,coord_sup,cov_sup\n");
        for row in &self.rows {
            s.push_str(&format!("{},{},{},{}\n", row.r, row.l, row.coord_sup, row.cov_sup));
        }
        s
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut rows = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || (n == 0 && line.starts_with('r')) {
                continue;
            }
            let parts: Vec<&str> = line.split(',').collect();
            let bad = |msg: &str| crate::Error::Parse { line: n + 1, msg: msg.to_string() };
            if parts.len() != 4 {
                return Err(bad("expected r,l,coord_sup,cov_sup"));
            }
            let f = |s: &str| s.trim().parse::<f64>().map_err(|_| bad("bad number"));
            let l = parts[1].trim().parse::<usize>().map_err(|_| bad("bad order"))?;
            rows.push(DecayRow { r: f(parts[0])?, l, coord_sup: f(parts[2])?, cov_sup: f(parts[3])? });
        }
        let fitted_constant = fitted_constant(&rows);
        Ok(Self { rows, samples_per_sphere: 0, fitted_constant })
    }

    /// `(r, coord_sup)` pairs of order `l`, by increasing radius.
    pub fn series(&self, l: usize) -> Vec<(f64, f64)> {
        let mut v: Vec<(f64, f64)> = self.rows.iter().filter(|r| r.l == l).map(|r| (r.r, r.coord_sup)).collect();
        v.sort_by(|a, b| a.0.total_cmp(&b.0));
        v
    }
}

fn fitted_constant(rows: &[DecayRow]) -> f64 {
    let mut c: f64 = 0.0;
    for row in rows {
        let denom: f64 = rows.iter().filter(|o| o.r == row.r && o.l <= row.l).map(|o| o.coord_sup).sum();
        if denom > 0.0 {
            c = c.max(row.cov_sup / denom);
        }
    }
    c
}

/// Multi-indices of order ≤ 3 over seven variables, as exponent vectors.
struct Jets {
    alphas: Vec<[u8; 7]>,
    lookup: Vec<u16>,
}

fn key(a: &[u8; 7]) -> usize {
    a.iter().enumerate().map(|(d, &n)| (n as usize) << (2 * d)).sum()
}

fn jets() -> &'static Jets {
    static J: OnceLock<Jets> = OnceLock::new();
    J.get_or_init(|| {
        let mut alphas = Vec::new();
        fn rec(d: usize, left: u8, cur: &mut [u8; 7], out: &mut Vec<[u8; 7]>) {
            if d == 7 {
                out.push(*cur);
                return;
            }
            for n in 0..=left {
                cur[d] = n;
                rec(d + 1, left - n, cur, out);
            }
            cur[d] = 0;
        }
        rec(0, MAX_ORDER as u8, &mut [0; 7], &mut alphas);
        alphas.sort_by_key(|a| (a.iter().sum::<u8>(), std::cmp::Reverse(*a)));
        let mut lookup = vec![u16::MAX; 1 << 14];
        for (i, a) in alphas.iter().enumerate() {
            lookup[key(a)] = i as u16;
        }
        Jets { alphas, lookup }
    })
}

fn order(a: &[u8; 7]) -> usize {
    a.iter().map(|&n| n as usize).sum()
}

fn index(a: &[u8; 7]) -> usize {
    jets().lookup[key(a)] as usize
}

fn binom(n: u8, k: u8) -> f64 {
    const T: [[f64; 4]; 4] = [[1.0, 0.0, 0.0, 0.0], [1.0, 1.0, 0.0, 0.0], [1.0, 2.0, 1.0, 0.0], [1.0, 3.0, 3.0, 1.0]];
    T[n as usize][k as usize]
}

/// Number of ordered index tuples that sort to `a`.
fn orderings(a: &[u8; 7]) -> f64 {
    let fact = [1.0, 1.0, 2.0, 6.0];
    fact[order(a)] / a.iter().map(|&n| fact[n as usize]).product::<f64>()
}

/// 1-D centered stencils for derivative orders 0..3 (offset, weight·hⁿ).
fn stencil(n: u8) -> &'static [(i8, f64)] {
    match n {
        0 => &[(0, 1.0)],
        1 => &[(-1, -0.5), (1, 0.5)],
        2 => &[(-1, 1.0), (0, -2.0), (1, 1.0)],
        _ => &[(-2, -0.5), (-1, 1.0), (1, -1.0), (2, 0.5)],
    }
}

/// A truncated Taylor jet: `∂^α Q` for all stored `α` of order ≤ `top`.
#[derive(Clone)]
struct Jet {
    top: usize,
    d: Vec<LieMat>,
}

impl Jet {
    fn count(top: usize) -> usize {
        jets().alphas.iter().take_while(|a| order(a) <= top).count()
    }

    fn partial(&self, k: usize) -> Jet {
        let n = Self::count(self.top - 1);
        let d = jets().alphas[..n]
            .iter()
            .map(|a| {
                let mut b = *a;
                b[k] += 1;
                self.d[index(&b)].clone()
            })
            .collect();
        Jet { top: self.top - 1, d }
    }

    /// Leibniz rule for `[P, Q]`.
    fn bracket(p: &Jet, q: &Jet, top: usize) -> Jet {
        let n = Self::count(top);
        let d = jets().alphas[..n]
            .iter()
            .map(|a| {
                let mut acc = LieMat::zeros(p.d[0].nrows(), p.d[0].ncols());
                let mut b = [0u8; 7];
                loop {
                    let mut c = *a;
                    let mut w = 1.0;
                    for k in 0..7 {
                        c[k] -= b[k];
                        w *= binom(a[k], b[k]);
                    }
                    acc += commutator(&p.d[index(&b)], &q.d[index(&c)]) * w;
                    // Next β ≤ α in mixed-radix order.
                    let mut k = 0;
                    while k < 7 {
                        if b[k] < a[k] {
                            b[k] += 1;
                            break;
                        }
                        b[k] = 0;
                        k += 1;
                    }
                    if k == 7 {
                        break;
                    }
                }
                acc
            })
            .collect();
        Jet { top, d }
    }

    fn add(mut self, other: &Jet) -> Jet {
        for (a, b) in self.d.iter_mut().zip(&other.d) {
            *a += b;
        }
        self
    }
}

/// Jets of every component of `f` at `x`, from product stencils with step `h`.
fn component_jets(f: &dyn LieField, chart: Chart, x: &Point, h: f64, top: usize) -> Result<Vec<Jet>> {
    let nc = super::n_components(f.degree());
    let mut cache: HashMap<[i8; 7], Vec<LieMat>> = HashMap::new();
    let n = Jet::count(top);
    let mut out: Vec<Jet> = (0..nc).map(|_| Jet { top, d: Vec::with_capacity(n) }).collect();
    for a in &jets().alphas[..n] {
        let dirs: Vec<usize> = (0..7).filter(|&k| a[k] > 0).collect();
        let mut acc: Vec<LieMat> = vec![LieMat::zeros(f.rank(), f.rank()); nc];
        let mut pos = vec![0usize; dirs.len()];
        loop {
            let mut off = [0i8; 7];
            let mut w = 1.0;
            for (slot, &k) in dirs.iter().enumerate() {
                let (o, wk) = stencil(a[k])[pos[slot]];
                off[k] = o;
                w *= wk;
            }
            if let std::collections::hash_map::Entry::Vacant(slot) = cache.entry(off) {
                let mut y = *x;
                for k in 0..7 {
                    y[k] += off[k] as f64 * h;
                }
                slot.insert(f.eval_in(chart, &y)?);
            }
            for (acc, v) in acc.iter_mut().zip(&cache[&off]) {
                *acc += v * w;
            }
            let mut s = 0;
            while s < dirs.len() {
                pos[s] += 1;
                if pos[s] < stencil(a[dirs[s]]).len() {
                    break;
                }
                pos[s] = 0;
                s += 1;
            }
            if s == dirs.len() {
                break;
            }
        }
        let scale = h.powi(order(a) as i32);
        for (jet, v) in out.iter_mut().zip(acc) {
            jet.d.push(v / scale);
        }
    }
    Ok(out)
}

/// Squared tensor norm of the order-`l` part of a set of jets.
fn coord_norm_sq(js: &[Jet], l: usize) -> f64 {
    jets()
        .alphas
        .iter()
        .enumerate()
        .filter(|(_, a)| order(a) == l)
        .map(|(i, a)| orderings(a) * js.iter().map(|j| j.d[i].norm_squared()).sum::<f64>())
        .sum()
}

/// Per-order (coordinate, covariant) norms at one point.
fn point_norms(a: &dyn LieField, a0: &dyn LieField, x: &Point, h: f64) -> Result<[(f64, f64); MAX_ORDER + 1]> {
    let chart = a0.chart_at(x);
    let j0 = component_jets(a0, chart, x, h, MAX_ORDER)?;
    let diff: Vec<Jet> = component_jets(a, chart, x, h, MAX_ORDER)?
        .into_iter()
        .zip(&j0)
        .map(|(mut d, j0)| {
            for (v, w) in d.d.iter_mut().zip(&j0.d) {
                *v -= w;
            }
            d
        })
        .collect();
    let mut out = [(0.0, 0.0); MAX_ORDER + 1];
    for (l, o) in out.iter_mut().enumerate() {
        o.0 = coord_norm_sq(&diff, l).sqrt();
    }
    // ∇_j Q = ∂_j Q + [A₀_j, Q], applied repeatedly to each component.
    let mut level: Vec<Jet> = diff;
    out[0].1 = out[0].0;
    for (l, o) in out.iter_mut().enumerate().skip(1) {
        let top = MAX_ORDER - l;
        let mut next = Vec::with_capacity(level.len() * 7);
        for j in 0..7 {
            for q in &level {
                let d = q.partial(j);
                let b = Jet::bracket(&j0[j], q, top);
                next.push(d.add(&b));
            }
        }
        o.1 = next.iter().map(|q| q.d[0].norm_squared()).sum::<f64>().sqrt();
        level = next;
    }
    Ok(out)
}

/// Sphere suprema of coordinate and `A₀`-covariant derivatives of `A − A₀`
/// for `l = 0..3` at each radius.
pub fn decay_profile(p: &FieldPair, a0: &dyn LieField, radii: &[f64], opts: &DecayOptions) -> Result<DecayTable> {
    if radii.is_empty() {
        return invalid("decay profile needs at least one radius");
    }
    if a0.rank() != p.rank() || a0.degree() != 1 {
        return invalid("model connection must be an so(m) 1-form of the pair's rank");
    }
    if opts.samples_per_sphere == 0 || !(opts.rel_step > 0.0) {
        return invalid("decay profile needs samples and a positive step");
    }
    for &r in radii {
        if !(r >= p.r_in && r <= p.r_out) {
            return invalid(format!("radius {r} outside the annulus [{}, {}]", p.r_in, p.r_out));
        }
    }
    let mut rs = radii.to_vec();
    rs.sort_by(|a, b| b.total_cmp(a));
    rs.dedup();
    let dirs = sphere_points(opts.samples_per_sphere);
    let mut rows = Vec::with_capacity(rs.len() * (MAX_ORDER + 1));
    for &r in &rs {
        let h = opts.rel_step * r;
        let per_point: Vec<[(f64, f64); MAX_ORDER + 1]> =
            dirs.par_iter().map(|d| point_norms(p.a.as_ref(), a0, &d.map(|c| c * r), h)).collect::<Result<_>>()?;
        for l in 0..=MAX_ORDER {
            let coord_sup = per_point.iter().map(|v| v[l].0).fold(0.0, f64::max);
            let cov_sup = per_point.iter().map(|v| v[l].1).fold(0.0, f64::max);
            rows.push(DecayRow { r, l, coord_sup, cov_sup });
        }
    }
    let fitted_constant = fitted_constant(&rows);
    Ok(DecayTable { rows, samples_per_sphere: opts.samples_per_sphere, fitted_constant })
}
