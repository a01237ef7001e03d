//! Deterministic point sets on S⁶ and in balls.

use statrs::distribution::{ContinuousCDF, Normal};

use crate::Point;

const PRIMES: [u64; 7] = [2, 3, 5, 7, 11, 13, 17];

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut out = 0.0;
    let mut f = inv;
    while i > 0 {
        out += (i % base) as f64 * f;
        i /= base;
        f *= inv;
    }
    out
}

/// Halton point `i ≥ 1` in the open unit cube `(0, 1)⁷`.
pub fn halton(i: u64) -> [f64; 7] {
    let mut out = [0.0; 7];
    for (o, &p) in out.iter_mut().zip(&PRIMES) {
        *o = radical_inverse(i, p);
    }
    out
}

/// `n` low-discrepancy unit vectors: Halton points pushed through the
/// inverse normal CDF and normalized.
pub fn sphere_points(n: usize) -> Vec<Point> {
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    let mut out = Vec::with_capacity(n);
    let mut i = 1u64;
    while out.len() < n {
        let h = halton(i);
        i += 1;
        let mut v = [0.0; 7];
        for (vk, hk) in v.iter_mut().zip(h) {
            *vk = normal.inverse_cdf(hk);
        }
        let r = norm(&v);
        if r < 1e-6 {
            continue;
        }
        out.push(v.map(|c| c / r));
    }
    out
}

/// Points in the closed ball of radius `rho`: `rings` radii `rho·k/rings`
/// (k = 1..rings) over `n_dir` directions, plus the origin.
pub fn ball_grid(rho: f64, n_dir: usize, rings: usize) -> Vec<Point> {
    let dirs = sphere_points(n_dir);
    let mut out = vec![[0.0; 7]];
    for k in 1..=rings {
        let r = rho * k as f64 / rings as f64;
        out.extend(dirs.iter().map(|d| d.map(|c| c * r)));
    }
    out
}

pub fn norm(x: &Point) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn scale(x: &Point, s: f64) -> Point {
    x.map(|c| c * s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn halton_first_points() {
        assert_eq!(halton(1)[0], 0.5);
        assert_eq!(halton(2)[0], 0.25);
        assert!((halton(1)[1] - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn sphere_points_are_unit_and_deterministic() {
        let a = sphere_points(200);
        assert_eq!(a, sphere_points(200));
        assert!(a.iter().all(|p| (norm(p) - 1.0).abs() < 1e-14));
        // Mean close to the origin for a balanced point set.
        let mut mean = [0.0; 7];
        for p in &a {
            for k in 0..7 {
                mean[k] += p[k] / a.len() as f64;
            }
        }
        assert!(norm(&mean) < 0.1);
    }

    #[test]
    fn ball_grid_covers_boundary() {
        let g = ball_grid(0.25, 10, 4);
        assert_eq!(g.len(), 41);
        let max = g.iter().map(norm).fold(0.0, f64::max);
        assert!((max - 0.25).abs() < 1e-15);
    }
}
