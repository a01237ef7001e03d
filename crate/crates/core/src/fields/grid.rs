//! Fields sampled on a uniform 7-D grid over a cube `[lo, hi]⁷`.
//!
//! Binary layout (all little-endian):
//!
//! | bytes | content                                    |
//! |-------|--------------------------------------------|
//! | 8     | magic `G2LABGRD`                           |
//! | 4     | rank `m` (u32)                             |
//! | 4     | degree, 0 or 1 (u32)                       |
//! | 4     | points per axis `n` (u32)                  |
//! | 8     | `lo` (f64)                                 |
//! | 8     | `hi` (f64)                                 |
//! | rest  | f64 block, nodes row-major (axis 1 slowest), then component, then the m×m matrix row-major |
//!
//! Between nodes the field is multilinear, so a centered difference with a
//! step smaller than the spacing at a node reproduces the grid's own
//! centered difference.

use std::io::{Read, Write};

use super::{n_components, Chart, LieField};
use crate::error::{invalid, Error, Result};
use crate::lie::LieMat;
use crate::Point;

const MAGIC: &[u8; 8] = b"G2LABGRD";

#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    rank: usize,
    degree: usize,
    n: usize,
    lo: f64,
    hi: f64,
    data: Vec<f64>,
}

impl GridField {
    pub fn from_fn(
        rank: usize,
        degree: usize,
        n: usize,
        lo: f64,
        hi: f64,
        f: impl Fn(&Point) -> Result<Vec<LieMat>>,
    ) -> Result<Self> {
        Self::check_spec(rank, degree, n, lo, hi)?;
        let nc = n_components(degree);
        let total = n.pow(7);
        let mut data = Vec::with_capacity(total * nc * rank * rank);
        for flat in 0..total {
            let x = Self::node_of(n, lo, hi, flat);
            let v = f(&x)?;
            if v.len() != nc || v.iter().any(|m| m.nrows() != rank || m.ncols() != rank) {
                return invalid("sampled value has the wrong shape");
            }
            for m in &v {
                for i in 0..rank {
                    for j in 0..rank {
                        data.push(m[(i, j)]);
                    }
                }
            }
        }
        Ok(Self { rank, degree, n, lo, hi, data })
    }

    fn check_spec(rank: usize, degree: usize, n: usize, lo: f64, hi: f64) -> Result<()> {
        if rank == 0 || degree > 1 {
            return invalid("grid fields need rank ≥ 1 and degree 0 or 1");
        }
        if !(2..=7).contains(&n) {
            return invalid(format!("grid needs 2..=7 points per axis, got {n}"));
        }
        if !(lo < hi && lo.is_finite() && hi.is_finite()) {
            return invalid(format!("grid extent [{lo}, {hi}] is empty"));
        }
        Ok(())
    }

    pub fn spacing(&self) -> f64 {
        (self.hi - self.lo) / (self.n - 1) as f64
    }

    pub fn points_per_axis(&self) -> usize {
        self.n
    }

    fn node_of(n: usize, lo: f64, hi: f64, mut flat: usize) -> Point {
        let h = (hi - lo) / (n - 1) as f64;
        let mut x = [0.0; 7];
        for k in (0..7).rev() {
            x[k] = lo + h * (flat % n) as f64;
            flat /= n;
        }
        x
    }

    /// Coordinates of the node with integer index `idx`.
    pub fn node(&self, idx: [usize; 7]) -> Point {
        let h = self.spacing();
        idx.map(|i| self.lo + h * i as f64)
    }

    fn block(&self) -> usize {
        n_components(self.degree) * self.rank * self.rank
    }

    pub fn write_to(&self, w: &mut impl Write) -> Result<()> {
        w.write_all(MAGIC)?;
        for v in [self.rank as u32, self.degree as u32, self.n as u32] {
            w.write_all(&v.to_le_bytes())?;
        }
        w.write_all(&self.lo.to_le_bytes())?;
        w.write_all(&self.hi.to_le_bytes())?;
        for v in &self.data {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_from(r: &mut impl Read) -> Result<Self> {
        let bad = |msg: &str| Error::Parse { line: 0, msg: msg.to_string() };
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(bad("not a grid field file (bad magic)"));
        }
        let mut u = [0u8; 4];
        let mut head = [0usize; 3];
        for h in head.iter_mut() {
            r.read_exact(&mut u)?;
            *h = u32::from_le_bytes(u) as usize;
        }
        let mut f = [0u8; 8];
        r.read_exact(&mut f)?;
        let lo = f64::from_le_bytes(f);
        r.read_exact(&mut f)?;
        let hi = f64::from_le_bytes(f);
        let [rank, degree, n] = head;
        Self::check_spec(rank, degree, n, lo, hi)?;
        let len = n.pow(7) * n_components(degree) * rank * rank;
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes)?;
        if bytes.len() != len * 8 {
            return Err(bad(&format!("expected {} data bytes, found {}", len * 8, bytes.len())));
        }
        let data: Vec<f64> = bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
        if data.iter().any(|v| !v.is_finite()) {
            return Err(bad("non-finite coefficient"));
        }
        Ok(Self { rank, degree, n, lo, hi, data })
    }
}

impl LieField for GridField {
    fn rank(&self) -> usize {
        self.rank
    }

    fn degree(&self) -> usize {
        self.degree
    }

    fn eval_in(&self, _chart: Chart, x: &Point) -> Result<Vec<LieMat>> {
        let h = self.spacing();
        let mut base = [0usize; 7];
        let mut frac = [0.0; 7];
        for k in 0..7 {
            let t = (x[k] - self.lo) / h;
            if !(t >= -1e-12 && t <= (self.n - 1) as f64 + 1e-12) {
                return invalid(format!("point {x:?} outside the grid cube [{}, {}]⁷", self.lo, self.hi));
            }
            let i = (t.floor().max(0.0) as usize).min(self.n - 2);
            base[k] = i;
            frac[k] = t - i as f64;
        }
        let bs = self.block();
        let mut acc = vec![0.0; bs];
        for corner in 0..128usize {
            let mut w = 1.0;
            let mut flat = 0;
            for k in 0..7 {
                let up = (corner >> (6 - k)) & 1;
                w *= if up == 1 { frac[k] } else { 1.0 - frac[k] };
                flat = flat * self.n + base[k] + up;
            }
            if w == 0.0 {
                continue;
            }
            for (a, v) in acc.iter_mut().zip(&self.data[flat * bs..(flat + 1) * bs]) {
                *a += w * v;
            }
        }
        let m = self.rank;
        Ok(acc.chunks_exact(m * m).map(|c| LieMat::from_row_slice(m, m, c)).collect())
    }
}
