//! Multi-index bookkeeping for forms on ℝ⁷.
//!
//! A multi-index is stored as a 7-bit mask; bit `i` set means axis `i + 1`
//! is present. Per degree, the basis is the list of masks in lexicographic
//! order of their sorted axis tuples.

use std::sync::OnceLock;

use crate::error::{invalid, Result};

pub const DIM: usize = 7;
pub const TOP: u8 = 0b111_1111;

/// Strictly increasing tuple of distinct axes in `1..=7`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex {
    mask: u8,
}

impl MultiIndex {
    /// Builds from 1-based axes; they must be strictly increasing.
    pub fn new(axes: &[usize]) -> Result<Self> {
        let mut mask = 0u8;
        let mut prev = 0usize;
        for &a in axes {
            if !(1..=DIM).contains(&a) {
                return invalid(format!("axis {a} outside 1..=7"));
            }
            if a <= prev {
                return invalid(format!("axes {axes:?} not strictly increasing"));
            }
            prev = a;
            mask |= 1 << (a - 1);
        }
        Ok(Self { mask })
    }

    pub fn from_mask(mask: u8) -> Self {
        debug_assert!(mask <= TOP);
        Self { mask }
    }

    pub fn mask(self) -> u8 {
        self.mask
    }

    pub fn degree(self) -> usize {
        self.mask.count_ones() as usize
    }

    /// 1-based axes in increasing order.
    pub fn axes(self) -> Vec<usize> {
        (0..DIM).filter(|i| self.mask & (1 << i) != 0).map(|i| i + 1).collect()
    }

    pub fn complement(self) -> Self {
        Self { mask: TOP & !self.mask }
    }

    /// Position in the lexicographic basis of its degree.
    pub fn position(self) -> usize {
        tables().position[self.mask as usize]
    }
}

impl std::fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s: Vec<String> = self.axes().iter().map(|a| a.to_string()).collect();
        write!(f, "{}", s.join(" "))
    }
}

pub(crate) struct Tables {
    pub basis: [Vec<u8>; DIM + 1],
    pub position: [usize; 128],
}

pub(crate) fn tables() -> &'static Tables {
    static T: OnceLock<Tables> = OnceLock::new();
    T.get_or_init(|| {
        let mut basis: [Vec<u8>; DIM + 1] = Default::default();
        let mut all: Vec<Vec<usize>> = (0u8..128).map(|m| (0..DIM).filter(|i| m & (1 << i) != 0).collect()).collect();
        all.sort();
        for axes in all {
            let mask = axes.iter().fold(0u8, |m, &i| m | (1 << i));
            basis[axes.len()].push(mask);
        }
        let mut position = [0usize; 128];
        for b in basis.iter() {
            for (p, &m) in b.iter().enumerate() {
                position[m as usize] = p;
            }
        }
        Tables { basis, position }
    })
}

pub fn basis(degree: usize) -> &'static [u8] {
    &tables().basis[degree]
}

pub fn dim(degree: usize) -> usize {
    basis(degree).len()
}

/// Sign of `dy^A ∧ dy^B` relative to `dy^{A∪B}`, zero when they overlap.
#[inline]
pub fn shuffle_sign(a: u8, b: u8) -> i32 {
    if a & b != 0 {
        return 0;
    }
    // count pairs (i in A, j in B) with i > j
    let mut inversions = 0u32;
    let mut bb = b;
    while bb != 0 {
        let j = bb.trailing_zeros();
        bb &= bb - 1;
        inversions += (a >> (j + 1)).count_ones();
    }
    if inversions.is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// Product table for `degree_a ∧ degree_b`: `(pos_a, pos_b, pos_out, sign)`.
pub(crate) fn wedge_table(da: usize, db: usize) -> &'static [(u8, u8, u8, i8)] {
    static T: OnceLock<Vec<Vec<Vec<(u8, u8, u8, i8)>>>> = OnceLock::new();
    let all = T.get_or_init(|| {
        let mut out = vec![vec![Vec::new(); DIM + 1]; DIM + 1];
        for ka in 0..=DIM {
            for kb in 0..=(DIM - ka) {
                let mut v = Vec::new();
                for (pa, &ma) in basis(ka).iter().enumerate() {
                    for (pb, &mb) in basis(kb).iter().enumerate() {
                        let s = shuffle_sign(ma, mb);
                        if s != 0 {
                            let pc = tables().position[(ma | mb) as usize];
                            v.push((pa as u8, pb as u8, pc as u8, s as i8));
                        }
                    }
                }
                out[ka][kb] = v;
            }
        }
        out
    });
    &all[da][db]
}
