//! Exact linear algebra over the rationals: reduced row echelon form, rank,
//! right-nullspace bases, and solving small inhomogeneous systems.
//!
//! Pivots are chosen by smallest nonzero numerator magnitude to limit
//! coefficient growth. The reduced echelon form is unique, so rank and the
//! nullspace basis are independent of row input order.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::rational::Rational;

#[derive(Clone, Debug, PartialEq)]
pub struct RationalMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Vec<Rational>>,
}

impl RationalMatrix {
    pub fn new(rows: usize, cols: usize) -> Self {
        RationalMatrix {
            rows,
            cols,
            entries: vec![vec![Rational::zero(); cols]; rows],
        }
    }

    pub fn from_rows(entries: Vec<Vec<Rational>>) -> Self {
        let rows = entries.len();
        let cols = entries.first().map(|r| r.len()).unwrap_or(0);
        assert!(entries.iter().all(|r| r.len() == cols), "ragged matrix");
        RationalMatrix {
            rows,
            cols,
            entries,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &Rational {
        &self.entries[r][c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Rational) {
        self.entries[r][c] = v;
    }

    /// Reduced row echelon form; returns (rref, pivot column per pivot row).
    fn rref(&self) -> (Vec<Vec<Rational>>, Vec<usize>) {
        let mut m = self.entries.clone();
        let mut pivots: Vec<usize> = Vec::new();
        let mut row = 0;
        for col in 0..self.cols {
            if row >= self.rows {
                break;
            }
            // Smallest-|numerator| nonzero pivot in this column.
            let mut best: Option<(usize, BigInt)> = None;
            for (r, m_r) in m.iter().enumerate().skip(row) {
                let v = &m_r[col];
                if v.is_zero() {
                    continue;
                }
                let mag = v.numer().abs();
                match &best {
                    Some((_, best_mag)) if *best_mag <= mag => {}
                    _ => best = Some((r, mag)),
                }
            }
            let Some((pivot_row, _)) = best else {
                continue;
            };
            m.swap(row, pivot_row);
            let inv = m[row][col].clone().recip();
            for v in m[row].iter_mut() {
                if !v.is_zero() {
                    *v *= &inv;
                }
            }
            for r in 0..self.rows {
                if r == row || m[r][col].is_zero() {
                    continue;
                }
                let factor = std::mem::replace(&mut m[r][col], Rational::zero());
                for c in (col + 1)..self.cols {
                    if m[row][c].is_zero() {
                        continue;
                    }
                    let delta = &factor * &m[row][c];
                    m[r][c] -= delta;
                }
            }
            pivots.push(col);
            row += 1;
        }
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Basis of the right nullspace in the reduced echelon convention: one
    /// vector per free column in ascending index order, with 1 in its free
    /// column and 0 in the other free columns. Empty for full column rank.
    pub fn nullspace(&self) -> Vec<Vec<Rational>> {
        let (m, pivots) = self.rref();
        let pivot_set: Vec<Option<usize>> = {
            let mut v = vec![None; self.cols];
            for (prow, &pcol) in pivots.iter().enumerate() {
                v[pcol] = Some(prow);
            }
            v
        };
        let mut basis = Vec::new();
        for free in 0..self.cols {
            if pivot_set[free].is_some() {
                continue;
            }
            let mut vec = vec![Rational::zero(); self.cols];
            vec[free] = Rational::one();
            for (prow, &pcol) in pivots.iter().enumerate() {
                vec[pcol] = -m[prow][free].clone();
            }
            basis.push(vec);
        }
        basis
    }

    /// Particular solution of `self * x = rhs` with free variables set to
    /// zero; None when inconsistent.
    pub fn solve(&self, rhs: &[Rational]) -> Option<Vec<Rational>> {
        assert_eq!(rhs.len(), self.rows, "rhs length mismatch");
        let mut aug = self.entries.clone();
        for (r, row) in aug.iter_mut().enumerate() {
            row.push(rhs[r].clone());
        }
        let aug = RationalMatrix::from_rows(aug);
        let (m, pivots) = aug.rref();
        // Inconsistent iff a pivot lands in the appended column.
        if pivots.last() == Some(&self.cols) {
            return None;
        }
        let mut x = vec![Rational::zero(); self.cols];
        for (prow, &pcol) in pivots.iter().enumerate() {
            x[pcol] = m[prow][self.cols].clone();
        }
        Some(x)
    }

    /// self * v for a column vector v.
    pub fn apply(&self, v: &[Rational]) -> Vec<Rational> {
        assert_eq!(v.len(), self.cols);
        self.entries
            .iter()
            .map(|row| {
                row.iter()
                    .zip(v)
                    .filter(|(a, _)| !a.is_zero())
                    .fold(Rational::zero(), |acc, (a, b)| acc + a * b)
            })
            .collect()
    }
}
