//! Dense exact linear algebra: rank, reduced echelon form, nullspace and
//! linear solving over any [`FieldContext`].
//!
//! Over ℚ the forward elimination is fraction-free (Bareiss) on an integer
//! matrix obtained by clearing denominators row by row; only the final
//! back-substitution uses rationals. Over dual numbers a pivot must have a
//! nonzero ε-free part.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::field::{FieldContext, FieldElement};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LinalgError {
    #[error("no pivot with invertible epsilon-free part in a nonzero column")]
    DualPivotFailure,
    #[error("the linear system has no solution")]
    NoSolution,
    #[error("matrix dimensions do not match")]
    DimensionMismatch,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactMatrix {
    rows: usize,
    cols: usize,
    data: Vec<FieldElement>,
    ctx: FieldContext,
}

/// Reduced row echelon form: the nonzero rows and their pivot columns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rref {
    pub rows: Vec<Vec<FieldElement>>,
    pub pivots: Vec<usize>,
    pub cols: usize,
}

/// Solution set `particular + span(kernel)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Solution {
    pub particular: Vec<FieldElement>,
    pub kernel: Vec<Vec<FieldElement>>,
}

impl ExactMatrix {
    pub fn zeros(ctx: &FieldContext, rows: usize, cols: usize) -> Self {
        ExactMatrix {
            rows,
            cols,
            data: vec![ctx.zero(); rows * cols],
            ctx: ctx.clone(),
        }
    }

    pub fn identity(ctx: &FieldContext, n: usize) -> Self {
        let mut m = ExactMatrix::zeros(ctx, n, n);
        for i in 0..n {
            m.set(i, i, ctx.one());
        }
        m
    }

    /// Builds a matrix from rows; every row must have length `cols`.
    pub fn from_rows(ctx: &FieldContext, cols: usize, rows: Vec<Vec<FieldElement>>) -> Self {
        let nrows = rows.len();
        let mut data = Vec::with_capacity(nrows * cols);
        for r in rows {
            assert_eq!(r.len(), cols, "ragged matrix");
            data.extend(r);
        }
        ExactMatrix {
            rows: nrows,
            cols,
            data,
            ctx: ctx.clone(),
        }
    }

    pub fn from_i64(ctx: &FieldContext, rows: &[Vec<i64>]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        ExactMatrix::from_rows(
            ctx,
            cols,
            rows.iter()
                .map(|r| r.iter().map(|&v| ctx.from_i64(v)).collect())
                .collect(),
        )
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn context(&self) -> &FieldContext {
        &self.ctx
    }

    pub fn get(&self, i: usize, j: usize) -> &FieldElement {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: FieldElement) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[FieldElement] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> ExactMatrix {
        let mut t = ExactMatrix::zeros(&self.ctx, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    pub fn mul_vec(&self, v: &[FieldElement]) -> Result<Vec<FieldElement>, LinalgError> {
        if v.len() != self.cols {
            return Err(LinalgError::DimensionMismatch);
        }
        Ok((0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .fold(self.ctx.zero(), |acc, (a, b)| &acc + &(a * b))
            })
            .collect())
    }

    pub fn rank(&self) -> Result<usize, LinalgError> {
        if self.ctx == FieldContext::Rationals {
            Ok(bareiss(self.integer_rows()).1.len())
        } else {
            Ok(self.rref()?.pivots.len())
        }
    }

    pub fn rref(&self) -> Result<Rref, LinalgError> {
        if self.ctx == FieldContext::Rationals {
            Ok(self.rref_rational())
        } else {
            self.rref_generic()
        }
    }

    /// Basis of the right kernel: one vector per free column, with that
    /// coordinate equal to 1 and the other free coordinates 0.
    pub fn nullspace(&self) -> Result<Vec<Vec<FieldElement>>, LinalgError> {
        let rref = self.rref()?;
        Ok(kernel_from_rref(&self.ctx, &rref))
    }

    /// Solves `M v = b`.
    pub fn solve(&self, b: &[FieldElement]) -> Result<Solution, LinalgError> {
        if b.len() != self.rows {
            return Err(LinalgError::DimensionMismatch);
        }
        let mut aug_rows = Vec::with_capacity(self.rows);
        for (i, bi) in b.iter().enumerate() {
            let mut r = self.row(i).to_vec();
            r.push(bi.clone());
            aug_rows.push(r);
        }
        let aug = ExactMatrix::from_rows(&self.ctx, self.cols + 1, aug_rows);
        let rref = aug.rref()?;
        if rref.pivots.last() == Some(&self.cols) {
            return Err(LinalgError::NoSolution);
        }
        let mut particular = vec![self.ctx.zero(); self.cols];
        for (row, &pc) in rref.rows.iter().zip(&rref.pivots) {
            particular[pc] = row[self.cols].clone();
        }
        let coeff_rref = Rref {
            rows: rref
                .rows
                .iter()
                .map(|r| r[..self.cols].to_vec())
                .collect(),
            pivots: rref.pivots.clone(),
            cols: self.cols,
        };
        Ok(Solution {
            particular,
            kernel: kernel_from_rref(&self.ctx, &coeff_rref),
        })
    }

    /// Determinant of a square matrix.
    pub fn determinant(&self) -> Result<FieldElement, LinalgError> {
        if self.rows != self.cols {
            return Err(LinalgError::DimensionMismatch);
        }
        if self.ctx == FieldContext::Rationals {
            let (rows, denom_product) = self.integer_rows_with_scale();
            let n = self.rows;
            let (ech, pivots, swaps) = bareiss(rows);
            if pivots.len() < n {
                return Ok(self.ctx.zero());
            }
            let mut det = ech[n - 1][n - 1].clone();
            if swaps % 2 == 1 {
                det = -det;
            }
            return Ok(FieldElement::Rational(BigRational::new(det, denom_product)));
        }
        // Generic elimination tracking the product of pivots.
        let n = self.rows;
        let mut m: Vec<Vec<FieldElement>> = (0..n).map(|i| self.row(i).to_vec()).collect();
        let mut det = self.ctx.one();
        for c in 0..n {
            let pr = match find_pivot(&m, c, c)? {
                Some(r) => r,
                None => return Ok(self.ctx.zero()),
            };
            if pr != c {
                m.swap(pr, c);
                det = -det;
            }
            let inv = m[c][c].inv().map_err(|_| LinalgError::DualPivotFailure)?;
            det = &det * &m[c][c];
            for r in c + 1..n {
                if m[r][c].is_zero() {
                    continue;
                }
                let f = &m[r][c] * &inv;
                let (head, tail) = m.split_at_mut(r);
                let pivot = &head[c];
                for (dst, src) in tail[0][c..n].iter_mut().zip(&pivot[c..n]) {
                    *dst = &*dst - &(&f * src);
                }
            }
        }
        Ok(det)
    }

    fn integer_rows(&self) -> Vec<Vec<BigInt>> {
        self.integer_rows_with_scale().0
    }

    /// Clears denominators row by row; returns the integer rows and the
    /// product of the row multipliers.
    fn integer_rows_with_scale(&self) -> (Vec<Vec<BigInt>>, BigInt) {
        let mut scale = BigInt::one();
        let rows = (0..self.rows)
            .map(|i| {
                let row = self.row(i);
                let lcm = row.iter().fold(BigInt::one(), |acc, v| {
                    acc.lcm(v.as_rational().expect("rational entry").denom())
                });
                scale *= &lcm;
                row.iter()
                    .map(|v| {
                        let r = v.as_rational().unwrap();
                        r.numer() * (&lcm / r.denom())
                    })
                    .collect()
            })
            .collect();
        (rows, scale)
    }

    fn rref_rational(&self) -> Rref {
        let (ech, pivots, _) = bareiss(self.integer_rows());
        let r = pivots.len();
        let mut rows: Vec<Vec<BigRational>> = ech
            .into_iter()
            .take(r)
            .map(|row| row.into_iter().map(BigRational::from_integer).collect())
            .collect();
        // Normalize pivots to 1 and clear above, bottom-up.
        for i in (0..r).rev() {
            let pc = pivots[i];
            let inv = rows[i][pc].recip();
            for v in rows[i].iter_mut() {
                if !v.is_zero() {
                    *v *= &inv;
                }
            }
            let pivot_row = rows[i].clone();
            for row in rows.iter_mut().take(i) {
                let f = row[pc].clone();
                if f.is_zero() {
                    continue;
                }
                for (v, p) in row.iter_mut().zip(&pivot_row).skip(pc) {
                    if !p.is_zero() {
                        *v -= &f * p;
                    }
                }
            }
        }
        Rref {
            rows: rows
                .into_iter()
                .map(|r| r.into_iter().map(FieldElement::Rational).collect())
                .collect(),
            pivots,
            cols: self.cols,
        }
    }

    fn rref_generic(&self) -> Result<Rref, LinalgError> {
        let mut m: Vec<Vec<FieldElement>> = (0..self.rows).map(|i| self.row(i).to_vec()).collect();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == m.len() {
                break;
            }
            let pr = match find_pivot(&m, r, c)? {
                Some(pr) => pr,
                None => continue,
            };
            m.swap(r, pr);
            let inv = m[r][c].inv().map_err(|_| LinalgError::DualPivotFailure)?;
            for v in m[r].iter_mut().skip(c) {
                *v = &*v * &inv;
            }
            let pivot_row = m[r].clone();
            for (i, row) in m.iter_mut().enumerate() {
                if i == r || row[c].is_zero() {
                    continue;
                }
                let f = row[c].clone();
                for (v, p) in row.iter_mut().zip(&pivot_row).skip(c) {
                    if !p.is_zero() {
                        *v = &*v - &(&f * p);
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        m.truncate(r);
        Ok(Rref {
            rows: m,
            pivots,
            cols: self.cols,
        })
    }
}

/// First row at or below `start` whose entry in column `c` is invertible.
/// A column with only non-invertible nonzero entries (possible over dual
/// numbers) is a failure.
fn find_pivot(
    m: &[Vec<FieldElement>],
    start: usize,
    c: usize,
) -> Result<Option<usize>, LinalgError> {
    let mut saw_nonzero = false;
    for (i, row) in m.iter().enumerate().skip(start) {
        if row[c].is_invertible() {
            return Ok(Some(i));
        }
        if !row[c].is_zero() {
            saw_nonzero = true;
        }
    }
    if saw_nonzero {
        Err(LinalgError::DualPivotFailure)
    } else {
        Ok(None)
    }
}

fn kernel_from_rref(ctx: &FieldContext, rref: &Rref) -> Vec<Vec<FieldElement>> {
    let mut is_pivot = vec![false; rref.cols];
    for &p in &rref.pivots {
        is_pivot[p] = true;
    }
    (0..rref.cols)
        .filter(|&f| !is_pivot[f])
        .map(|f| {
            let mut v = vec![ctx.zero(); rref.cols];
            v[f] = ctx.one();
            for (row, &pc) in rref.rows.iter().zip(&rref.pivots) {
                v[pc] = -&row[f];
            }
            v
        })
        .collect()
}

/// Fraction-free Gaussian elimination. Returns the echelon rows (the first
/// `rank` rows are the pivot rows), the pivot columns and the number of row
/// swaps.
fn bareiss(mut m: Vec<Vec<BigInt>>) -> (Vec<Vec<BigInt>>, Vec<usize>, usize) {
    let rows = m.len();
    let cols = m.first().map_or(0, |r| r.len());
    let mut prev = BigInt::one();
    let mut pivots = Vec::new();
    let mut swaps = 0;
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(pr) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        if pr != r {
            m.swap(pr, r);
            swaps += 1;
        }
        let (top, bottom) = m.split_at_mut(r + 1);
        let pivot_row = &top[r];
        let pivot = &pivot_row[c];
        for row in bottom.iter_mut() {
            let f = row[c].clone();
            for j in c + 1..cols {
                let v = pivot * &row[j] - &f * &pivot_row[j];
                row[j] = if prev.is_one() { v } else { v / &prev };
            }
            row[c] = BigInt::zero();
        }
        // Rows above the pivot keep their values; entries left of c in
        // lower rows are already zero.
        prev = m[r][c].clone();
        pivots.push(c);
        r += 1;
    }
    // Entries in rows below the rank are zero; leave them.
    (m, pivots, swaps)
}
