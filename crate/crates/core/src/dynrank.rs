//! Exact dynamic rank under column updates.
//!
//! The structure keeps a set `B` of linearly independent columns of `P`,
//! a matrix `Q` whose columns span the column space of `P` and are reduced
//! (each column has a pivot row where it is 1 and every other column of `Q`
//! is 0), and an invertible `G` with `P[:, B] * G = Q`.
//!
//! Because `Q` is reduced, any column `c` of `P` equals `sum_k Q_k * P[q_k, c]`
//! where `q_k` is the pivot row of `Q_k`. A column update therefore costs
//! `O(r * rank + rank^2)` for a column outside `B`. A column inside `B` is
//! first swapped out against the smallest-index column that can replace it,
//! or dropped when none can, and then updated as an outside column.

use crate::error::{check_index, Result};
use crate::gf::{FieldElement, PrimeField};
use crate::linalg::{DenseMatrix, SparseVec};

/// Common interface of the exact and sketched rank maintainers.
pub trait RankStructure {
    /// Number of rows of the maintained matrix.
    fn rows(&self) -> usize;
    /// Number of columns of the maintained matrix.
    fn cols(&self) -> usize;
    fn rank(&self) -> usize;
    /// `A <- A + v e_col^T`; returns the new rank.
    fn column_update(&mut self, col: usize, v: &SparseVec) -> Result<usize>;
    /// Field multiplications spent so far.
    fn mults(&self) -> u64;
}

#[derive(Clone, Debug)]
pub struct DynRank {
    field: PrimeField,
    rows: usize,
    // column-major copy of the matrix
    p: Vec<Vec<FieldElement>>,
    basis: Vec<usize>,
    pos_of: Vec<Option<usize>>,
    q: Vec<Vec<FieldElement>>,
    pivots: Vec<usize>,
    // g[pos][k]: coefficient of column basis[pos] in q[k]
    g: Vec<Vec<FieldElement>>,
    mults: u64,
}

impl DynRank {
    pub fn new(field: PrimeField, a: &DenseMatrix) -> Self {
        let mut s = DynRank {
            field,
            rows: a.rows(),
            p: (0..a.cols()).map(|j| a.column(j)).collect(),
            basis: Vec::new(),
            pos_of: vec![None; a.cols()],
            q: Vec::new(),
            pivots: Vec::new(),
            g: Vec::new(),
            mults: 0,
        };
        for c in 0..a.cols() {
            s.absorb(c);
        }
        s
    }

    pub fn zeros(field: PrimeField, rows: usize, cols: usize) -> Self {
        Self::new(field, &DenseMatrix::zeros(rows, cols))
    }

    pub fn field(&self) -> &PrimeField {
        &self.field
    }

    pub fn get(&self, i: usize, j: usize) -> FieldElement {
        self.p[j][i]
    }

    pub fn column(&self, j: usize) -> &[FieldElement] {
        &self.p[j]
    }

    pub fn to_dense(&self) -> DenseMatrix {
        DenseMatrix::from_fn(self.rows, self.p.len(), |i, j| self.p[j][i])
    }

    /// Columns currently forming the internal basis, sorted.
    pub fn basis_columns(&self) -> Vec<usize> {
        let mut b = self.basis.clone();
        b.sort_unstable();
        b
    }

    /// `A[i][j] <- value`.
    pub fn entry_update(&mut self, i: usize, j: usize, value: FieldElement) -> Result<usize> {
        check_index(i, self.rows)?;
        check_index(j, self.p.len())?;
        let delta = self.field.sub(value, self.p[j][i]);
        self.column_update(j, &SparseVec::unit(i, delta))
    }

    /// Residual of column `c` against `Q`, and its coordinates in `Q`.
    fn residual(&mut self, c: usize) -> (Vec<FieldElement>, Vec<FieldElement>) {
        let f = self.field;
        let mut w = self.p[c].clone();
        let y: Vec<FieldElement> = self.pivots.iter().map(|&row| w[row]).collect();
        for (qk, &yk) in self.q.iter().zip(&y) {
            if yk.is_zero() {
                continue;
            }
            self.mults += self.rows as u64;
            for (wi, &qi) in w.iter_mut().zip(qk) {
                *wi = f.mul_sub(*wi, yk, qi);
            }
        }
        (w, y)
    }

    /// Adds column `c` to the basis if it lies outside the current span.
    fn absorb(&mut self, c: usize) {
        let f = self.field;
        let (mut w, y) = self.residual(c);
        let Some(prow) = w.iter().position(|x| !x.is_zero()) else {
            return;
        };
        let rho = self.basis.len();
        let inv = f.inv(w[prow]).expect("residual pivot is nonzero");
        for x in w.iter_mut() {
            *x = f.mul(*x, inv);
        }
        // coordinates of the normalized residual in the extended basis
        let mut g_new = vec![FieldElement::ZERO; rho + 1];
        for (l, row) in self.g.iter().enumerate() {
            let s = row
                .iter()
                .zip(&y)
                .fold(FieldElement::ZERO, |acc, (&a, &b)| f.mul_add(acc, a, b));
            g_new[l] = f.neg(f.mul(s, inv));
        }
        g_new[rho] = inv;
        self.mults += (rho * rho + self.rows) as u64;
        self.g.push(vec![FieldElement::ZERO; rho]);
        for k in 0..rho {
            let factor = self.q[k][prow];
            if factor.is_zero() {
                continue;
            }
            self.mults += (self.rows + rho + 1) as u64;
            for (qi, &wi) in self.q[k].iter_mut().zip(&w) {
                *qi = f.mul_sub(*qi, factor, wi);
            }
            for (l, row) in self.g.iter_mut().enumerate() {
                row[k] = f.mul_sub(row[k], factor, g_new[l]);
            }
        }
        for (row, &x) in self.g.iter_mut().zip(&g_new) {
            row.push(x);
        }
        self.q.push(w);
        self.pivots.push(prow);
        self.pos_of[c] = Some(rho);
        self.basis.push(c);
    }

    /// Takes the column at basis position `pos` out of the basis, swapping
    /// in a replacement when one exists.
    fn release(&mut self, pos: usize) {
        let f = self.field;
        let rho = self.basis.len();
        let gpos = self.g[pos].clone();
        let mut replacement = None;
        for c in 0..self.p.len() {
            if self.pos_of[c].is_some() {
                continue;
            }
            self.mults += rho as u64;
            let col = &self.p[c];
            let zpos = gpos
                .iter()
                .zip(&self.pivots)
                .fold(FieldElement::ZERO, |acc, (&gk, &row)| {
                    f.mul_add(acc, gk, col[row])
                });
            if !zpos.is_zero() {
                replacement = Some((c, zpos));
                break;
            }
        }
        let old = self.basis[pos];
        self.pos_of[old] = None;
        match replacement {
            Some((c, zpos)) => {
                // z = G * y_c, the coordinates of column c in the old basis
                let y: Vec<FieldElement> = self.pivots.iter().map(|&row| self.p[c][row]).collect();
                let mut z: Vec<FieldElement> = self
                    .g
                    .iter()
                    .map(|row| {
                        row.iter()
                            .zip(&y)
                            .fold(FieldElement::ZERO, |acc, (&a, &b)| f.mul_add(acc, a, b))
                    })
                    .collect();
                debug_assert_eq!(z[pos], zpos);
                z[pos] = f.sub(z[pos], FieldElement::ONE);
                let inv = f.inv(zpos).expect("replacement coefficient is nonzero");
                for x in z.iter_mut() {
                    *x = f.mul(*x, inv);
                }
                // G <- G - (z - e_pos) g_pos^T / z_pos
                for (l, row) in self.g.iter_mut().enumerate() {
                    if z[l].is_zero() {
                        continue;
                    }
                    for (x, &gk) in row.iter_mut().zip(&gpos) {
                        *x = f.mul_sub(*x, z[l], gk);
                    }
                }
                self.mults += (2 * rho * rho) as u64;
                self.basis[pos] = c;
                self.pos_of[c] = Some(pos);
            }
            None => {
                let kstar = gpos
                    .iter()
                    .position(|x| !x.is_zero())
                    .expect("G is invertible");
                let inv = f.inv(gpos[kstar]).expect("nonzero");
                let qstar = self.q[kstar].clone();
                for k in 0..rho {
                    if k == kstar || gpos[k].is_zero() {
                        continue;
                    }
                    let c = f.mul(gpos[k], inv);
                    for (x, &s) in self.q[k].iter_mut().zip(&qstar) {
                        *x = f.mul_sub(*x, c, s);
                    }
                    for row in self.g.iter_mut() {
                        row[k] = f.mul_sub(row[k], c, row[kstar]);
                    }
                    self.mults += (self.rows + rho) as u64;
                }
                self.q.swap_remove(kstar);
                self.pivots.swap_remove(kstar);
                for row in self.g.iter_mut() {
                    row.swap_remove(kstar);
                }
                self.g.swap_remove(pos);
                self.basis.swap_remove(pos);
                if pos < self.basis.len() {
                    self.pos_of[self.basis[pos]] = Some(pos);
                }
            }
        }
    }

    /// Recomputes everything from scratch and compares. Intended for tests.
    pub fn check_invariants(&self) -> bool {
        let f = &self.field;
        let a = self.to_dense();
        let rho = self.basis.len();
        if crate::linalg::rank_oracle(f, &a) != rho || self.q.len() != rho || self.g.len() != rho {
            return false;
        }
        for k in 0..rho {
            for (k2, &row) in self.pivots.iter().enumerate() {
                let expect = if k == k2 {
                    FieldElement::ONE
                } else {
                    FieldElement::ZERO
                };
                if self.q[k][row] != expect {
                    return false;
                }
            }
            for i in 0..self.rows {
                let s = (0..rho).fold(FieldElement::ZERO, |acc, l| {
                    f.mul_add(acc, self.p[self.basis[l]][i], self.g[l][k])
                });
                if s != self.q[k][i] {
                    return false;
                }
            }
        }
        self.basis
            .iter()
            .enumerate()
            .all(|(pos, &c)| self.pos_of[c] == Some(pos))
            && self.pos_of.iter().flatten().count() == rho
    }
}

impl RankStructure for DynRank {
    fn rows(&self) -> usize {
        self.rows
    }

    fn cols(&self) -> usize {
        self.p.len()
    }

    fn rank(&self) -> usize {
        self.basis.len()
    }

    fn column_update(&mut self, col: usize, v: &SparseVec) -> Result<usize> {
        check_index(col, self.p.len())?;
        if let Some(i) = v.max_index() {
            check_index(i, self.rows)?;
        }
        if v.is_empty() {
            return Ok(self.basis.len());
        }
        if let Some(pos) = self.pos_of[col] {
            self.release(pos);
        }
        for (i, x) in v.iter() {
            self.p[col][i] = self.field.add(self.p[col][i], x);
        }
        self.absorb(col);
        Ok(self.basis.len())
    }

    fn mults(&self) -> u64 {
        self.mults
    }
}
