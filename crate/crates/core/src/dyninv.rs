//! Singularity detection for a square matrix under small batches of entry
//! changes, with the inverse kept up to date.
//!
//! A batch `H' = H + sum_t d_t e_{i_t} e_{j_t}^T` is singular exactly when
//! the `c x c` capacitance matrix `C[s][t] = [s = t] + d_s * Hinv[j_s][i_t]`
//! is singular, since `det H' = det H * det C`. Checking costs `O(c^3)` and a
//! rejected batch leaves the state untouched. An accepted batch updates the
//! inverse by Woodbury in `O(c * m^2)`; a single entry is the Sherman-Morrison
//! case `1 + d * Hinv[j][i] != 0`.
//!
//! Batches are applied atomically rather than entry by entry: moving one edge
//! of a gadget takes two entries, and the intermediate state can be singular
//! even when both endpoints are not.

use crate::error::{check_index, Error, Result};
use crate::gf::{FieldElement, PrimeField};
use crate::linalg::{det_oracle, inverse_oracle, DenseMatrix, LinalgError};

/// One entry change: `H[i][j] += delta`.
pub type EntryDelta = (usize, usize, FieldElement);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Applied,
    WouldBeSingular,
}

#[derive(Clone, Debug)]
pub struct DynInv {
    field: PrimeField,
    h: DenseMatrix,
    hinv: DenseMatrix,
    log: Vec<Vec<EntryDelta>>,
    mults: u64,
}

impl DynInv {
    pub fn new(field: PrimeField, h: DenseMatrix) -> Result<Self> {
        if !h.is_square() {
            return Err(LinalgError::NotSquare {
                rows: h.rows(),
                cols: h.cols(),
            }
            .into());
        }
        let hinv = inverse_oracle(&field, &h)?.ok_or(Error::SingularInit)?;
        Ok(DynInv {
            field,
            h,
            hinv,
            log: Vec::new(),
            mults: 0,
        })
    }

    pub fn dim(&self) -> usize {
        self.h.rows()
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.h
    }

    pub fn inverse(&self) -> &DenseMatrix {
        &self.hinv
    }

    pub fn mults(&self) -> u64 {
        self.mults
    }

    pub fn log_len(&self) -> usize {
        self.log.len()
    }

    /// Forgets the revert history.
    pub fn clear_log(&mut self) {
        self.log.clear();
    }

    fn normalize(&self, batch: &[EntryDelta]) -> Result<Vec<EntryDelta>> {
        let n = self.dim();
        let mut out: Vec<EntryDelta> = Vec::with_capacity(batch.len());
        for &(i, j, d) in batch {
            check_index(i, n)?;
            check_index(j, n)?;
            match out.iter_mut().find(|e| e.0 == i && e.1 == j) {
                Some(e) => e.2 = self.field.add(e.2, d),
                None => out.push((i, j, d)),
            }
        }
        out.retain(|e| !e.2.is_zero());
        Ok(out)
    }

    /// Inverse of the capacitance matrix, or `None` when the batch would make
    /// `H` singular.
    fn capacitance_inverse(&mut self, batch: &[EntryDelta]) -> Option<DenseMatrix> {
        let f = self.field;
        let c = batch.len();
        let cap = DenseMatrix::from_fn(c, c, |s, t| {
            let (_, js, ds) = batch[s];
            let (it, _, _) = batch[t];
            let base = if s == t {
                FieldElement::ONE
            } else {
                FieldElement::ZERO
            };
            f.mul_add(base, ds, self.hinv.get(js, it))
        });
        self.mults += (c * c + c * c * c) as u64;
        inverse_oracle(&f, &cap).expect("square")
    }

    fn apply(&mut self, batch: &[EntryDelta], cinv: &DenseMatrix) {
        let f = self.field;
        let m = self.dim();
        let c = batch.len();
        // K = C^{-1} * Y with Y[s] = d_s * Hinv[j_s, :]
        let mut k = DenseMatrix::zeros(c, m);
        for s in 0..c {
            let (_, js, ds) = batch[s];
            for t in 0..c {
                let coef = f.mul(cinv.get(t, s), ds);
                if coef.is_zero() {
                    continue;
                }
                let src = self.hinv.row(js);
                let dst = k.row_mut(t);
                for (x, &y) in dst.iter_mut().zip(src) {
                    *x = f.mul_add(*x, coef, y);
                }
            }
        }
        // X = Hinv[:, i_t]
        let x: Vec<Vec<FieldElement>> = batch
            .iter()
            .map(|&(it, _, _)| self.hinv.column(it))
            .collect();
        for a in 0..m {
            let row = self.hinv.row_mut(a);
            for t in 0..c {
                let xa = x[t][a];
                if xa.is_zero() {
                    continue;
                }
                for (h, &kv) in row.iter_mut().zip(k.row(t)) {
                    *h = f.mul_sub(*h, xa, kv);
                }
            }
        }
        self.mults += (2 * c * m * m + c * c * m) as u64;
        for &(i, j, d) in batch {
            let cur = self.h.get(i, j);
            self.h.set(i, j, f.add(cur, d));
        }
    }

    /// Applies the batch unless it would make `H` singular.
    pub fn try_batch(&mut self, batch: &[EntryDelta]) -> Result<Outcome> {
        let batch = self.normalize(batch)?;
        if !batch.is_empty() {
            let Some(cinv) = self.capacitance_inverse(&batch) else {
                return Ok(Outcome::WouldBeSingular);
            };
            self.apply(&batch, &cinv);
        }
        self.log.push(batch);
        Ok(Outcome::Applied)
    }

    /// Whether the batch would make `H` singular, without applying it.
    pub fn probe(&mut self, batch: &[EntryDelta]) -> Result<bool> {
        let batch = self.normalize(batch)?;
        Ok(!batch.is_empty() && self.capacitance_inverse(&batch).is_none())
    }

    pub fn try_entry_update(&mut self, i: usize, j: usize, delta: FieldElement) -> Result<Outcome> {
        self.try_batch(&[(i, j, delta)])
    }

    /// Undoes the most recent accepted batch.
    pub fn revert(&mut self) -> Result<()> {
        let batch = self.log.pop().ok_or(Error::EmptyLog)?;
        if batch.is_empty() {
            return Ok(());
        }
        let neg: Vec<EntryDelta> = batch
            .iter()
            .map(|&(i, j, d)| (i, j, self.field.neg(d)))
            .collect();
        let cinv = self
            .capacitance_inverse(&neg)
            .expect("reverting returns to a nonsingular matrix");
        self.apply(&neg, &cinv);
        Ok(())
    }

    /// Recomputes the inverse and compares. Intended for tests.
    pub fn check_inverse(&self) -> bool {
        !det_oracle(&self.field, &self.h).expect("square").is_zero()
            && self.h.mul(&self.field, &self.hinv).expect("square")
                == DenseMatrix::identity(self.dim())
    }
}
