//! Sparse rank-preserving projections.
//!
//! A sketch is an `n x r` matrix with exactly two nonzeros per row and at
//! most `2 * ceil(n / r)` nonzeros per column. For a matrix `A` of rank at
//! most `r / C_R`, `rank(M^T A N)` equals `rank(A)` with constant
//! probability; taking the maximum over several independent copies boosts
//! that to high probability.
//!
//! Row `i` places its first nonzero in the block of columns owned by `i`
//! (or column `floor(i * r / n)` when `r < n`). Once every row has its first
//! nonzero, each row draws a second column uniformly, redrawing while that
//! column is already full. If only the row's own first column has room left,
//! the row trades with an earlier one.

use crate::gf::{FieldElement, FieldRng, PrimeField};
use crate::linalg::{DenseMatrix, LinalgError, SparseVec};

/// Target dimension per unit of rank: `r = C_R * k`.
pub const C_R: usize = 4;

/// Smallest rank cap for which a sketched structure is built.
pub const K0: usize = 8;

/// `ceil(log2(n))`, with `ceil_log2(0) = ceil_log2(1) = 0`.
pub fn ceil_log2(n: usize) -> u32 {
    if n <= 1 {
        0
    } else {
        usize::BITS - (n - 1).leading_zeros()
    }
}

/// Number of independent copies whose ranks are maximized.
pub fn boost_copies(n: usize) -> usize {
    ceil_log2(n) as usize + 2
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SketchMatrix {
    n: usize,
    r: usize,
    rows: Vec<[(usize, FieldElement); 2]>,
}

impl SketchMatrix {
    /// Sketch with `r = C_R * k` columns.
    pub fn build(field: &PrimeField, n: usize, k: usize, rng: &mut FieldRng) -> SketchMatrix {
        assert!(k >= 1, "sketch rank cap must be positive");
        Self::build_width(field, n, C_R * k, rng)
    }

    /// Sketch with an explicit target dimension `r >= 2`.
    pub fn build_width(field: &PrimeField, n: usize, r: usize, rng: &mut FieldRng) -> SketchMatrix {
        assert!(r >= 2, "two nonzeros per row need at least two columns");
        let cap = 2 * n.div_ceil(r);
        let mut load = vec![0usize; r];
        // first positions are placed for all rows before any second position,
        // so the block structure never competes with the column cap
        let firsts: Vec<usize> = (0..n)
            .map(|i| {
                let c = if r >= n {
                    let lo = i * r / n;
                    let hi = (i + 1) * r / n;
                    lo + rng.index(hi - lo)
                } else {
                    i * r / n
                };
                load[c] += 1;
                c
            })
            .collect();
        let mut rows: Vec<[(usize, FieldElement); 2]> = Vec::with_capacity(n);
        for first in firsts {
            let mut second = None;
            for _ in 0..64 {
                let c = rng.index(r);
                if c != first && load[c] < cap {
                    second = Some(c);
                    break;
                }
            }
            let second = second.or_else(|| {
                let start = rng.index(r);
                (0..r)
                    .map(|d| (start + d) % r)
                    .find(|&c| c != first && load[c] < cap)
            });
            let second = match second {
                Some(c) => c,
                None => {
                    // only `first` itself has room: hand it to an earlier row
                    // and take over that row's second column
                    let j = rows
                        .iter()
                        .rposition(|row: &[(usize, FieldElement); 2]| {
                            row[0].0 != first && row[1].0 != first
                        })
                        .expect("an earlier row avoids the open column");
                    let taken = rows[j][1].0;
                    rows[j][1].0 = first;
                    load[first] += 1;
                    load[taken] -= 1;
                    taken
                }
            };
            load[second] += 1;
            rows.push([
                (first, field.sample_nonzero(rng)),
                (second, field.sample_nonzero(rng)),
            ]);
        }
        let s = SketchMatrix { n, r, rows };
        debug_assert!(s.sparsity_holds());
        s
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn r(&self) -> usize {
        self.r
    }

    /// The two `(column, value)` pairs of row `i`.
    pub fn row(&self, i: usize) -> &[(usize, FieldElement); 2] {
        &self.rows[i]
    }

    pub fn column_cap(&self) -> usize {
        2 * self.n.div_ceil(self.r)
    }

    /// Checks both sparsity bounds.
    pub fn sparsity_holds(&self) -> bool {
        let mut load = vec![0usize; self.r];
        for row in &self.rows {
            if row[0].0 == row[1].0 || row[0].1.is_zero() || row[1].1.is_zero() {
                return false;
            }
            load[row[0].0] += 1;
            load[row[1].0] += 1;
        }
        load.iter().all(|&l| l <= self.column_cap())
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut m = DenseMatrix::zeros(self.n, self.r);
        for (i, row) in self.rows.iter().enumerate() {
            for &(c, v) in row {
                m.set(i, c, v);
            }
        }
        m
    }

    /// `A * M` for `A` with `n` columns.
    pub fn apply_right(
        &self,
        field: &PrimeField,
        a: &DenseMatrix,
    ) -> Result<DenseMatrix, LinalgError> {
        if a.cols() != self.n {
            return Err(LinalgError::DimensionMismatch {
                expected: self.n,
                found: a.cols(),
            });
        }
        let mut out = DenseMatrix::zeros(a.rows(), self.r);
        for i in 0..a.rows() {
            for (j, &x) in a.row(i).iter().enumerate() {
                if x.is_zero() {
                    continue;
                }
                for &(c, m) in &self.rows[j] {
                    let cur = out.get(i, c);
                    out.set(i, c, field.mul_add(cur, x, m));
                }
            }
        }
        Ok(out)
    }

    /// `M^T * A` for `A` with `n` rows.
    pub fn apply_left(
        &self,
        field: &PrimeField,
        a: &DenseMatrix,
    ) -> Result<DenseMatrix, LinalgError> {
        if a.rows() != self.n {
            return Err(LinalgError::DimensionMismatch {
                expected: self.n,
                found: a.rows(),
            });
        }
        let mut out = DenseMatrix::zeros(self.r, a.cols());
        for i in 0..self.n {
            for &(t, m) in &self.rows[i] {
                let src = a.row(i).to_vec();
                for (d, x) in out.row_mut(t).iter_mut().zip(src) {
                    if !x.is_zero() {
                        *d = field.mul_add(*d, m, x);
                    }
                }
            }
        }
        Ok(out)
    }

    /// `M^T * v` for a sparse `v` of length `n`.
    pub fn transpose_apply(
        &self,
        field: &PrimeField,
        v: &SparseVec,
    ) -> Result<SparseVec, LinalgError> {
        if let Some(j) = v.max_index().filter(|&j| j >= self.n) {
            return Err(LinalgError::IndexOutOfRange {
                index: j,
                bound: self.n,
            });
        }
        let pairs = v
            .iter()
            .flat_map(|(j, x)| self.rows[j].iter().map(move |&(t, m)| (t, field.mul(m, x))));
        Ok(SparseVec::from_pairs(field, pairs))
    }
}

/// Column deltas of `M^T A N` caused by `A <- A + v e_i^T`: the update adds
/// `(M^T v) * N[i, :]`, which touches the two columns where row `i` of `N`
/// is nonzero.
pub fn propagate_column_update(
    field: &PrimeField,
    m: &SketchMatrix,
    n: &SketchMatrix,
    i: usize,
    v: &SparseVec,
) -> Result<Vec<(usize, SparseVec)>, LinalgError> {
    if i >= n.n {
        return Err(LinalgError::IndexOutOfRange {
            index: i,
            bound: n.n,
        });
    }
    let u = m.transpose_apply(field, v)?;
    if u.is_empty() {
        return Ok(Vec::new());
    }
    Ok(n.rows[i]
        .iter()
        .map(|&(col, beta)| (col, u.scale(field, beta)))
        .collect())
}
