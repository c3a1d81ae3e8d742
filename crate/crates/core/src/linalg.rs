//! Dense matrices over GF(p) and the elimination-based oracles (rank,
//! determinant, inverse, span membership) that every maintainer is checked
//! against.
//!
//! Indices are 0-based throughout the library; the stream format converts
//! from its 1-based notation at the boundary.

use thiserror::Error;

use crate::gf::{FieldElement, PrimeField};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LinalgError {
    #[error("matrix is {rows}x{cols}, expected square")]
    NotSquare { rows: usize, cols: usize },
    #[error("index {index} out of range for dimension {bound}")]
    IndexOutOfRange { index: usize, bound: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
}

/// Row-major `rows x cols` matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<FieldElement>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix {
            rows,
            cols,
            data: vec![FieldElement::ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, FieldElement::ONE);
        }
        m
    }

    /// Builds a matrix from integer rows, reducing each entry mod p.
    pub fn from_rows(field: &PrimeField, rows: &[Vec<i64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut m = Self::zeros(r, c);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), c, "ragged rows");
            for (j, &v) in row.iter().enumerate() {
                m.set(i, j, field.from_i64(v));
            }
        }
        m
    }

    pub fn from_fn(
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> FieldElement,
    ) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.data[i * cols + j] = f(i, j);
            }
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> FieldElement {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: FieldElement) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[FieldElement] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [FieldElement] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<FieldElement> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn nnz(&self) -> usize {
        self.data.iter().filter(|v| !v.is_zero()).count()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|v| v.is_zero())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn mul(&self, field: &PrimeField, other: &DenseMatrix) -> Result<DenseMatrix, LinalgError> {
        if self.cols != other.rows {
            return Err(LinalgError::DimensionMismatch {
                expected: self.cols,
                found: other.rows,
            });
        }
        let mut out = DenseMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                let orow = other.row(k);
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, &b) in dst.iter_mut().zip(orow) {
                    *d = field.mul_add(*d, a, b);
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, field: &PrimeField, v: &[FieldElement]) -> Vec<FieldElement> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .fold(FieldElement::ZERO, |acc, (&a, &b)| field.mul_add(acc, a, b))
            })
            .collect()
    }

    fn check_indices(indices: &[usize], bound: usize) -> Result<(), LinalgError> {
        match indices.iter().find(|&&i| i >= bound) {
            Some(&index) => Err(LinalgError::IndexOutOfRange { index, bound }),
            None => Ok(()),
        }
    }

    /// `A_{I,J}`, in the order the index lists are given.
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Result<DenseMatrix, LinalgError> {
        Self::check_indices(rows, self.rows)?;
        Self::check_indices(cols, self.cols)?;
        Ok(Self::from_fn(rows.len(), cols.len(), |i, j| {
            self.get(rows[i], cols[j])
        }))
    }

    /// `A_{-S,-T}`: the matrix with rows `S` and columns `T` deleted.
    pub fn delete(&self, rows: &[usize], cols: &[usize]) -> Result<DenseMatrix, LinalgError> {
        Self::check_indices(rows, self.rows)?;
        Self::check_indices(cols, self.cols)?;
        let keep_r: Vec<usize> = (0..self.rows).filter(|i| !rows.contains(i)).collect();
        let keep_c: Vec<usize> = (0..self.cols).filter(|j| !cols.contains(j)).collect();
        self.submatrix(&keep_r, &keep_c)
    }
}

/// Sparse vector as `(index, value)` pairs with distinct indices and nonzero values.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SparseVec {
    entries: Vec<(usize, FieldElement)>,
}

impl SparseVec {
    pub fn new() -> Self {
        SparseVec::default()
    }

    /// Merges repeated indices and drops zeros; output is sorted by index.
    pub fn from_pairs(
        field: &PrimeField,
        pairs: impl IntoIterator<Item = (usize, FieldElement)>,
    ) -> Self {
        let mut entries: Vec<(usize, FieldElement)> = pairs.into_iter().collect();
        entries.sort_by_key(|e| e.0);
        let mut out: Vec<(usize, FieldElement)> = Vec::with_capacity(entries.len());
        for (i, v) in entries {
            match out.last_mut() {
                Some(last) if last.0 == i => last.1 = field.add(last.1, v),
                _ => out.push((i, v)),
            }
        }
        out.retain(|e| !e.1.is_zero());
        SparseVec { entries: out }
    }

    pub fn unit(index: usize, value: FieldElement) -> Self {
        let entries = if value.is_zero() {
            vec![]
        } else {
            vec![(index, value)]
        };
        SparseVec { entries }
    }

    pub fn from_dense(v: &[FieldElement]) -> Self {
        SparseVec {
            entries: v
                .iter()
                .copied()
                .enumerate()
                .filter(|e| !e.1.is_zero())
                .collect(),
        }
    }

    pub fn to_dense(&self, len: usize) -> Vec<FieldElement> {
        let mut out = vec![FieldElement::ZERO; len];
        for &(i, v) in &self.entries {
            out[i] = v;
        }
        out
    }

    pub fn entries(&self) -> &[(usize, FieldElement)] {
        &self.entries
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, FieldElement)> + '_ {
        self.entries.iter().copied()
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn max_index(&self) -> Option<usize> {
        self.entries.iter().map(|e| e.0).max()
    }

    pub fn scale(&self, field: &PrimeField, c: FieldElement) -> SparseVec {
        if c.is_zero() {
            return SparseVec::new();
        }
        SparseVec {
            entries: self
                .entries
                .iter()
                .map(|&(i, v)| (i, field.mul(c, v)))
                .collect(),
        }
    }

    pub fn neg(&self, field: &PrimeField) -> SparseVec {
        SparseVec {
            entries: self
                .entries
                .iter()
                .map(|&(i, v)| (i, field.neg(v)))
                .collect(),
        }
    }
}

/// Row-reduces a copy of `m` in place and returns the pivot columns.
/// Pivot search takes the first nonzero entry in column order.
fn row_reduce(field: &PrimeField, m: &mut DenseMatrix) -> Vec<usize> {
    let (rows, cols) = (m.rows, m.cols);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m.get(i, c).is_zero()) else {
            continue;
        };
        if p != r {
            for j in 0..cols {
                m.data.swap(p * cols + j, r * cols + j);
            }
        }
        let inv = field.inv(m.get(r, c)).expect("pivot is nonzero");
        for j in c..cols {
            let v = m.get(r, j);
            m.set(r, j, field.mul(v, inv));
        }
        for i in 0..rows {
            if i == r {
                continue;
            }
            let factor = m.get(i, c);
            if factor.is_zero() {
                continue;
            }
            for j in c..cols {
                let v = field.mul_sub(m.get(i, j), factor, m.get(r, j));
                m.set(i, j, v);
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank_oracle(field: &PrimeField, a: &DenseMatrix) -> usize {
    let mut m = a.clone();
    row_reduce(field, &mut m).len()
}

/// Indices of the leftmost linearly independent columns (the greedy column basis).
pub fn pivot_columns(field: &PrimeField, a: &DenseMatrix) -> Vec<usize> {
    let mut m = a.clone();
    row_reduce(field, &mut m)
}

pub fn det_oracle(field: &PrimeField, a: &DenseMatrix) -> Result<FieldElement, LinalgError> {
    if !a.is_square() {
        return Err(LinalgError::NotSquare {
            rows: a.rows,
            cols: a.cols,
        });
    }
    let n = a.rows;
    let mut m = a.clone();
    let mut det = FieldElement::ONE;
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| !m.get(i, c).is_zero()) else {
            return Ok(FieldElement::ZERO);
        };
        if p != c {
            for j in 0..n {
                m.data.swap(p * n + j, c * n + j);
            }
            det = field.neg(det);
        }
        let pivot = m.get(c, c);
        det = field.mul(det, pivot);
        let inv = field.inv(pivot).expect("pivot is nonzero");
        for i in c + 1..n {
            let factor = field.mul(m.get(i, c), inv);
            if factor.is_zero() {
                continue;
            }
            for j in c..n {
                let v = field.mul_sub(m.get(i, j), factor, m.get(c, j));
                m.set(i, j, v);
            }
        }
    }
    Ok(det)
}

/// Determinant as the signed sum over all permutations. Exponential; meant
/// as an independent check for dimensions up to about 7.
pub fn det_by_permutations(
    field: &PrimeField,
    a: &DenseMatrix,
) -> Result<FieldElement, LinalgError> {
    if !a.is_square() {
        return Err(LinalgError::NotSquare {
            rows: a.rows,
            cols: a.cols,
        });
    }
    fn walk(
        field: &PrimeField,
        a: &DenseMatrix,
        row: usize,
        used: &mut Vec<bool>,
        perm: &mut Vec<usize>,
        acc: &mut FieldElement,
    ) {
        let n = a.rows();
        if row == n {
            let inversions = (0..n)
                .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
                .filter(|&(i, j)| perm[i] > perm[j])
                .count();
            let mut term = FieldElement::ONE;
            for (i, &j) in perm.iter().enumerate() {
                term = field.mul(term, a.get(i, j));
            }
            *acc = if inversions % 2 == 0 {
                field.add(*acc, term)
            } else {
                field.sub(*acc, term)
            };
            return;
        }
        for j in 0..n {
            if !used[j] {
                used[j] = true;
                perm.push(j);
                walk(field, a, row + 1, used, perm, acc);
                perm.pop();
                used[j] = false;
            }
        }
    }
    let mut acc = FieldElement::ZERO;
    walk(
        field,
        a,
        0,
        &mut vec![false; a.rows],
        &mut Vec::new(),
        &mut acc,
    );
    Ok(acc)
}

/// Gauss-Jordan inverse; `None` when singular.
pub fn inverse_oracle(
    field: &PrimeField,
    a: &DenseMatrix,
) -> Result<Option<DenseMatrix>, LinalgError> {
    if !a.is_square() {
        return Err(LinalgError::NotSquare {
            rows: a.rows,
            cols: a.cols,
        });
    }
    let n = a.rows;
    let mut aug = DenseMatrix::zeros(n, 2 * n);
    for i in 0..n {
        aug.row_mut(i)[..n].copy_from_slice(a.row(i));
        aug.set(i, n + i, FieldElement::ONE);
    }
    let pivots = row_reduce(field, &mut aug);
    if pivots.len() < n || pivots[n - 1] >= n {
        return Ok(None);
    }
    Ok(Some(DenseMatrix::from_fn(n, n, |i, j| aug.get(i, n + j))))
}

/// Whether `v` lies in the span of the columns of `b`.
pub fn in_span_oracle(
    field: &PrimeField,
    b: &DenseMatrix,
    v: &[FieldElement],
) -> Result<bool, LinalgError> {
    if v.len() != b.rows {
        return Err(LinalgError::DimensionMismatch {
            expected: b.rows,
            found: v.len(),
        });
    }
    let mut aug = DenseMatrix::zeros(b.rows, b.cols + 1);
    for i in 0..b.rows {
        aug.row_mut(i)[..b.cols].copy_from_slice(b.row(i));
        aug.set(i, b.cols, v[i]);
    }
    Ok(rank_oracle(field, &aug) == rank_oracle(field, b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf::FieldRng;

    fn f7() -> PrimeField {
        PrimeField::new(7).unwrap()
    }

    fn random_matrix(field: &PrimeField, rng: &mut FieldRng, r: usize, c: usize) -> DenseMatrix {
        DenseMatrix::from_fn(r, c, |_, _| field.sample(rng))
    }

    #[test]
    fn rank_examples() {
        let f = f7();
        assert_eq!(rank_oracle(&f, &DenseMatrix::identity(3)), 3);
        assert_eq!(rank_oracle(&f, &DenseMatrix::zeros(3, 3)), 0);
        assert_eq!(
            rank_oracle(&f, &DenseMatrix::from_rows(&f, &[vec![1, 2], vec![2, 4]])),
            1
        );
    }

    #[test]
    fn det_examples() {
        let f = f7();
        assert_eq!(
            det_oracle(&f, &DenseMatrix::identity(4)).unwrap(),
            FieldElement::ONE
        );
        let d = DenseMatrix::from_rows(&f, &[vec![2, 0], vec![0, 3]]);
        assert_eq!(det_oracle(&f, &d).unwrap(), f.elem(6));
        let m = DenseMatrix::from_rows(&f, &[vec![1, 2], vec![3, 4]]);
        assert_eq!(det_oracle(&f, &m).unwrap(), f.elem(5));
        assert!(matches!(
            det_oracle(&f, &DenseMatrix::zeros(2, 3)),
            Err(LinalgError::NotSquare { .. })
        ));
    }

    #[test]
    fn submatrix_and_delete() {
        let f = f7();
        let id = DenseMatrix::identity(3);
        assert_eq!(id.delete(&[0], &[0]).unwrap(), DenseMatrix::identity(2));
        assert_eq!(id.submatrix(&[0, 1, 2], &[0, 1, 2]).unwrap(), id);
        let m = DenseMatrix::from_rows(&f, &[vec![1, 2, 3], vec![4, 5, 6], vec![7, 8, 9]]);
        assert_eq!(
            m.delete(&[1], &[2]).unwrap(),
            DenseMatrix::from_rows(&f, &[vec![1, 2], vec![7, 8]])
        );
        assert_eq!(
            m.submatrix(&[3], &[0]),
            Err(LinalgError::IndexOutOfRange { index: 3, bound: 3 })
        );
    }

    #[test]
    fn span_examples() {
        let f = f7();
        let e = |v: i64| f.from_i64(v);
        assert!(in_span_oracle(&f, &DenseMatrix::identity(2), &[e(3), e(4)]).unwrap());
        let b = DenseMatrix::from_rows(&f, &[vec![1], vec![0]]);
        assert!(!in_span_oracle(&f, &b, &[e(0), e(1)]).unwrap());
        let b = DenseMatrix::from_rows(&f, &[vec![1], vec![2]]);
        assert!(in_span_oracle(&f, &b, &[e(3), e(6)]).unwrap());
        assert!(in_span_oracle(&f, &b, &[e(3)]).is_err());
    }

    #[test]
    fn rank_transpose_and_det_consistency() {
        let f = PrimeField::new(101).unwrap();
        let mut rng = FieldRng::new(5);
        for trial in 0..200 {
            let n = 1 + trial % 5;
            let mut a = random_matrix(&f, &mut rng, n, n);
            if trial % 3 == 0 && n > 1 {
                // force a dependency
                let r0 = a.row(0).to_vec();
                a.row_mut(n - 1).copy_from_slice(&r0);
            }
            let r = rank_oracle(&f, &a);
            assert_eq!(r, rank_oracle(&f, &a.transpose()));
            let d = det_oracle(&f, &a).unwrap();
            assert_eq!(!d.is_zero(), r == n);
            if n <= 4 {
                assert_eq!(d, det_by_permutations(&f, &a).unwrap());
            }
        }
    }

    #[test]
    fn inverse_round_trip() {
        let f = PrimeField::default();
        let mut rng = FieldRng::new(8);
        let a = random_matrix(&f, &mut rng, 8, 8);
        let inv = inverse_oracle(&f, &a).unwrap().unwrap();
        assert_eq!(a.mul(&f, &inv).unwrap(), DenseMatrix::identity(8));
        let f7 = f7();
        let sing = DenseMatrix::from_rows(&f7, &[vec![1, 2], vec![2, 4]]);
        assert!(inverse_oracle(&f7, &sing).unwrap().is_none());
    }

    #[test]
    fn pivot_columns_are_leftmost() {
        let f = f7();
        let m = DenseMatrix::from_rows(&f, &[vec![0, 1, 2, 0], vec![0, 2, 4, 1]]);
        assert_eq!(pivot_columns(&f, &m), vec![1, 3]);
    }

    #[test]
    fn sparse_vec_normalizes() {
        let f = f7();
        let v = SparseVec::from_pairs(&f, [(3, f.elem(2)), (1, f.elem(1)), (3, f.elem(5))]);
        assert_eq!(v.entries(), &[(1, f.elem(1))]);
        assert_eq!(SparseVec::from_dense(&v.to_dense(4)), v);
    }
}
