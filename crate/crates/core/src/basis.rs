//! Column basis under column updates.
//!
//! The basis columns live in a rank structure with one spare column. To find
//! the leftmost column of `A` outside their span, the spare is loaded with
//! `A v^{(l,k)}`, where `v^{(l,k)}` is a random vector restricted to the
//! dyadic block `k` of size `2^l`, and the search descends into the left
//! child whenever that child's product raises the rank. The products for
//! every block are kept current, each column update touching one block per
//! level.

use crate::dynrank::{DynRank, RankStructure};
use crate::error::{check_index, Error, Result};
use crate::gf::{FieldElement, FieldRng, PrimeField};
use crate::linalg::{pivot_columns, DenseMatrix, SparseVec};
use crate::rankred::UnboundedRank;
use crate::sketch::ceil_log2;

/// `A v^{(l,k)}` for every level `l` and block `k`.
#[derive(Clone, Debug)]
pub struct DyadicProducts {
    field: PrimeField,
    v: Vec<FieldElement>,
    // products[l][k], each of length rows
    products: Vec<Vec<Vec<FieldElement>>>,
}

impl DyadicProducts {
    pub fn new(field: PrimeField, a: &DenseMatrix, rng: &mut FieldRng) -> Self {
        let v = (0..a.cols()).map(|_| field.sample_nonzero(rng)).collect();
        Self::with_vector(field, a, v)
    }

    pub fn with_vector(field: PrimeField, a: &DenseMatrix, v: Vec<FieldElement>) -> Self {
        let n = a.cols();
        let levels = ceil_log2(n.max(1)) as usize + 1;
        // level 0 directly, then sums up the ladder
        let mut products = Vec::with_capacity(levels);
        let base: Vec<Vec<FieldElement>> = (0..n)
            .map(|c| {
                (0..a.rows())
                    .map(|r| field.mul(a.get(r, c), v[c]))
                    .collect()
            })
            .collect();
        products.push(base);
        for l in 1..levels {
            let prev: &Vec<Vec<FieldElement>> = &products[l - 1];
            let next = prev
                .chunks(2)
                .map(|pair| {
                    let mut s = pair[0].clone();
                    if let Some(b) = pair.get(1) {
                        for (x, &y) in s.iter_mut().zip(b) {
                            *x = field.add(*x, y);
                        }
                    }
                    s
                })
                .collect();
            products.push(next);
        }
        DyadicProducts { field, v, products }
    }

    pub fn levels(&self) -> usize {
        self.products.len()
    }

    pub fn top(&self) -> usize {
        self.products.len() - 1
    }

    pub fn blocks(&self, level: usize) -> usize {
        self.products[level].len()
    }

    pub fn get(&self, level: usize, block: usize) -> &[FieldElement] {
        &self.products[level][block]
    }

    pub fn vector(&self) -> &[FieldElement] {
        &self.v
    }

    /// Accounts for `A <- A + u e_i^T`.
    pub fn column_update(&mut self, i: usize, u: &SparseVec) -> Result<()> {
        check_index(i, self.v.len())?;
        let f = self.field;
        let vi = self.v[i];
        for (l, level) in self.products.iter_mut().enumerate() {
            let p = &mut level[i >> l];
            for (r, x) in u.iter() {
                check_index(r, p.len())?;
                p[r] = f.mul_add(p[r], x, vi);
            }
        }
        Ok(())
    }

    /// Recomputes every product from `a`. Intended for tests.
    pub fn matches(&self, a: &DenseMatrix) -> bool {
        let fresh = Self::with_vector(self.field, a, self.v.clone());
        let n = a.cols();
        let direct_ok = (0..self.levels()).all(|l| {
            (0..self.blocks(l)).all(|k| {
                let lo = k << l;
                let hi = ((k + 1) << l).min(n);
                let w: Vec<FieldElement> = (0..n)
                    .map(|c| {
                        if (lo..hi).contains(&c) {
                            self.v[c]
                        } else {
                            FieldElement::ZERO
                        }
                    })
                    .collect();
                a.mul_vec(&self.field, &w) == self.products[l][k]
            })
        });
        direct_ok && fresh.products == self.products
    }
}

enum Probe {
    Found(usize),
    Spanned,
    Inconsistent,
}

#[derive(Clone, Debug)]
pub struct BasisMaintainer<R> {
    field: PrimeField,
    a: DenseMatrix,
    dyadic: DyadicProducts,
    rank: R,
    // (column of A, slot in the rank structure)
    basis: Vec<(usize, usize)>,
    free: Vec<usize>,
    spare: Vec<FieldElement>,
    rng: FieldRng,
    last_probes: u32,
    max_probes: u32,
    resamples: u64,
}

pub type PlainBasis = BasisMaintainer<DynRank>;
pub type LowRankBasis = BasisMaintainer<UnboundedRank>;

impl PlainBasis {
    pub fn plain(field: PrimeField, a: DenseMatrix, rng: FieldRng) -> Result<Self> {
        Self::build(field, a, rng, |f, b, _| Ok(DynRank::new(f, b)))
    }
}

impl LowRankBasis {
    /// Basis columns kept in the sketched unbounded-rank structure.
    pub fn low_rank(field: PrimeField, a: DenseMatrix, rng: FieldRng) -> Result<Self> {
        Self::build(field, a, rng, UnboundedRank::new)
    }
}

impl<R: RankStructure> BasisMaintainer<R> {
    fn build(
        field: PrimeField,
        a: DenseMatrix,
        mut rng: FieldRng,
        make: impl FnOnce(PrimeField, &DenseMatrix, &mut FieldRng) -> Result<R>,
    ) -> Result<Self> {
        let n = a.cols();
        let dyadic = DyadicProducts::new(field, &a, &mut rng);
        let cols = pivot_columns(&field, &a);
        // slots 0..n for basis columns, slot n is the spare
        let mut b = DenseMatrix::zeros(a.rows(), n + 1);
        for (slot, &c) in cols.iter().enumerate() {
            for r in 0..a.rows() {
                b.set(r, slot, a.get(r, c));
            }
        }
        let rank = make(field, &b, &mut rng.fork())?;
        Ok(BasisMaintainer {
            field,
            spare: vec![FieldElement::ZERO; a.rows()],
            basis: cols.iter().enumerate().map(|(s, &c)| (c, s)).collect(),
            free: (cols.len()..n).rev().collect(),
            a,
            dyadic,
            rank,
            rng,
            last_probes: 0,
            max_probes: 0,
            resamples: 0,
        })
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.a
    }

    pub fn dyadic(&self) -> &DyadicProducts {
        &self.dyadic
    }

    pub fn rank_structure(&self) -> &R {
        &self.rank
    }

    /// Sorted basis column indices.
    pub fn basis(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.basis.iter().map(|b| b.0).collect();
        v.sort_unstable();
        v
    }

    pub fn last_probes(&self) -> u32 {
        self.last_probes
    }

    pub fn max_probes(&self) -> u32 {
        self.max_probes
    }

    pub fn resamples(&self) -> u64 {
        self.resamples
    }

    fn column(&self, c: usize) -> SparseVec {
        SparseVec::from_dense(&self.a.column(c))
    }

    /// Loads `target` into the spare slot and reports whether it is outside
    /// the span of the basis columns.
    fn load_spare(&mut self, target: Vec<FieldElement>) -> Result<bool> {
        let f = self.field;
        let diff: Vec<FieldElement> = target
            .iter()
            .zip(&self.spare)
            .map(|(&t, &s)| f.sub(t, s))
            .collect();
        let diff = SparseVec::from_dense(&diff);
        if !diff.is_empty() {
            self.rank.column_update(self.a.cols(), &diff)?;
        }
        self.spare = target;
        Ok(self.rank.rank() > self.basis.len())
    }

    fn search(&mut self) -> Result<(Probe, u32)> {
        let top = self.dyadic.top();
        let mut probes = 1;
        if !self.load_spare(self.dyadic.get(top, 0).to_vec())? {
            return Ok((Probe::Spanned, probes));
        }
        let mut k = 0;
        for l in (0..top).rev() {
            let left = 2 * k;
            probes += 1;
            if self.load_spare(self.dyadic.get(l, left).to_vec())? {
                k = left;
                continue;
            }
            if left + 1 >= self.dyadic.blocks(l) {
                return Ok((Probe::Inconsistent, probes));
            }
            probes += 1;
            if !self.load_spare(self.dyadic.get(l, left + 1).to_vec())? {
                return Ok((Probe::Inconsistent, probes));
            }
            k = left + 1;
        }
        Ok((Probe::Found(k), probes))
    }

    /// The leftmost column of `A` outside the span of the basis.
    pub fn find_independent_column(&mut self) -> Result<Option<usize>> {
        if self.a.cols() == 0 {
            return Ok(None);
        }
        for attempt in 0..2 {
            let (outcome, probes) = self.search()?;
            self.load_spare(vec![FieldElement::ZERO; self.a.rows()])?;
            self.last_probes = probes;
            self.max_probes = self.max_probes.max(probes);
            match outcome {
                Probe::Found(c) => return Ok(Some(c)),
                Probe::Spanned => return Ok(None),
                Probe::Inconsistent if attempt == 0 => {
                    self.dyadic = DyadicProducts::new(self.field, &self.a, &mut self.rng);
                    self.resamples += 1;
                }
                Probe::Inconsistent => {}
            }
        }
        Err(Error::ProbabilisticFailure(
            "dyadic search found no independent column",
        ))
    }

    fn append(&mut self, c: usize) -> Result<()> {
        let slot = self.free.pop().expect("a free slot while rank < cols");
        let col = self.column(c);
        let before = self.basis.len();
        if self.rank.column_update(slot, &col)? != before + 1 {
            self.rank.column_update(slot, &col.neg(&self.field))?;
            self.free.push(slot);
            return Err(Error::ProbabilisticFailure(
                "appended column did not raise the rank",
            ));
        }
        self.basis.push((c, slot));
        Ok(())
    }

    /// `A <- A + u e_i^T`; returns the sorted basis.
    pub fn column_update(&mut self, i: usize, u: &SparseVec) -> Result<Vec<usize>> {
        check_index(i, self.a.cols())?;
        if let Some(r) = u.max_index() {
            check_index(r, self.a.rows())?;
        }
        if u.is_empty() {
            return Ok(self.basis());
        }
        self.dyadic.column_update(i, u)?;
        for (r, x) in u.iter() {
            let cur = self.a.get(r, i);
            self.a.set(r, i, self.field.add(cur, x));
        }
        if let Some(pos) = self.basis.iter().position(|b| b.0 == i) {
            let slot = self.basis[pos].1;
            let r = self.rank.column_update(slot, u)?;
            if r < self.basis.len() {
                let col = self.column(i);
                self.rank.column_update(slot, &col.neg(&self.field))?;
                self.basis.swap_remove(pos);
                self.free.push(slot);
            }
        }
        if let Some(c) = self.find_independent_column()? {
            self.append(c)?;
        }
        Ok(self.basis())
    }

    /// Replaces column `i` with `values`.
    pub fn set_column(&mut self, i: usize, values: &[FieldElement]) -> Result<Vec<usize>> {
        check_index(i, self.a.cols())?;
        let f = self.field;
        let diff: Vec<FieldElement> = values
            .iter()
            .zip(self.a.column(i))
            .map(|(&v, c)| f.sub(v, c))
            .collect();
        self.column_update(i, &SparseVec::from_dense(&diff))
    }
}

/// Probe budget of one search over `n` columns.
pub fn probe_budget(n: usize) -> u32 {
    2 * ceil_log2(n.max(1)) + 1
}
