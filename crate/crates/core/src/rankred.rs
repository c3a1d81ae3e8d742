//! Rank maintenance whose cost scales with the rank instead of the dimension.
//!
//! [`BoundedRank`] keeps `M^T A N` for several independent sketch pairs and,
//! when active, an exact [`DynRank`] on each product; it reports
//! `min(k, rank(A))`. [`UnboundedRank`] stacks bounded structures for
//! `k = 2^i` and keeps only the few levels near the current rank active.
//!
//! Sketch widths are capped at the matrix dimension: once `C_R * k` reaches
//! `n` a wider sketch cannot preserve more rank, it only costs more.

use std::collections::VecDeque;

use crate::dynrank::{DynRank, RankStructure};
use crate::error::{check_index, Error, Result};
use crate::gf::{FieldElement, FieldRng, PrimeField};
use crate::linalg::{DenseMatrix, SparseVec};
use crate::sketch::{boost_copies, ceil_log2, propagate_column_update, SketchMatrix, C_R, K0};

#[derive(Clone, Debug)]
struct Copy {
    m: SketchMatrix,
    n: SketchMatrix,
    product: DenseMatrix,
    inner: Option<DynRank>,
}

type Deltas = Vec<(usize, SparseVec)>;

#[derive(Clone, Debug)]
struct Pending {
    snapshots: Vec<DenseMatrix>,
    next_col: usize,
    cols_per_step: usize,
    // one entry per outer update, holding each copy's product deltas
    queue: VecDeque<Vec<Deltas>>,
}

#[derive(Clone, Debug)]
enum Phase {
    Inactive,
    Pending(Box<Pending>),
    Active,
}

/// Rank up to a cap `k`, computed on sketched `O(k) x O(k)` products.
#[derive(Clone, Debug)]
pub struct BoundedRank {
    field: PrimeField,
    rows: usize,
    cols: usize,
    k: usize,
    copies: Vec<Copy>,
    phase: Phase,
    propagation_mults: u64,
    retired_inner_mults: u64,
}

fn sketch_width(k: usize, dim: usize) -> usize {
    (C_R * k).min(dim.max(2))
}

impl BoundedRank {
    /// Inactive structure with `copies` independent sketch pairs.
    pub fn new(
        field: PrimeField,
        a: &DenseMatrix,
        k: usize,
        copies: usize,
        rng: &mut FieldRng,
    ) -> Result<Self> {
        if k == 0 {
            return Err(Error::KTooSmall);
        }
        let copies = (0..copies.max(1))
            .map(|_| {
                let m = SketchMatrix::build_width(&field, a.rows(), sketch_width(k, a.rows()), rng);
                let n = SketchMatrix::build_width(&field, a.cols(), sketch_width(k, a.cols()), rng);
                let product = n.apply_right(&field, &m.apply_left(&field, a)?)?;
                Ok(Copy {
                    m,
                    n,
                    product,
                    inner: None,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(BoundedRank {
            field,
            rows: a.rows(),
            cols: a.cols(),
            k,
            copies,
            phase: Phase::Inactive,
            propagation_mults: 0,
            retired_inner_mults: 0,
        })
    }

    /// Inactive structure with the default boost count.
    pub fn with_default_copies(
        field: PrimeField,
        a: &DenseMatrix,
        k: usize,
        rng: &mut FieldRng,
    ) -> Result<Self> {
        Self::new(field, a, k, boost_copies(a.rows().max(a.cols())), rng)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn copies(&self) -> usize {
        self.copies.len()
    }

    /// `M^T A N` of copy `c`.
    pub fn product(&self, c: usize) -> &DenseMatrix {
        &self.copies[c].product
    }

    pub fn sketches(&self, c: usize) -> (&SketchMatrix, &SketchMatrix) {
        (&self.copies[c].m, &self.copies[c].n)
    }

    pub fn is_active(&self) -> bool {
        !matches!(self.phase, Phase::Inactive)
    }

    /// Active and reflecting every update so far.
    pub fn is_live(&self) -> bool {
        matches!(self.phase, Phase::Active)
    }

    pub fn propagation_mults(&self) -> u64 {
        self.propagation_mults
    }

    pub fn inner_mults(&self) -> u64 {
        self.retired_inner_mults
            + self
                .copies
                .iter()
                .filter_map(|c| c.inner.as_ref())
                .map(|d| d.mults())
                .sum::<u64>()
    }

    fn readout(&self) -> usize {
        let best = self
            .copies
            .iter()
            .filter_map(|c| c.inner.as_ref())
            .map(|d| d.rank())
            .max()
            .unwrap_or(0);
        best.min(self.k)
    }

    pub fn activate(&mut self) -> Result<usize> {
        if self.is_active() {
            return Err(Error::AlreadyActive);
        }
        for c in &mut self.copies {
            c.inner = Some(DynRank::new(self.field, &c.product));
        }
        self.phase = Phase::Active;
        Ok(self.readout())
    }

    /// Starts an activation whose cost is spread over `steps` later updates;
    /// queued updates are then replayed two per update.
    pub fn begin_spread_activation(&mut self, steps: usize) -> Result<()> {
        if self.is_active() {
            return Err(Error::AlreadyActive);
        }
        let width = self.copies[0].product.cols();
        for c in &mut self.copies {
            let (r, w) = (c.product.rows(), c.product.cols());
            c.inner = Some(DynRank::zeros(self.field, r, w));
        }
        self.phase = Phase::Pending(Box::new(Pending {
            snapshots: self.copies.iter().map(|c| c.product.clone()).collect(),
            next_col: 0,
            cols_per_step: width.div_ceil(steps.max(1)),
            queue: VecDeque::new(),
        }));
        Ok(())
    }

    /// Completes a pending activation immediately.
    pub fn force_live(&mut self) {
        self.advance(true);
    }

    /// One step of a pending activation: insert the next snapshot columns,
    /// or once all are in, replay two queued updates. `full` runs to the end.
    fn advance(&mut self, full: bool) {
        let Phase::Pending(pending) = &mut self.phase else {
            return;
        };
        let width = pending.snapshots[0].cols();
        if pending.next_col < width {
            let end = if full {
                width
            } else {
                (pending.next_col + pending.cols_per_step).min(width)
            };
            for (c, snap) in self.copies.iter_mut().zip(&pending.snapshots) {
                let inner = c
                    .inner
                    .as_mut()
                    .expect("pending copies carry an inner structure");
                for col in pending.next_col..end {
                    let v = SparseVec::from_dense(&snap.column(col));
                    inner
                        .column_update(col, &v)
                        .expect("snapshot column in range");
                }
            }
            pending.next_col = end;
            if !full {
                return;
            }
        }
        let drain = if full { usize::MAX } else { 2 };
        for _ in 0..drain {
            let Some(group) = pending.queue.pop_front() else {
                break;
            };
            for (c, deltas) in self.copies.iter_mut().zip(group) {
                let inner = c
                    .inner
                    .as_mut()
                    .expect("pending copies carry an inner structure");
                for (col, d) in deltas {
                    inner.column_update(col, &d).expect("delta column in range");
                }
            }
        }
        if pending.queue.is_empty() {
            self.phase = Phase::Active;
        }
    }

    pub fn deactivate(&mut self) -> Result<usize> {
        if !self.is_active() {
            return Err(Error::AlreadyInactive);
        }
        self.force_live();
        let r = self.readout();
        for c in &mut self.copies {
            if let Some(d) = c.inner.take() {
                self.retired_inner_mults += d.mults();
            }
        }
        self.phase = Phase::Inactive;
        Ok(r)
    }

    /// `A <- A + v e_col^T`. Returns `min(k, rank(A))` when live.
    pub fn update(&mut self, col: usize, v: &SparseVec) -> Result<Option<usize>> {
        check_index(col, self.cols)?;
        if let Some(i) = v.max_index() {
            check_index(i, self.rows)?;
        }
        let f = self.field;
        let mut group = Vec::with_capacity(self.copies.len());
        for c in &mut self.copies {
            let deltas = propagate_column_update(&f, &c.m, &c.n, col, v)?;
            self.propagation_mults += 2 * v.nnz() as u64;
            for (pc, d) in &deltas {
                self.propagation_mults += d.nnz() as u64;
                for (t, x) in d.iter() {
                    let cur = c.product.get(t, *pc);
                    c.product.set(t, *pc, f.add(cur, x));
                }
            }
            match &self.phase {
                Phase::Active => {
                    let inner = c
                        .inner
                        .as_mut()
                        .expect("active copies carry an inner structure");
                    for (pc, d) in &deltas {
                        inner.column_update(*pc, d)?;
                    }
                }
                Phase::Pending(_) => group.push(deltas),
                Phase::Inactive => {}
            }
        }
        match &mut self.phase {
            Phase::Active => Ok(Some(self.readout())),
            Phase::Pending(p) => {
                p.queue.push_back(group);
                self.advance(false);
                Ok(self.is_live().then(|| self.readout()))
            }
            Phase::Inactive => Ok(None),
        }
    }

    /// `min(k, rank(A))` if live.
    pub fn rank(&self) -> Option<usize> {
        self.is_live().then(|| self.readout())
    }
}

/// Exact rank with cost governed by the current rank.
#[derive(Clone, Debug)]
pub struct UnboundedRank {
    field: PrimeField,
    a: DenseMatrix,
    lo: u32,
    levels: Vec<BoundedRank>,
    j: u32,
    rank: usize,
    spread: bool,
    activations: u64,
}

impl UnboundedRank {
    pub fn new(field: PrimeField, a: &DenseMatrix, rng: &mut FieldRng) -> Result<Self> {
        Self::build(field, a, None, rng)
    }

    /// As [`UnboundedRank::new`] with an explicit number of copies per level.
    pub fn with_copies(
        field: PrimeField,
        a: &DenseMatrix,
        copies: usize,
        rng: &mut FieldRng,
    ) -> Result<Self> {
        Self::build(field, a, Some(copies), rng)
    }

    fn build(
        field: PrimeField,
        a: &DenseMatrix,
        copies: Option<usize>,
        rng: &mut FieldRng,
    ) -> Result<Self> {
        let lo = ceil_log2(K0);
        let hi = lo.max(ceil_log2(a.rows().min(a.cols())));
        let copies = copies.unwrap_or_else(|| boost_copies(a.rows().max(a.cols())));
        let levels = (lo..=hi)
            .map(|i| BoundedRank::new(field, a, 1 << i, copies, &mut rng.fork()))
            .collect::<Result<Vec<_>>>()?;
        let mut s = UnboundedRank {
            field,
            a: a.clone(),
            lo,
            levels,
            j: lo,
            rank: 0,
            spread: false,
            activations: 0,
        };
        // activate levels upward until the reported rank stops hitting the cap
        let mut rank = 0;
        for idx in 0..s.levels.len() {
            rank = s.levels[idx].activate()?;
            s.activations += 1;
            if rank < s.levels[idx].k() {
                break;
            }
        }
        s.rank = rank;
        s.j = lo.max(ceil_log2(rank));
        s.sync_window();
        Ok(s)
    }

    /// Spread each activation over `max(1, 2^i / 8)` updates.
    pub fn set_worst_case_spread(&mut self, on: bool) {
        self.spread = on;
    }

    pub fn level(&self) -> u32 {
        self.j
    }

    pub fn level_range(&self) -> (u32, u32) {
        (self.lo, self.lo + self.levels.len() as u32 - 1)
    }

    /// Exponents of the levels that are currently active (live or pending).
    pub fn active_levels(&self) -> Vec<u32> {
        (0..self.levels.len())
            .filter(|&x| self.levels[x].is_active())
            .map(|x| self.lo + x as u32)
            .collect()
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.a
    }

    pub fn activations(&self) -> u64 {
        self.activations
    }

    pub fn propagation_mults(&self) -> u64 {
        self.levels.iter().map(BoundedRank::propagation_mults).sum()
    }

    pub fn inner_mults(&self) -> u64 {
        self.levels.iter().map(BoundedRank::inner_mults).sum()
    }

    fn idx(&self, i: u32) -> usize {
        (i - self.lo) as usize
    }

    fn window(&self) -> (u32, u32) {
        let (lo, hi) = self.level_range();
        (self.j.saturating_sub(2).max(lo), (self.j + 1).min(hi))
    }

    fn sync_window(&mut self) {
        let (wlo, whi) = self.window();
        for x in 0..self.levels.len() {
            let i = self.lo + x as u32;
            let inside = (wlo..=whi).contains(&i);
            let level = &mut self.levels[x];
            if inside && !level.is_active() {
                self.activations += 1;
                if self.spread {
                    let steps = ((1usize << i) / 8).max(1);
                    level
                        .begin_spread_activation(steps)
                        .expect("level was inactive");
                } else {
                    level.activate().expect("level was inactive");
                }
            } else if !inside && level.is_active() {
                level.deactivate().expect("level was active");
            }
        }
    }

    fn read(&mut self, i: u32) -> usize {
        let x = self.idx(i);
        self.levels[x].force_live();
        self.levels[x].rank().expect("level is live")
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// `A[i][j] <- value`.
    pub fn entry_update(&mut self, i: usize, j: usize, value: FieldElement) -> Result<usize> {
        check_index(i, self.a.rows())?;
        check_index(j, self.a.cols())?;
        let delta = self.field.sub(value, self.a.get(i, j));
        self.column_update(j, &SparseVec::unit(i, delta))
    }

    /// Checks the level invariants against a known true rank.
    pub fn check_invariants(&self, true_rank: usize) -> bool {
        let (lo, hi) = self.level_range();
        let cap = 1usize << self.j;
        let level_ok = true_rank <= cap && (4 * true_rank >= cap || self.j == lo);
        let active = self.active_levels();
        let needed_ok = (lo..=hi)
            .filter(|&i| 2 * true_rank >= (1 << i) && true_rank <= (1 << i))
            .all(|i| active.contains(&i));
        let idle_ok = active.iter().all(|&i| i + 2 >= self.j && i <= self.j + 1);
        level_ok && needed_ok && idle_ok && self.rank == true_rank
    }
}

impl RankStructure for UnboundedRank {
    fn rows(&self) -> usize {
        self.a.rows()
    }

    fn cols(&self) -> usize {
        self.a.cols()
    }

    fn rank(&self) -> usize {
        self.rank
    }

    fn column_update(&mut self, col: usize, v: &SparseVec) -> Result<usize> {
        check_index(col, self.a.cols())?;
        if let Some(i) = v.max_index() {
            check_index(i, self.a.rows())?;
        }
        for (i, x) in v.iter() {
            let cur = self.a.get(i, col);
            self.a.set(i, col, self.field.add(cur, x));
        }
        for level in &mut self.levels {
            level.update(col, v)?;
        }
        let (lo, hi) = self.level_range();
        let mut r = self.read(self.j);
        while r == 1 << self.j && self.j < hi {
            self.j += 1;
            self.sync_window();
            r = self.read(self.j);
        }
        if 4 * r < 1 << self.j && self.j > lo {
            self.j = self.j.saturating_sub(2).max(lo);
            self.sync_window();
            r = self.read(self.j);
        }
        self.rank = r;
        Ok(r)
    }

    fn mults(&self) -> u64 {
        self.propagation_mults() + self.inner_mults()
    }
}
