//! Maximum full-rank submatrix under entry updates.
//!
//! The matrix `A` sits in the top-left block of `H = [[A, X], [Y, B]]` where
//! `B` is the gadget matrix. With every switch slot attached to leaves,
//! `det H` is `det A_{I,J}` times a nonzero monomial, so `H` is nonsingular
//! exactly when the chosen minor is. A slot attached to interval labels turns
//! `det H` into a polynomial summing over all extensions inside the
//! intervals, which the binary search narrows down with singularity probes.

use crate::dyninv::{DynInv, EntryDelta, Outcome};
use crate::error::{check_index, Error, Result};
use crate::gadget::{assemble_h, Gadget, Label, Slot};
use crate::gf::{FieldElement, FieldRng, PrimeField};
use crate::linalg::{pivot_columns, DenseMatrix};
use crate::sketch::ceil_log2;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SearchStats {
    pub searches: u64,
    pub probes: u64,
    pub max_probes: u32,
    pub last_probes: u32,
    pub resamples: u64,
}

enum Search {
    Found(usize, usize),
    Exhausted,
    Failed,
}

#[derive(Clone, Debug)]
pub struct SubmatrixState {
    field: PrimeField,
    a: DenseMatrix,
    gadget: Gadget,
    x: Vec<FieldElement>,
    y: Vec<FieldElement>,
    det: DynInv,
    rng: FieldRng,
    stats: SearchStats,
}

impl SubmatrixState {
    /// Greedy maximum minor of `A`: leftmost independent columns, then
    /// topmost independent rows among them.
    pub fn new(field: PrimeField, a: DenseMatrix, mut rng: FieldRng) -> Result<Self> {
        if !a.is_square() || a.rows() == 0 {
            return Err(crate::linalg::LinalgError::NotSquare {
                rows: a.rows(),
                cols: a.cols(),
            }
            .into());
        }
        let n = a.rows();
        let cols = pivot_columns(&field, &a);
        let all: Vec<usize> = (0..n).collect();
        let rows = pivot_columns(&field, &a.submatrix(&all, &cols)?.transpose());
        let la: Vec<Label> = cols.iter().map(|&j| Label::leaf(j)).collect();
        let lb: Vec<Label> = rows.iter().map(|&i| Label::leaf(i)).collect();
        let gadget = Gadget::with_assignment(n, &la, &lb)?;
        let (x, y) = Self::sample_xy(&field, &mut rng, n);
        let det = DynInv::new(field, assemble_h(&a, &gadget.matrix(), &x, &y)?)?;
        Ok(SubmatrixState {
            field,
            a,
            gadget,
            x,
            y,
            det,
            rng,
            stats: SearchStats::default(),
        })
    }

    pub fn zeros(field: PrimeField, n: usize, rng: FieldRng) -> Result<Self> {
        Self::new(field, DenseMatrix::zeros(n, n), rng)
    }

    fn sample_xy(
        field: &PrimeField,
        rng: &mut FieldRng,
        n: usize,
    ) -> (Vec<FieldElement>, Vec<FieldElement>) {
        let x = (0..n).map(|_| field.sample_nonzero(rng)).collect();
        let y = (0..n).map(|_| field.sample_nonzero(rng)).collect();
        (x, y)
    }

    pub fn n(&self) -> usize {
        self.a.rows()
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.a
    }

    pub fn gadget(&self) -> &Gadget {
        &self.gadget
    }

    pub fn stats(&self) -> SearchStats {
        self.stats
    }

    pub fn detector_mults(&self) -> u64 {
        self.det.mults()
    }

    /// Matched `(row, column)` pairs, one per attached slot.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        self.gadget
            .slots()
            .iter()
            .filter_map(|s| match *s {
                Slot::Attached { a, b } => Some((b.lo, a.lo)),
                Slot::Paired => None,
            })
            .collect()
    }

    /// `I`, sorted.
    pub fn rows(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.pairs().into_iter().map(|p| p.0).collect();
        v.sort_unstable();
        v
    }

    /// `J`, sorted.
    pub fn cols(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.pairs().into_iter().map(|p| p.1).collect();
        v.sort_unstable();
        v
    }

    pub fn rank(&self) -> usize {
        self.pairs().len()
    }

    /// Runs a gadget edit and keeps it only if `H` stays nonsingular.
    fn try_edit(
        &mut self,
        edit: impl FnOnce(&mut Gadget, &PrimeField) -> Result<Vec<EntryDelta>>,
    ) -> Result<bool> {
        let saved = self.gadget.slots().to_vec();
        let n = self.n();
        let deltas: Vec<EntryDelta> = edit(&mut self.gadget, &self.field)?
            .into_iter()
            .map(|(i, j, d)| (n + i, n + j, d))
            .collect();
        match self.det.try_batch(&deltas)? {
            Outcome::Applied => Ok(true),
            Outcome::WouldBeSingular => {
                self.gadget.set_slots(saved);
                Ok(false)
            }
        }
    }

    fn rebuild(&mut self) -> Result<()> {
        let n = self.n();
        let (x, y) = Self::sample_xy(&self.field, &mut self.rng, n);
        self.x = x;
        self.y = y;
        let h = assemble_h(&self.a, &self.gadget.matrix(), &self.x, &self.y)?;
        self.det = DynInv::new(self.field, h)?;
        self.stats.resamples += 1;
        Ok(())
    }

    fn search_once(&mut self, s: usize) -> Result<Search> {
        let root = self.gadget.tree().root();
        let mut probes = 1u32;
        let attached = self.try_edit(|g, f| g.attach(f, s, root, root))?;
        let finish = |st: &mut Self, probes: u32| {
            st.stats.searches += 1;
            st.stats.probes += probes as u64;
            st.stats.last_probes = probes;
            st.stats.max_probes = st.stats.max_probes.max(probes);
        };
        if !attached {
            finish(self, probes);
            return Ok(Search::Exhausted);
        }
        let mut found = [0usize; 2];
        // rows of A (the v side) first, then columns (the u side)
        for (side, out) in found.iter_mut().enumerate() {
            let mut cur = root;
            let mut physical = root;
            while !cur.is_leaf() {
                let lower = cur.left();
                probes += 1;
                let ok = self.try_edit(|g, f| relink(g, f, side, s, lower))?;
                if ok {
                    physical = lower;
                    cur = lower;
                } else {
                    cur = cur.right();
                }
            }
            if physical != cur && !self.try_edit(|g, f| relink(g, f, side, s, cur))? {
                finish(self, probes);
                return Ok(Search::Failed);
            }
            *out = cur.lo;
        }
        finish(self, probes);
        Ok(Search::Found(found[0], found[1]))
    }

    /// Finds `(i', j')` extending the current minor, or certifies that it
    /// is maximum.
    pub fn augment_search(&mut self) -> Result<Option<(usize, usize)>> {
        let Some(s) = self.gadget.first_paired() else {
            return Ok(None);
        };
        for _ in 0..2 {
            match self.search_once(s)? {
                Search::Found(i, j) => return Ok(Some((i, j))),
                Search::Exhausted => return Ok(None),
                Search::Failed => {
                    let mut slots = self.gadget.slots().to_vec();
                    slots[s] = Slot::Paired;
                    self.gadget.set_slots(slots);
                    self.rebuild()?;
                }
            }
        }
        Err(Error::ProbabilisticFailure(
            "submatrix search could not reach a leaf",
        ))
    }

    /// Sets `A[i][j] = value` and restores a maximum minor.
    pub fn entry_update(&mut self, i: usize, j: usize, value: FieldElement) -> Result<()> {
        let n = self.n();
        check_index(i, n)?;
        check_index(j, n)?;
        let delta = self.field.sub(value, self.a.get(i, j));
        if delta.is_zero() {
            return Ok(());
        }
        if self.det.try_batch(&[(i, j, delta)])? == Outcome::WouldBeSingular {
            self.drop_row_col(i, j)?;
            if self.det.try_batch(&[(i, j, delta)])? == Outcome::WouldBeSingular {
                return Err(Error::ProbabilisticFailure(
                    "update still singular after shrinking",
                ));
            }
        }
        self.a.set(i, j, value);
        for _ in 0..2 {
            self.augment_search()?;
        }
        self.det.clear_log();
        Ok(())
    }

    /// Removes row `i` from `I` and column `j` from `J` in one batch.
    fn drop_row_col(&mut self, i: usize, j: usize) -> Result<()> {
        let slots = self.gadget.slots();
        let find = |pred: &dyn Fn(Label, Label) -> bool| {
            slots
                .iter()
                .position(|s| matches!(*s, Slot::Attached { a, b } if pred(a, b)))
        };
        let (Some(si), Some(sj)) = (find(&|_, b| b.lo == i), find(&|a, _| a.lo == j)) else {
            return Err(Error::ProbabilisticFailure(
                "singular update outside the tracked minor",
            ));
        };
        let ok = self.try_edit(|g, f| {
            if si == sj {
                return g.detach(f, si);
            }
            let Slot::Attached { b: moved, .. } = g.slot(sj) else {
                unreachable!()
            };
            let mut d = g.relink_b(f, si, moved)?;
            d.extend(g.detach(f, sj)?);
            Ok(d)
        })?;
        if ok {
            Ok(())
        } else {
            Err(Error::ProbabilisticFailure("shrunken minor is singular"))
        }
    }

    /// Compares `H` with a fresh assembly and its inverse. Intended for tests.
    pub fn check_detector(&self) -> bool {
        let h = assemble_h(&self.a, &self.gadget.matrix(), &self.x, &self.y).expect("square");
        &h == self.det.matrix() && self.det.check_inverse()
    }
}

fn relink(
    g: &mut Gadget,
    f: &PrimeField,
    side: usize,
    s: usize,
    to: Label,
) -> Result<Vec<EntryDelta>> {
    if side == 0 {
        g.relink_b(f, s, to)
    } else {
        g.relink_a(f, s, to)
    }
}

/// Probe budget of one search.
pub fn probe_budget(n: usize) -> u32 {
    2 * ceil_log2(n) + 1
}
