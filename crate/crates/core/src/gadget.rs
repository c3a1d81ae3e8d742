//! The binary-search gadget.
//!
//! `T_{l,r}` is a rooted tree whose root is labeled with the interval
//! `[l, r]`; for `l < r` the root has an unlabeled child whose two children
//! are the roots of `T_{l,m}` and `T_{m+1,r}` with `m = floor((l + r) / 2)`.
//! The gadget graph consists of two copies `T` and `T'`, plus switch
//! vertices `u_s`, `v_s` for slots `s < n`. A slot is either paired (edge
//! `u_s v_s`) or attached (`u_s` to a labeled vertex of `T`, `v_s` to a
//! labeled vertex of `T'`).
//!
//! Biadjacency layout of the `(4n - 2) x (4n - 2)` matrix `B`, 0-based:
//!
//! | range            | rows (left side)              | columns (right side)          |
//! |------------------|-------------------------------|-------------------------------|
//! | `0..n`           | leaves of `T`                 | leaves of `T'`                |
//! | `n..2n-1`        | internal labeled of `T`       | internal labeled of `T'`      |
//! | `2n-1..3n-2`     | unlabeled of `T'`             | unlabeled of `T`              |
//! | `3n-2..4n-2`     | `v_0 .. v_{n-1}`              | `u_0 .. u_{n-1}`              |
//!
//! Internal vertices are numbered in breadth-first order and each unlabeled
//! vertex shares the number of its labeled parent.
//!
//! In the block matrix `H = [[A, X], [Y, B]]` row `i` of `A` meets column `i`
//! of `B` through `x_i` and column `j` of `A` meets row `j` of `B` through
//! `y_j`. Deleting rows `S` and columns `T` of `A` pairs with deleting rows
//! `T` and columns `S` of `B`, so the `u` switches (rows of `B`'s tree `T`)
//! select columns of `A` and the `v` switches select rows of `A`.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::dyninv::EntryDelta;
use crate::error::{check_index, Error, Result};
use crate::gf::{FieldElement, PrimeField};
use crate::linalg::{DenseMatrix, LinalgError};

/// A tree label: the interval `[lo, hi]` of leaf indices, 0-based inclusive.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Label {
    pub lo: usize,
    pub hi: usize,
}

impl Label {
    pub fn new(lo: usize, hi: usize) -> Self {
        Label { lo, hi }
    }

    pub fn leaf(i: usize) -> Self {
        Label { lo: i, hi: i }
    }

    pub fn is_leaf(self) -> bool {
        self.lo == self.hi
    }

    /// Split point shared by the tree and the binary search.
    pub fn mid(self) -> usize {
        (self.lo + self.hi) / 2
    }

    pub fn left(self) -> Label {
        Label::new(self.lo, self.mid())
    }

    pub fn right(self) -> Label {
        Label::new(self.mid() + 1, self.hi)
    }

    pub fn contains(self, i: usize) -> bool {
        (self.lo..=self.hi).contains(&i)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GadgetTree {
    n: usize,
    // internal (non-leaf) labels in breadth-first order
    internal: Vec<Label>,
    index: HashMap<Label, usize>,
}

impl GadgetTree {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "gadget tree needs at least one leaf");
        let mut internal = Vec::with_capacity(n - 1);
        let mut queue = std::collections::VecDeque::from([Label::new(0, n - 1)]);
        while let Some(l) = queue.pop_front() {
            if !l.is_leaf() {
                internal.push(l);
                queue.push_back(l.left());
                queue.push_back(l.right());
            }
        }
        let index = internal.iter().enumerate().map(|(k, &l)| (l, k)).collect();
        GadgetTree { n, internal, index }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn root(&self) -> Label {
        Label::new(0, self.n - 1)
    }

    /// Internal labels in breadth-first order; the `k`th also names the
    /// `k`th unlabeled vertex.
    pub fn internal(&self) -> &[Label] {
        &self.internal
    }

    /// All labels in breadth-first order.
    pub fn labels_bfs(&self) -> Vec<Label> {
        let mut out = Vec::with_capacity(2 * self.n - 1);
        let mut queue = std::collections::VecDeque::from([self.root()]);
        while let Some(l) = queue.pop_front() {
            out.push(l);
            if !l.is_leaf() {
                queue.push_back(l.left());
                queue.push_back(l.right());
            }
        }
        out
    }

    pub fn labeled_count(&self) -> usize {
        2 * self.n - 1
    }

    pub fn unlabeled_count(&self) -> usize {
        self.n - 1
    }

    pub fn contains(&self, l: Label) -> bool {
        (l.is_leaf() && l.lo < self.n) || self.index.contains_key(&l)
    }

    pub fn check(&self, l: Label) -> Result<()> {
        if self.contains(l) {
            Ok(())
        } else {
            Err(Error::BadLabel {
                lo: l.lo,
                hi: l.hi,
                n: self.n,
            })
        }
    }

    /// Position of a labeled vertex among the labeled side of `B`: leaves
    /// first, then internal labels.
    pub fn labeled_pos(&self, l: Label) -> usize {
        if l.is_leaf() {
            l.lo
        } else {
            self.n + self.index[&l]
        }
    }
}

/// Biadjacency of a single tree: unlabeled vertices as rows and labeled
/// vertices as columns, both in breadth-first order.
pub fn tree_biadjacency(t: &GadgetTree) -> DenseMatrix {
    let labels = t.labels_bfs();
    let col: HashMap<Label, usize> = labels.iter().enumerate().map(|(c, &l)| (l, c)).collect();
    let mut m = DenseMatrix::zeros(t.unlabeled_count(), labels.len());
    for (k, &l) in t.internal().iter().enumerate() {
        for x in [l, l.left(), l.right()] {
            m.set(k, col[&x], FieldElement::ONE);
        }
    }
    m
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Slot {
    Paired,
    /// `u_s` on label `a` of `T`, `v_s` on label `b` of `T'`.
    Attached {
        a: Label,
        b: Label,
    },
}

/// Switch assignment of the gadget; edits return the entry deltas of `B`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Gadget {
    tree: GadgetTree,
    slots: Vec<Slot>,
}

fn plus(i: usize, j: usize) -> EntryDelta {
    (i, j, FieldElement::ONE)
}

fn minus(field: &PrimeField, i: usize, j: usize) -> EntryDelta {
    (i, j, field.neg(FieldElement::ONE))
}

impl Gadget {
    pub fn new(n: usize) -> Self {
        Gadget {
            tree: GadgetTree::new(n),
            slots: vec![Slot::Paired; n],
        }
    }

    /// Gadget with slot `s < k` attached to `(a[s], b[s])` and the rest paired.
    pub fn with_assignment(n: usize, a: &[Label], b: &[Label]) -> Result<Self> {
        if a.len() != b.len() || a.len() > n {
            return Err(LinalgError::DimensionMismatch {
                expected: a.len().min(n),
                found: b.len(),
            }
            .into());
        }
        let mut g = Gadget::new(n);
        for (s, (&la, &lb)) in a.iter().zip(b).enumerate() {
            g.tree.check(la)?;
            g.tree.check(lb)?;
            g.slots[s] = Slot::Attached { a: la, b: lb };
        }
        Ok(g)
    }

    pub fn n(&self) -> usize {
        self.tree.n
    }

    pub fn dim(&self) -> usize {
        4 * self.tree.n - 2
    }

    pub fn tree(&self) -> &GadgetTree {
        &self.tree
    }

    pub fn slots(&self) -> &[Slot] {
        &self.slots
    }

    pub fn slot(&self, s: usize) -> Slot {
        self.slots[s]
    }

    pub(crate) fn set_slots(&mut self, slots: Vec<Slot>) {
        self.slots = slots;
    }

    pub fn first_paired(&self) -> Option<usize> {
        self.slots.iter().position(|s| *s == Slot::Paired)
    }

    /// Row of `B` holding labeled vertex `l` of `T`.
    pub fn t_row(&self, l: Label) -> usize {
        self.tree.labeled_pos(l)
    }

    /// Column of `B` holding labeled vertex `l` of `T'`.
    pub fn tp_col(&self, l: Label) -> usize {
        self.tree.labeled_pos(l)
    }

    pub fn v_row(&self, s: usize) -> usize {
        3 * self.tree.n - 2 + s
    }

    pub fn u_col(&self, s: usize) -> usize {
        3 * self.tree.n - 2 + s
    }

    pub fn matrix(&self) -> DenseMatrix {
        let n = self.tree.n;
        let mut b = DenseMatrix::zeros(self.dim(), self.dim());
        let one = FieldElement::ONE;
        for (k, &l) in self.tree.internal.iter().enumerate() {
            let unl = 2 * n - 1 + k;
            for x in [l, l.left(), l.right()] {
                // T: labeled rows, unlabeled columns
                b.set(self.t_row(x), unl, one);
                // T': unlabeled rows, labeled columns
                b.set(unl, self.tp_col(x), one);
            }
        }
        for (s, slot) in self.slots.iter().enumerate() {
            match *slot {
                Slot::Paired => b.set(self.v_row(s), self.u_col(s), one),
                Slot::Attached { a, b: lb } => {
                    b.set(self.t_row(a), self.u_col(s), one);
                    b.set(self.v_row(s), self.tp_col(lb), one);
                }
            }
        }
        b
    }

    /// Attaches paired slot `s`: removes `u_s v_s`, adds `u_s a` and `v_s b`.
    pub fn attach(
        &mut self,
        field: &PrimeField,
        s: usize,
        a: Label,
        b: Label,
    ) -> Result<Vec<EntryDelta>> {
        check_index(s, self.slots.len())?;
        self.tree.check(a)?;
        self.tree.check(b)?;
        assert_eq!(self.slots[s], Slot::Paired, "slot {s} is already attached");
        self.slots[s] = Slot::Attached { a, b };
        Ok(vec![
            minus(field, self.v_row(s), self.u_col(s)),
            plus(self.t_row(a), self.u_col(s)),
            plus(self.v_row(s), self.tp_col(b)),
        ])
    }

    /// Returns attached slot `s` to the paired state.
    pub fn detach(&mut self, field: &PrimeField, s: usize) -> Result<Vec<EntryDelta>> {
        check_index(s, self.slots.len())?;
        let Slot::Attached { a, b } = self.slots[s] else {
            return Ok(Vec::new());
        };
        self.slots[s] = Slot::Paired;
        Ok(vec![
            minus(field, self.t_row(a), self.u_col(s)),
            minus(field, self.v_row(s), self.tp_col(b)),
            plus(self.v_row(s), self.u_col(s)),
        ])
    }

    /// Moves `u_s` (the `T` side) to label `to`.
    pub fn relink_a(&mut self, field: &PrimeField, s: usize, to: Label) -> Result<Vec<EntryDelta>> {
        check_index(s, self.slots.len())?;
        self.tree.check(to)?;
        let Slot::Attached { a, b } = self.slots[s] else {
            panic!("slot {s} is paired");
        };
        if a == to {
            return Ok(Vec::new());
        }
        self.slots[s] = Slot::Attached { a: to, b };
        Ok(vec![
            minus(field, self.t_row(a), self.u_col(s)),
            plus(self.t_row(to), self.u_col(s)),
        ])
    }

    /// Moves `v_s` (the `T'` side) to label `to`.
    pub fn relink_b(&mut self, field: &PrimeField, s: usize, to: Label) -> Result<Vec<EntryDelta>> {
        check_index(s, self.slots.len())?;
        self.tree.check(to)?;
        let Slot::Attached { a, b } = self.slots[s] else {
            panic!("slot {s} is paired");
        };
        if b == to {
            return Ok(Vec::new());
        }
        self.slots[s] = Slot::Attached { a, b: to };
        Ok(vec![
            minus(field, self.v_row(s), self.tp_col(b)),
            plus(self.v_row(s), self.tp_col(to)),
        ])
    }

    /// Undoes edits by restoring a previous slot table; returns the deltas.
    pub fn restore(&mut self, field: &PrimeField, slots: &[Slot]) -> Vec<EntryDelta> {
        let mut out = Vec::new();
        for s in 0..self.slots.len() {
            if self.slots[s] == slots[s] {
                continue;
            }
            out.extend(self.detach(field, s).expect("slot in range"));
            if let Slot::Attached { a, b } = slots[s] {
                out.extend(self.attach(field, s, a, b).expect("labels were valid"));
            }
        }
        out
    }

    /// Graphviz rendering of the forest.
    pub fn to_dot(&self) -> String {
        let n = self.tree.n;
        let name = |l: Label| format!("\"{}..{}\"", l.lo + 1, l.hi + 1);
        let mut out = String::from("graph gadget {\n");
        for (side, prime) in [("T", ""), ("Tp", "'")] {
            let _ = writeln!(out, "  subgraph cluster_{side} {{\n    label=\"{side}\";");
            for l in self.tree.labels_bfs() {
                let _ = writeln!(
                    out,
                    "    {side}_{} [label={}{prime}];",
                    self.tree.labeled_pos(l),
                    name(l)
                );
            }
            for (k, &l) in self.tree.internal.iter().enumerate() {
                let _ = writeln!(out, "    {side}_w{k} [shape=point];");
                for x in [l, l.left(), l.right()] {
                    let _ = writeln!(
                        out,
                        "    {side}_{} -- {side}_w{k};",
                        self.tree.labeled_pos(x)
                    );
                }
            }
            out.push_str("  }\n");
        }
        for (s, slot) in self.slots.iter().enumerate() {
            let _ = writeln!(out, "  u{s} [shape=box]; v{s} [shape=box];");
            match *slot {
                Slot::Paired => {
                    let _ = writeln!(out, "  u{s} -- v{s};");
                }
                Slot::Attached { a, b } => {
                    let _ = writeln!(out, "  u{s} -- T_{};", self.tree.labeled_pos(a));
                    let _ = writeln!(out, "  v{s} -- Tp_{};", self.tree.labeled_pos(b));
                }
            }
        }
        let _ = n;
        out.push_str("}\n");
        out
    }
}

/// `B_n(a, b)` as a matrix.
pub fn build_b(n: usize, a: &[Label], b: &[Label]) -> Result<DenseMatrix> {
    Ok(Gadget::with_assignment(n, a, b)?.matrix())
}

/// `H = [[A, X], [Y, B]]` with `X[i][i] = x_i` and `Y[i][i] = y_i`.
pub fn assemble_h(
    a: &DenseMatrix,
    b: &DenseMatrix,
    x: &[FieldElement],
    y: &[FieldElement],
) -> Result<DenseMatrix> {
    let n = a.rows();
    if !a.is_square() || !b.is_square() || x.len() != n || y.len() != n || b.rows() < n {
        return Err(LinalgError::DimensionMismatch {
            expected: n,
            found: x.len().min(y.len()).min(b.rows()),
        }
        .into());
    }
    let m = b.rows();
    let mut h = DenseMatrix::zeros(n + m, n + m);
    for i in 0..n {
        h.row_mut(i)[..n].copy_from_slice(a.row(i));
        h.set(i, n + i, x[i]);
        h.set(n + i, i, y[i]);
    }
    for i in 0..m {
        h.row_mut(n + i)[n..].copy_from_slice(b.row(i));
    }
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf::FieldRng;
    use crate::linalg::det_oracle;

    fn f() -> PrimeField {
        PrimeField::new(101).unwrap()
    }

    #[test]
    fn tree_counts_and_base_case() {
        let t = GadgetTree::new(1);
        assert_eq!(t.labels_bfs(), vec![Label::leaf(0)]);
        let b = tree_biadjacency(&t);
        assert_eq!((b.rows(), b.cols()), (0, 1));
        for n in [2, 3, 5, 8, 13] {
            let t = GadgetTree::new(n);
            assert_eq!(t.labels_bfs().len(), 2 * n - 1);
            assert_eq!(t.internal().len(), n - 1);
        }
        let t = GadgetTree::new(8);
        assert_eq!((t.unlabeled_count(), t.labeled_count()), (7, 15));
    }

    #[test]
    fn four_leaf_biadjacency() {
        let t = GadgetTree::new(4);
        let f = f();
        let expect = DenseMatrix::from_rows(
            &f,
            &[
                vec![1, 1, 1, 0, 0, 0, 0],
                vec![0, 1, 0, 1, 1, 0, 0],
                vec![0, 0, 1, 0, 0, 1, 1],
            ],
        );
        assert_eq!(tree_biadjacency(&t), expect);
        let order: Vec<(usize, usize)> = t
            .labels_bfs()
            .iter()
            .map(|l| (l.lo + 1, l.hi + 1))
            .collect();
        assert_eq!(
            order,
            vec![(1, 4), (1, 2), (3, 4), (1, 1), (2, 2), (3, 3), (4, 4)]
        );
    }

    #[test]
    fn empty_assignment_structure() {
        let b = build_b(4, &[], &[]).unwrap();
        assert_eq!(b.rows(), 14);
        // two trees with 3 unlabeled vertices of degree 3, plus 4 switch edges
        assert_eq!(b.nnz(), 2 * 9 + 4);
        let g = Gadget::new(4);
        for s in 0..4 {
            assert_eq!(b.get(g.v_row(s), g.u_col(s)), FieldElement::ONE);
        }
    }

    #[test]
    fn bad_label_is_rejected() {
        assert!(matches!(
            build_b(4, &[Label::new(0, 2)], &[Label::leaf(0)]),
            Err(Error::BadLabel { .. })
        ));
        assert!(build_b(4, &[Label::leaf(4)], &[Label::leaf(0)]).is_err());
    }

    #[test]
    fn forest_is_acyclic() {
        let mut rng = FieldRng::new(1);
        for n in [1usize, 2, 3, 4, 7, 8] {
            let t = GadgetTree::new(n);
            let labels = t.labels_bfs();
            let k = rng.index(n + 1);
            let a: Vec<Label> = (0..k).map(|_| labels[rng.index(labels.len())]).collect();
            let b: Vec<Label> = (0..k).map(|_| labels[rng.index(labels.len())]).collect();
            let m = build_b(n, &a, &b).unwrap();
            let dim = m.rows();
            // union-find over rows and columns
            let mut parent: Vec<usize> = (0..2 * dim).collect();
            fn find(p: &mut [usize], x: usize) -> usize {
                let mut r = x;
                while p[r] != r {
                    r = p[r];
                }
                p[x] = r;
                r
            }
            for i in 0..dim {
                for j in 0..dim {
                    if !m.get(i, j).is_zero() {
                        let (ri, rj) = (find(&mut parent, i), find(&mut parent, dim + j));
                        assert_ne!(ri, rj, "cycle through ({i}, {j})");
                        parent[ri] = rj;
                    }
                }
            }
        }
    }

    #[test]
    fn edits_match_rebuild() {
        let field = f();
        let n = 6;
        let mut g = Gadget::new(n);
        let mut b = g.matrix();
        let labels = g.tree().labels_bfs();
        let mut rng = FieldRng::new(2);
        let apply = |b: &mut DenseMatrix, d: Vec<EntryDelta>| {
            for (i, j, x) in d {
                b.set(i, j, field.add(b.get(i, j), x));
            }
        };
        for _ in 0..200 {
            let s = rng.index(n);
            let la = labels[rng.index(labels.len())];
            let lb = labels[rng.index(labels.len())];
            let d = match g.slot(s) {
                Slot::Paired => g.attach(&field, s, la, lb).unwrap(),
                Slot::Attached { a, .. } => match rng.index(3) {
                    0 => g.detach(&field, s).unwrap(),
                    1 => {
                        let d = g.relink_a(&field, s, la).unwrap();
                        assert_eq!(d.len(), if la == a { 0 } else { 2 });
                        d
                    }
                    _ => g.relink_b(&field, s, lb).unwrap(),
                },
            };
            apply(&mut b, d);
            assert_eq!(b, g.matrix());
        }
        let a_slot = g.slots().to_vec();
        let mut h = g.clone();
        let d = h.restore(&field, &vec![Slot::Paired; n]);
        apply(&mut b, d);
        assert_eq!(b, Gadget::new(n).matrix());
        let d = h.restore(&field, &a_slot);
        apply(&mut b, d);
        assert_eq!(b, g.matrix());
    }

    #[test]
    fn relink_to_current_label_is_empty() {
        let field = f();
        let mut g = Gadget::with_assignment(4, &[Label::leaf(1)], &[Label::leaf(2)]).unwrap();
        assert!(g.relink_a(&field, 0, Label::leaf(1)).unwrap().is_empty());
        assert!(g.relink_b(&field, 0, Label::leaf(2)).unwrap().is_empty());
    }

    #[test]
    fn block_matrix_single_dimension() {
        let field = f();
        let mut rng = FieldRng::new(3);
        for _ in 0..20 {
            let a = DenseMatrix::from_fn(1, 1, |_, _| field.sample(&mut rng));
            let b = DenseMatrix::from_fn(2, 2, |_, _| field.sample(&mut rng));
            let x = [field.sample_nonzero(&mut rng)];
            let y = [field.sample_nonzero(&mut rng)];
            let h = assemble_h(&a, &b, &x, &y).unwrap();
            // S = T = {} term minus the x_1 y_1 term
            let full = field.mul(a.get(0, 0), det_oracle(&field, &b).unwrap());
            let minor = field.mul(field.mul(x[0], y[0]), b.get(1, 1));
            assert_eq!(det_oracle(&field, &h).unwrap(), field.sub(full, minor));
        }
        assert!(assemble_h(
            &DenseMatrix::zeros(2, 2),
            &DenseMatrix::zeros(1, 1),
            &[],
            &[]
        )
        .is_err());
    }

    fn subsets(n: usize) -> Vec<Vec<usize>> {
        (0..1usize << n)
            .map(|m| (0..n).filter(|i| m >> i & 1 == 1).collect())
            .collect()
    }

    fn prod(field: &PrimeField, v: &[FieldElement], s: &[usize]) -> FieldElement {
        s.iter()
            .fold(FieldElement::ONE, |acc, &i| field.mul(acc, v[i]))
    }

    #[test]
    fn block_determinant_expansion() {
        let field = f();
        let mut rng = FieldRng::new(4);
        for n in 1..=3usize {
            for m in [n, n + 1] {
                for _ in 0..3 {
                    let a = DenseMatrix::from_fn(n, n, |_, _| field.sample(&mut rng));
                    let b = DenseMatrix::from_fn(m, m, |_, _| field.sample(&mut rng));
                    let x: Vec<_> = (0..n).map(|_| field.sample_nonzero(&mut rng)).collect();
                    let y: Vec<_> = (0..n).map(|_| field.sample_nonzero(&mut rng)).collect();
                    let h = assemble_h(&a, &b, &x, &y).unwrap();
                    let mut sum = FieldElement::ZERO;
                    for s in subsets(n) {
                        for t in subsets(n).into_iter().filter(|t| t.len() == s.len()) {
                            let da = det_oracle(&field, &a.delete(&s, &t).unwrap()).unwrap();
                            let db = det_oracle(&field, &b.delete(&t, &s).unwrap()).unwrap();
                            let mut term = field.mul(da, db);
                            term = field.mul(term, prod(&field, &x, &s));
                            term = field.mul(term, prod(&field, &y, &t));
                            if s.len() % 2 == 1 {
                                term = field.neg(term);
                            }
                            sum = field.add(sum, term);
                        }
                    }
                    assert_eq!(det_oracle(&field, &h).unwrap(), sum, "n={n} m={m}");
                }
            }
        }
    }

    /// `[n]` minus everything covered by `labels`.
    fn predicted(n: usize, labels: &[Label]) -> Vec<usize> {
        (0..n)
            .filter(|i| !labels.iter().any(|l| l.contains(*i)))
            .collect()
    }

    #[test]
    fn nonzero_minors_follow_the_labels() {
        let field = f();
        let mut rng = FieldRng::new(5);
        for n in [2usize, 3, 4] {
            let t = GadgetTree::new(n);
            let labels = t.labels_bfs();
            for _ in 0..8 {
                let k = rng.index(n) + 1;
                let leaves: Vec<usize> = {
                    let mut v: Vec<usize> = (0..n).collect();
                    for i in (1..n).rev() {
                        v.swap(i, rng.index(i + 1));
                    }
                    v
                };
                let leaves_b: Vec<usize> = {
                    let mut v: Vec<usize> = (0..n).collect();
                    for i in (1..n).rev() {
                        v.swap(i, rng.index(i + 1));
                    }
                    v
                };
                // k-1 leaves plus one arbitrary label avoiding them
                let mut a: Vec<Label> = leaves[..k - 1].iter().map(|&i| Label::leaf(i)).collect();
                let mut b: Vec<Label> = leaves_b[..k - 1].iter().map(|&i| Label::leaf(i)).collect();
                let free_a: Vec<Label> = labels
                    .iter()
                    .copied()
                    .filter(|l| a.iter().all(|x| !l.contains(x.lo)))
                    .collect();
                let free_b: Vec<Label> = labels
                    .iter()
                    .copied()
                    .filter(|l| b.iter().all(|x| !l.contains(x.lo)))
                    .collect();
                let la = free_a[rng.index(free_a.len())];
                let lb = free_b[rng.index(free_b.len())];
                a.push(la);
                b.push(lb);
                let bm = build_b(n, &a, &b).unwrap();
                let mut found = Vec::new();
                for s in subsets(n) {
                    for tt in subsets(n).into_iter().filter(|tt| tt.len() == s.len()) {
                        let d = det_oracle(&field, &bm.delete(&tt, &s).unwrap()).unwrap();
                        if !d.is_zero() {
                            found.push((s.clone(), tt));
                        }
                    }
                }
                let mut expect = Vec::new();
                for i in la.lo..=la.hi {
                    for j in lb.lo..=lb.hi {
                        let mut aa = a[..k - 1].to_vec();
                        aa.push(Label::leaf(i));
                        let mut bb = b[..k - 1].to_vec();
                        bb.push(Label::leaf(j));
                        // u side removes rows T of B, v side removes columns S
                        expect.push((predicted(n, &bb), predicted(n, &aa)));
                    }
                }
                found.sort();
                expect.sort();
                assert_eq!(found, expect, "n={n} a={a:?} b={b:?}");
            }
        }
    }

    #[test]
    fn dot_mentions_every_switch() {
        let g = Gadget::with_assignment(4, &[Label::new(0, 3)], &[Label::leaf(2)]).unwrap();
        let dot = g.to_dot();
        assert!(dot.starts_with("graph gadget {"));
        assert!(dot.contains("u0 -- T_4;"));
        assert!(dot.contains("v0 -- Tp_2;"));
        assert!(dot.contains("u3 -- v3;"));
    }
}
