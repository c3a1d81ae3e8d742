//! Matching sizes, weights and vertex sets from matrix rank.
//!
//! A general graph's maximum matching has size `rank(T) / 2` for its Tutte
//! matrix `T` filled with random values, a bipartite graph's is the rank of
//! its randomized biadjacency matrix, and a weighted bipartite graph reduces
//! to an unweighted one by splitting each vertex into `W` copies and each
//! edge of weight `w` into `w` edges `{u_a, v_{w+1-a}}`.

use std::collections::BTreeMap;

use crate::error::{check_index, Error, Result};
use crate::gf::{FieldElement, FieldRng, PrimeField};
use crate::linalg::DenseMatrix;
use crate::rankred::UnboundedRank;
use crate::submatrix::SubmatrixState;

/// Edge set with the random value attached to each edge.
#[derive(Clone, Debug, Default)]
struct EdgeValues {
    values: BTreeMap<(usize, usize), FieldElement>,
}

impl EdgeValues {
    fn insert(
        &mut self,
        key: (usize, usize),
        field: &PrimeField,
        rng: &mut FieldRng,
    ) -> Result<FieldElement> {
        if self.values.contains_key(&key) {
            return Err(Error::DuplicateInsert(key.0, key.1));
        }
        let x = field.sample_nonzero(rng);
        self.values.insert(key, x);
        Ok(x)
    }

    fn remove(&mut self, key: (usize, usize)) -> Result<()> {
        self.values
            .remove(&key)
            .map(|_| ())
            .ok_or(Error::MissingDelete(key.0, key.1))
    }

    fn keys(&self) -> Vec<(usize, usize)> {
        self.values.keys().copied().collect()
    }
}

fn undirected(n: usize, u: usize, v: usize) -> Result<(usize, usize)> {
    check_index(u, n)?;
    check_index(v, n)?;
    if u == v {
        return Err(Error::SelfLoop(u));
    }
    Ok((u.min(v), u.max(v)))
}

/// Maximum matching size of a general graph through its Tutte matrix.
#[derive(Clone, Debug)]
pub struct GeneralMatching {
    field: PrimeField,
    n: usize,
    edges: EdgeValues,
    rank: UnboundedRank,
    rng: FieldRng,
}

impl GeneralMatching {
    pub fn new(field: PrimeField, n: usize, rng: FieldRng) -> Result<Self> {
        Self::with_edges(field, n, &[], rng)
    }

    pub fn with_edges(
        field: PrimeField,
        n: usize,
        edges: &[(usize, usize)],
        mut rng: FieldRng,
    ) -> Result<Self> {
        let mut table = EdgeValues::default();
        let mut t = DenseMatrix::zeros(n, n);
        for &(u, v) in edges {
            let key = undirected(n, u, v)?;
            let x = table.insert(key, &field, &mut rng)?;
            t.set(key.0, key.1, x);
            t.set(key.1, key.0, field.neg(x));
        }
        let rank = UnboundedRank::new(field, &t, &mut rng.fork())?;
        Ok(GeneralMatching {
            field,
            n,
            edges: table,
            rank,
            rng,
        })
    }

    pub fn vertices(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.edges.keys()
    }

    pub fn set_worst_case_spread(&mut self, on: bool) {
        self.rank.set_worst_case_spread(on);
    }

    pub fn tutte(&self) -> &DenseMatrix {
        self.rank.matrix()
    }

    pub fn rank_structure(&self) -> &UnboundedRank {
        &self.rank
    }

    pub fn size(&self) -> usize {
        self.rank.rank() / 2
    }

    pub fn insert(&mut self, u: usize, v: usize) -> Result<usize> {
        let key = undirected(self.n, u, v)?;
        let x = self.edges.insert(key, &self.field, &mut self.rng)?;
        self.rank.entry_update(key.0, key.1, x)?;
        self.rank.entry_update(key.1, key.0, self.field.neg(x))?;
        Ok(self.size())
    }

    pub fn delete(&mut self, u: usize, v: usize) -> Result<usize> {
        let key = undirected(self.n, u, v)?;
        self.edges.remove(key)?;
        self.rank.entry_update(key.0, key.1, FieldElement::ZERO)?;
        self.rank.entry_update(key.1, key.0, FieldElement::ZERO)?;
        Ok(self.size())
    }

    pub fn set_edge(&mut self, u: usize, v: usize, present: bool) -> Result<usize> {
        if present {
            self.insert(u, v)
        } else {
            self.delete(u, v)
        }
    }
}

/// Whether `t` is skew-symmetric with zero diagonal.
pub fn is_skew_symmetric(field: &PrimeField, t: &DenseMatrix) -> bool {
    t.is_square()
        && (0..t.rows())
            .all(|i| (0..t.cols()).all(|j| field.add(t.get(i, j), t.get(j, i)).is_zero()))
}

/// Maximum matching size of a bipartite graph through its biadjacency matrix.
#[derive(Clone, Debug)]
pub struct BipartiteMatching {
    field: PrimeField,
    left: usize,
    right: usize,
    edges: EdgeValues,
    rank: UnboundedRank,
    rng: FieldRng,
}

impl BipartiteMatching {
    pub fn new(field: PrimeField, left: usize, right: usize, rng: FieldRng) -> Result<Self> {
        Self::with_edges(field, left, right, &[], rng)
    }

    pub fn with_edges(
        field: PrimeField,
        left: usize,
        right: usize,
        edges: &[(usize, usize)],
        mut rng: FieldRng,
    ) -> Result<Self> {
        let mut table = EdgeValues::default();
        let mut b = DenseMatrix::zeros(left, right);
        for &(u, v) in edges {
            check_index(u, left)?;
            check_index(v, right)?;
            let x = table.insert((u, v), &field, &mut rng)?;
            b.set(u, v, x);
        }
        let rank = UnboundedRank::new(field, &b, &mut rng.fork())?;
        Ok(BipartiteMatching {
            field,
            left,
            right,
            edges: table,
            rank,
            rng,
        })
    }

    pub fn sides(&self) -> (usize, usize) {
        (self.left, self.right)
    }

    pub fn set_worst_case_spread(&mut self, on: bool) {
        self.rank.set_worst_case_spread(on);
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.edges.keys()
    }

    pub fn rank_structure(&self) -> &UnboundedRank {
        &self.rank
    }

    pub fn size(&self) -> usize {
        self.rank.rank()
    }

    pub fn insert(&mut self, u: usize, v: usize) -> Result<usize> {
        check_index(u, self.left)?;
        check_index(v, self.right)?;
        let x = self.edges.insert((u, v), &self.field, &mut self.rng)?;
        self.rank.entry_update(u, v, x)
    }

    pub fn delete(&mut self, u: usize, v: usize) -> Result<usize> {
        check_index(u, self.left)?;
        check_index(v, self.right)?;
        self.edges.remove((u, v))?;
        self.rank.entry_update(u, v, FieldElement::ZERO)
    }

    pub fn set_edge(&mut self, u: usize, v: usize, present: bool) -> Result<usize> {
        if present {
            self.insert(u, v)
        } else {
            self.delete(u, v)
        }
    }
}

/// Maximum weight of a bipartite matching with integer weights in
/// `1..=w_max`, through the vertex-splitting reduction.
#[derive(Clone, Debug)]
pub struct WeightedMatching {
    field: PrimeField,
    left: usize,
    right: usize,
    w_max: u64,
    weights: BTreeMap<(usize, usize), u64>,
    rank: UnboundedRank,
    rng: FieldRng,
}

impl WeightedMatching {
    pub fn new(
        field: PrimeField,
        left: usize,
        right: usize,
        w_max: u64,
        mut rng: FieldRng,
    ) -> Result<Self> {
        let w = w_max.max(1) as usize;
        let rank = UnboundedRank::new(
            field,
            &DenseMatrix::zeros(left * w, right * w),
            &mut rng.fork(),
        )?;
        Ok(WeightedMatching {
            field,
            left,
            right,
            w_max: w_max.max(1),
            weights: BTreeMap::new(),
            rank,
            rng,
        })
    }

    pub fn w_max(&self) -> u64 {
        self.w_max
    }

    pub fn sides(&self) -> (usize, usize) {
        (self.left, self.right)
    }

    pub fn set_worst_case_spread(&mut self, on: bool) {
        self.rank.set_worst_case_spread(on);
    }

    pub fn edges(&self) -> Vec<(usize, usize, u64)> {
        self.weights.iter().map(|(&(u, v), &w)| (u, v, w)).collect()
    }

    pub fn rank_structure(&self) -> &UnboundedRank {
        &self.rank
    }

    /// Edges of the split graph for one edge of weight `w`, as
    /// `(left copy, right copy)` indices.
    pub fn split_edges(&self, u: usize, v: usize, w: u64) -> Vec<(usize, usize)> {
        let wm = self.w_max as usize;
        let w = w as usize;
        (1..=w).map(|a| (u * wm + a - 1, v * wm + w - a)).collect()
    }

    /// All edges of the split graph.
    pub fn split_graph(&self) -> (usize, usize, Vec<(usize, usize)>) {
        let wm = self.w_max as usize;
        let edges = self
            .weights
            .iter()
            .flat_map(|(&(u, v), &w)| self.split_edges(u, v, w))
            .collect();
        (self.left * wm, self.right * wm, edges)
    }

    pub fn weight(&self) -> u64 {
        self.rank.rank() as u64
    }

    /// Sets the weight of edge `uv`; weight 0 deletes it.
    pub fn set_weight(&mut self, u: usize, v: usize, w: i64) -> Result<u64> {
        check_index(u, self.left)?;
        check_index(v, self.right)?;
        if w < 0 {
            return Err(Error::NegativeWeight(w));
        }
        let w = w as u64;
        if w > self.w_max {
            return Err(Error::WeightTooLarge {
                weight: w,
                max: self.w_max,
            });
        }
        if let Some(old) = self.weights.remove(&(u, v)) {
            for (a, b) in self.split_edges(u, v, old) {
                self.rank.entry_update(a, b, FieldElement::ZERO)?;
            }
        }
        if w > 0 {
            for (a, b) in self.split_edges(u, v, w) {
                let x = self.field.sample_nonzero(&mut self.rng);
                self.rank.entry_update(a, b, x)?;
            }
            self.weights.insert((u, v), w);
        }
        Ok(self.weight())
    }
}

/// Vertex set of a maximum matching through the full-rank submatrix of the
/// Tutte matrix.
#[derive(Clone, Debug)]
pub struct MatchedVertexSet {
    field: PrimeField,
    n: usize,
    edges: EdgeValues,
    sub: SubmatrixState,
    rng: FieldRng,
}

impl MatchedVertexSet {
    pub fn new(field: PrimeField, n: usize, mut rng: FieldRng) -> Result<Self> {
        let sub = SubmatrixState::zeros(field, n, rng.fork())?;
        Ok(MatchedVertexSet {
            field,
            n,
            edges: EdgeValues::default(),
            sub,
            rng,
        })
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.edges.keys()
    }

    pub fn submatrix(&self) -> &SubmatrixState {
        &self.sub
    }

    /// The row set `I` of the maintained minor.
    pub fn vertex_set(&self) -> Vec<usize> {
        self.sub.rows()
    }

    pub fn insert(&mut self, u: usize, v: usize) -> Result<Vec<usize>> {
        let key = undirected(self.n, u, v)?;
        let x = self.edges.insert(key, &self.field, &mut self.rng)?;
        self.sub.entry_update(key.0, key.1, x)?;
        self.sub.entry_update(key.1, key.0, self.field.neg(x))?;
        Ok(self.vertex_set())
    }

    pub fn delete(&mut self, u: usize, v: usize) -> Result<Vec<usize>> {
        let key = undirected(self.n, u, v)?;
        self.edges.remove(key)?;
        self.sub.entry_update(key.0, key.1, FieldElement::ZERO)?;
        self.sub.entry_update(key.1, key.0, FieldElement::ZERO)?;
        Ok(self.vertex_set())
    }

    pub fn set_edge(&mut self, u: usize, v: usize, present: bool) -> Result<Vec<usize>> {
        if present {
            self.insert(u, v)
        } else {
            self.delete(u, v)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{
        bipartite_matching_size, general_matching_size, has_perfect_matching, max_weight_bipartite,
    };

    fn f() -> PrimeField {
        PrimeField::default()
    }

    #[test]
    fn general_examples() {
        let mut g = GeneralMatching::new(f(), 3, FieldRng::new(1)).unwrap();
        assert_eq!(g.size(), 0);
        assert_eq!(g.insert(0, 1).unwrap(), 1);
        assert_eq!(g.insert(1, 2).unwrap(), 1);
        assert!(is_skew_symmetric(&f(), g.tutte()));
        assert!(matches!(g.insert(1, 1), Err(Error::SelfLoop(1))));
        assert!(matches!(g.insert(1, 0), Err(Error::DuplicateInsert(0, 1))));
        assert!(matches!(g.delete(0, 2), Err(Error::MissingDelete(0, 2))));
        assert_eq!(g.delete(0, 1).unwrap(), 1);
        assert_eq!(g.delete(1, 2).unwrap(), 0);
    }

    #[test]
    fn bipartite_examples() {
        let mut b = BipartiteMatching::new(f(), 3, 3, FieldRng::new(2)).unwrap();
        for i in 0..3 {
            b.insert(i, i).unwrap();
        }
        assert_eq!(b.size(), 3);
        for i in 0..3 {
            b.delete(i, i).unwrap();
        }
        assert_eq!(b.size(), 0);
        let k23: Vec<_> = (0..2).flat_map(|u| (0..3).map(move |v| (u, v))).collect();
        let b = BipartiteMatching::with_edges(f(), 2, 3, &k23, FieldRng::new(3)).unwrap();
        assert_eq!(b.size(), 2);
    }

    #[test]
    fn weighted_examples() {
        let mut w = WeightedMatching::new(f(), 3, 3, 5, FieldRng::new(4)).unwrap();
        assert_eq!(w.set_weight(0, 0, 5).unwrap(), 5);
        // weight 5 splits into {u_a, v_{6-a}}
        assert_eq!(
            w.split_edges(0, 0, 5),
            vec![(0, 4), (1, 3), (2, 2), (3, 1), (4, 0)]
        );
        assert_eq!(w.set_weight(0, 0, 2).unwrap(), 2);
        assert_eq!(w.set_weight(1, 1, 3).unwrap(), 5);
        assert!(matches!(
            w.set_weight(0, 0, -1),
            Err(Error::NegativeWeight(-1))
        ));
        assert!(matches!(
            w.set_weight(0, 0, 6),
            Err(Error::WeightTooLarge { .. })
        ));
        let mut p = WeightedMatching::new(f(), 2, 1, 4, FieldRng::new(5)).unwrap();
        p.set_weight(0, 0, 4).unwrap();
        assert_eq!(p.set_weight(1, 0, 3).unwrap(), 4);
        assert_eq!(p.set_weight(0, 0, 0).unwrap(), 3);
    }

    #[test]
    fn vertex_set_examples() {
        let mut m = MatchedVertexSet::new(f(), 3, FieldRng::new(6)).unwrap();
        assert_eq!(m.insert(0, 1).unwrap(), vec![0, 1]);
        assert_eq!(m.insert(1, 2).unwrap(), vec![0, 1]);
        let mut s = MatchedVertexSet::new(f(), 4, FieldRng::new(7)).unwrap();
        for leaf in [1, 2, 3] {
            s.insert(0, leaf).unwrap();
        }
        assert_eq!(s.vertex_set(), vec![0, 1]);
    }

    #[test]
    fn general_stream_matches_blossom() {
        let mut rng = FieldRng::new(8);
        let n = 12;
        let mut g = GeneralMatching::new(f(), n, rng.fork()).unwrap();
        let mut v = MatchedVertexSet::new(f(), n, rng.fork()).unwrap();
        for _ in 0..150 {
            let (a, b) = (rng.index(n), rng.index(n));
            if a == b {
                continue;
            }
            let key = (a.min(b), a.max(b));
            let present = !g.edges().contains(&key);
            g.set_edge(a, b, present).unwrap();
            v.set_edge(a, b, present).unwrap();
            let e = g.edges();
            let size = general_matching_size(n, &e);
            assert_eq!(g.size(), size);
            let set = v.vertex_set();
            assert_eq!(set.len(), 2 * size);
            assert!(has_perfect_matching(&set, &e));
        }
    }

    #[test]
    fn bipartite_and_weighted_streams() {
        let mut rng = FieldRng::new(9);
        let mut b = BipartiteMatching::new(f(), 6, 5, rng.fork()).unwrap();
        let mut w = WeightedMatching::new(f(), 4, 4, 3, rng.fork()).unwrap();
        for _ in 0..120 {
            let (u, v) = (rng.index(6), rng.index(5));
            let present = !b.edges().contains(&(u, v));
            b.set_edge(u, v, present).unwrap();
            assert_eq!(b.size(), bipartite_matching_size(6, 5, &b.edges()));
            let (u, v) = (rng.index(4), rng.index(4));
            w.set_weight(u, v, rng.index(4) as i64).unwrap();
            let (l, r, h) = w.split_graph();
            let best = max_weight_bipartite(4, 4, &w.edges());
            assert_eq!(w.weight(), best);
            assert_eq!(bipartite_matching_size(l, r, &h) as u64, best);
        }
    }
}
