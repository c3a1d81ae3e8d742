//! Deterministic maximum bipartite matching with updates costing
//! `O(|M|^2)` regardless of the number of vertices.
//!
//! After an update the matching is at most one short of maximum, and if so
//! an augmenting path exists inside `W = V(M) + x(V(M))`, where `x(v)` is
//! any neighbor of `v` outside `V(M)`. Computing `x` and the induced
//! subgraph `G[W]` takes `O(|M|^2)` with the hybrid graph below.

use std::collections::VecDeque;

use crate::error::{check_index, Error, Result};

const NIL: u32 = u32::MAX;

#[derive(Clone, Copy, Debug)]
struct Node {
    u: u32,
    v: u32,
    row_prev: u32,
    row_next: u32,
    col_prev: u32,
    col_next: u32,
}

/// Adjacency matrix whose present cells are threaded into a circular doubly
/// linked list per row and per column. Nodes `0..n` are row heads and
/// `n..2n` column heads.
#[derive(Clone, Debug)]
pub struct HybridGraph {
    n: usize,
    grid: Vec<u32>,
    nodes: Vec<Node>,
    free: Vec<u32>,
    mark: Vec<bool>,
    steps: u64,
}

impl HybridGraph {
    pub fn new(n: usize) -> Self {
        let mut nodes = Vec::with_capacity(2 * n);
        for h in 0..2 * n as u32 {
            nodes.push(Node {
                u: NIL,
                v: NIL,
                row_prev: h,
                row_next: h,
                col_prev: h,
                col_next: h,
            });
        }
        HybridGraph {
            n,
            grid: vec![NIL; n * n],
            nodes,
            free: Vec::new(),
            mark: vec![false; n],
            steps: 0,
        }
    }

    pub fn vertices(&self) -> usize {
        self.n
    }

    /// Grid reads and list steps performed so far.
    pub fn steps(&self) -> u64 {
        self.steps
    }

    fn cell(&self, u: usize, v: usize) -> usize {
        u * self.n + v
    }

    pub fn has_edge(&mut self, u: usize, v: usize) -> bool {
        self.steps += 1;
        self.grid[self.cell(u, v)] != NIL
    }

    fn add_arc(&mut self, u: usize, v: usize) {
        let node = Node {
            u: u as u32,
            v: v as u32,
            row_prev: u as u32,
            row_next: self.nodes[u].row_next,
            col_prev: (self.n + v) as u32,
            col_next: self.nodes[self.n + v].col_next,
        };
        let id = match self.free.pop() {
            Some(id) => {
                self.nodes[id as usize] = node;
                id
            }
            None => {
                self.nodes.push(node);
                (self.nodes.len() - 1) as u32
            }
        };
        let (rn, cn) = (node.row_next as usize, node.col_next as usize);
        self.nodes[u].row_next = id;
        self.nodes[rn].row_prev = id;
        self.nodes[self.n + v].col_next = id;
        self.nodes[cn].col_prev = id;
        let c = self.cell(u, v);
        self.grid[c] = id;
    }

    fn remove_arc(&mut self, u: usize, v: usize) {
        let c = self.cell(u, v);
        let id = self.grid[c];
        let node = self.nodes[id as usize];
        self.nodes[node.row_prev as usize].row_next = node.row_next;
        self.nodes[node.row_next as usize].row_prev = node.row_prev;
        self.nodes[node.col_prev as usize].col_next = node.col_next;
        self.nodes[node.col_next as usize].col_prev = node.col_prev;
        self.grid[c] = NIL;
        self.free.push(id);
    }

    fn check_pair(&self, u: usize, v: usize) -> Result<()> {
        check_index(u, self.n)?;
        check_index(v, self.n)?;
        if u == v {
            return Err(Error::SelfLoop(u));
        }
        Ok(())
    }

    pub fn insert(&mut self, u: usize, v: usize) -> Result<()> {
        self.check_pair(u, v)?;
        if self.has_edge(u, v) {
            return Err(Error::DuplicateInsert(u, v));
        }
        self.add_arc(u, v);
        self.add_arc(v, u);
        self.steps += 2;
        Ok(())
    }

    pub fn delete(&mut self, u: usize, v: usize) -> Result<()> {
        self.check_pair(u, v)?;
        if !self.has_edge(u, v) {
            return Err(Error::MissingDelete(u, v));
        }
        self.remove_arc(u, v);
        self.remove_arc(v, u);
        self.steps += 2;
        Ok(())
    }

    /// Neighbors of `u` in list order.
    pub fn neighbors(&self, u: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut cur = self.nodes[u].row_next;
        while cur as usize != u {
            let node = self.nodes[cur as usize];
            out.push(node.v as usize);
            cur = node.row_next;
        }
        out
    }

    /// Vertices with an arc into `v`, walking the column list.
    pub fn in_neighbors(&self, v: usize) -> Vec<usize> {
        let head = self.n + v;
        let mut out = Vec::new();
        let mut cur = self.nodes[head].col_next;
        while cur as usize != head {
            let node = self.nodes[cur as usize];
            out.push(node.u as usize);
            cur = node.col_next;
        }
        out
    }

    /// Adjacency of `G[S]` from grid reads.
    pub fn subgraph(&mut self, s: &[usize]) -> Vec<Vec<bool>> {
        self.steps += (s.len() * s.len()) as u64;
        s.iter()
            .map(|&u| {
                s.iter()
                    .map(|&v| self.grid[u * self.n + v] != NIL)
                    .collect()
            })
            .collect()
    }

    /// For every `v` in `S`, a neighbor outside `S`, or `None`.
    ///
    /// A row list holds at most `|S| - 1` members of `S`, so each walk ends
    /// within `|S|` steps.
    pub fn external_neighbors(&mut self, s: &[usize]) -> Vec<Option<usize>> {
        for &v in s {
            self.mark[v] = true;
        }
        let cap = s.len() + 1;
        let mut out = Vec::with_capacity(s.len());
        for &v in s {
            let mut cur = self.nodes[v].row_next;
            let mut found = None;
            let mut walked = 0;
            while cur as usize != v {
                walked += 1;
                debug_assert!(walked <= cap, "walk exceeded |S| + 1 steps");
                let node = self.nodes[cur as usize];
                if !self.mark[node.v as usize] {
                    found = Some(node.v as usize);
                    break;
                }
                cur = node.row_next;
            }
            self.steps += walked as u64 + 1;
            out.push(found);
        }
        for &v in s {
            self.mark[v] = false;
        }
        out
    }
}

/// Maximum matching of a bipartite graph with left vertices `0..left` and
/// right vertices `left..left + right`.
#[derive(Clone, Debug)]
pub struct CombiMatcher {
    left: usize,
    g: HybridGraph,
    mate: Vec<Option<usize>>,
    matched: Vec<usize>,
    augmentations: u64,
    last_steps: u64,
}

impl CombiMatcher {
    pub fn new(left: usize, right: usize) -> Self {
        CombiMatcher {
            left,
            g: HybridGraph::new(left + right),
            mate: vec![None; left + right],
            matched: Vec::new(),
            augmentations: 0,
            last_steps: 0,
        }
    }

    pub fn graph(&self) -> &HybridGraph {
        &self.g
    }

    pub fn size(&self) -> usize {
        self.matched.len() / 2
    }

    pub fn mate(&self, v: usize) -> Option<usize> {
        self.mate[v]
    }

    /// Steps spent by the last update.
    pub fn last_steps(&self) -> u64 {
        self.last_steps
    }

    pub fn augmentations(&self) -> u64 {
        self.augmentations
    }

    /// Matching edges as `(left, right)` with global ids, sorted.
    pub fn matching(&self) -> Vec<(usize, usize)> {
        let mut out: Vec<(usize, usize)> = (0..self.left)
            .filter_map(|u| self.mate[u].map(|v| (u, v)))
            .collect();
        out.sort_unstable();
        out
    }

    fn sides(&self, u: usize, v: usize) -> Result<(usize, usize)> {
        let n = self.g.n;
        check_index(u, n)?;
        check_index(v, n)?;
        match (u < self.left, v < self.left) {
            (true, false) => Ok((u, v)),
            (false, true) => Ok((v, u)),
            _ => Err(Error::NotBipartite(u, v)),
        }
    }

    fn set_mate(&mut self, u: usize, v: usize) {
        for x in [u, v] {
            if self.mate[x].is_none() {
                self.matched.push(x);
            }
        }
        self.mate[u] = Some(v);
        self.mate[v] = Some(u);
    }

    fn unmatch(&mut self, u: usize, v: usize) {
        self.mate[u] = None;
        self.mate[v] = None;
        self.matched.retain(|&x| x != u && x != v);
    }

    pub fn insert(&mut self, u: usize, v: usize) -> Result<Vec<(usize, usize)>> {
        let (u, v) = self.sides(u, v)?;
        let start = self.g.steps();
        self.g.insert(u, v)?;
        if self.mate[u].is_none() && self.mate[v].is_none() {
            self.set_mate(u, v);
        } else {
            self.augment();
        }
        self.last_steps = self.g.steps() - start;
        Ok(self.matching())
    }

    pub fn delete(&mut self, u: usize, v: usize) -> Result<Vec<(usize, usize)>> {
        let (u, v) = self.sides(u, v)?;
        let start = self.g.steps();
        self.g.delete(u, v)?;
        if self.mate[u] == Some(v) {
            self.unmatch(u, v);
            if !self.rematch_endpoints(u, v) {
                self.augment();
            }
        }
        self.last_steps = self.g.steps() - start;
        Ok(self.matching())
    }

    /// Restores maximality after the matched edge `uv` is removed: any edge
    /// between two free vertices now touches `u` or `v`, and a neighbor of
    /// either outside `V(M) + {u, v}` is free. Matching one of them brings
    /// the size back to the old maximum.
    fn rematch_endpoints(&mut self, u: usize, v: usize) -> bool {
        let mut s = self.matched.clone();
        s.extend([u, v]);
        let x = self.g.external_neighbors(&s);
        let k = s.len();
        for (end, ext) in [(u, x[k - 2]), (v, x[k - 1])] {
            if let Some(w) = ext {
                self.set_mate(end, w);
                return true;
            }
        }
        false
    }

    /// The set `W` and `G[W]` for the current matching.
    fn local_view(&mut self) -> (Vec<usize>, Vec<Vec<bool>>) {
        let mut vm = self.matched.clone();
        vm.sort_unstable();
        let x = self.g.external_neighbors(&vm);
        let mut w = vm;
        w.extend(x.into_iter().flatten());
        w.sort_unstable();
        w.dedup();
        let adj = self.g.subgraph(&w);
        (w, adj)
    }

    /// Looks for one augmenting path in `G[W]` and applies it.
    fn augment(&mut self) -> bool {
        let (w, adj) = self.local_view();
        let k = w.len();
        let mut prev: Vec<Option<usize>> = vec![None; k];
        let mut seen = vec![false; k];
        let mut queue = VecDeque::new();
        let local_mate = |i: usize, mate: &[Option<usize>]| {
            mate[w[i]].map(|m| w.binary_search(&m).expect("mates lie in W"))
        };
        for i in 0..k {
            if w[i] < self.left && self.mate[w[i]].is_none() {
                seen[i] = true;
                queue.push_back(i);
            }
        }
        let mut end = None;
        'bfs: while let Some(i) = queue.pop_front() {
            for j in 0..k {
                self.g.steps += 1;
                if !adj[i][j] || seen[j] {
                    continue;
                }
                seen[j] = true;
                prev[j] = Some(i);
                match local_mate(j, &self.mate) {
                    None => {
                        end = Some(j);
                        break 'bfs;
                    }
                    Some(m) => {
                        seen[m] = true;
                        prev[m] = Some(j);
                        queue.push_back(m);
                    }
                }
            }
        }
        let Some(mut j) = end else {
            return false;
        };
        // walk back: j (right, free) <- i (left) [<- mate of i <- ...]
        loop {
            let i = prev[j].expect("path reaches a free left vertex");
            let next = prev[i];
            self.set_mate(w[i], w[j]);
            match next {
                Some(r) => j = r,
                None => break,
            }
        }
        self.augmentations += 1;
        true
    }

    /// Matching, subset and maximality checks against Hopcroft–Karp.
    pub fn check(&self) -> bool {
        let edges: Vec<(usize, usize)> = (0..self.left)
            .flat_map(|u| {
                self.g
                    .neighbors(u)
                    .into_iter()
                    .map(move |v| (u, v - self.left))
            })
            .collect();
        let right = self.g.n - self.left;
        let consistent = (0..self.g.n).all(|x| match self.mate[x] {
            Some(y) => self.mate[y] == Some(x) && self.g.grid[x * self.g.n + y] != NIL,
            None => true,
        });
        consistent
            && self.matched.len() == self.mate.iter().flatten().count()
            && crate::oracle::bipartite_matching_size(self.left, right, &edges) == self.size()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf::FieldRng;
    use crate::oracle::bipartite_matching_size;
    use std::collections::BTreeSet;

    #[test]
    fn round_trips() {
        let mut g = HybridGraph::new(4);
        g.insert(0, 1).unwrap();
        assert!(g.has_edge(0, 1) && g.has_edge(1, 0));
        g.delete(1, 0).unwrap();
        assert!(!g.has_edge(0, 1));
        assert!(matches!(g.delete(0, 1), Err(Error::MissingDelete(0, 1))));
        g.insert(2, 3).unwrap();
        assert!(matches!(g.insert(3, 2), Err(Error::DuplicateInsert(3, 2))));
        assert!(matches!(g.insert(1, 1), Err(Error::SelfLoop(1))));
    }

    #[test]
    fn random_ops_match_a_set() {
        let mut rng = FieldRng::new(1);
        let n = 30;
        let mut g = HybridGraph::new(n);
        let mut set = BTreeSet::new();
        for _ in 0..10_000 {
            let (u, v) = (rng.index(n), rng.index(n));
            if u == v {
                continue;
            }
            let key = (u.min(v), u.max(v));
            if set.remove(&key) {
                g.delete(u, v).unwrap();
            } else {
                set.insert(key);
                g.insert(u, v).unwrap();
            }
        }
        for u in 0..n {
            for v in 0..n {
                let want = set.contains(&(u.min(v), u.max(v)));
                assert_eq!(g.has_edge(u, v), want);
            }
            let mut row = g.neighbors(u);
            let mut col = g.in_neighbors(u);
            row.sort_unstable();
            col.sort_unstable();
            let want: Vec<usize> = (0..n)
                .filter(|&v| set.contains(&(u.min(v), u.max(v))))
                .collect();
            assert_eq!(row, want);
            assert_eq!(col, want);
        }
    }

    #[test]
    fn subgraph_and_external_neighbors() {
        let mut g = HybridGraph::new(5);
        assert!(g.subgraph(&[]).is_empty());
        g.insert(0, 1).unwrap();
        assert_eq!(g.external_neighbors(&[0]), vec![Some(1)]);
        assert_eq!(g.external_neighbors(&[0, 1]), vec![None, None]);
        let mut rng = FieldRng::new(2);
        let n = 12;
        let mut g = HybridGraph::new(n);
        for _ in 0..40 {
            let (u, v) = (rng.index(n), rng.index(n));
            if u != v && !g.has_edge(u, v) {
                g.insert(u, v).unwrap();
            }
        }
        for _ in 0..50 {
            let s: Vec<usize> = (0..n).filter(|_| rng.chance(1, 3)).collect();
            let adj = g.subgraph(&s);
            for (a, &u) in s.iter().enumerate() {
                for (b, &v) in s.iter().enumerate() {
                    assert_eq!(adj[a][b], g.neighbors(u).contains(&v));
                }
            }
            for (&v, x) in s.iter().zip(g.external_neighbors(&s)) {
                let outside: Vec<usize> = g
                    .neighbors(v)
                    .into_iter()
                    .filter(|w| !s.contains(w))
                    .collect();
                match x {
                    Some(w) => assert!(outside.contains(&w)),
                    None => assert!(outside.is_empty()),
                }
            }
        }
        let all: Vec<usize> = (0..n).collect();
        let degrees: usize = (0..n).map(|u| g.neighbors(u).len()).sum();
        assert_eq!(
            g.subgraph(&all).iter().flatten().filter(|&&b| b).count(),
            degrees
        );
    }

    #[test]
    fn matcher_examples() {
        // a, c on the left (0, 1); b, d on the right (2, 3)
        let mut m = CombiMatcher::new(2, 2);
        assert_eq!(m.insert(0, 2).unwrap(), vec![(0, 2)]);
        m.insert(1, 3).unwrap();
        assert_eq!(m.insert(1, 2).unwrap(), vec![(0, 2), (1, 3)]);
        assert_eq!(m.delete(1, 3).unwrap().len(), 1);
        assert!(m.check());
        assert!(matches!(m.insert(0, 1), Err(Error::NotBipartite(0, 1))));
    }

    #[test]
    fn augmenting_path_through_the_matching() {
        // path l0 - r0 - l1 - r1 with l0 r0 matched; deleting and re-adding
        // forces an augmentation of length three
        let mut m = CombiMatcher::new(2, 2);
        m.insert(1, 2).unwrap();
        m.insert(0, 2).unwrap();
        assert_eq!(m.size(), 1);
        m.insert(0, 3).unwrap();
        assert_eq!(m.matching(), vec![(0, 3), (1, 2)]);
        assert!(m.check());
    }

    #[test]
    fn deleting_a_matched_edge_rematches_its_endpoint() {
        // l0 keeps a free neighbor once its matched edge is gone
        let mut m = CombiMatcher::new(1, 2);
        m.insert(0, 1).unwrap();
        m.insert(0, 2).unwrap();
        assert_eq!(m.delete(0, 1).unwrap(), vec![(0, 2)]);
        assert!(m.check());
    }

    #[test]
    fn random_stream_is_maximum() {
        let mut rng = FieldRng::new(3);
        let (l, r) = (9, 7);
        let mut m = CombiMatcher::new(l, r);
        let mut edges = BTreeSet::new();
        for _ in 0..800 {
            let (u, v) = (rng.index(l), l + rng.index(r));
            let before = m.size();
            if edges.remove(&(u, v)) {
                m.delete(u, v).unwrap();
            } else {
                edges.insert((u, v));
                m.insert(u, v).unwrap();
            }
            let e: Vec<(usize, usize)> = edges.iter().map(|&(a, b)| (a, b - l)).collect();
            let want = bipartite_matching_size(l, r, &e);
            assert_eq!(m.size(), want);
            assert!(want.abs_diff(before) <= 1);
            assert!(m.check());
        }
    }
}
