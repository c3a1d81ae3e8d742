//! Brute-force and classical matching algorithms used to check the
//! maintainers.

use std::collections::VecDeque;

/// Maximum bipartite matching by Hopcroft–Karp. Edges are `(left, right)`,
/// 0-based. Returns `mate_left`, with `None` for free left vertices.
pub fn hopcroft_karp(
    n_left: usize,
    n_right: usize,
    edges: &[(usize, usize)],
) -> Vec<Option<usize>> {
    let mut adj = vec![Vec::new(); n_left];
    for &(u, v) in edges {
        assert!(u < n_left && v < n_right, "edge ({u}, {v}) out of range");
        adj[u].push(v);
    }
    for list in &mut adj {
        list.sort_unstable();
        list.dedup();
    }
    let mut mate_l: Vec<Option<usize>> = vec![None; n_left];
    let mut mate_r: Vec<Option<usize>> = vec![None; n_right];
    let mut dist = vec![usize::MAX; n_left];
    loop {
        // layered BFS from free left vertices
        let mut queue = VecDeque::new();
        for u in 0..n_left {
            if mate_l[u].is_none() {
                dist[u] = 0;
                queue.push_back(u);
            } else {
                dist[u] = usize::MAX;
            }
        }
        let mut found = false;
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                match mate_r[v] {
                    None => found = true,
                    Some(w) if dist[w] == usize::MAX => {
                        dist[w] = dist[u] + 1;
                        queue.push_back(w);
                    }
                    Some(_) => {}
                }
            }
        }
        if !found {
            break;
        }
        fn dfs(
            u: usize,
            adj: &[Vec<usize>],
            dist: &mut [usize],
            mate_l: &mut [Option<usize>],
            mate_r: &mut [Option<usize>],
        ) -> bool {
            for &v in &adj[u] {
                let ok = match mate_r[v] {
                    None => true,
                    Some(w) => dist[w] == dist[u] + 1 && dfs(w, adj, dist, mate_l, mate_r),
                };
                if ok {
                    mate_l[u] = Some(v);
                    mate_r[v] = Some(u);
                    return true;
                }
            }
            dist[u] = usize::MAX;
            false
        }
        for u in 0..n_left {
            if mate_l[u].is_none() {
                dfs(u, &adj, &mut dist, &mut mate_l, &mut mate_r);
            }
        }
    }
    mate_l
}

pub fn bipartite_matching_size(n_left: usize, n_right: usize, edges: &[(usize, usize)]) -> usize {
    hopcroft_karp(n_left, n_right, edges)
        .iter()
        .flatten()
        .count()
}

/// Maximum matching in a general graph by Edmonds' blossom algorithm.
/// Returns the mate of every vertex.
pub fn blossom(n: usize, edges: &[(usize, usize)]) -> Vec<Option<usize>> {
    let mut adj = vec![Vec::new(); n];
    for &(u, v) in edges {
        assert!(u < n && v < n && u != v, "bad edge ({u}, {v})");
        adj[u].push(v);
        adj[v].push(u);
    }
    for list in &mut adj {
        list.sort_unstable();
        list.dedup();
    }
    let mut mate: Vec<Option<usize>> = vec![None; n];
    for root in 0..n {
        if mate[root].is_none() {
            if let Some(path_end) = find_path(root, &adj, &mate) {
                augment(path_end.0, path_end.1, &mut mate);
            }
        }
    }
    mate
}

// Returns the free vertex reached and the parent array of the search tree.
fn find_path(
    root: usize,
    adj: &[Vec<usize>],
    mate: &[Option<usize>],
) -> Option<(usize, Vec<Option<usize>>)> {
    let n = adj.len();
    let mut used = vec![false; n];
    let mut parent: Vec<Option<usize>> = vec![None; n];
    let mut base: Vec<usize> = (0..n).collect();
    let mut queue = VecDeque::from([root]);
    used[root] = true;

    fn lca(
        mut a: usize,
        mut b: usize,
        base: &[usize],
        mate: &[Option<usize>],
        parent: &[Option<usize>],
    ) -> usize {
        let mut seen = vec![false; base.len()];
        loop {
            a = base[a];
            seen[a] = true;
            match mate[a] {
                Some(m) => a = parent[m].expect("matched vertex in tree has a parent"),
                None => break,
            }
        }
        loop {
            b = base[b];
            if seen[b] {
                return b;
            }
            b = parent[mate[b].expect("walks matched edges")].expect("tree parent");
        }
    }

    fn mark_path(
        mut v: usize,
        b: usize,
        mut child: usize,
        base: &[usize],
        mate: &[Option<usize>],
        parent: &mut [Option<usize>],
        in_blossom: &mut [bool],
    ) {
        while base[v] != b {
            let m = mate[v].expect("blossom path is alternating");
            in_blossom[base[v]] = true;
            in_blossom[base[m]] = true;
            parent[v] = Some(child);
            child = m;
            v = parent[m].expect("tree parent");
        }
    }

    while let Some(v) = queue.pop_front() {
        for &to in &adj[v] {
            if base[v] == base[to] || mate[v] == Some(to) {
                continue;
            }
            let to_is_outer = to == root || mate[to].is_some_and(|m| parent[m].is_some());
            if to_is_outer {
                let cur = lca(v, to, &base, mate, &parent);
                let mut in_blossom = vec![false; n];
                mark_path(v, cur, to, &base, mate, &mut parent, &mut in_blossom);
                mark_path(to, cur, v, &base, mate, &mut parent, &mut in_blossom);
                for i in 0..n {
                    if in_blossom[base[i]] {
                        base[i] = cur;
                        if !used[i] {
                            used[i] = true;
                            queue.push_back(i);
                        }
                    }
                }
            } else if parent[to].is_none() {
                parent[to] = Some(v);
                match mate[to] {
                    None => return Some((to, parent)),
                    Some(m) => {
                        used[m] = true;
                        queue.push_back(m);
                    }
                }
            }
        }
    }
    None
}

fn augment(mut v: usize, parent: Vec<Option<usize>>, mate: &mut [Option<usize>]) {
    loop {
        let pv = parent[v].expect("augmenting path reaches the root");
        let ppv = mate[pv];
        mate[v] = Some(pv);
        mate[pv] = Some(v);
        match ppv {
            Some(next) => v = next,
            None => break,
        }
    }
}

pub fn general_matching_size(n: usize, edges: &[(usize, usize)]) -> usize {
    blossom(n, edges).iter().flatten().count() / 2
}

/// Maximum matching size by exhaustive search over edge subsets, for tiny
/// graphs.
pub fn brute_force_matching_size(n: usize, edges: &[(usize, usize)]) -> usize {
    fn go(k: usize, edges: &[(usize, usize)], used: &mut Vec<bool>) -> usize {
        if k == edges.len() {
            return 0;
        }
        let mut best = go(k + 1, edges, used);
        let (u, v) = edges[k];
        if !used[u] && !used[v] {
            used[u] = true;
            used[v] = true;
            best = best.max(1 + go(k + 1, edges, used));
            used[u] = false;
            used[v] = false;
        }
        best
    }
    go(0, edges, &mut vec![false; n])
}

/// Maximum weight of a bipartite matching by dynamic programming over the
/// subsets of right vertices. Needs `n_right <= 20`.
pub fn max_weight_bipartite(n_left: usize, n_right: usize, edges: &[(usize, usize, u64)]) -> u64 {
    assert!(n_right <= 20, "right side too large for subset search");
    let mut w = vec![vec![0u64; n_right]; n_left];
    for &(u, v, x) in edges {
        w[u][v] = w[u][v].max(x);
    }
    let mut dp = vec![None; 1 << n_right];
    dp[0] = Some(0u64);
    for row in &w {
        let mut next = dp.clone();
        for mask in 0..dp.len() {
            let Some(cur) = dp[mask] else { continue };
            for (v, &x) in row.iter().enumerate() {
                if x > 0 && mask >> v & 1 == 0 {
                    let slot = &mut next[mask | 1 << v];
                    *slot = Some(slot.unwrap_or(0).max(cur + x));
                }
            }
        }
        dp = next;
    }
    dp.into_iter().flatten().max().unwrap_or(0)
}

/// Whether the induced subgraph on `vertices` has a perfect matching.
pub fn has_perfect_matching(vertices: &[usize], edges: &[(usize, usize)]) -> bool {
    if vertices.len() % 2 == 1 {
        return false;
    }
    let pos = |x: usize| vertices.iter().position(|&v| v == x);
    let sub: Vec<(usize, usize)> = edges
        .iter()
        .filter_map(|&(u, v)| Some((pos(u)?, pos(v)?)))
        .collect();
    general_matching_size(vertices.len(), &sub) * 2 == vertices.len()
}
