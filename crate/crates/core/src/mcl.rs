//! Markov Clustering of an ego network with the ego removed.
//!
//! The neighbor set is clustered by iterating expansion (matrix power),
//! inflation (entrywise power + column renormalization), and pruning on the
//! column-stochastic transition matrix of the similarity graph, then reading
//! clusters off the attractors of the fixed point. The matrix is kept
//! column-major sparse so large ego networks with community structure stay
//! fast: pruning collapses fill-in after every iteration.

use std::collections::HashMap;

use thiserror::Error;

use crate::graph::{EgoNetwork, NodeIdx};

/// Diagonal threshold above which a node counts as an attractor at the
/// fixed point.
const ATTRACTOR_EPS: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum MclError {
    #[error("invalid clustering parameter: {0}")]
    InvalidParams(String),
    #[error("ego network has no neighbors to cluster")]
    NoNeighbors,
    #[error("node index {} not present in any cluster", .0 .0)]
    UnknownNode(NodeIdx),
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
}

/// Markov Clustering parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MclParams {
    /// Entrywise power applied at each inflation step; > 1.
    pub inflation: f64,
    /// Matrix power applied at each expansion step; ≥ 2.
    pub expansion: u32,
    /// Entries below this are dropped after each inflation (the column
    /// maximum always survives); ≥ 0.
    pub prune_threshold: f64,
    /// Iteration cap; exceeding it yields a best-effort clustering flagged
    /// as not converged.
    pub max_iters: u32,
    /// Convergence when the largest entrywise column change between
    /// successive iterates falls below this.
    pub convergence_eps: f64,
}

impl Default for MclParams {
    fn default() -> Self {
        Self {
            inflation: 1.4,
            expansion: 2,
            prune_threshold: 1e-5,
            max_iters: 200,
            convergence_eps: 1e-6,
        }
    }
}

impl MclParams {
    pub fn validate(&self) -> Result<(), MclError> {
        let bad = |msg: String| Err(MclError::InvalidParams(msg));
        if !self.inflation.is_finite() || self.inflation <= 1.0 {
            return bad(format!("inflation must be > 1, got {}", self.inflation));
        }
        if self.expansion < 2 {
            return bad(format!("expansion must be >= 2, got {}", self.expansion));
        }
        if self.prune_threshold.is_nan() || self.prune_threshold < 0.0 {
            return bad(format!(
                "prune threshold must be >= 0, got {}",
                self.prune_threshold
            ));
        }
        if self.convergence_eps.is_nan() || self.convergence_eps <= 0.0 {
            return bad(format!(
                "convergence epsilon must be > 0, got {}",
                self.convergence_eps
            ));
        }
        Ok(())
    }
}

/// A partition of an ego's neighbor set into clusters. Clusters hold graph
/// node indices, each sorted ascending; the cluster list is ordered by the
/// smallest member.
#[derive(Debug, Clone, PartialEq)]
pub struct Clustering {
    clusters: Vec<Vec<NodeIdx>>,
    assignment: HashMap<NodeIdx, usize>,
    converged: bool,
}

impl Clustering {
    /// Builds a clustering, rejecting empty clusters and repeated members.
    /// Clusters are canonicalized: members sorted, clusters ordered by
    /// smallest member.
    pub fn new(mut clusters: Vec<Vec<NodeIdx>>, converged: bool) -> Result<Self, MclError> {
        for c in &mut clusters {
            if c.is_empty() {
                return Err(MclError::InvalidPartition("empty cluster".to_string()));
            }
            c.sort_unstable();
        }
        clusters.sort_unstable_by_key(|c| c[0]);
        let mut assignment = HashMap::new();
        for (ci, c) in clusters.iter().enumerate() {
            for &node in c {
                if assignment.insert(node, ci).is_some() {
                    return Err(MclError::InvalidPartition(format!(
                        "node index {} appears in two clusters",
                        node.0
                    )));
                }
            }
        }
        Ok(Self {
            clusters,
            assignment,
            converged,
        })
    }

    pub fn k(&self) -> usize {
        self.clusters.len()
    }

    pub fn clusters(&self) -> &[Vec<NodeIdx>] {
        &self.clusters
    }

    /// Whether the iteration reached its fixed point within the cap.
    pub fn converged(&self) -> bool {
        self.converged
    }

    /// 1-based index of the cluster containing `node`.
    pub fn cluster_index(&self, node: NodeIdx) -> Result<usize, MclError> {
        self.assignment
            .get(&node)
            .map(|&ci| ci + 1)
            .ok_or(MclError::UnknownNode(node))
    }

    pub fn members(&self) -> impl Iterator<Item = NodeIdx> + '_ {
        self.clusters.iter().flatten().copied()
    }
}

/// Column-major sparse matrix; every stored value is strictly positive and
/// each column is sorted by row index.
#[derive(Debug, Clone)]
struct SparseCols {
    n: usize,
    cols: Vec<Vec<(u32, f64)>>,
}

impl SparseCols {
    fn normalize_columns(&mut self) {
        for col in &mut self.cols {
            let sum: f64 = col.iter().map(|&(_, v)| v).sum();
            if sum > 0.0 {
                for e in col.iter_mut() {
                    e.1 /= sum;
                }
            }
        }
    }

    /// `self * rhs`, accumulating each result column through a dense
    /// scratch vector. Iteration is ascending in both factors, so the
    /// floating-point accumulation order is fixed.
    fn multiply(&self, rhs: &SparseCols) -> SparseCols {
        let n = self.n;
        let mut acc = vec![0.0f64; n];
        let mut seen = vec![false; n];
        let mut touched: Vec<u32> = Vec::new();
        let mut cols = Vec::with_capacity(n);
        for j in 0..n {
            for &(k, vkj) in &rhs.cols[j] {
                for &(i, vik) in &self.cols[k as usize] {
                    let iu = i as usize;
                    if !seen[iu] {
                        seen[iu] = true;
                        touched.push(i);
                    }
                    acc[iu] += vik * vkj;
                }
            }
            touched.sort_unstable();
            let col: Vec<(u32, f64)> = touched
                .iter()
                .map(|&i| (i, acc[i as usize]))
                .filter(|&(_, v)| v > 0.0)
                .collect();
            for &i in &touched {
                acc[i as usize] = 0.0;
                seen[i as usize] = false;
            }
            touched.clear();
            cols.push(col);
        }
        SparseCols { n, cols }
    }

    fn matrix_power(&self, e: u32) -> SparseCols {
        let mut result = self.multiply(self);
        for _ in 2..e {
            result = result.multiply(self);
        }
        result
    }

    fn inflate(&mut self, r: f64) {
        for col in &mut self.cols {
            for e in col.iter_mut() {
                e.1 = e.1.powf(r);
            }
        }
        self.normalize_columns();
    }

    /// Drops entries below `threshold` (and underflowed zeros), keeping at
    /// least the column maximum so no column empties, then renormalizes.
    fn prune(&mut self, threshold: f64) {
        for col in &mut self.cols {
            if col.is_empty() {
                continue;
            }
            let mut max_row = col[0].0;
            let mut max_val = col[0].1;
            for &(r, v) in col.iter().skip(1) {
                if v > max_val {
                    max_val = v;
                    max_row = r;
                }
            }
            col.retain(|&(r, v)| r == max_row || (v > 0.0 && v >= threshold));
            let sum: f64 = col.iter().map(|&(_, v)| v).sum();
            if sum > 0.0 {
                for e in col.iter_mut() {
                    e.1 /= sum;
                }
            }
        }
    }

    /// Largest entrywise difference against `other`, treating missing
    /// entries as zero.
    fn max_column_change(&self, other: &SparseCols) -> f64 {
        let mut delta = 0.0f64;
        for j in 0..self.n {
            let a = &self.cols[j];
            let b = &other.cols[j];
            let (mut x, mut y) = (0usize, 0usize);
            while x < a.len() || y < b.len() {
                let d = match (a.get(x), b.get(y)) {
                    (Some(&(ra, va)), Some(&(rb, vb))) => {
                        if ra == rb {
                            x += 1;
                            y += 1;
                            (va - vb).abs()
                        } else if ra < rb {
                            x += 1;
                            va
                        } else {
                            y += 1;
                            vb
                        }
                    }
                    (Some(&(_, va)), None) => {
                        x += 1;
                        va
                    }
                    (None, Some(&(_, vb))) => {
                        y += 1;
                        vb
                    }
                    (None, None) => unreachable!(),
                };
                delta = delta.max(d);
            }
        }
        delta
    }

    fn diagonal(&self, j: usize) -> f64 {
        let col = &self.cols[j];
        match col.binary_search_by_key(&(j as u32), |&(r, _)| r) {
            Ok(pos) => col[pos].1,
            Err(_) => 0.0,
        }
    }
}

struct UnionFind {
    parent: Vec<u32>,
    size: Vec<u32>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n as u32).collect(),
            size: vec![1; n],
        }
    }

    fn find(&mut self, x: usize) -> usize {
        let mut root = x;
        while self.parent[root] as usize != root {
            root = self.parent[root] as usize;
        }
        let mut cur = x;
        while cur != root {
            let next = self.parent[cur] as usize;
            self.parent[cur] = root as u32;
            cur = next;
        }
        root
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        let (big, small) = if self.size[ra] >= self.size[rb] {
            (ra, rb)
        } else {
            (rb, ra)
        };
        self.parent[small] = big as u32;
        self.size[big] += self.size[small];
    }
}

/// Clusters the ego's neighbors: removes the ego and its incident edges,
/// builds the column-stochastic transition matrix of what remains (with a
/// per-node self-loop equal to its largest incident similarity), and runs
/// the expansion/inflation/pruning loop to a fixed point.
///
/// Non-convergence within `max_iters` is not an error; the best-effort
/// partition is returned with `converged() == false`.
pub fn cluster_neighbors(net: &EgoNetwork, params: &MclParams) -> Result<Clustering, MclError> {
    params.validate()?;
    let n = net.member_count() - 1;
    if n == 0 {
        return Err(MclError::NoNeighbors);
    }
    let ego = net.ego_pos();
    let reindex = |m: usize| if m < ego { m } else { m - 1 };

    let mut cols: Vec<Vec<(u32, f64)>> = vec![Vec::new(); n];
    for e in net.edges() {
        if e.a == ego || e.b == ego || e.weight <= 0.0 {
            continue;
        }
        let (a, b) = (reindex(e.a), reindex(e.b));
        cols[a].push((b as u32, e.weight));
        cols[b].push((a as u32, e.weight));
    }
    for (i, col) in cols.iter_mut().enumerate() {
        // Self-loop = largest incident similarity; nodes left isolated by
        // the ego's removal get 1.0, which normalizes to a fixed singleton.
        let max_incident = col.iter().map(|&(_, w)| w).fold(0.0f64, f64::max);
        let self_loop = if max_incident > 0.0 { max_incident } else { 1.0 };
        col.push((i as u32, self_loop));
        col.sort_unstable_by_key(|&(r, _)| r);
    }
    let mut m = SparseCols { n, cols };
    m.normalize_columns();

    let mut converged = false;
    for _ in 0..params.max_iters {
        let mut next = m.matrix_power(params.expansion);
        next.inflate(params.inflation);
        next.prune(params.prune_threshold);
        let delta = next.max_column_change(&m);
        m = next;
        if delta < params.convergence_eps {
            converged = true;
            break;
        }
    }

    let local_clusters = extract_clusters(&m);

    let neighbors: Vec<NodeIdx> = {
        let mut v = net.members().to_vec();
        v.remove(ego);
        v
    };
    let clusters: Vec<Vec<NodeIdx>> = local_clusters
        .into_iter()
        .map(|c| c.into_iter().map(|i| neighbors[i as usize]).collect())
        .collect();
    Clustering::new(clusters, converged)
}

/// Reads the partition off a fixed-point matrix: attractors are nodes with
/// a surviving diagonal entry; attractors with a positive entry between
/// them share a cluster; every other node joins the attractor holding most
/// of its column mass (ties to the smallest attractor index, which the
/// ascending scan picks up automatically). A node whose column retains no
/// attractor mass becomes its own singleton.
fn extract_clusters(m: &SparseCols) -> Vec<Vec<u32>> {
    let n = m.n;
    let is_attractor: Vec<bool> = (0..n).map(|j| m.diagonal(j) >= ATTRACTOR_EPS).collect();

    let mut uf = UnionFind::new(n);
    for j in 0..n {
        if !is_attractor[j] {
            continue;
        }
        for &(i, v) in &m.cols[j] {
            if v > 0.0 && is_attractor[i as usize] {
                uf.union(i as usize, j);
            }
        }
    }

    let mut groups: HashMap<usize, Vec<u32>> = HashMap::new();
    for (j, &attracts) in is_attractor.iter().enumerate() {
        if attracts {
            let root = uf.find(j);
            groups.entry(root).or_default().push(j as u32);
        }
    }
    let mut singletons: Vec<Vec<u32>> = Vec::new();
    for j in 0..n {
        if is_attractor[j] {
            continue;
        }
        let mut best: Option<(f64, u32)> = None;
        for &(i, v) in &m.cols[j] {
            if v <= 0.0 || !is_attractor[i as usize] {
                continue;
            }
            if best.is_none_or(|(bv, _)| v > bv) {
                best = Some((v, i));
            }
        }
        match best {
            Some((_, attr)) => {
                let root = uf.find(attr as usize);
                groups.entry(root).or_default().push(j as u32);
            }
            None => singletons.push(vec![j as u32]),
        }
    }

    let mut clusters: Vec<Vec<u32>> = groups.into_values().collect();
    clusters.extend(singletons);
    for c in &mut clusters {
        c.sort_unstable();
    }
    clusters.sort_unstable_by_key(|c| c[0]);
    clusters
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{CollabEvent, TemporalGraph};

    fn ev(id: &str, time: i64, parts: &[&str]) -> CollabEvent {
        CollabEvent::new(id, time, parts.iter().map(|s| s.to_string()).collect()).unwrap()
    }

    /// Builds a graph where the ego `u` is linked to every listed node and
    /// the listed undirected edges hold among the neighbors, all events at
    /// one time bin so similarities equal raw counts.
    fn ego_fixture(neighbors: &[&str], edges: &[(&str, &str)]) -> (TemporalGraph, EgoNetwork) {
        let mut events = Vec::new();
        for (i, nb) in neighbors.iter().enumerate() {
            events.push(ev(&format!("u{i}"), 2000, &["u", nb]));
        }
        for (i, (a, b)) in edges.iter().enumerate() {
            events.push(ev(&format!("m{i}"), 2000, &[a, b]));
        }
        let g = TemporalGraph::build(&events).unwrap();
        let net = g.ego_network("u", 5.0).unwrap();
        (g, net)
    }

    fn named_clusters(g: &TemporalGraph, c: &Clustering) -> Vec<Vec<String>> {
        let mut out: Vec<Vec<String>> = c
            .clusters()
            .iter()
            .map(|cl| cl.iter().map(|&n| g.node_id(n).to_string()).collect())
            .collect();
        for cl in &mut out {
            cl.sort();
        }
        out.sort();
        out
    }

    /// Independent dense-matrix reference implementation used as the test
    /// oracle. Follows the same update rules with no sparse bookkeeping.
    // Index loops keep this close to the textbook column-stochastic update
    // rules it exists to mirror.
    #[allow(clippy::needless_range_loop)]
    mod dense_ref {
        pub struct DenseMcl {
            pub n: usize,
            pub m: Vec<Vec<f64>>,
            pub converged: bool,
        }

        fn normalize(m: &mut [Vec<f64>], n: usize) {
            for j in 0..n {
                let sum: f64 = (0..n).map(|i| m[i][j]).sum();
                if sum > 0.0 {
                    for i in 0..n {
                        m[i][j] /= sum;
                    }
                }
            }
        }

        pub fn run(
            n: usize,
            edges: &[(usize, usize, f64)],
            params: &super::MclParams,
        ) -> DenseMcl {
            let mut a = vec![vec![0.0f64; n]; n];
            for &(i, j, w) in edges {
                a[i][j] += w;
                a[j][i] += w;
            }
            for i in 0..n {
                let mx = (0..n).map(|k| a[k][i]).fold(0.0f64, f64::max);
                a[i][i] = if mx > 0.0 { mx } else { 1.0 };
            }
            normalize(&mut a, n);

            let mut converged = false;
            for _ in 0..params.max_iters {
                // expansion: a^e
                let mut cur = a.clone();
                for _ in 1..params.expansion {
                    let mut next = vec![vec![0.0f64; n]; n];
                    for j in 0..n {
                        for k in 0..n {
                            if a[k][j] == 0.0 {
                                continue;
                            }
                            for i in 0..n {
                                next[i][j] += cur[i][k] * a[k][j];
                            }
                        }
                    }
                    cur = next;
                }
                // inflation
                for j in 0..n {
                    for i in 0..n {
                        if cur[i][j] > 0.0 {
                            cur[i][j] = cur[i][j].powf(params.inflation);
                        }
                    }
                }
                normalize(&mut cur, n);
                // pruning: keep the column max, drop small entries
                for j in 0..n {
                    let mut max_i = 0;
                    for i in 1..n {
                        if cur[i][j] > cur[max_i][j] {
                            max_i = i;
                        }
                    }
                    for i in 0..n {
                        if i != max_i && cur[i][j] < params.prune_threshold {
                            cur[i][j] = 0.0;
                        }
                    }
                }
                normalize(&mut cur, n);
                let mut delta = 0.0f64;
                for j in 0..n {
                    for i in 0..n {
                        delta = delta.max((cur[i][j] - a[i][j]).abs());
                    }
                }
                a = cur;
                if delta < params.convergence_eps {
                    converged = true;
                    break;
                }
            }
            DenseMcl { n, m: a, converged }
        }

        /// Cluster read-off mirroring the production rules.
        pub fn clusters(state: &DenseMcl) -> Vec<Vec<usize>> {
            let n = state.n;
            let attr: Vec<bool> = (0..n).map(|i| state.m[i][i] >= 1e-8).collect();
            let mut group = vec![usize::MAX; n];
            let mut k = 0;
            // attractor systems: connected components over positive entries
            // among attractors (either direction)
            for s in 0..n {
                if !attr[s] || group[s] != usize::MAX {
                    continue;
                }
                let mut stack = vec![s];
                group[s] = k;
                while let Some(x) = stack.pop() {
                    for y in 0..n {
                        if attr[y]
                            && group[y] == usize::MAX
                            && (state.m[x][y] > 0.0 || state.m[y][x] > 0.0)
                        {
                            group[y] = k;
                            stack.push(y);
                        }
                    }
                }
                k += 1;
            }
            let mut clusters: Vec<Vec<usize>> = vec![Vec::new(); k];
            for i in 0..n {
                if attr[i] {
                    clusters[group[i]].push(i);
                }
            }
            for j in 0..n {
                if attr[j] {
                    continue;
                }
                let mut best: Option<(f64, usize)> = None;
                for i in 0..n {
                    if !attr[i] || state.m[i][j] <= 0.0 {
                        continue;
                    }
                    if best.is_none_or(|(bv, _)| state.m[i][j] > bv) {
                        best = Some((state.m[i][j], i));
                    }
                }
                match best {
                    Some((_, i)) => clusters[group[i]].push(j),
                    None => clusters.push(vec![j]),
                }
            }
            for c in &mut clusters {
                c.sort_unstable();
            }
            clusters.retain(|c| !c.is_empty());
            clusters.sort();
            clusters
        }
    }

    /// Runs the dense oracle on an ego network and returns canonical
    /// clusters in graph node indices plus the convergence flag.
    fn dense_oracle_full(net: &EgoNetwork, params: &MclParams) -> (Vec<Vec<NodeIdx>>, bool) {
        let ego = net.ego_pos();
        let reindex = |m: usize| if m < ego { m } else { m - 1 };
        let n = net.member_count() - 1;
        let edges: Vec<(usize, usize, f64)> = net
            .edges()
            .iter()
            .filter(|e| e.a != ego && e.b != ego && e.weight > 0.0)
            .map(|e| (reindex(e.a), reindex(e.b), e.weight))
            .collect();
        let state = dense_ref::run(n, &edges, params);
        let neighbors: Vec<NodeIdx> = {
            let mut v = net.members().to_vec();
            v.remove(ego);
            v
        };
        let mut out: Vec<Vec<NodeIdx>> = dense_ref::clusters(&state)
            .into_iter()
            .map(|c| c.into_iter().map(|i| neighbors[i]).collect())
            .collect();
        for c in &mut out {
            c.sort_unstable();
        }
        out.sort();
        (out, state.converged)
    }

    fn dense_oracle(net: &EgoNetwork, params: &MclParams) -> Vec<Vec<NodeIdx>> {
        dense_oracle_full(net, params).0
    }

    fn canonical(c: &Clustering) -> Vec<Vec<NodeIdx>> {
        let mut out: Vec<Vec<NodeIdx>> = c.clusters().to_vec();
        out.sort();
        out
    }

    #[test]
    fn two_disjoint_triangles_give_two_clusters() {
        let (g, net) = ego_fixture(
            &["a", "b", "c", "d", "e", "f"],
            &[
                ("a", "b"),
                ("b", "c"),
                ("a", "c"),
                ("d", "e"),
                ("e", "f"),
                ("d", "f"),
            ],
        );
        let c = cluster_neighbors(&net, &MclParams::default()).unwrap();
        assert!(c.converged());
        assert_eq!(
            named_clusters(&g, &c),
            vec![
                vec!["a".to_string(), "b".to_string(), "c".to_string()],
                vec!["d".to_string(), "e".to_string(), "f".to_string()],
            ]
        );
        assert_eq!(canonical(&c), dense_oracle(&net, &MclParams::default()));
    }

    #[test]
    fn single_triangle_not_split() {
        let (g, net) = ego_fixture(&["a", "b", "c"], &[("a", "b"), ("b", "c"), ("a", "c")]);
        let c = cluster_neighbors(&net, &MclParams::default()).unwrap();
        assert_eq!(c.k(), 1);
        assert_eq!(named_clusters(&g, &c)[0].len(), 3);
        assert_eq!(canonical(&c), dense_oracle(&net, &MclParams::default()));
    }

    #[test]
    fn complete_graph_k6_gives_one_cluster() {
        let names = ["a", "b", "c", "d", "e", "f"];
        let mut edges = Vec::new();
        for i in 0..names.len() {
            for j in (i + 1)..names.len() {
                edges.push((names[i], names[j]));
            }
        }
        let (_, net) = ego_fixture(&names, &edges);
        let c = cluster_neighbors(&net, &MclParams::default()).unwrap();
        assert_eq!(c.k(), 1);
        assert_eq!(canonical(&c), dense_oracle(&net, &MclParams::default()));
    }

    #[test]
    fn single_neighbor_is_singleton_cluster() {
        let (g, net) = ego_fixture(&["a"], &[]);
        let c = cluster_neighbors(&net, &MclParams::default()).unwrap();
        assert!(c.converged());
        assert_eq!(c.k(), 1);
        assert_eq!(named_clusters(&g, &c), vec![vec!["a".to_string()]]);
    }

    #[test]
    fn ego_never_appears_in_clusters() {
        let (g, net) = ego_fixture(&["a", "b", "c"], &[("a", "b")]);
        let c = cluster_neighbors(&net, &MclParams::default()).unwrap();
        let u = g.node_idx("u").unwrap();
        assert!(c.members().all(|n| n != u));
        assert!(c.cluster_index(u).is_err());
    }

    #[test]
    fn cluster_index_is_one_based_and_total() {
        let (g, net) = ego_fixture(
            &["a", "b", "c", "d"],
            &[("a", "b"), ("c", "d")],
        );
        let c = cluster_neighbors(&net, &MclParams::default()).unwrap();
        assert_eq!(c.k(), 2);
        for name in ["a", "b", "c", "d"] {
            let idx = c.cluster_index(g.node_idx(name).unwrap()).unwrap();
            assert!((1..=2).contains(&idx));
        }
        let (a, b) = (g.node_idx("a").unwrap(), g.node_idx("b").unwrap());
        assert_eq!(c.cluster_index(a).unwrap(), c.cluster_index(b).unwrap());
    }

    #[test]
    fn params_validation() {
        let p = MclParams {
            inflation: 1.0,
            ..MclParams::default()
        };
        assert!(matches!(p.validate(), Err(MclError::InvalidParams(_))));
        let p = MclParams {
            expansion: 1,
            ..MclParams::default()
        };
        assert!(p.validate().is_err());
        let p = MclParams {
            prune_threshold: -0.1,
            ..MclParams::default()
        };
        assert!(p.validate().is_err());
        let p = MclParams {
            convergence_eps: 0.0,
            ..MclParams::default()
        };
        assert!(p.validate().is_err());
        assert!(MclParams::default().validate().is_ok());
    }

    #[test]
    fn clustering_constructor_rejects_bad_partitions() {
        let n = |i: u32| NodeIdx(i);
        assert!(Clustering::new(vec![vec![]], true).is_err());
        assert!(Clustering::new(vec![vec![n(1)], vec![n(1)]], true).is_err());
        let c = Clustering::new(vec![vec![n(3), n(1)], vec![n(2)]], true).unwrap();
        assert_eq!(c.clusters(), &[vec![n(1), n(3)], vec![n(2)]]);
    }

    /// Random ego fixture: the ego links to all of `n_neighbors`, and
    /// neighbor-neighbor edges appear with the given density, weights from
    /// a few repeated events at random years.
    fn random_ego(seed: u64, n_neighbors: usize, density: f64) -> (TemporalGraph, EgoNetwork) {
        random_ego_scaled(seed, n_neighbors, density, 1)
    }

    #[test]
    fn partition_covers_neighbors_exactly_on_random_egos() {
        for seed in 0..50 {
            let n = 2 + (seed as usize % 20);
            let (g, net) = random_ego(seed, n, 0.3);
            let c = cluster_neighbors(&net, &MclParams::default()).unwrap();
            let mut members: Vec<NodeIdx> = c.members().collect();
            members.sort_unstable();
            let mut expect: Vec<NodeIdx> = net.members().to_vec();
            expect.remove(net.ego_pos());
            assert_eq!(members, expect, "seed {seed}");
            let _ = g;
        }
    }

    /// Oracle: connected components of the ego-removed graph via union-find.
    fn components(net: &EgoNetwork) -> HashMap<NodeIdx, usize> {
        let ego = net.ego_pos();
        let n = net.member_count();
        let mut uf = UnionFind::new(n);
        for e in net.edges() {
            if e.a != ego && e.b != ego && e.weight > 0.0 {
                uf.union(e.a, e.b);
            }
        }
        let mut roots = HashMap::new();
        for (i, &node) in net.members().iter().enumerate() {
            if i != ego {
                roots.insert(node, uf.find(i));
            }
        }
        roots
    }

    #[test]
    fn clusters_never_span_connected_components() {
        for seed in 0..50 {
            let n = 2 + (seed as usize % 25);
            let (_, net) = random_ego(seed + 1000, n, 0.15);
            let c = cluster_neighbors(&net, &MclParams::default()).unwrap();
            let comp = components(&net);
            for cluster in c.clusters() {
                let root = comp[&cluster[0]];
                for &node in cluster {
                    assert_eq!(comp[&node], root, "seed {seed}: cluster spans components");
                }
            }
        }
    }

    #[test]
    fn identical_input_gives_identical_clustering() {
        for seed in [1, 7, 42] {
            let (_, net) = random_ego(seed, 15, 0.3);
            let c1 = cluster_neighbors(&net, &MclParams::default()).unwrap();
            let c2 = cluster_neighbors(&net, &MclParams::default()).unwrap();
            assert_eq!(c1, c2);
        }
    }

    #[test]
    fn sparse_matches_dense_reference_on_random_egos() {
        for seed in 0..30 {
            let n = 2 + (seed as usize % 15);
            let (_, net) = random_ego(seed + 2000, n, 0.35);
            let params = MclParams::default();
            let c = cluster_neighbors(&net, &params).unwrap();
            let (expect, expect_converged) = dense_oracle_full(&net, &params);
            assert_eq!(canonical(&c), expect, "seed {seed}");
            assert_eq!(c.converged(), expect_converged, "seed {seed}");
        }
    }

    /// Same generator as [`random_ego`] but with every event repeated
    /// `scale` times, multiplying all similarities by exactly `scale`.
    fn random_ego_scaled(seed: u64, n_neighbors: usize, density: f64, scale: u32) -> (TemporalGraph, EgoNetwork) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut events = Vec::new();
        let mut eid = 0;
        let mut push = |events: &mut Vec<CollabEvent>, t: i64, parts: Vec<String>| {
            for _ in 0..scale {
                events.push(CollabEvent::new(format!("e{eid}"), t, parts.clone()).unwrap());
                eid += 1;
            }
        };
        for i in 0..n_neighbors {
            let t = rng.random_range(2000..2010);
            push(&mut events, t, vec!["u".to_string(), format!("n{i}")]);
        }
        for i in 0..n_neighbors {
            for j in (i + 1)..n_neighbors {
                if rng.random_bool(density) {
                    let reps = rng.random_range(1..=3);
                    for _ in 0..reps {
                        let t = rng.random_range(2000..2010);
                        push(&mut events, t, vec![format!("n{i}"), format!("n{j}")]);
                    }
                }
            }
        }
        let g = TemporalGraph::build(&events).unwrap();
        let net = g.ego_network("u", 5.0).unwrap();
        (g, net)
    }

    #[test]
    fn uniform_weight_scaling_leaves_clustering_unchanged() {
        for scale in [2u32, 3, 4] {
            for seed in [3u64, 9, 21] {
                let (g1, net1) = random_ego_scaled(seed, 12, 0.3, 1);
                let (g2, net2) = random_ego_scaled(seed, 12, 0.3, scale);
                let base = cluster_neighbors(&net1, &MclParams::default()).unwrap();
                let scaled = cluster_neighbors(&net2, &MclParams::default()).unwrap();
                assert_eq!(
                    named_clusters(&g1, &base),
                    named_clusters(&g2, &scaled),
                    "scale {scale} seed {seed}"
                );
            }
        }
    }
}
