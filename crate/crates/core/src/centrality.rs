//! Centrality of the ego inside its own ego network (ego included),
//! normalized per metric by the sum over all members.
//!
//! Degree and eigenvector centrality use the similarity weights;
//! betweenness and closeness treat the network as unweighted. Each raw
//! metric is divided by its sum over all members, so the four features are
//! comparable across ego networks of different sizes; a metric that is zero
//! everywhere (betweenness on a clique) yields 0.

use std::collections::VecDeque;

use serde::Serialize;

use crate::graph::EgoNetwork;

const POWER_TOL: f64 = 1e-8;
const POWER_MAX_ITERS: usize = 1000;

/// The ego's four normalized centrality features.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CentralityVector {
    pub degree: f64,
    pub betweenness: f64,
    pub closeness: f64,
    pub eigenvector: f64,
    /// False when power iteration hit its iteration cap; `eigenvector` is
    /// 0 in that case.
    pub eigenvector_converged: bool,
}

struct MemberScores {
    degree: Vec<f64>,
    betweenness: Vec<f64>,
    closeness: Vec<f64>,
    eigenvector: Vec<f64>,
    eigenvector_converged: bool,
}

/// Computes the ego's centrality within the full ego network.
pub fn centrality_scores(net: &EgoNetwork) -> CentralityVector {
    let scores = member_scores(net);
    let ego = net.ego_pos();
    CentralityVector {
        degree: scores.degree[ego],
        betweenness: scores.betweenness[ego],
        closeness: scores.closeness[ego],
        eigenvector: scores.eigenvector[ego],
        eigenvector_converged: scores.eigenvector_converged,
    }
}

/// Raw metrics for every member, each normalized to sum to 1 (or all-zero
/// when the raw metric sums to zero).
fn member_scores(net: &EgoNetwork) -> MemberScores {
    let n = net.member_count();
    let mut weighted: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    let mut unweighted: Vec<Vec<usize>> = vec![Vec::new(); n];
    for e in net.edges() {
        if e.weight <= 0.0 {
            continue;
        }
        weighted[e.a].push((e.b, e.weight));
        weighted[e.b].push((e.a, e.weight));
        unweighted[e.a].push(e.b);
        unweighted[e.b].push(e.a);
    }

    let degree: Vec<f64> = weighted
        .iter()
        .map(|adj| adj.iter().map(|&(_, w)| w).sum())
        .collect();
    let betweenness = brandes_betweenness(&unweighted);
    let closeness = harmonic_closeness(&unweighted);
    let (eigenvector, eigenvector_converged) = power_iteration(&weighted);

    MemberScores {
        degree: normalize(degree),
        betweenness: normalize(betweenness),
        closeness: normalize(closeness),
        eigenvector: if eigenvector_converged {
            normalize(eigenvector)
        } else {
            vec![0.0; n]
        },
        eigenvector_converged,
    }
}

fn normalize(raw: Vec<f64>) -> Vec<f64> {
    let sum: f64 = raw.iter().sum();
    if sum > 0.0 {
        raw.into_iter().map(|v| v / sum).collect()
    } else {
        vec![0.0; raw.len()]
    }
}

/// Unweighted shortest-path betweenness, accumulated via breadth-first
/// search from every source. Each unordered pair is counted from both
/// endpoints; the constant factor cancels in normalization.
fn brandes_betweenness(adj: &[Vec<usize>]) -> Vec<f64> {
    let n = adj.len();
    let mut bc = vec![0.0f64; n];
    for s in 0..n {
        let mut stack: Vec<usize> = Vec::with_capacity(n);
        let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut sigma = vec![0.0f64; n];
        let mut dist = vec![-1i64; n];
        sigma[s] = 1.0;
        dist[s] = 0;
        let mut queue = VecDeque::new();
        queue.push_back(s);
        while let Some(v) = queue.pop_front() {
            stack.push(v);
            for &w in &adj[v] {
                if dist[w] < 0 {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
                if dist[w] == dist[v] + 1 {
                    sigma[w] += sigma[v];
                    preds[w].push(v);
                }
            }
        }
        let mut delta = vec![0.0f64; n];
        while let Some(w) = stack.pop() {
            for &v in &preds[w] {
                delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
            }
            if w != s {
                bc[w] += delta[w];
            }
        }
    }
    bc
}

/// Harmonic closeness over hop distances: Σ 1/d(v,w), unreachable pairs
/// contributing nothing.
fn harmonic_closeness(adj: &[Vec<usize>]) -> Vec<f64> {
    let n = adj.len();
    let mut scores = vec![0.0f64; n];
    let mut dist = vec![-1i64; n];
    for s in 0..n {
        dist.fill(-1);
        dist[s] = 0;
        let mut queue = VecDeque::new();
        queue.push_back(s);
        let mut total = 0.0;
        while let Some(v) = queue.pop_front() {
            if v != s {
                total += 1.0 / dist[v] as f64;
            }
            for &w in &adj[v] {
                if dist[w] < 0 {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
            }
        }
        scores[s] = total;
    }
    scores
}

/// Principal eigenvector of the weighted adjacency by power iteration.
/// Iterates (A + I)·x rather than A·x: the shift leaves eigenvectors
/// untouched but makes the top eigenvalue strictly dominant on bipartite
/// shapes (a star ego network oscillates forever under plain iteration).
fn power_iteration(weighted: &[Vec<(usize, f64)>]) -> (Vec<f64>, bool) {
    let n = weighted.len();
    let mut x = vec![1.0 / n as f64; n];
    for _ in 0..POWER_MAX_ITERS {
        let mut y = x.clone();
        for (v, adj) in weighted.iter().enumerate() {
            for &(w, weight) in adj {
                y[v] += weight * x[w];
            }
        }
        let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            return (y, true);
        }
        for v in &mut y {
            *v /= norm;
        }
        let diff = y
            .iter()
            .zip(&x)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        x = y;
        if diff < POWER_TOL {
            return (x, true);
        }
    }
    (x, false)
}
