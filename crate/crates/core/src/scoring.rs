//! The node-scoring pipeline: cluster-purity score, per-cluster temporal
//! activity profiles, temporal-mobility score, and their combination.
//!
//! Low purity (NC) means the neighbors fall into well-separated clusters —
//! evidence that one graph node aggregates several real entities. A high
//! mobility (TM) score counters that evidence when the clusters were active
//! in disjoint eras, which is how a single entity that changed affiliation
//! looks. The combined score `s = NC + α·TM` ranks nodes ascending, most
//! suspicious first.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::centrality::{centrality_scores, CentralityVector};
use crate::graph::{EgoNetwork, GraphError, NodeIdx, TemporalGraph, TimeBin};
use crate::mcl::{cluster_neighbors, Clustering, MclError, MclParams};

/// Upper bound on the number of time bins an activity profile may span;
/// protects against inputs whose timestamps are far finer than the intended
/// bin granularity (e.g., epoch seconds) silently exhausting memory.
pub const MAX_PROFILE_BINS: u64 = 1_000_000;

#[derive(Debug, Error)]
pub enum ScoreError {
    #[error("node '{node_id}' unscorable: {reason}")]
    Unscorable {
        node_id: String,
        reason: UnscorableReason,
    },
    #[error("invalid scoring parameter: {0}")]
    InvalidParams(String),
    #[error("probability vectors differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("probability entries must be positive, got {0}")]
    NonpositiveEntry(f64),
    #[error("activity range of node '{node_id}' spans {span} bins, above the {MAX_PROFILE_BINS} cap")]
    TimeSpanTooLarge { node_id: String, span: u64 },
    #[error(transparent)]
    Clustering(#[from] MclError),
}

/// Why a node cannot be scored.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnscorableReason {
    UnknownNode,
    NoNeighbors,
    NoEvents,
}

impl std::fmt::Display for UnscorableReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Self::UnknownNode => "unknown node",
            Self::NoNeighbors => "no neighbors",
            Self::NoEvents => "no events",
        };
        f.write_str(s)
    }
}

/// Knobs of the scoring pipeline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoreParams {
    /// Weight of the mobility score in `s = nc + alpha * tm`; ≥ 0.
    pub alpha: f64,
    /// Decay constant of the edge-similarity weights; > 0.
    pub tau: f64,
    /// Probability substituted for empty activity bins; > 0.
    pub laplace_eps: f64,
    /// Width of the centered moving average over activity bins; odd ≥ 1.
    pub smoothing_window: usize,
    pub mcl: MclParams,
}

impl Default for ScoreParams {
    fn default() -> Self {
        Self {
            alpha: 0.1,
            tau: 5.0,
            laplace_eps: 0.01,
            smoothing_window: 3,
            mcl: MclParams::default(),
        }
    }
}

impl ScoreParams {
    pub fn validate(&self) -> Result<(), ScoreError> {
        let bad = |msg: String| Err(ScoreError::InvalidParams(msg));
        if !self.alpha.is_finite() || self.alpha < 0.0 {
            return bad(format!("alpha must be >= 0, got {}", self.alpha));
        }
        if !self.tau.is_finite() || self.tau <= 0.0 {
            return bad(format!("tau must be > 0, got {}", self.tau));
        }
        if !self.laplace_eps.is_finite() || self.laplace_eps <= 0.0 {
            return bad(format!(
                "laplace epsilon must be > 0, got {}",
                self.laplace_eps
            ));
        }
        if self.smoothing_window == 0 || self.smoothing_window.is_multiple_of(2) {
            return bad(format!(
                "smoothing window must be odd, got {}",
                self.smoothing_window
            ));
        }
        self.mcl.validate().map_err(ScoreError::from)
    }
}

/// Normalized-cut purity of a neighbor clustering.
#[derive(Debug, Clone, PartialEq)]
pub struct NcResult {
    /// Sum over clusters of cut/(internal+cut).
    pub nc_raw: f64,
    /// `nc_raw / k`, except 1.0 when k = 1 (a single cluster is zero
    /// evidence of merging, so it gets the maximal-purity value).
    pub nc_score: f64,
    /// Per-cluster ⟨internal weight, cut weight⟩, in cluster order.
    pub per_cluster: Vec<ClusterWeights>,
    pub k: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClusterWeights {
    pub internal: f64,
    pub cut: f64,
}

/// Time-binned activity of one cluster across the ego's event range.
#[derive(Debug, Clone, PartialEq)]
pub struct ActivityProfile {
    /// 1-based, aligned with [`Clustering::cluster_index`].
    pub cluster_index: usize,
    /// Time bin of `raw[0]`.
    pub t_start: TimeBin,
    /// Fractional event counts per bin (the m/l attribution).
    pub raw: Vec<f64>,
    /// Centered moving average of `raw` (window truncated at the edges).
    pub smoothed: Vec<f64>,
    /// `smoothed` normalized, zero bins replaced by the Laplace epsilon,
    /// then renormalized; strictly positive, sums to 1.
    pub dist: Vec<f64>,
    /// Σ raw — the cluster's share of the ego's events.
    pub event_mass: f64,
}

/// Final per-node output of the pipeline.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoreRecord {
    pub node_id: String,
    pub nc_score: f64,
    pub tm_score: f64,
    pub s_score: f64,
    /// Number of neighbor clusters.
    pub k: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub centrality: Option<CentralityVector>,
    /// Whether the clustering iteration converged.
    pub converged: bool,
}

/// Computes the purity score of a clustering over the ego's neighbors.
/// Edge weights incident to the ego are excluded throughout.
///
/// The clustering must partition exactly the ego's neighbor set (any
/// neighbor without a cluster is a caller bug and panics).
pub fn nc_score(net: &EgoNetwork, clustering: &Clustering) -> NcResult {
    let k = clustering.k();
    let ego = net.ego_pos();
    let mut weights = vec![
        ClusterWeights {
            internal: 0.0,
            cut: 0.0
        };
        k
    ];
    for e in net.edges() {
        if e.a == ego || e.b == ego {
            continue;
        }
        let ca = clustering
            .cluster_index(net.members()[e.a])
            .expect("clustering must cover every neighbor")
            - 1;
        let cb = clustering
            .cluster_index(net.members()[e.b])
            .expect("clustering must cover every neighbor")
            - 1;
        if ca == cb {
            weights[ca].internal += e.weight;
        } else {
            weights[ca].cut += e.weight;
            weights[cb].cut += e.weight;
        }
    }
    let nc_raw: f64 = weights
        .iter()
        .map(|w| {
            let denom = w.internal + w.cut;
            if denom > 0.0 {
                w.cut / denom
            } else {
                // An isolated cluster has no edges at all; its separation
                // is treated as complete rather than undefined.
                0.0
            }
        })
        .sum();
    let nc_score = if k == 1 { 1.0 } else { nc_raw / k as f64 };
    NcResult {
        nc_raw,
        nc_score,
        per_cluster: weights,
        k,
    }
}

/// Centered moving average with the window truncated at the boundaries.
fn centered_moving_average(raw: &[f64], window: usize) -> Vec<f64> {
    let h = window / 2;
    (0..raw.len())
        .map(|i| {
            let lo = i.saturating_sub(h);
            let hi = (i + h).min(raw.len() - 1);
            let sum: f64 = raw[lo..=hi].iter().sum();
            sum / (hi - lo + 1) as f64
        })
        .collect()
}

/// Normalizes to a probability vector, then replaces exact-zero entries
/// with `eps` and renormalizes so KL divergences stay finite.
fn to_distribution(smoothed: &[f64], eps: f64) -> Vec<f64> {
    let sum: f64 = smoothed.iter().sum();
    let mut dist: Vec<f64> = if sum > 0.0 {
        smoothed.iter().map(|v| v / sum).collect()
    } else {
        vec![0.0; smoothed.len()]
    };
    for v in &mut dist {
        if *v == 0.0 {
            *v = eps;
        }
    }
    let total: f64 = dist.iter().sum();
    for v in &mut dist {
        *v /= total;
    }
    dist
}

/// Builds one activity profile per cluster from the ego's multi-party
/// events: an event at time `t` with `l` co-participants, `m` of them in
/// cluster `C_i`, adds `m/l` to that cluster's bin for `t`. Bins cover the
/// ego's event range contiguously; empty years in between stay as bins so
/// era gaps remain visible. Events where the ego is the sole participant
/// carry no co-participants and are ignored.
pub fn activity_profiles(
    g: &TemporalGraph,
    u: NodeIdx,
    clustering: &Clustering,
    params: &ScoreParams,
) -> Result<Vec<ActivityProfile>, ScoreError> {
    let events: Vec<(&[NodeIdx], TimeBin)> = g
        .events_of(u)
        .filter(|ev| ev.participants.len() >= 2)
        .map(|ev| (ev.participants.as_slice(), ev.time))
        .collect();
    if events.is_empty() {
        return Err(ScoreError::Unscorable {
            node_id: g.node_id(u).to_string(),
            reason: UnscorableReason::NoEvents,
        });
    }
    let t_min = events.iter().map(|&(_, t)| t).min().unwrap();
    let t_max = events.iter().map(|&(_, t)| t).max().unwrap();
    let span = (t_max - t_min) as u64 + 1;
    if span > MAX_PROFILE_BINS {
        return Err(ScoreError::TimeSpanTooLarge {
            node_id: g.node_id(u).to_string(),
            span,
        });
    }
    let bins = span as usize;
    let k = clustering.k();

    let mut raw = vec![vec![0.0f64; bins]; k];
    let mut m_counts = vec![0usize; k];
    for (participants, t) in events {
        let mut l = 0usize;
        for &p in participants {
            if p == u {
                continue;
            }
            let ci = clustering
                .cluster_index(p)
                .expect("every co-participant of the ego is a clustered neighbor")
                - 1;
            m_counts[ci] += 1;
            l += 1;
        }
        let bin = (t - t_min) as usize;
        for (ci, m) in m_counts.iter_mut().enumerate() {
            if *m > 0 {
                raw[ci][bin] += *m as f64 / l as f64;
                *m = 0;
            }
        }
    }

    Ok(raw
        .into_iter()
        .enumerate()
        .map(|(ci, raw)| {
            let event_mass: f64 = raw.iter().sum();
            let smoothed = centered_moving_average(&raw, params.smoothing_window);
            let dist = to_distribution(&smoothed, params.laplace_eps);
            ActivityProfile {
                cluster_index: ci + 1,
                t_start: t_min,
                raw,
                smoothed,
                dist,
                event_mass,
            }
        })
        .collect())
}

/// Symmetric Kullback–Leibler divergence D(P‖Q) + D(Q‖P), natural log.
pub fn symmetric_kl(p: &[f64], q: &[f64]) -> Result<f64, ScoreError> {
    if p.len() != q.len() {
        return Err(ScoreError::LengthMismatch(p.len(), q.len()));
    }
    let mut total = 0.0;
    for (&pi, &qi) in p.iter().zip(q) {
        if pi <= 0.0 {
            return Err(ScoreError::NonpositiveEntry(pi));
        }
        if qi <= 0.0 {
            return Err(ScoreError::NonpositiveEntry(qi));
        }
        total += (pi - qi) * (pi / qi).ln();
    }
    Ok(total)
}

/// Mobility score: the pairwise symmetric KL divergences between cluster
/// activity distributions, weighted by the clusters' combined event mass,
/// averaged and divided by k. Zero when fewer than two clusters exist.
///
/// `profiles` must line up 1:1 with the clustering that produced them
/// (`profiles.len() == k`); anything else is a caller bug and panics.
pub fn tm_score(profiles: &[ActivityProfile], k: usize) -> f64 {
    assert_eq!(
        profiles.len(),
        k,
        "profiles must correspond 1:1 with clusters"
    );
    if k < 2 {
        return 0.0;
    }
    let mut weighted_sum = 0.0;
    let mut weight_total = 0.0;
    for i in 0..k {
        for j in (i + 1)..k {
            let w = profiles[i].event_mass + profiles[j].event_mass;
            let skl = symmetric_kl(&profiles[i].dist, &profiles[j].dist)
                .expect("profile distributions are positive and equal-length");
            weighted_sum += w * skl;
            weight_total += w;
        }
    }
    if weight_total > 0.0 {
        weighted_sum / (k as f64 * weight_total)
    } else {
        0.0
    }
}

/// Combined score `nc + alpha * tm`; lower means more suspicious.
pub fn s_score(nc: f64, tm: f64, alpha: f64) -> f64 {
    nc + alpha * tm
}

/// Runs the full pipeline for one node: ego network → neighbor clustering
/// → purity score → activity profiles → mobility score → combined score.
/// Centrality features are computed only when `with_centrality` is set.
pub fn score_node(
    g: &TemporalGraph,
    node_id: &str,
    params: &ScoreParams,
    with_centrality: bool,
) -> Result<ScoreRecord, ScoreError> {
    params.validate()?;
    let unscorable = |reason| ScoreError::Unscorable {
        node_id: node_id.to_string(),
        reason,
    };
    let u = g
        .node_idx(node_id)
        .ok_or_else(|| unscorable(UnscorableReason::UnknownNode))?;
    if g.neighbors(u).is_empty() {
        return Err(unscorable(UnscorableReason::NoNeighbors));
    }
    let net = g.ego_network_of(u, params.tau).map_err(|e| match e {
        GraphError::IsolatedNode(_) => unscorable(UnscorableReason::NoNeighbors),
        GraphError::UnknownNode(_) => unscorable(UnscorableReason::UnknownNode),
        other => ScoreError::InvalidParams(other.to_string()),
    })?;
    let clustering = cluster_neighbors(&net, &params.mcl)?;
    let nc = nc_score(&net, &clustering);
    let profiles = activity_profiles(g, u, &clustering, params)?;
    let tm = tm_score(&profiles, clustering.k());
    let centrality = with_centrality.then(|| centrality_scores(&net));
    Ok(ScoreRecord {
        node_id: node_id.to_string(),
        nc_score: nc.nc_score,
        tm_score: tm,
        s_score: s_score(nc.nc_score, tm, params.alpha),
        k: clustering.k(),
        centrality,
        converged: clustering.converged(),
    })
}

/// Scores many nodes in parallel; the graph is shared read-only and the
/// result order matches the input order.
pub fn score_nodes(
    g: &TemporalGraph,
    node_ids: &[String],
    params: &ScoreParams,
    with_centrality: bool,
) -> Vec<Result<ScoreRecord, ScoreError>> {
    node_ids
        .par_iter()
        .map(|id| score_node(g, id, params, with_centrality))
        .collect()
}
