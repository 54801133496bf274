//! Time-stamped collaboration graph and ego-network extraction.
//!
//! The graph is built from multi-party collaboration events. Pairwise edges
//! come from clique expansion: every unordered pair of participants of an
//! event gets one count at the event's time bin. Ego networks are induced
//! subgraphs over a node and its direct neighbors, with edge similarities
//! produced by an exponential time decay.

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Discrete time bin. Callers pre-bin finer granularities (the usual unit
/// is a year).
pub type TimeBin = i64;

/// Dense index of a node inside a [`TemporalGraph`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NodeIdx(pub u32);

impl NodeIdx {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("duplicate event id '{0}'")]
    DuplicateEventId(String),
    #[error("event '{0}' has no participants")]
    EmptyEvent(String),
    #[error("event '{event_id}' lists participant '{node}' more than once")]
    DuplicateParticipant { event_id: String, node: String },
    #[error("unknown node '{0}'")]
    UnknownNode(String),
    #[error("node '{0}' unscorable: no neighbors")]
    IsolatedNode(String),
    #[error("event time {time} is after t_max {t_max}")]
    TimeAfterMax { time: TimeBin, t_max: TimeBin },
    #[error("decay constant tau must be positive, got {0}")]
    InvalidTau(f64),
}

/// One multi-party collaboration event at a single time bin.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CollabEvent {
    pub event_id: String,
    pub time: TimeBin,
    pub participants: Vec<String>,
}

impl CollabEvent {
    /// Builds an event, rejecting empty or duplicated participant lists.
    pub fn new(
        event_id: impl Into<String>,
        time: TimeBin,
        participants: Vec<String>,
    ) -> Result<Self, GraphError> {
        let event_id = event_id.into();
        Self::check_participants(&event_id, &participants)?;
        Ok(Self {
            event_id,
            time,
            participants,
        })
    }

    fn check_participants(event_id: &str, participants: &[String]) -> Result<(), GraphError> {
        if participants.is_empty() {
            return Err(GraphError::EmptyEvent(event_id.to_string()));
        }
        let mut seen = HashSet::with_capacity(participants.len());
        for p in participants {
            if !seen.insert(p.as_str()) {
                return Err(GraphError::DuplicateParticipant {
                    event_id: event_id.to_string(),
                    node: p.clone(),
                });
            }
        }
        Ok(())
    }
}

/// Aggregated collaboration count at one time bin of one edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EdgeEvent {
    pub count: u32,
    pub time: TimeBin,
}

#[derive(Debug, Clone)]
pub(crate) struct StoredEvent {
    pub time: TimeBin,
    pub participants: Vec<NodeIdx>,
}

/// Immutable collaboration graph: node set, event store, and per-pair
/// time-binned collaboration counts.
#[derive(Debug)]
pub struct TemporalGraph {
    ids: Vec<String>,
    index: HashMap<String, NodeIdx>,
    neighbors: Vec<Vec<NodeIdx>>,
    edges: HashMap<(NodeIdx, NodeIdx), Vec<EdgeEvent>>,
    events: Vec<StoredEvent>,
    events_by_node: Vec<Vec<u32>>,
}

fn pair_key(a: NodeIdx, b: NodeIdx) -> (NodeIdx, NodeIdx) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

impl TemporalGraph {
    /// Builds the graph from a list of events via clique expansion.
    /// Events with a single participant create the node but no edges.
    pub fn build(events: &[CollabEvent]) -> Result<Self, GraphError> {
        let mut seen_ids: HashSet<&str> = HashSet::with_capacity(events.len());
        for ev in events {
            if !seen_ids.insert(ev.event_id.as_str()) {
                return Err(GraphError::DuplicateEventId(ev.event_id.clone()));
            }
            CollabEvent::check_participants(&ev.event_id, &ev.participants)?;
        }

        let mut ids: Vec<String> = Vec::new();
        let mut index: HashMap<String, NodeIdx> = HashMap::new();
        let mut intern = |name: &str, ids: &mut Vec<String>| -> NodeIdx {
            if let Some(&i) = index.get(name) {
                return i;
            }
            let i = NodeIdx(ids.len() as u32);
            ids.push(name.to_string());
            index.insert(name.to_string(), i);
            i
        };

        let mut stored: Vec<StoredEvent> = Vec::with_capacity(events.len());
        let mut counts: HashMap<(NodeIdx, NodeIdx), BTreeMap<TimeBin, u32>> = HashMap::new();
        for ev in events {
            let participants: Vec<NodeIdx> = ev
                .participants
                .iter()
                .map(|p| intern(p, &mut ids))
                .collect();
            for (i, &a) in participants.iter().enumerate() {
                for &b in &participants[i + 1..] {
                    *counts
                        .entry(pair_key(a, b))
                        .or_default()
                        .entry(ev.time)
                        .or_insert(0) += 1;
                }
            }
            stored.push(StoredEvent {
                time: ev.time,
                participants,
            });
        }

        let mut neighbors: Vec<Vec<NodeIdx>> = vec![Vec::new(); ids.len()];
        let mut edges: HashMap<(NodeIdx, NodeIdx), Vec<EdgeEvent>> =
            HashMap::with_capacity(counts.len());
        for ((a, b), by_time) in counts {
            neighbors[a.index()].push(b);
            neighbors[b.index()].push(a);
            let list = by_time
                .into_iter()
                .map(|(time, count)| EdgeEvent { count, time })
                .collect();
            edges.insert((a, b), list);
        }
        for list in &mut neighbors {
            list.sort_unstable();
        }

        let mut events_by_node: Vec<Vec<u32>> = vec![Vec::new(); ids.len()];
        for (pos, ev) in stored.iter().enumerate() {
            for &p in &ev.participants {
                events_by_node[p.index()].push(pos as u32);
            }
        }

        Ok(Self {
            ids,
            index,
            neighbors,
            edges,
            events: stored,
            events_by_node,
        })
    }

    pub fn node_count(&self) -> usize {
        self.ids.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn event_count(&self) -> usize {
        self.events.len()
    }

    pub fn node_idx(&self, id: &str) -> Option<NodeIdx> {
        self.index.get(id).copied()
    }

    pub fn node_id(&self, idx: NodeIdx) -> &str {
        &self.ids[idx.index()]
    }

    /// All node indices, in interning order.
    pub fn node_indices(&self) -> impl Iterator<Item = NodeIdx> + '_ {
        (0..self.ids.len() as u32).map(NodeIdx)
    }

    pub fn neighbors(&self, u: NodeIdx) -> &[NodeIdx] {
        &self.neighbors[u.index()]
    }

    /// Time-binned collaboration counts for an unordered pair, if the pair
    /// ever co-appeared in an event.
    pub fn edge_events(&self, a: NodeIdx, b: NodeIdx) -> Option<&[EdgeEvent]> {
        self.edges.get(&pair_key(a, b)).map(|v| v.as_slice())
    }

    pub(crate) fn events_of(&self, u: NodeIdx) -> impl Iterator<Item = &StoredEvent> {
        self.events_by_node[u.index()]
            .iter()
            .map(|&pos| &self.events[pos as usize])
    }

    /// Extracts the ego network of `u`: the induced subgraph over `u` and
    /// its direct neighbors, with decay-weighted edge similarities. `t_max`
    /// is the most recent event time over all edges inside the ego network.
    pub fn ego_network(&self, u: &str, tau: f64) -> Result<EgoNetwork, GraphError> {
        let u = self
            .node_idx(u)
            .ok_or_else(|| GraphError::UnknownNode(u.to_string()))?;
        self.ego_network_of(u, tau)
    }

    pub fn ego_network_of(&self, u: NodeIdx, tau: f64) -> Result<EgoNetwork, GraphError> {
        if tau <= 0.0 || !tau.is_finite() {
            return Err(GraphError::InvalidTau(tau));
        }
        let direct = &self.neighbors[u.index()];
        if direct.is_empty() {
            return Err(GraphError::IsolatedNode(self.node_id(u).to_string()));
        }

        let mut members: Vec<NodeIdx> = Vec::with_capacity(direct.len() + 1);
        members.extend_from_slice(direct);
        members.push(u);
        members.sort_unstable();
        let member_set: HashSet<NodeIdx> = members.iter().copied().collect();
        let local: HashMap<NodeIdx, usize> = members
            .iter()
            .enumerate()
            .map(|(i, &n)| (n, i))
            .collect();

        // Collect induced edges and the ego-network-global t_max first; the
        // decay weights all reference that single t_max.
        let mut pair_lists: Vec<(usize, usize, &[EdgeEvent])> = Vec::new();
        let mut t_max = TimeBin::MIN;
        for &v in &members {
            for &w in &self.neighbors[v.index()] {
                if w <= v || !member_set.contains(&w) {
                    continue;
                }
                let list = &self.edges[&pair_key(v, w)];
                for ee in list {
                    t_max = t_max.max(ee.time);
                }
                pair_lists.push((local[&v], local[&w], list));
            }
        }

        let mut edges = Vec::with_capacity(pair_lists.len());
        for (a, b, list) in pair_lists {
            let weight = decay_weight(list, t_max, tau)?;
            edges.push(EgoEdge { a, b, weight });
        }
        edges.sort_unstable_by_key(|e| (e.a, e.b));

        let ego_pos = local[&u];
        Ok(EgoNetwork {
            ego: u,
            members,
            ego_pos,
            edges,
            t_max,
            tau,
        })
    }
}

/// Decay-weighted similarity for one edge:
/// the sum over event bins of `count * exp(-(t_max - t) / tau)`.
pub fn decay_weight(events: &[EdgeEvent], t_max: TimeBin, tau: f64) -> Result<f64, GraphError> {
    if tau <= 0.0 || !tau.is_finite() {
        return Err(GraphError::InvalidTau(tau));
    }
    let mut sum = 0.0;
    for ee in events {
        if ee.time > t_max {
            return Err(GraphError::TimeAfterMax {
                time: ee.time,
                t_max,
            });
        }
        sum += ee.count as f64 * (-((t_max - ee.time) as f64) / tau).exp();
    }
    Ok(sum)
}

/// One weighted edge of an ego network, endpoints in local member indices
/// with `a < b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EgoEdge {
    pub a: usize,
    pub b: usize,
    pub weight: f64,
}

/// Induced subgraph over an ego node and its direct neighbors, with
/// decay-weighted pairwise similarities.
#[derive(Debug, Clone)]
pub struct EgoNetwork {
    ego: NodeIdx,
    members: Vec<NodeIdx>,
    ego_pos: usize,
    edges: Vec<EgoEdge>,
    t_max: TimeBin,
    tau: f64,
}

impl EgoNetwork {
    pub fn ego(&self) -> NodeIdx {
        self.ego
    }

    /// Members sorted by graph index; includes the ego.
    pub fn members(&self) -> &[NodeIdx] {
        &self.members
    }

    /// Position of the ego inside `members()`.
    pub fn ego_pos(&self) -> usize {
        self.ego_pos
    }

    pub fn member_count(&self) -> usize {
        self.members.len()
    }

    /// Weighted edges in local member indices, `a < b`, sorted.
    pub fn edges(&self) -> &[EgoEdge] {
        &self.edges
    }

    pub fn t_max(&self) -> TimeBin {
        self.t_max
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// Neighbors of the ego (everyone but the ego), as graph indices.
    pub fn alters(&self) -> Vec<NodeIdx> {
        let mut v = self.members.clone();
        v.remove(self.ego_pos);
        v
    }
}
