//! Topology- and timestamp-only scoring of collaboration-graph nodes for
//! merged-identity detection.
//!
//! The pipeline: build a temporal collaboration graph from multi-party
//! events, extract a node's ego network with decay-weighted edge
//! similarities, cluster the neighbors with Markov Clustering, then combine
//! a cluster-purity score with a temporal-mobility score. Low combined
//! scores flag nodes whose neighborhood splits into several well-separated
//! communities that are active over the same period — the signature of one
//! graph node standing in for multiple real entities.

pub mod centrality;
pub mod evaluation;
pub mod graph;
pub mod ingest;
pub mod mcl;
pub mod scoring;
pub mod synth;
