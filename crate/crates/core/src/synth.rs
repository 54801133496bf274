//! Synthetic labeled collaboration graphs with known ground truth.
//!
//! Three kinds of scored nodes are generated, each living in its own
//! disjoint neighborhood so egos never interfere:
//!
//! * **pure** — one collaborator community active over the full year span
//!   (negative label);
//! * **multi** — several communities, all active over the same span, as a
//!   merged identity would produce (positive label);
//! * **mobile** — two communities active in disjoint eras split at a break
//!   year, as a job change would produce (negative label — the hard case
//!   that topology alone cannot separate from a merge).
//!
//! Communities are Erdős–Rényi blocks at `intra_density`, augmented with a
//! random spanning path so each community is guaranteed connected. Community
//! edges carry sustained yearly activity; an `inter_noise` fraction of
//! cross-community pairs additionally collaborate exactly once, and only
//! while both communities are active. Every structural edge materializes as
//! at least one event, so component counts are construction guarantees
//! rather than probabilistic outcomes.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use thiserror::Error;

use crate::graph::{CollabEvent, TimeBin};
use crate::ingest::LabelRecord;

/// First calendar year of every generated world.
pub const BASE_YEAR: TimeBin = 2000;

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid generator config: {0}")]
    InvalidConfig(String),
}

/// Shape of the generated benchmark.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthConfig {
    /// Number of single-community nodes (negative).
    pub n_pure: usize,
    /// Number of merged nodes (positive).
    pub n_multi: usize,
    /// Number of era-switching nodes (negative).
    pub n_mobile: usize,
    /// Communities per merged node (≥ 2).
    pub entities_per_multi: usize,
    /// Collaborators in each community.
    pub collaborators_per_entity: usize,
    /// Probability of each within-community collaborator pair, in (0, 1].
    pub intra_density: f64,
    /// Probability that a cross-community collaborator pair shares one
    /// stray event, in [0, 1). Applies only while both communities are
    /// active, so era-disjoint communities get no cross edges.
    pub inter_noise: f64,
    /// Year span of every world (years ≥ 1).
    pub years: u32,
    /// Mean yearly event count per active edge (Poisson).
    pub events_per_year: f64,
    /// Year index where mobile nodes switch communities (splits the span
    /// into two non-empty eras).
    pub mobility_break: u32,
    /// RNG seed; the output is a pure function of the config.
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            n_pure: 25,
            n_multi: 25,
            n_mobile: 25,
            entities_per_multi: 2,
            collaborators_per_entity: 15,
            intra_density: 0.3,
            inter_noise: 0.02,
            years: 10,
            events_per_year: 3.0,
            mobility_break: 5,
            seed: 42,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<(), SynthError> {
        let fail = |msg: String| Err(SynthError::InvalidConfig(msg));
        if self.years == 0 {
            return fail("years must be at least 1".into());
        }
        if self.collaborators_per_entity == 0 {
            return fail("collaborators_per_entity must be at least 1".into());
        }
        if self.entities_per_multi < 2 {
            return fail(format!(
                "entities_per_multi must be at least 2, got {}",
                self.entities_per_multi
            ));
        }
        if !(self.intra_density > 0.0 && self.intra_density <= 1.0) {
            return fail(format!(
                "intra_density must lie in (0, 1], got {}",
                self.intra_density
            ));
        }
        if !(self.inter_noise >= 0.0 && self.inter_noise < 1.0) {
            return fail(format!(
                "inter_noise must lie in [0, 1), got {}",
                self.inter_noise
            ));
        }
        if !(self.events_per_year > 0.0 && self.events_per_year.is_finite()) {
            return fail(format!(
                "events_per_year must be positive, got {}",
                self.events_per_year
            ));
        }
        if self.n_mobile > 0 && !(self.mobility_break >= 1 && self.mobility_break < self.years) {
            return fail(format!(
                "mobility_break must split {} years into two non-empty eras, got {}",
                self.years, self.mobility_break
            ));
        }
        Ok(())
    }
}

/// Half-open range of year indices during which an edge is active.
type Era = (u32, u32);

struct Generator {
    cfg: SynthConfig,
    rng: ChaCha8Rng,
    poisson: Poisson<f64>,
    events: Vec<CollabEvent>,
    next_event: usize,
}

impl Generator {
    fn push_event(&mut self, a: &str, b: &str, year: u32) {
        let event = CollabEvent::new(
            format!("e{:06}", self.next_event),
            BASE_YEAR + TimeBin::from(year),
            vec![a.to_string(), b.to_string()],
        )
        .expect("generated events are structurally valid");
        self.next_event += 1;
        self.events.push(event);
    }

    /// Emits the yearly Poisson event counts for one edge; if every year
    /// comes up zero, one event is forced at a random year so the edge is
    /// guaranteed to exist in the graph.
    fn emit_edge(&mut self, a: &str, b: &str, era: Era) {
        let mut any = false;
        for year in era.0..era.1 {
            let count = self.poisson.sample(&mut self.rng) as usize;
            for _ in 0..count {
                self.push_event(a, b, year);
                any = true;
            }
        }
        if !any {
            let year = era.0 + self.rng.random_range(0..era.1 - era.0);
            self.push_event(a, b, year);
        }
    }

    /// Builds one ego's world: a community of collaborators per era entry,
    /// each fully attached to the ego, internally wired as a spanning path
    /// plus Erdős–Rényi extras. Cross-community pairs are sampled at the
    /// noise rate and collaborate once, within the overlap of their eras.
    fn world(&mut self, ego: &str, eras: &[Era]) {
        let size = self.cfg.collaborators_per_entity;
        let members: Vec<Vec<String>> = (0..eras.len())
            .map(|c| (0..size).map(|j| format!("{ego}_c{c}_{j:02}")).collect())
            .collect();

        for (community, &era) in members.iter().zip(eras) {
            for member in community {
                self.emit_edge(ego, member, era);
            }
        }
        for (community, &era) in members.iter().zip(eras) {
            let mut order: Vec<usize> = (0..size).collect();
            order.shuffle(&mut self.rng);
            let mut in_path = HashSet::new();
            for w in order.windows(2) {
                in_path.insert((w[0].min(w[1]), w[0].max(w[1])));
                self.emit_edge(&community[w[0]], &community[w[1]], era);
            }
            for i in 0..size {
                for j in (i + 1)..size {
                    if !in_path.contains(&(i, j)) && self.rng.random_bool(self.cfg.intra_density) {
                        self.emit_edge(&community[i], &community[j], era);
                    }
                }
            }
        }
        for a in 0..members.len() {
            for b in (a + 1)..members.len() {
                let overlap = (eras[a].0.max(eras[b].0), eras[a].1.min(eras[b].1));
                if overlap.0 >= overlap.1 {
                    continue; // disjoint eras: the communities are never co-active
                }
                for i in 0..size {
                    for j in 0..size {
                        if self.rng.random_bool(self.cfg.inter_noise) {
                            let year = overlap.0 + self.rng.random_range(0..overlap.1 - overlap.0);
                            self.push_event(&members[a][i], &members[b][j], year);
                        }
                    }
                }
            }
        }
    }
}

/// Generates the benchmark: events plus one label per scored node
/// (multi = positive; pure and mobile = negative). Deterministic given the
/// config, including its seed.
pub fn generate(cfg: &SynthConfig) -> Result<(Vec<CollabEvent>, Vec<LabelRecord>), SynthError> {
    cfg.validate()?;
    let poisson = Poisson::new(cfg.events_per_year)
        .map_err(|e| SynthError::InvalidConfig(format!("events_per_year: {e}")))?;
    let mut generator = Generator {
        cfg: *cfg,
        rng: ChaCha8Rng::seed_from_u64(cfg.seed),
        poisson,
        events: Vec::new(),
        next_event: 0,
    };
    let full: Era = (0, cfg.years);
    let mut labels = Vec::with_capacity(cfg.n_pure + cfg.n_multi + cfg.n_mobile);
    for i in 0..cfg.n_pure {
        let ego = format!("pure_{i:03}");
        generator.world(&ego, &[full]);
        labels.push(LabelRecord {
            node_id: ego,
            label: false,
        });
    }
    for i in 0..cfg.n_multi {
        let ego = format!("multi_{i:03}");
        generator.world(&ego, &vec![full; cfg.entities_per_multi]);
        labels.push(LabelRecord {
            node_id: ego,
            label: true,
        });
    }
    for i in 0..cfg.n_mobile {
        let ego = format!("mobile_{i:03}");
        generator.world(&ego, &[(0, cfg.mobility_break), (cfg.mobility_break, cfg.years)]);
        labels.push(LabelRecord {
            node_id: ego,
            label: false,
        });
    }
    Ok((generator.events, labels))
}
