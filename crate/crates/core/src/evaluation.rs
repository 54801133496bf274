//! Ranking metrics over labeled score sets, parameter sweeps, and feature
//! export.
//!
//! The pipeline marks suspicious nodes with LOW combined scores, so every
//! metric takes a `positive_is_low` flag. AUC is computed by the
//! Mann–Whitney rank statistic with average ranks for ties, which equals
//! the trapezoidal area under the threshold-swept ROC curve.

use std::collections::HashMap;
use std::io::Write;

use thiserror::Error;

use crate::graph::TemporalGraph;
use crate::ingest::LabelRecord;
use crate::scoring::{score_nodes, ScoreError, ScoreParams, ScoreRecord};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("AUC needs both classes, got {positives} positives and {negatives} negatives")]
    SingleClass { positives: usize, negatives: usize },
    #[error("empty score set")]
    Empty,
    #[error("fraction must lie in (0, 1], got {0}")]
    InvalidFraction(f64),
    #[error("fraction {fraction} of {n} items selects no rows")]
    FractionTooSmall { fraction: f64, n: usize },
    #[error("node '{0}' has no label")]
    MissingLabel(String),
    #[error(transparent)]
    Score(#[from] ScoreError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// One scored, labeled node; `label` true marks the positive class.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledScore {
    pub node_id: String,
    pub score: f64,
    pub label: bool,
}

/// Area under the ROC curve. With `positive_is_low`, this is the
/// probability that a random positive scores below a random negative
/// (ties counting half).
pub fn auc(scores: &[LabeledScore], positive_is_low: bool) -> Result<f64, EvalError> {
    let n_pos = scores.iter().filter(|s| s.label).count();
    let n_neg = scores.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(EvalError::SingleClass {
            positives: n_pos,
            negatives: n_neg,
        });
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].score.total_cmp(&scores[b].score));

    let mut positive_rank_sum = 0.0f64;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j < order.len() && scores[order[j]].score == scores[order[i]].score {
            j += 1;
        }
        let avg_rank = (i + 1 + j) as f64 / 2.0;
        for &idx in &order[i..j] {
            if scores[idx].label {
                positive_rank_sum += avg_rank;
            }
        }
        i = j;
    }
    let u = positive_rank_sum - (n_pos * (n_pos + 1)) as f64 / 2.0;
    let auc_high = u / (n_pos as f64 * n_neg as f64);
    Ok(if positive_is_low {
        1.0 - auc_high
    } else {
        auc_high
    })
}

/// Sorts most-suspicious-first: by score (ascending when positives are
/// low), ties broken by node id.
fn ranked_indices(scores: &[LabeledScore], positive_is_low: bool) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| {
        let by_score = if positive_is_low {
            scores[a].score.total_cmp(&scores[b].score)
        } else {
            scores[b].score.total_cmp(&scores[a].score)
        };
        by_score.then_with(|| scores[a].node_id.cmp(&scores[b].node_id))
    });
    order
}

/// Fraction of true positives among the top ⌈fraction·n⌉ ranked items.
pub fn precision_at(
    scores: &[LabeledScore],
    fraction: f64,
    positive_is_low: bool,
) -> Result<f64, EvalError> {
    if scores.is_empty() {
        return Err(EvalError::Empty);
    }
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(EvalError::InvalidFraction(fraction));
    }
    let n = scores.len();
    if (fraction * n as f64).round() < 1.0 {
        return Err(EvalError::FractionTooSmall { fraction, n });
    }
    let top = (fraction * n as f64).ceil() as usize;
    let order = ranked_indices(scores, positive_is_low);
    let hits = order[..top].iter().filter(|&&i| scores[i].label).count();
    Ok(hits as f64 / top as f64)
}

/// Fraction of correct calls when predicting positive strictly beyond the
/// threshold (below it when positives are low, above it otherwise).
pub fn accuracy(
    scores: &[LabeledScore],
    threshold: f64,
    positive_is_low: bool,
) -> Result<f64, EvalError> {
    if scores.is_empty() {
        return Err(EvalError::Empty);
    }
    let correct = scores
        .iter()
        .filter(|s| {
            let predicted = if positive_is_low {
                s.score < threshold
            } else {
                s.score > threshold
            };
            predicted == s.label
        })
        .count();
    Ok(correct as f64 / scores.len() as f64)
}

/// Mean AUC over repeated random subsampling of the positive class down to
/// `positive_fraction` of its size (at least one positive kept), for
/// studying sensitivity to the class ratio.
pub fn subsampled_auc(
    scores: &[LabeledScore],
    positive_fraction: f64,
    repeats: usize,
    seed: u64,
    positive_is_low: bool,
) -> Result<f64, EvalError> {
    use rand::seq::SliceRandom;
    use rand::SeedableRng;

    if !(positive_fraction > 0.0 && positive_fraction <= 1.0) {
        return Err(EvalError::InvalidFraction(positive_fraction));
    }
    let positives: Vec<&LabeledScore> = scores.iter().filter(|s| s.label).collect();
    let negatives: Vec<&LabeledScore> = scores.iter().filter(|s| !s.label).collect();
    let keep = ((positives.len() as f64 * positive_fraction).round() as usize).max(1);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut total = 0.0;
    for _ in 0..repeats.max(1) {
        let mut pool = positives.clone();
        pool.shuffle(&mut rng);
        let subset: Vec<LabeledScore> = pool[..keep.min(pool.len())]
            .iter()
            .chain(&negatives)
            .map(|s| (*s).clone())
            .collect();
        total += auc(&subset, positive_is_low)?;
    }
    Ok(total / repeats.max(1) as f64)
}

/// One grid point of a parameter sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub tau: f64,
    pub alpha: f64,
    pub auc: f64,
}

/// Re-scores all labeled nodes for every τ and evaluates the ranking AUC
/// for every α. The purity and mobility components do not depend on α, so
/// each τ costs one scoring pass.
pub fn sweep(
    g: &TemporalGraph,
    labels: &[LabelRecord],
    taus: &[f64],
    alphas: &[f64],
    base: &ScoreParams,
) -> Result<Vec<SweepPoint>, EvalError> {
    let ids: Vec<String> = labels.iter().map(|l| l.node_id.clone()).collect();
    let mut out = Vec::with_capacity(taus.len() * alphas.len());
    for &tau in taus {
        let mut params = *base;
        params.tau = tau;
        let mut components = Vec::with_capacity(labels.len());
        for (record, label) in score_nodes(g, &ids, &params, false)
            .into_iter()
            .zip(labels)
        {
            let record = record?;
            components.push((record.nc_score, record.tm_score, label));
        }
        for &alpha in alphas {
            let scored: Vec<LabeledScore> = components
                .iter()
                .map(|(nc, tm, label)| LabeledScore {
                    node_id: label.node_id.clone(),
                    score: nc + alpha * tm,
                    label: label.label,
                })
                .collect();
            out.push(SweepPoint {
                tau,
                alpha,
                auc: auc(&scored, true)?,
            });
        }
    }
    Ok(out)
}

/// Writes a sweep as `tau,alpha,auc` CSV.
pub fn write_sweep_csv(mut out: impl Write, points: &[SweepPoint]) -> Result<(), EvalError> {
    writeln!(out, "tau,alpha,auc")?;
    for p in points {
        writeln!(
            out,
            "{},{},{}",
            format_sig6(p.tau),
            format_sig6(p.alpha),
            format_sig6(p.auc)
        )?;
    }
    Ok(())
}

/// Writes the feature matrix: one row per score record, with the label
/// column appended when a label map is supplied (every record must then be
/// covered). Records without centrality emit zeros for those features.
pub fn export_features(
    mut out: impl Write,
    records: &[ScoreRecord],
    labels: Option<&HashMap<String, bool>>,
) -> Result<(), EvalError> {
    let header = "node_id,nc_score,tm_score,k,degree,betweenness,closeness,eigenvector";
    if labels.is_some() {
        writeln!(out, "{header},label")?;
    } else {
        writeln!(out, "{header}")?;
    }
    for r in records {
        let (deg, bet, clo, eig) = match &r.centrality {
            Some(c) => (c.degree, c.betweenness, c.closeness, c.eigenvector),
            None => (0.0, 0.0, 0.0, 0.0),
        };
        let base = format!(
            "{},{},{},{},{},{},{},{}",
            r.node_id,
            format_sig6(r.nc_score),
            format_sig6(r.tm_score),
            r.k,
            format_sig6(deg),
            format_sig6(bet),
            format_sig6(clo),
            format_sig6(eig)
        );
        match labels {
            Some(map) => {
                let label = map
                    .get(&r.node_id)
                    .ok_or_else(|| EvalError::MissingLabel(r.node_id.clone()))?;
                writeln!(out, "{base},{}", u8::from(*label))?;
            }
            None => writeln!(out, "{base}")?,
        }
    }
    Ok(())
}

/// Formats a float rounded to 6 significant digits, in plain positional
/// notation for ordinary magnitudes (scientific outside 1e-5..1e15), with
/// trailing zeros trimmed. Pure string manipulation on the correctly
/// rounded `{:.5e}` form, so no re-rounding error can creep in.
pub fn format_sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{:.5e}", x); // d.dddddePP, 6 significant digits
    let (mantissa, exp) = sci.split_once('e').expect("scientific form");
    let exp: i32 = exp.parse().expect("exponent");
    if !(-5..=14).contains(&exp) {
        let trimmed = trim_zeros(mantissa);
        return format!("{trimmed}e{exp}");
    }
    let neg = mantissa.starts_with('-');
    let digits: String = mantissa.chars().filter(|c| c.is_ascii_digit()).collect();
    // place the decimal point `exp` positions right of the first digit
    let point = exp + 1;
    let mut s = String::new();
    if point <= 0 {
        s.push_str("0.");
        for _ in 0..(-point) {
            s.push('0');
        }
        s.push_str(&digits);
    } else if (point as usize) >= digits.len() {
        s.push_str(&digits);
        for _ in 0..(point as usize - digits.len()) {
            s.push('0');
        }
    } else {
        s.push_str(&digits[..point as usize]);
        s.push('.');
        s.push_str(&digits[point as usize..]);
    }
    let s = trim_zeros(&s);
    if neg {
        format!("-{s}")
    } else {
        s
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}
