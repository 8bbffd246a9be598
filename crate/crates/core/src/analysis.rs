//! The autoregressive accuracy law, its Monte-Carlo check, the attention
//! cost model, and qualitative graph saturation metrics.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::graph::StateGraph;

/// Per-step error probability ε and output length L. A length-L output is
/// correct exactly when all L independent steps succeed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AccuracyModel {
    pub epsilon: f64,
    pub length: u64,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AnalysisError {
    #[error("epsilon {epsilon} is outside [0, 1]")]
    DomainError { epsilon: f64 },
}

impl AccuracyModel {
    pub fn new(epsilon: f64, length: u64) -> Result<Self, AnalysisError> {
        if !(0.0..=1.0).contains(&epsilon) || epsilon.is_nan() {
            return Err(AnalysisError::DomainError { epsilon });
        }
        Ok(AccuracyModel { epsilon, length })
    }
}

/// The closed form (1 − ε)^L.
pub fn accuracy_closed_form(model: &AccuracyModel) -> f64 {
    (1.0 - model.epsilon).powf(model.length as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarloResult {
    pub rate: f64,
    /// Binomial standard error sqrt(p̂(1 − p̂)/trials).
    pub std_error: f64,
    pub trials: u64,
    pub successes: u64,
}

/// Trials per independently-seeded shard. Fixed so the result depends only
/// on (model, trials, seed), not on how shards are scheduled.
const SHARD_TRIALS: u64 = 8192;

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Simulates `trials` length-L sequences of independent Bernoulli steps; a
/// sequence counts as correct when every step succeeds. Deterministic for
/// a fixed (model, trials, seed) regardless of thread count.
pub fn accuracy_monte_carlo(model: &AccuracyModel, trials: u64, seed: u64) -> MonteCarloResult {
    assert!(trials >= 1, "monte carlo needs at least one trial");
    let shard_count = trials.div_ceil(SHARD_TRIALS);
    let successes: u64 = (0..shard_count)
        .into_par_iter()
        .map(|shard| {
            let shard_trials = SHARD_TRIALS.min(trials - shard * SHARD_TRIALS);
            let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(seed ^ splitmix64(shard)));
            let mut ok = 0u64;
            for _ in 0..shard_trials {
                let mut correct = true;
                for _ in 0..model.length {
                    if rng.gen::<f64>() < model.epsilon {
                        correct = false;
                        break;
                    }
                }
                if correct {
                    ok += 1;
                }
            }
            ok
        })
        .sum();
    let rate = successes as f64 / trials as f64;
    let std_error = (rate * (1.0 - rate) / trials as f64).sqrt();
    MonteCarloResult {
        rate,
        std_error,
        trials,
        successes,
    }
}

/// The dominant comparison count for routing over a fully-connected
/// N-token graph, repeated across L layers: L·N².
pub fn attention_cost(tokens: u64, layers: u64) -> u128 {
    layers as u128 * (tokens as u128) * (tokens as u128)
}

/// Structural capacity metrics of a state graph.
#[derive(Debug, Clone, PartialEq)]
pub struct SaturationReport {
    pub node_count: usize,
    pub edge_count: usize,
    /// Edges over N². Self-loops are excluded from the numerator unless
    /// `include_self_loops` was set (the denominator always counts them).
    pub density: f64,
    pub mean_out_degree: f64,
    /// Mean over non-sink nodes of the entropy (in bits) of their
    /// normalized out-edge distribution, with 0·log 0 = 0.
    pub entropy_bits: f64,
    pub include_self_loops: bool,
}

pub fn saturation(graph: &StateGraph, include_self_loops: bool) -> SaturationReport {
    let node_count = graph.node_count();
    let edge_count = graph.edge_count();
    let numerator = graph
        .edges()
        .iter()
        .filter(|e| include_self_loops || e.from != e.to)
        .count();
    let density = if node_count == 0 {
        0.0
    } else {
        numerator as f64 / (node_count * node_count) as f64
    };
    let mean_out_degree = if node_count == 0 {
        0.0
    } else {
        edge_count as f64 / node_count as f64
    };

    let mut entropy_total = 0.0;
    let mut non_sinks = 0usize;
    for key in graph.keys() {
        let probabilities: Vec<f64> = graph
            .out_edges(key)
            .map(|e| graph.edge_probability(e))
            .collect();
        if probabilities.is_empty() {
            continue;
        }
        non_sinks += 1;
        entropy_total += probabilities
            .iter()
            .filter(|&&p| p > 0.0)
            .map(|&p| -p * p.log2())
            .sum::<f64>();
    }
    let entropy_bits = if non_sinks == 0 {
        0.0
    } else {
        entropy_total / non_sinks as f64
    };

    SaturationReport {
        node_count,
        edge_count,
        density,
        mean_out_degree,
        entropy_bits,
        include_self_loops,
    }
}
