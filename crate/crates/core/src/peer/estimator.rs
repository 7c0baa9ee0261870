//! Per-neighbor download bandwidth estimation.
//!
//! Each link keeps the last five per-period delivery samples and predicts
//! the next one with a 5-tap adaptive linear predictor trained by
//! normalized LMS. The taps are kept non-negative and summing to one, so
//! the prediction is always a weighted average of recent samples; starting
//! from uniform weights it is the 5-period moving average.

use std::collections::{BTreeMap, VecDeque};

use crate::NodeId;

pub const HISTORY_LEN: usize = 5;
pub const DEFAULT_STEP: f64 = 0.1;
const NLMS_EPS: f64 = 1e-6;

/// Adaptive linear predictor over one link's delivery history.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkPredictor {
    /// Oldest first.
    history: VecDeque<f64>,
    /// `weights[i]` multiplies `history[i]`.
    weights: [f64; HISTORY_LEN],
    step: f64,
}

impl LinkPredictor {
    pub fn new(step: f64) -> Self {
        LinkPredictor {
            history: VecDeque::with_capacity(HISTORY_LEN),
            weights: [1.0 / HISTORY_LEN as f64; HISTORY_LEN],
            step,
        }
    }

    pub fn with_history(step: f64, history: &[f64]) -> Self {
        let mut p = LinkPredictor::new(step);
        for &h in history.iter().rev().take(HISTORY_LEN).rev() {
            p.history.push_back(h);
        }
        p
    }

    pub fn history(&self) -> &VecDeque<f64> {
        &self.history
    }

    pub fn weights(&self) -> &[f64; HISTORY_LEN] {
        &self.weights
    }

    /// Raw prediction, `None` before the first sample. With a partial
    /// history the available taps are renormalized.
    pub fn predict(&self) -> Option<f64> {
        if self.history.is_empty() {
            return None;
        }
        let taps = &self.weights[HISTORY_LEN - self.history.len()..];
        let dot: f64 = taps.iter().zip(&self.history).map(|(w, h)| w * h).sum();
        if self.history.len() == HISTORY_LEN {
            return Some(dot);
        }
        let mass: f64 = taps.iter().sum();
        Some(if mass > 0.0 { dot / mass } else { 0.0 })
    }

    /// Feeds one observed sample: adapts the weights against the current
    /// prediction (once the history is full), then shifts it in.
    pub fn observe(&mut self, sample: f64) {
        if self.history.len() == HISTORY_LEN {
            let predicted = self.predict().unwrap_or(0.0);
            let error = sample - predicted;
            let energy: f64 = self.history.iter().map(|h| h * h).sum();
            let gain = self.step * error / (NLMS_EPS + energy);
            for (w, h) in self.weights.iter_mut().zip(&self.history) {
                *w = (*w + gain * h).clamp(0.0, 1.0);
            }
            // keep the taps a convex combination so the prediction cannot
            // collapse to zero
            let mass: f64 = self.weights.iter().sum();
            if mass > 0.0 {
                self.weights.iter_mut().for_each(|w| *w /= mass);
            } else {
                self.weights = [1.0 / HISTORY_LEN as f64; HISTORY_LEN];
            }
            self.history.pop_front();
        }
        self.history.push_back(sample);
    }
}

/// Bandwidth estimates for all of a node's neighbors, in chunks per tick.
#[derive(Debug, Clone)]
pub struct BandwidthEstimator {
    links: BTreeMap<NodeId, LinkPredictor>,
    step: f64,
    cold_start: u32,
    ceiling: u32,
}

impl BandwidthEstimator {
    /// `cold_start` is the estimate for a neighbor with no history;
    /// `ceiling` caps every estimate (the node's own download capacity).
    pub fn new(cold_start: u32, ceiling: u32) -> Self {
        BandwidthEstimator {
            links: BTreeMap::new(),
            step: DEFAULT_STEP,
            cold_start: cold_start.max(1),
            ceiling: ceiling.max(1),
        }
    }

    pub fn with_step(mut self, step: f64) -> Self {
        self.step = step;
        self
    }

    pub fn link(&self, neighbor: NodeId) -> Option<&LinkPredictor> {
        self.links.get(&neighbor)
    }

    pub fn set_history(&mut self, neighbor: NodeId, history: &[f64]) {
        self.links
            .insert(neighbor, LinkPredictor::with_history(self.step, history));
    }

    /// `round(prediction)`, at least 1 and at most the ceiling.
    pub fn estimate_bandwidth(&self, neighbor: NodeId) -> u32 {
        match self.links.get(&neighbor).and_then(LinkPredictor::predict) {
            None => self.cold_start.min(self.ceiling),
            Some(p) => (p.round().max(1.0) as u32).min(self.ceiling),
        }
    }

    /// Records one period of traffic on the link: `requested` chunks were
    /// asked of the neighbor and `delivered` of them arrived.
    pub fn observe(&mut self, neighbor: NodeId, requested: u32, delivered: u32) {
        let estimate = self.estimate_bandwidth(neighbor);
        let sample = delivery_sample(requested, delivered, estimate, self.ceiling);
        let step = self.step;
        self.links
            .entry(neighbor)
            .or_insert_with(|| LinkPredictor::new(step))
            .observe(sample);
    }
}

/// What one period tells us about a link's capacity.
///
/// Deliveries alone only bound capacity from below, and a node never asks
/// for more than its estimate, so samples are shaped before they reach the
/// predictor:
///
/// - some requests failed: the link is saturated, the sample is what arrived;
/// - everything arrived and the estimate was fully used: probe upward by a
///   quarter (at least one chunk);
/// - everything arrived but less than the estimate was asked for: no new
///   information, the sample repeats the estimate.
pub fn delivery_sample(requested: u32, delivered: u32, estimate: u32, ceiling: u32) -> f64 {
    let sample = if delivered < requested {
        delivered
    } else if requested >= estimate {
        delivered.max(estimate) + (estimate / 4).max(1)
    } else {
        estimate
    };
    f64::from(sample.min(ceiling))
}
