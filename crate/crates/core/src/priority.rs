//! Chunk request priorities.
//!
//! A chunk's priority combines how close it is to its playback deadline
//! (emergency priority) with how far down the layer stack it sits (layer
//! priority):
//!
//! ```text
//! P = EP(now - deadline) + theta * LP(layer)
//! EP(d) = ep_base ^ max(d, min_exponent)      d <= 0
//! LP(l) = lp_base ^ (max_layer - l)
//! ```
//!
//! `theta` selects the layering regime. `theta = 0` drops the layer term
//! and is what single-layer streams use.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::{Seq, Tick};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PriorityError {
    #[error("chunk is {delta} ticks past its deadline and must not be scored")]
    Expired { delta: i64 },
    #[error("layer {layer} outside 1..={max_layer}")]
    LayerOutOfRange { layer: u32, max_layer: u32 },
    #[error("invalid priority parameters: {0}")]
    InvalidParams(&'static str),
}

/// Identity of one stream chunk.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ChunkMeta {
    pub seq: Seq,
    /// 1-based layer; 1 is the base layer.
    pub layer: u32,
    /// Tick at which the chunk is played.
    pub deadline: Tick,
    /// Size in bandwidth units. Equal-size chunks use 1.
    pub size: u32,
}

impl ChunkMeta {
    pub fn new(seq: Seq, layer: u32, deadline: Tick) -> Self {
        ChunkMeta {
            seq,
            layer,
            deadline,
            size: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PriorityParams {
    pub max_layer: u32,
    pub theta: f64,
    pub ep_base: f64,
    pub lp_base: f64,
    pub min_exponent: i32,
}

pub const DEFAULT_BASE: f64 = 10.0;
pub const DEFAULT_MIN_EXPONENT: i32 = -30;

impl PriorityParams {
    /// Bases 10 and `theta = 10^-L`.
    pub fn new(max_layer: u32) -> Self {
        PriorityParams {
            max_layer,
            theta: DEFAULT_BASE.powi(-(max_layer as i32)),
            ep_base: DEFAULT_BASE,
            lp_base: DEFAULT_BASE,
            min_exponent: DEFAULT_MIN_EXPONENT,
        }
    }

    /// Single-layer parameters: the layer term is dropped.
    pub fn single_layer() -> Self {
        PriorityParams {
            theta: 0.0,
            ..PriorityParams::new(1)
        }
    }

    /// Parameters under which every layer-`l` chunk in a window of
    /// `window` ticks outranks every layer-`l+1` chunk.
    ///
    /// The smallest gap between adjacent layer priorities is
    /// `LP(L-1) - LP(L) = lp_base - 1`, and emergency priorities inside the
    /// window span at most `1 - ep_base^-window`, so any
    /// `theta > (1 - ep_base^-window) / (lp_base - 1)` works. We take twice
    /// that bound.
    pub fn conservative(max_layer: u32, window: u32) -> Self {
        let base = PriorityParams::new(max_layer);
        base.with_conservative_theta(window)
    }

    pub fn with_conservative_theta(self, window: u32) -> Self {
        let span = 1.0 - self.ep_base.powi(-(window as i32));
        PriorityParams {
            theta: 2.0 * span / (self.lp_base - 1.0),
            ..self
        }
    }

    pub fn validate(&self) -> Result<(), PriorityError> {
        if self.max_layer == 0 {
            return Err(PriorityError::InvalidParams("max_layer must be at least 1"));
        }
        if !(self.theta >= 0.0 && self.theta.is_finite()) {
            return Err(PriorityError::InvalidParams(
                "theta must be finite and >= 0",
            ));
        }
        if !(self.ep_base > 1.0 && self.ep_base.is_finite()) {
            return Err(PriorityError::InvalidParams("ep_base must be > 1"));
        }
        if !(self.lp_base > 1.0 && self.lp_base.is_finite()) {
            return Err(PriorityError::InvalidParams("lp_base must be > 1"));
        }
        if self.min_exponent > 0 {
            return Err(PriorityError::InvalidParams("min_exponent must be <= 0"));
        }
        Ok(())
    }
}

/// `ep_base ^ max(delta, min_exponent)` for `delta = now - deadline <= 0`.
pub fn emergency_priority(delta: i64, params: &PriorityParams) -> Result<f64, PriorityError> {
    if delta > 0 {
        return Err(PriorityError::Expired { delta });
    }
    let exponent = delta.max(params.min_exponent as i64) as i32;
    Ok(params.ep_base.powi(exponent))
}

/// `lp_base ^ (max_layer - layer)`.
pub fn layer_priority(layer: u32, params: &PriorityParams) -> Result<f64, PriorityError> {
    if layer == 0 || layer > params.max_layer {
        return Err(PriorityError::LayerOutOfRange {
            layer,
            max_layer: params.max_layer,
        });
    }
    Ok(params.lp_base.powi((params.max_layer - layer) as i32))
}

pub fn chunk_priority(
    chunk: &ChunkMeta,
    now: Tick,
    params: &PriorityParams,
) -> Result<f64, PriorityError> {
    let ep = emergency_priority(now - chunk.deadline, params)?;
    let lp = layer_priority(chunk.layer, params)?;
    if params.theta == 0.0 {
        return Ok(ep);
    }
    Ok(ep + params.theta * lp)
}

/// Total order used wherever chunks are ranked: higher priority first,
/// then earlier deadline (clamped emergency priorities tie), then lower seq.
pub fn rank(a: (f64, &ChunkMeta), b: (f64, &ChunkMeta)) -> Ordering {
    b.0.total_cmp(&a.0)
        .then(a.1.deadline.cmp(&b.1.deadline))
        .then(a.1.seq.cmp(&b.1.seq))
}
