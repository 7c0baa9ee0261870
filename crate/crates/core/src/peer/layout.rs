use crate::priority::ChunkMeta;
use crate::{Seq, Tick};

/// How chunk sequence numbers map onto generation ticks and layers.
///
/// Every tick the source emits `chunks_per_tick()` chunks: first all of
/// layer 1's chunks for that tick, then layer 2's, and so on. A chunk
/// generated at tick `g` is played at `g + window_ticks`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StreamLayout {
    per_layer: Vec<u32>,
    offsets: Vec<u32>,
    per_tick: u32,
    window_ticks: u32,
}

/// Where a chunk sits inside its generation tick.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Slot {
    pub tick: Tick,
    /// 1-based layer.
    pub layer: u32,
    /// Index among this layer's chunks of the tick.
    pub index: u32,
}

impl StreamLayout {
    /// `per_layer[l]` chunks of layer `l + 1` per tick.
    pub fn new(per_layer: Vec<u32>, window_ticks: u32) -> Self {
        assert!(!per_layer.is_empty(), "stream needs at least one layer");
        assert!(per_layer.iter().all(|&c| c > 0), "every layer needs chunks");
        let mut offsets = Vec::with_capacity(per_layer.len());
        let mut acc = 0;
        for &c in &per_layer {
            offsets.push(acc);
            acc += c;
        }
        StreamLayout {
            per_layer,
            offsets,
            per_tick: acc,
            window_ticks,
        }
    }

    pub fn layers(&self) -> u32 {
        self.per_layer.len() as u32
    }

    pub fn chunks_per_tick(&self) -> u32 {
        self.per_tick
    }

    pub fn layer_chunks_per_tick(&self, layer: u32) -> u32 {
        self.per_layer[layer as usize - 1]
    }

    pub fn window_ticks(&self) -> u32 {
        self.window_ticks
    }

    /// Chunks in a sliding window: generation ticks `[t - W, t]`.
    pub fn window_len(&self) -> usize {
        (self.window_ticks as usize + 1) * self.per_tick as usize
    }

    pub fn first_seq_of_tick(&self, tick: Tick) -> Seq {
        tick.max(0) as Seq * Seq::from(self.per_tick)
    }

    /// First seq whose deadline is at or after `now`.
    pub fn playhead_at(&self, now: Tick) -> Seq {
        self.first_seq_of_tick(now - Tick::from(self.window_ticks))
    }

    pub fn slot(&self, seq: Seq) -> Slot {
        let per_tick = Seq::from(self.per_tick);
        let tick = (seq / per_tick) as Tick;
        let offset = (seq % per_tick) as u32;
        let layer_idx = self.offsets.partition_point(|&o| o <= offset) - 1;
        Slot {
            tick,
            layer: layer_idx as u32 + 1,
            index: offset - self.offsets[layer_idx],
        }
    }

    pub fn seq_of(&self, slot: Slot) -> Seq {
        self.first_seq_of_tick(slot.tick)
            + Seq::from(self.offsets[slot.layer as usize - 1] + slot.index)
    }

    pub fn deadline(&self, seq: Seq) -> Tick {
        self.slot(seq).tick + Tick::from(self.window_ticks)
    }

    pub fn meta(&self, seq: Seq) -> ChunkMeta {
        let slot = self.slot(seq);
        ChunkMeta::new(seq, slot.layer, slot.tick + Tick::from(self.window_ticks))
    }

    /// The chunk of `lower` layer covering the same part of the tick as
    /// `seq`. Chunks are paired by proportional position, which is
    /// index-for-index when layers have equal rates.
    pub fn related(&self, seq: Seq, lower: u32) -> Seq {
        let slot = self.slot(seq);
        debug_assert!(lower >= 1 && lower < slot.layer);
        let own = self.layer_chunks_per_tick(slot.layer);
        let theirs = self.layer_chunks_per_tick(lower);
        let index = (u64::from(slot.index) * u64::from(theirs) / u64::from(own)) as u32;
        self.seq_of(Slot {
            tick: slot.tick,
            layer: lower,
            index,
        })
    }
}
