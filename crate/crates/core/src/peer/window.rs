use std::collections::VecDeque;

use super::{BufferMap, StreamLayout};
use crate::priority::ChunkMeta;
use crate::{Seq, Tick};

/// A node's sliding window.
///
/// Covers `[playhead, playhead + window_len)`, i.e. the chunks generated in
/// ticks `[now - W, now]`. Everything past the playhead is the exchanging
/// window.
#[derive(Debug, Clone)]
pub struct SlidingWindow {
    layout: StreamLayout,
    now: Tick,
    playhead: Seq,
    received: VecDeque<bool>,
}

impl SlidingWindow {
    pub fn new(layout: StreamLayout, now: Tick) -> Self {
        let len = layout.window_len();
        let playhead = layout.playhead_at(now);
        SlidingWindow {
            layout,
            now,
            playhead,
            received: VecDeque::from(vec![false; len]),
        }
    }

    pub fn layout(&self) -> &StreamLayout {
        &self.layout
    }

    pub fn now(&self) -> Tick {
        self.now
    }

    pub fn playhead(&self) -> Seq {
        self.playhead
    }

    /// First seq of the exchanging window.
    pub fn exchange_start(&self) -> Seq {
        self.playhead
    }

    pub fn window_len(&self) -> usize {
        self.received.len()
    }

    /// One past the newest chunk generated so far.
    pub fn live_edge(&self) -> Seq {
        self.layout.first_seq_of_tick(self.now + 1)
    }

    pub fn contains(&self, seq: Seq) -> bool {
        seq >= self.playhead && seq < self.playhead + self.received.len() as Seq
    }

    pub fn has(&self, seq: Seq) -> bool {
        self.contains(seq) && self.received[(seq - self.playhead) as usize]
    }

    /// Marks `seq` received. Returns false if it was already held or lies
    /// outside the window.
    pub fn mark_received(&mut self, seq: Seq) -> bool {
        if !self.contains(seq) {
            return false;
        }
        let slot = &mut self.received[(seq - self.playhead) as usize];
        let fresh = !*slot;
        *slot = true;
        fresh
    }

    /// Moves the playhead to `to_tick`, returning the chunks that expired
    /// without being received.
    pub fn advance(&mut self, to_tick: Tick) -> Vec<Seq> {
        assert!(
            to_tick >= self.now,
            "window cannot move backwards ({} -> {to_tick})",
            self.now
        );
        let target = self.layout.playhead_at(to_tick);
        let mut expired = Vec::new();
        while self.playhead < target {
            let got = self.received.pop_front().unwrap_or(false);
            if !got {
                expired.push(self.playhead);
            }
            self.received.push_back(false);
            self.playhead += 1;
        }
        self.now = to_tick;
        expired
    }

    /// `M(i)`: generated, unreceived, unexpired chunks, ascending by seq.
    pub fn missing(&self) -> Vec<ChunkMeta> {
        let end = self
            .live_edge()
            .min(self.playhead + self.received.len() as Seq);
        (self.playhead..end)
            .filter(|&s| !self.received[(s - self.playhead) as usize])
            .map(|s| self.layout.meta(s))
            .collect()
    }

    /// Buffer map advertising the whole window.
    pub fn buffer_map(&self) -> BufferMap {
        BufferMap::new(self.playhead, self.received.iter().copied().collect())
    }
}
