use std::collections::{BTreeMap, VecDeque};

use crate::priority::ChunkMeta;
use crate::{NodeId, Seq, Tick};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PendingRequest {
    pub neighbor: NodeId,
    pub issued: Tick,
    pub deadline: Tick,
}

/// Outcome of [`PendingRequests::refresh`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Refresh {
    /// Unfulfilled, still playable: back into `M(i)`.
    pub rerequest: Vec<Seq>,
    /// Unfulfilled and past deadline: losses.
    pub expired: Vec<Seq>,
}

/// Requests issued and not yet answered. A chunk is pending to at most one
/// neighbor at a time.
#[derive(Debug, Clone, Default)]
pub struct PendingRequests {
    by_seq: BTreeMap<Seq, PendingRequest>,
}

impl PendingRequests {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.by_seq.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_seq.is_empty()
    }

    pub fn get(&self, seq: Seq) -> Option<&PendingRequest> {
        self.by_seq.get(&seq)
    }

    pub fn contains(&self, seq: Seq) -> bool {
        self.by_seq.contains_key(&seq)
    }

    /// Records a request. Returns the existing entry instead if the chunk
    /// is already pending.
    pub fn issue(
        &mut self,
        chunk: &ChunkMeta,
        neighbor: NodeId,
        now: Tick,
    ) -> Result<(), PendingRequest> {
        if let Some(existing) = self.by_seq.get(&chunk.seq) {
            return Err(*existing);
        }
        self.by_seq.insert(
            chunk.seq,
            PendingRequest {
                neighbor,
                issued: now,
                deadline: chunk.deadline,
            },
        );
        Ok(())
    }

    pub fn fulfill(&mut self, seq: Seq) -> Option<PendingRequest> {
        self.by_seq.remove(&seq)
    }

    /// Clears every request issued before `now` that is still pending.
    /// Those still playable at `now` are handed back for re-request.
    pub fn refresh(&mut self, now: Tick) -> Refresh {
        let mut out = Refresh::default();
        self.by_seq.retain(|&seq, req| {
            if req.issued >= now {
                return true;
            }
            if req.deadline >= now {
                out.rerequest.push(seq);
            } else {
                out.expired.push(seq);
            }
            false
        });
        out
    }
}

/// Fraction of requested chunks a neighbor actually delivered over the
/// last few periods; 1.0 until there is evidence.
#[derive(Debug, Clone)]
pub struct ReliabilityTracker {
    window: usize,
    links: BTreeMap<NodeId, VecDeque<(u32, u32)>>,
}

pub const RELIABILITY_WINDOW: usize = 5;

impl Default for ReliabilityTracker {
    fn default() -> Self {
        ReliabilityTracker::new(RELIABILITY_WINDOW)
    }
}

impl ReliabilityTracker {
    pub fn new(window: usize) -> Self {
        ReliabilityTracker {
            window,
            links: BTreeMap::new(),
        }
    }

    pub fn record(&mut self, neighbor: NodeId, promised: u32, delivered: u32) {
        let hist = self.links.entry(neighbor).or_default();
        hist.push_back((promised, delivered.min(promised)));
        while hist.len() > self.window {
            hist.pop_front();
        }
    }

    pub fn reliability(&self, neighbor: NodeId) -> f64 {
        let Some(hist) = self.links.get(&neighbor) else {
            return 1.0;
        };
        let (p, d) = hist.iter().fold((0u64, 0u64), |(p, d), &(a, b)| {
            (p + u64::from(a), d + u64::from(b))
        });
        if p == 0 {
            1.0
        } else {
            d as f64 / p as f64
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fulfilled_requests_do_not_come_back() {
        let mut p = PendingRequests::new();
        p.issue(&ChunkMeta::new(4, 1, 10), 2, 1).unwrap();
        p.fulfill(4);
        assert_eq!(p.refresh(2), Refresh::default());
    }

    #[test]
    fn unfulfilled_request_reappears_next_period() {
        let mut p = PendingRequests::new();
        p.issue(&ChunkMeta::new(4, 1, 10), 2, 1).unwrap();
        // same period: still in flight
        assert_eq!(p.refresh(1), Refresh::default());
        let r = p.refresh(2);
        assert_eq!(r.rerequest, vec![4]);
        assert!(r.expired.is_empty());
        assert!(p.is_empty());
    }

    #[test]
    fn expired_request_is_a_loss() {
        let mut p = PendingRequests::new();
        p.issue(&ChunkMeta::new(4, 1, 3), 2, 3).unwrap();
        let r = p.refresh(4);
        assert!(r.rerequest.is_empty());
        assert_eq!(r.expired, vec![4]);
    }

    #[test]
    fn chunk_cannot_be_pending_twice() {
        let mut p = PendingRequests::new();
        let c = ChunkMeta::new(4, 1, 10);
        p.issue(&c, 2, 1).unwrap();
        let existing = p.issue(&c, 3, 1).unwrap_err();
        assert_eq!(existing.neighbor, 2);
        assert_eq!(p.len(), 1);
    }

    #[test]
    fn reliability_is_recent_delivery_fraction() {
        let mut r = ReliabilityTracker::default();
        assert_eq!(r.reliability(1), 1.0);
        r.record(1, 4, 2);
        r.record(1, 4, 4);
        assert_eq!(r.reliability(1), 0.75);
        for _ in 0..5 {
            r.record(1, 2, 2);
        }
        assert_eq!(r.reliability(1), 1.0);
        r.record(2, 0, 0);
        assert_eq!(r.reliability(2), 1.0);
    }
}
