use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{generate_overlay, OverlayGraph, SimConfig};
use crate::metrics::{MetricsReport, RuntimeStats, Traces};
use crate::peer::{
    BandwidthEstimator, BufferMap, PendingRequests, ReliabilityTracker, SlidingWindow, StreamLayout,
};
use crate::priority::{chunk_priority, rank, ChunkMeta, PriorityParams};
use crate::schedule::{schedule, NeighborView, Strategy};
use crate::{Error, NodeId, Result, Seq, Tick};

/// One chunk moved over one overlay edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Delivery {
    pub from: NodeId,
    pub to: NodeId,
    pub seq: Seq,
}

/// What happened during one tick.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Outcome {
    pub tick: Tick,
    /// (requester, uploader, seq) for every request that reached an
    /// uploader.
    pub requests: Vec<(NodeId, NodeId, Seq)>,
    /// Requests dropped by the requester for lack of download capacity.
    pub truncated: u32,
    pub delivered: Vec<Delivery>,
    /// Requests the uploader had no capacity for.
    pub refused: Vec<(NodeId, NodeId, Seq)>,
    /// (requester, seq) of requests that failed last tick and whose chunk
    /// is still playable.
    pub rerequested: Vec<(NodeId, Seq)>,
    /// (node, seq) of chunks that passed their deadline unreceived.
    pub expired: Vec<(NodeId, Seq)>,
}

#[derive(Debug, Clone)]
struct Peer {
    window: SlidingWindow,
    estimator: BandwidthEstimator,
    reliability: ReliabilityTracker,
    pending: PendingRequests,
    download_cap: u32,
    upload_cap: u32,
}

#[derive(Debug, Clone, Copy)]
struct Request {
    requester: NodeId,
    chunk: ChunkMeta,
    priority: f64,
}

/// Complete simulation state.
#[derive(Debug, Clone)]
pub struct World {
    strategy: Strategy,
    params: PriorityParams,
    seed: u64,
    adjacency: Vec<Vec<NodeId>>,
    source: NodeId,
    peers: Vec<Peer>,
    now: Tick,
    traces: Traces,
    stats: RuntimeStats,
    measured_requests: u64,
    expired_count: u64,
    duplicate_requests: u64,
}

impl World {
    /// Builds the world described by `config` at tick 0.
    pub fn new(config: &SimConfig) -> Result<World> {
        config.validate()?;
        let mut rng = derived_rng(config.seed, u64::MAX, u32::MAX);
        let overlay = generate_overlay(
            config.node_count,
            config.degree,
            &config.bandwidth_classes,
            &mut rng,
        )?;
        let stream = &config.stream;
        let per_layer = vec![stream.chunks_per_layer_tick(); stream.layers as usize];
        let layout = StreamLayout::new(per_layer, config.window_seconds);
        let chunk = stream.chunk_size_kbits;
        let mut download: Vec<u32> = overlay.download_kbps.iter().map(|d| d / chunk).collect();
        let mut upload: Vec<u32> = overlay
            .download_kbps
            .iter()
            .map(|d| d / 2 / chunk)
            .collect();
        let src = overlay.source as usize;
        download[src] = 0;
        upload[src] = (config.source_upload_factor * f64::from(layout.chunks_per_tick())) as u32;

        let w = Tick::from(config.window_seconds);
        let traces = Traces::new(
            layout.clone(),
            w,
            config.duration,
            stream.layer_rate_kbps,
            overlay.download_kbps.clone(),
            overlay.source,
        );
        let mut world = World::from_parts(
            config.strategy,
            config.priority_params(),
            config.seed,
            layout,
            &overlay,
            &download,
            &upload,
        );
        world.traces = traces;
        world.stats.edges = overlay.edge_count() as u32;
        world.stats.irregular_nodes = overlay.irregular_nodes;
        Ok(world)
    }

    /// Builds a world from explicit pieces. Capacities are in chunks per
    /// tick; nothing is measured.
    pub fn from_parts(
        strategy: Strategy,
        params: PriorityParams,
        seed: u64,
        layout: StreamLayout,
        overlay: &OverlayGraph,
        download_cap: &[u32],
        upload_cap: &[u32],
    ) -> World {
        let n = overlay.node_count();
        let peers = (0..n)
            .map(|i| Peer {
                window: SlidingWindow::new(layout.clone(), 0),
                estimator: BandwidthEstimator::new(download_cap[i], download_cap[i]),
                reliability: ReliabilityTracker::default(),
                pending: PendingRequests::new(),
                download_cap: download_cap[i],
                upload_cap: upload_cap[i],
            })
            .collect();
        let traces = Traces::new(
            layout,
            0,
            0,
            0,
            overlay.download_kbps.clone(),
            overlay.source,
        );
        World {
            strategy,
            params,
            seed,
            adjacency: overlay.adjacency.clone(),
            source: overlay.source,
            peers,
            now: 0,
            traces,
            stats: RuntimeStats {
                nodes: n as u32,
                ..RuntimeStats::default()
            },
            measured_requests: 0,
            expired_count: 0,
            duplicate_requests: 0,
        }
    }

    pub fn now(&self) -> Tick {
        self.now
    }

    pub fn window(&self, node: NodeId) -> &SlidingWindow {
        &self.peers[node as usize].window
    }

    pub fn traces(&self) -> &Traces {
        &self.traces
    }

    pub fn stats(&self) -> &RuntimeStats {
        &self.stats
    }

    fn invariant(&self, detail: impl Into<String>) -> Error {
        Error::Invariant {
            tick: self.now,
            detail: detail.into(),
        }
    }

    /// Runs the current tick and moves to the next one.
    pub fn step(&mut self) -> Result<Outcome> {
        let now = self.now;
        let mut out = Outcome {
            tick: now,
            ..Outcome::default()
        };

        // buffer maps as of the end of the previous tick, sent over the wire
        let maps = self
            .peers
            .iter()
            .map(|p| BufferMap::decode(&p.window.buffer_map().encode()))
            .collect::<std::result::Result<Vec<_>, _>>()?;

        let source = &mut self.peers[self.source as usize].window;
        let first = source.layout().first_seq_of_tick(now);
        for seq in first..source.live_edge() {
            source.mark_received(seq);
        }

        let mut queues: Vec<Vec<Request>> = vec![Vec::new(); self.peers.len()];
        for i in 0..self.peers.len() {
            if i == self.source as usize {
                continue;
            }
            self.schedule_node(i, now, &maps, &mut queues, &mut out)?;
        }

        let mut asked: BTreeMap<(NodeId, NodeId), (u32, u32)> = BTreeMap::new();
        let mut received = vec![0u32; self.peers.len()];
        for (u, mut queue) in queues.into_iter().enumerate() {
            queue.sort_by(|a, b| {
                b.priority
                    .total_cmp(&a.priority)
                    .then(a.requester.cmp(&b.requester))
                    .then(a.chunk.seq.cmp(&b.chunk.seq))
            });
            let mut sent = 0u64;
            let cap = u64::from(self.peers[u].upload_cap);
            let u = u as NodeId;
            for req in queue {
                asked.entry((req.requester, u)).or_default().0 += 1;
                if sent + u64::from(req.chunk.size) > cap {
                    out.refused.push((req.requester, u, req.chunk.seq));
                    continue;
                }
                sent += u64::from(req.chunk.size);
                asked.entry((req.requester, u)).or_default().1 += 1;
                let r = req.requester as usize;
                if !self.peers[r].window.mark_received(req.chunk.seq) {
                    return Err(
                        self.invariant(format!("node {r} received chunk {} twice", req.chunk.seq))
                    );
                }
                self.peers[r].pending.fulfill(req.chunk.seq);
                received[r] += req.chunk.size;
                self.traces.record(req.requester, req.chunk.seq);
                out.delivered.push(Delivery {
                    from: u,
                    to: req.requester,
                    seq: req.chunk.seq,
                });
            }
        }
        for (i, (&got, peer)) in received.iter().zip(&self.peers).enumerate() {
            if got > peer.download_cap {
                return Err(self.invariant(format!(
                    "node {i} received {got} chunks, download capacity {}",
                    peer.download_cap
                )));
            }
        }
        for (&(r, u), &(requested, delivered)) in &asked {
            let peer = &mut self.peers[r as usize];
            peer.estimator.observe(u, requested, delivered);
            peer.reliability.record(u, requested, delivered);
        }

        for (i, peer) in self.peers.iter_mut().enumerate() {
            for seq in peer.window.advance(now + 1) {
                if i != self.source as usize {
                    if self.traces.is_measured(seq) {
                        self.expired_count += 1;
                    }
                    out.expired.push((i as NodeId, seq));
                }
            }
        }

        self.stats.ticks += 1;
        self.stats.requests += out.requests.len() as u64;
        self.stats.deliveries += out.delivered.len() as u64;
        self.stats.refused += out.refused.len() as u64;
        self.stats.truncated += u64::from(out.truncated);
        self.stats.rerequests += out.rerequested.len() as u64;
        self.now = now + 1;
        Ok(out)
    }

    fn schedule_node(
        &mut self,
        i: usize,
        now: Tick,
        maps: &[BufferMap],
        queues: &mut [Vec<Request>],
        out: &mut Outcome,
    ) -> Result<()> {
        let id = i as NodeId;
        let peer = &mut self.peers[i];
        let refresh = peer.pending.refresh(now);
        out.rerequested
            .extend(refresh.rerequest.iter().map(|&s| (id, s)));

        let mut rng = derived_rng(self.seed, now as u64, id);
        let missing = peer.window.missing();
        let views: Vec<NeighborView> = self.adjacency[i]
            .iter()
            .map(|&j| NeighborView {
                neighbor_id: j,
                buffer_map: maps[j as usize].clone(),
                est_download: peer.estimator.estimate_bandwidth(j),
                reliability: peer.reliability.reliability(j),
            })
            .collect();
        let decision = schedule(self.strategy, &missing, &views, now, &self.params, &mut rng)?;
        if let Err(v) = decision.validate(&missing, &views) {
            return Err(self.invariant(format!("node {id}: {v}")));
        }

        let by_seq: BTreeMap<Seq, &ChunkMeta> = missing.iter().map(|c| (c.seq, c)).collect();
        let mut chosen = Vec::with_capacity(decision.requests.len());
        for (&seq, &nb) in &decision.requests {
            let chunk = *by_seq[&seq];
            let p = chunk_priority(&chunk, now, &self.params)?;
            chosen.push((p, chunk, nb));
        }
        let mut load: u64 = chosen.iter().map(|(_, c, _)| u64::from(c.size)).sum();
        let cap = u64::from(self.peers[i].download_cap);
        if load > cap {
            chosen.sort_by(|a, b| rank((a.0, &a.1), (b.0, &b.1)));
            while load > cap {
                let (_, c, _) = chosen.pop().expect("load is positive");
                load -= u64::from(c.size);
                out.truncated += 1;
            }
        }

        let peer = &mut self.peers[i];
        for (priority, chunk, nb) in chosen {
            if peer.window.has(chunk.seq) || peer.pending.issue(&chunk, nb, now).is_err() {
                self.duplicate_requests += 1;
                return Err(Error::Invariant {
                    tick: now,
                    detail: format!("node {id} requested chunk {} twice", chunk.seq),
                });
            }
            if self.traces.is_measured(chunk.seq) {
                self.measured_requests += 1;
            }
            queues[nb as usize].push(Request {
                requester: id,
                chunk,
                priority,
            });
            out.requests.push((id, nb, chunk.seq));
        }
        Ok(())
    }

    /// Ticks needed so every measured chunk reaches its deadline: warm-up,
    /// measured interval, then one more window to drain.
    pub fn run_length(config: &SimConfig) -> u32 {
        if config.duration == 0 {
            0
        } else {
            config.duration + 2 * config.window_seconds
        }
    }

    pub fn into_report(self, config: &SimConfig) -> MetricsReport {
        MetricsReport::build(
            config,
            &self.traces,
            self.stats,
            self.expired_count,
            self.measured_requests,
            self.duplicate_requests,
        )
    }
}

/// Independent, reproducible randomness for one (tick, node) pair.
fn derived_rng(seed: u64, tick: u64, node: NodeId) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&tick.to_le_bytes());
    key[16..20].copy_from_slice(&node.to_le_bytes());
    ChaCha8Rng::from_seed(key)
}

/// Runs the whole scenario and returns the final world.
pub fn simulate(config: &SimConfig) -> Result<World> {
    let mut world = World::new(config)?;
    for _ in 0..World::run_length(config) {
        world.step()?;
    }
    Ok(world)
}

/// Runs the scenario and summarizes it.
pub fn run_simulation(config: &SimConfig) -> Result<MetricsReport> {
    Ok(simulate(config)?.into_report(config))
}
