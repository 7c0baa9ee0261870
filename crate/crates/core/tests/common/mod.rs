#![allow(dead_code)]

use chunksched::peer::BufferMap;
use chunksched::{ChunkMeta, NeighborView, NodeId, Seq};
use rand::Rng;

pub fn view(
    id: NodeId,
    start: Seq,
    len: usize,
    held: &[Seq],
    cap: u32,
    reliability: f64,
) -> NeighborView {
    NeighborView {
        neighbor_id: id,
        buffer_map: BufferMap::from_held(start, len, held.iter().copied()),
        est_download: cap,
        reliability,
    }
}

/// Five chunks sharing one deadline; neighbor 2 holds {1,2,3,5} and can
/// send 2, neighbor 3 holds {4,5} and can send 2, neighbor 4 holds {1,4}
/// and can send 1. Reliabilities are given per neighbor in (2, 3, 4) order.
pub fn worked_example(reliability: [f64; 3]) -> (Vec<ChunkMeta>, Vec<NeighborView>) {
    let missing = (1..=5).map(|s| ChunkMeta::new(s, 1, 10)).collect();
    let neighbors = vec![
        view(2, 1, 5, &[1, 2, 3, 5], 2, reliability[0]),
        view(3, 1, 5, &[4, 5], 2, reliability[1]),
        view(4, 1, 5, &[1, 4], 1, reliability[2]),
    ];
    (missing, neighbors)
}

/// A random scheduling round: up to `max_chunks` missing chunks over
/// `layers` layers with deadlines in `now..=now + 10`, and up to
/// `max_neighbors` neighbors with random holdings and estimates.
pub fn random_round<R: Rng>(
    rng: &mut R,
    now: i64,
    max_chunks: u64,
    layers: u32,
    max_size: u32,
    max_neighbors: u32,
    max_est: u32,
) -> (Vec<ChunkMeta>, Vec<NeighborView>) {
    let chunks = rng.gen_range(0..=max_chunks);
    let missing: Vec<ChunkMeta> = (0..chunks)
        .map(|s| {
            let mut c = ChunkMeta::new(s, rng.gen_range(1..=layers), now + rng.gen_range(0..=10));
            c.size = rng.gen_range(1..=max_size);
            c
        })
        .collect();
    // maps cover a few seqs past the missing ones, which the node may hold
    let span = chunks as usize + 3;
    let neighbors = (0..rng.gen_range(0..=max_neighbors))
        .map(|k| {
            let density = rng.gen_range(0.0..1.0);
            let held: Vec<Seq> = (0..span as Seq).filter(|_| rng.gen_bool(density)).collect();
            view(
                k * 3 + 1,
                0,
                span,
                &held,
                rng.gen_range(1..=max_est),
                rng.gen_range(0.0..=1.0),
            )
        })
        .collect();
    (missing, neighbors)
}
