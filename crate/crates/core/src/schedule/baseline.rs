//! Reference strategies: random, local-rarest-first and round-robin.
//!
//! All three respect the same per-neighbor capacities as the optimizing
//! schedulers; they only differ in which holder gets each chunk.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{NeighborView, ScheduleDecision, ScheduleError};
use crate::priority::{chunk_priority, ChunkMeta, PriorityParams};
use crate::Tick;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BaselineKind {
    /// Chunks in random order, each to a uniformly random holder with room.
    Rnd,
    /// Rarest chunk first (fewest holders; ties: earlier deadline, lower
    /// seq), each to the holder with the most residual capacity (ties:
    /// lower id).
    Lrf,
    /// Chunks by ascending seq, holders taken in rotation over the neighbor
    /// list.
    Rr,
}

pub fn baseline_schedule<R: Rng + ?Sized>(
    kind: BaselineKind,
    missing: &[ChunkMeta],
    neighbors: &[NeighborView],
    now: Tick,
    params: &PriorityParams,
    rng: &mut R,
) -> Result<ScheduleDecision, ScheduleError> {
    let priorities = missing
        .iter()
        .map(|c| Ok((c.seq, chunk_priority(c, now, params)?)))
        .collect::<Result<BTreeMap<_, _>, ScheduleError>>()?;
    let mut residual: Vec<u64> = neighbors
        .iter()
        .map(|n| u64::from(n.est_download))
        .collect();
    let holders = |chunk: &ChunkMeta| -> Vec<usize> {
        (0..neighbors.len())
            .filter(|&k| neighbors[k].buffer_map.holds(chunk.seq))
            .collect()
    };
    let mut requests = BTreeMap::new();

    match kind {
        BaselineKind::Rnd => {
            let mut order: Vec<&ChunkMeta> = missing.iter().collect();
            order.shuffle(rng);
            for chunk in order {
                let room: Vec<usize> = holders(chunk)
                    .into_iter()
                    .filter(|&k| residual[k] >= u64::from(chunk.size))
                    .collect();
                if let Some(&k) = room.choose(rng) {
                    residual[k] -= u64::from(chunk.size);
                    requests.insert(chunk.seq, neighbors[k].neighbor_id);
                }
            }
        }
        BaselineKind::Lrf => {
            let mut order: Vec<(&ChunkMeta, Vec<usize>)> =
                missing.iter().map(|c| (c, holders(c))).collect();
            order.sort_by_key(|(c, h)| (h.len(), c.deadline, c.seq));
            for (chunk, hs) in order {
                let best = hs
                    .into_iter()
                    .filter(|&k| residual[k] >= u64::from(chunk.size))
                    .max_by(|&a, &b| {
                        residual[a]
                            .cmp(&residual[b])
                            .then(neighbors[b].neighbor_id.cmp(&neighbors[a].neighbor_id))
                    });
                if let Some(k) = best {
                    residual[k] -= u64::from(chunk.size);
                    requests.insert(chunk.seq, neighbors[k].neighbor_id);
                }
            }
        }
        BaselineKind::Rr => {
            let mut order: Vec<&ChunkMeta> = missing.iter().collect();
            order.sort_by_key(|c| c.seq);
            let n = neighbors.len();
            let mut cursor = 0;
            for chunk in order {
                let pick = (0..n).map(|i| (cursor + i) % n).find(|&k| {
                    residual[k] >= u64::from(chunk.size) && neighbors[k].buffer_map.holds(chunk.seq)
                });
                if let Some(k) = pick {
                    residual[k] -= u64::from(chunk.size);
                    requests.insert(chunk.seq, neighbors[k].neighbor_id);
                    cursor = (k + 1) % n;
                }
            }
        }
    }
    Ok(ScheduleDecision::from_requests(
        missing,
        &priorities,
        requests,
    ))
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::worked_example;
    use super::*;
    use crate::peer::BufferMap;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn run(
        kind: BaselineKind,
        missing: &[ChunkMeta],
        neighbors: &[NeighborView],
    ) -> ScheduleDecision {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        baseline_schedule(
            kind,
            missing,
            neighbors,
            10,
            &PriorityParams::single_layer(),
            &mut rng,
        )
        .unwrap()
    }

    #[test]
    fn round_robin_worked_example() {
        let (missing, neighbors) = worked_example();
        let d = run(BaselineKind::Rr, &missing, &neighbors);
        assert_eq!(d.requests, BTreeMap::from([(1, 2), (2, 2), (4, 3), (5, 3)]));
        assert_eq!(d.unassigned.iter().copied().collect::<Vec<_>>(), vec![3]);
        d.validate(&missing, &neighbors).unwrap();
    }

    #[test]
    fn single_holder_random_picks_it() {
        let missing = vec![ChunkMeta::new(0, 1, 10)];
        let neighbors = vec![
            NeighborView {
                neighbor_id: 1,
                buffer_map: BufferMap::from_held(0, 1, []),
                est_download: 3,
                reliability: 1.0,
            },
            NeighborView {
                neighbor_id: 2,
                buffer_map: BufferMap::from_held(0, 1, [0]),
                est_download: 3,
                reliability: 1.0,
            },
        ];
        for seed in 0..20 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let d = baseline_schedule(
                BaselineKind::Rnd,
                &missing,
                &neighbors,
                10,
                &PriorityParams::single_layer(),
                &mut rng,
            )
            .unwrap();
            assert_eq!(d.requests, BTreeMap::from([(0, 2)]));
        }
    }

    #[test]
    fn rarest_first_serves_the_scarce_chunk() {
        // chunk 0 is held by both, chunk 1 only by neighbor 1, which can
        // send one: LRF gives it chunk 1 and routes chunk 0 elsewhere
        let missing = vec![ChunkMeta::new(0, 1, 10), ChunkMeta::new(1, 1, 10)];
        let neighbors = vec![
            NeighborView {
                neighbor_id: 1,
                buffer_map: BufferMap::from_held(0, 2, [0, 1]),
                est_download: 1,
                reliability: 1.0,
            },
            NeighborView {
                neighbor_id: 2,
                buffer_map: BufferMap::from_held(0, 2, [0]),
                est_download: 1,
                reliability: 1.0,
            },
        ];
        let d = run(BaselineKind::Lrf, &missing, &neighbors);
        assert_eq!(d.requests, BTreeMap::from([(0, 2), (1, 1)]));
    }

    #[test]
    fn every_baseline_respects_constraints() {
        let (missing, neighbors) = worked_example();
        for kind in [BaselineKind::Rnd, BaselineKind::Lrf, BaselineKind::Rr] {
            for seed in 0..10 {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let d = baseline_schedule(
                    kind,
                    &missing,
                    &neighbors,
                    10,
                    &PriorityParams::single_layer(),
                    &mut rng,
                )
                .unwrap();
                d.validate(&missing, &neighbors).unwrap();
            }
        }
    }
}
