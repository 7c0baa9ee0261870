use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;

use super::{BandwidthClass, ConfigError};
use crate::NodeId;

/// Attempts to finish a pairing before its stubs are reshuffled.
const PAIR_TRIES: usize = 64;
const MAX_RESTARTS: usize = 200;

/// Random overlay with per-node download classes. Node 0 is the source.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OverlayGraph {
    /// Sorted neighbor lists.
    pub adjacency: Vec<Vec<NodeId>>,
    /// Download capacity of each node; the source's entry is unused.
    pub download_kbps: Vec<u32>,
    pub source: NodeId,
    /// Nodes whose degree differs from the requested one.
    pub irregular_nodes: u32,
}

impl OverlayGraph {
    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn neighbors(&self, node: NodeId) -> &[NodeId] {
        &self.adjacency[node as usize]
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }
}

/// Builds a random graph where every node has `degree` neighbors.
///
/// Stubs are paired at random, rejecting self-loops and repeated edges;
/// a pairing that gets stuck is restarted. If `n * degree` is odd one node
/// gets an extra stub, and if every restart gets stuck the last attempt's
/// unmatched stubs are dropped. Either way the affected nodes are counted
/// in `irregular_nodes`.
pub fn generate_overlay<R: Rng + ?Sized>(
    node_count: u32,
    degree: u32,
    classes: &[BandwidthClass],
    rng: &mut R,
) -> Result<OverlayGraph, ConfigError> {
    if node_count < 2 || degree == 0 || degree >= node_count {
        return Err(ConfigError::Invalid(format!(
            "cannot build a {degree}-regular graph on {node_count} nodes"
        )));
    }
    let n = node_count as usize;
    let adjacency = if degree == node_count - 1 {
        (0..node_count)
            .map(|i| (0..node_count).filter(|&j| j != i).collect())
            .collect()
    } else {
        let mut stubs: Vec<NodeId> = (0..node_count)
            .flat_map(|i| std::iter::repeat_n(i, degree as usize))
            .collect();
        if stubs.len() % 2 == 1 {
            stubs.push(rng.gen_range(0..node_count));
        }
        let mut best = None;
        for _ in 0..MAX_RESTARTS {
            let (edges, leftover) = pair_stubs(&stubs, n, rng);
            let done = leftover == 0;
            if best.as_ref().is_none_or(|(_, l)| leftover < *l) {
                best = Some((edges, leftover));
            }
            if done {
                break;
            }
        }
        let (edges, _) = best.expect("at least one attempt");
        edges
            .into_iter()
            .map(|set| set.into_iter().collect())
            .collect::<Vec<Vec<NodeId>>>()
    };
    let irregular_nodes = adjacency
        .iter()
        .filter(|a: &&Vec<NodeId>| a.len() != degree as usize)
        .count() as u32;
    let mut download_kbps = vec![0; n];
    download_kbps[1..].copy_from_slice(&assign_classes(n - 1, classes, rng));
    Ok(OverlayGraph {
        adjacency,
        download_kbps,
        source: 0,
        irregular_nodes,
    })
}

/// One pairing attempt. Returns adjacency sets and the number of stubs
/// left unmatched.
fn pair_stubs<R: Rng + ?Sized>(
    stubs: &[NodeId],
    n: usize,
    rng: &mut R,
) -> (Vec<BTreeSet<NodeId>>, usize) {
    let mut adj = vec![BTreeSet::new(); n];
    let mut open = stubs.to_vec();
    open.shuffle(rng);
    while open.len() >= 2 {
        let mut paired = false;
        for _ in 0..PAIR_TRIES {
            let a = rng.gen_range(0..open.len());
            let b = rng.gen_range(0..open.len());
            let (u, v) = (open[a], open[b]);
            if a != b && u != v && !adj[u as usize].contains(&v) {
                adj[u as usize].insert(v);
                adj[v as usize].insert(u);
                let (hi, lo) = (a.max(b), a.min(b));
                open.swap_remove(hi);
                open.swap_remove(lo);
                paired = true;
                break;
            }
        }
        if !paired && !has_valid_pair(&open, &adj) {
            break;
        }
    }
    (adj, open.len())
}

fn has_valid_pair(open: &[NodeId], adj: &[BTreeSet<NodeId>]) -> bool {
    open.iter().enumerate().any(|(i, &u)| {
        open[i + 1..]
            .iter()
            .any(|&v| u != v && !adj[u as usize].contains(&v))
    })
}

/// Download capacities for `count` nodes: each class gets its fraction of
/// the nodes (largest remainder), then the list is shuffled.
pub fn assign_classes<R: Rng + ?Sized>(
    count: usize,
    classes: &[BandwidthClass],
    rng: &mut R,
) -> Vec<u32> {
    let exact: Vec<f64> = classes.iter().map(|c| c.fraction * count as f64).collect();
    let mut quota: Vec<usize> = exact.iter().map(|e| e.floor() as usize).collect();
    let mut short = count.saturating_sub(quota.iter().sum());
    let mut by_remainder: Vec<usize> = (0..classes.len()).collect();
    by_remainder.sort_by(|&a, &b| {
        let (ra, rb) = (exact[a] - exact[a].floor(), exact[b] - exact[b].floor());
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    for &k in by_remainder.iter().cycle() {
        if short == 0 {
            break;
        }
        quota[k] += 1;
        short -= 1;
    }
    let mut out: Vec<u32> = classes
        .iter()
        .zip(&quota)
        .flat_map(|(c, &q)| std::iter::repeat_n(c.download_kbps, q))
        .collect();
    out.truncate(count);
    out.shuffle(rng);
    out
}
