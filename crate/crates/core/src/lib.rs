//! Chunk scheduling for pull-based peer-to-peer streaming.
//!
//! The crate is split along the life of a request period:
//!
//! - [`priority`] scores missing chunks by playback urgency and layer.
//! - [`solvers`] holds the combinatorial kernels (Hungarian, 0/1 knapsack)
//!   and exhaustive oracles used to check them.
//! - [`schedule`] turns a node's view of its neighbors into a
//!   [`schedule::ScheduleDecision`] using AsSched, NAsSched or a baseline.
//! - [`peer`] is per-node state: sliding window, buffer maps, pending
//!   requests and bandwidth estimation.
//! - [`sim`] runs the overlay tick by tick.
//! - [`metrics`] computes delivery ratios and writes reports.

pub mod error;
pub mod metrics;
pub mod peer;
pub mod priority;
pub mod schedule;
pub mod sim;
pub mod solvers;

pub use error::{Error, Result};
pub use priority::{ChunkMeta, PriorityParams};
pub use schedule::{NeighborView, ScheduleDecision, Strategy};
pub use sim::{run_simulation, SimConfig};

/// Identifier of an overlay node.
pub type NodeId = u32;
/// Global chunk sequence number, unique across layers.
pub type Seq = u64;
/// One request period.
pub type Tick = i64;
