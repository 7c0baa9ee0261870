//! Per-node streaming state.

mod buffer_map;
mod estimator;
mod layout;
mod pending;
mod window;

pub use buffer_map::{BufferMap, BufferMapError};
pub use estimator::{delivery_sample, BandwidthEstimator, LinkPredictor, HISTORY_LEN};
pub use layout::{Slot, StreamLayout};
pub use pending::{PendingRequest, PendingRequests, Refresh, ReliabilityTracker};
pub use window::SlidingWindow;
