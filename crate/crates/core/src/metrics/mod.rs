//! Delivery ratios and run reports.

mod report;
mod sweep;

use thiserror::Error;

use crate::peer::StreamLayout;
use crate::{NodeId, Seq, Tick};

pub use report::{
    emit_report, read_csv, write_csv, CsvRow, LayerDelivery, MetricsReport, ReportFormat,
    RuntimeStats, CSV_HEADER,
};
pub use sweep::{run_sweep, summarize, sweep_configs, write_summary, SummaryRow, SweepSpec};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricsError {
    #[error("layer {layer} outside 1..={layers}")]
    LayerOutOfRange { layer: u32, layers: u32 },
}

/// Which measured chunks each node received by their deadline.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeTrace {
    pub node: NodeId,
    pub download_kbps: u32,
    /// Indexed by `seq - Traces::first_seq()`.
    pub received: Vec<bool>,
}

/// Reception record for the chunks generated during the measured
/// interval `[first_tick, first_tick + ticks)`, for every node except the
/// source.
#[derive(Debug, Clone, PartialEq)]
pub struct Traces {
    layout: StreamLayout,
    first_tick: Tick,
    ticks: u32,
    layer_rate_kbps: u32,
    slot_of: Vec<Option<usize>>,
    nodes: Vec<NodeTrace>,
}

impl Traces {
    /// `download_kbps[i]` is node `i`'s download capacity.
    pub fn new(
        layout: StreamLayout,
        first_tick: Tick,
        ticks: u32,
        layer_rate_kbps: u32,
        download_kbps: Vec<u32>,
        source: NodeId,
    ) -> Self {
        let len = ticks as usize * layout.chunks_per_tick() as usize;
        let mut slot_of = vec![None; download_kbps.len()];
        let mut nodes = Vec::new();
        for (i, &d) in download_kbps.iter().enumerate() {
            if i as NodeId == source {
                continue;
            }
            slot_of[i] = Some(nodes.len());
            nodes.push(NodeTrace {
                node: i as NodeId,
                download_kbps: d,
                received: vec![false; len],
            });
        }
        Traces {
            layout,
            first_tick,
            ticks,
            layer_rate_kbps,
            slot_of,
            nodes,
        }
    }

    pub fn layout(&self) -> &StreamLayout {
        &self.layout
    }

    pub fn ticks(&self) -> u32 {
        self.ticks
    }

    pub fn nodes(&self) -> &[NodeTrace] {
        &self.nodes
    }

    pub fn first_seq(&self) -> Seq {
        self.layout.first_seq_of_tick(self.first_tick)
    }

    pub fn end_seq(&self) -> Seq {
        self.layout
            .first_seq_of_tick(self.first_tick + Tick::from(self.ticks))
    }

    pub fn is_measured(&self, seq: Seq) -> bool {
        self.ticks > 0 && seq >= self.first_seq() && seq < self.end_seq()
    }

    /// Notes that `node` received `seq` in time. Ignored for unmeasured
    /// chunks and for the source.
    pub fn record(&mut self, node: NodeId, seq: Seq) {
        if !self.is_measured(seq) {
            return;
        }
        let first = self.first_seq();
        if let Some(Some(k)) = self.slot_of.get(node as usize) {
            self.nodes[*k].received[(seq - first) as usize] = true;
        }
    }

    fn got(&self, trace: &NodeTrace, seq: Seq) -> bool {
        trace.received[(seq - self.first_seq()) as usize]
    }

    /// Received, and so were all its related chunks of lower layers.
    pub fn well_received(&self, trace: &NodeTrace, seq: Seq) -> bool {
        let layer = self.layout.slot(seq).layer;
        self.got(trace, seq) && (1..layer).all(|l| self.got(trace, self.layout.related(seq, l)))
    }

    /// A node can play layer `l` if its download covers layers `1..=l`.
    pub fn can_play(&self, download_kbps: u32, layer: u32) -> bool {
        u64::from(download_kbps) >= u64::from(layer) * u64::from(self.layer_rate_kbps)
    }

    fn layer_seqs(&self, layer: u32) -> impl Iterator<Item = Seq> + '_ {
        let per = self.layout.layer_chunks_per_tick(layer);
        (0..Tick::from(self.ticks)).flat_map(move |dt| {
            (0..per).map(move |index| {
                self.layout.seq_of(crate::peer::Slot {
                    tick: self.first_tick + dt,
                    layer,
                    index,
                })
            })
        })
    }

    fn emitted(&self, layer: u32) -> u64 {
        u64::from(self.ticks) * u64::from(self.layout.layer_chunks_per_tick(layer))
    }

    fn well_count(&self, trace: &NodeTrace, layer: u32) -> u64 {
        self.layer_seqs(layer)
            .filter(|&s| self.well_received(trace, s))
            .count() as u64
    }

    /// Nodes that can play `layer`.
    pub fn eligible(&self, layer: u32) -> impl Iterator<Item = &NodeTrace> {
        self.nodes
            .iter()
            .filter(move |t| self.can_play(t.download_kbps, layer))
    }
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0u64), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

/// Mean over the nodes that can play `layer` of the fraction of its
/// layer-`layer` chunks that were well received. `None` if no node can
/// play the layer or nothing was measured.
pub fn layered_delivery_ratio(traces: &Traces, layer: u32) -> Result<Option<f64>, MetricsError> {
    let layers = traces.layout.layers();
    if layer == 0 || layer > layers {
        return Err(MetricsError::LayerOutOfRange { layer, layers });
    }
    let emitted = traces.emitted(layer);
    if emitted == 0 {
        return Ok(None);
    }
    Ok(mean(traces.eligible(layer).map(|t| {
        traces.well_count(t, layer) as f64 / emitted as f64
    })))
}

/// Mean over nodes of the fraction of measured chunks received in time.
pub fn single_layer_delivery_ratio(traces: &Traces) -> Option<f64> {
    let emitted = traces.end_seq().saturating_sub(traces.first_seq());
    if traces.ticks == 0 || emitted == 0 {
        return None;
    }
    mean(
        traces
            .nodes
            .iter()
            .map(|t| t.received.iter().filter(|&&r| r).count() as f64 / emitted as f64),
    )
}

/// Mean over nodes of well-received over emitted chunks, counting only
/// the layers each node can play.
pub fn aggregate_delivery_ratio(traces: &Traces) -> Option<f64> {
    if traces.ticks == 0 {
        return None;
    }
    let layers = traces.layout.layers();
    mean(traces.nodes.iter().filter_map(|t| {
        let playable: Vec<u32> = (1..=layers)
            .filter(|&l| traces.can_play(t.download_kbps, l))
            .collect();
        let emitted: u64 = playable.iter().map(|&l| traces.emitted(l)).sum();
        let good: u64 = playable.iter().map(|&l| traces.well_count(t, l)).sum();
        (emitted > 0).then(|| good as f64 / emitted as f64)
    }))
}
