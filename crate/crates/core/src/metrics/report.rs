use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{
    aggregate_delivery_ratio, layered_delivery_ratio, single_layer_delivery_ratio, Traces,
};
use crate::schedule::Strategy;
use crate::sim::SimConfig;
use crate::{Error, Result};

pub const CSV_HEADER: [&str; 7] = [
    "strategy",
    "seed",
    "layers",
    "layer",
    "delivery_ratio",
    "stream_rate_kbps",
    "window_s",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerDelivery {
    pub layer: u32,
    /// `None` when no node can play the layer.
    pub ratio: Option<f64>,
    /// Nodes the ratio averages over.
    pub eligible_nodes: u32,
}

/// Counters about the run itself. Contains nothing time- or
/// machine-dependent.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RuntimeStats {
    pub ticks: u32,
    pub nodes: u32,
    pub edges: u32,
    /// Nodes whose degree differs from the configured one.
    pub irregular_nodes: u32,
    pub requests: u64,
    pub deliveries: u64,
    /// Requests an uploader had no capacity for.
    pub refused: u64,
    /// Requests the requester dropped for lack of download capacity.
    pub truncated: u64,
    pub rerequests: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub strategy: Strategy,
    pub seed: u64,
    pub config_hash: String,
    pub layers: u32,
    pub stream_rate_kbps: u32,
    pub window_s: u32,
    /// Which nodes a layer's ratio averages over.
    pub eligibility: String,
    pub per_layer_delivery: Vec<LayerDelivery>,
    pub aggregate_delivery: Option<f64>,
    /// Measured chunks that reached their deadline unreceived, summed
    /// over nodes.
    pub expired_count: u64,
    /// Requests issued for measured chunks.
    pub requested_count: u64,
    pub duplicate_request_count: u64,
    pub runtime: RuntimeStats,
}

pub const ELIGIBILITY_ALL: &str = "all-nodes";
pub const ELIGIBILITY_CAPACITY: &str = "download-covers-layers-1..l";

impl MetricsReport {
    pub fn build(
        config: &SimConfig,
        traces: &Traces,
        runtime: RuntimeStats,
        expired_count: u64,
        requested_count: u64,
        duplicate_request_count: u64,
    ) -> Self {
        let layers = config.stream.layers;
        let measured = traces.ticks() > 0;
        let (per_layer_delivery, aggregate_delivery, eligibility) = if !measured {
            (Vec::new(), None, ELIGIBILITY_ALL)
        } else if layers == 1 {
            let r = single_layer_delivery_ratio(traces);
            let layer = LayerDelivery {
                layer: 1,
                ratio: r,
                eligible_nodes: traces.nodes().len() as u32,
            };
            (vec![layer], r, ELIGIBILITY_ALL)
        } else {
            let per = (1..=layers)
                .map(|l| LayerDelivery {
                    layer: l,
                    ratio: layered_delivery_ratio(traces, l).expect("layer in range"),
                    eligible_nodes: traces.eligible(l).count() as u32,
                })
                .collect();
            (per, aggregate_delivery_ratio(traces), ELIGIBILITY_CAPACITY)
        };
        MetricsReport {
            strategy: config.strategy,
            seed: config.seed,
            config_hash: config.config_hash(),
            layers,
            stream_rate_kbps: config.stream.total_rate_kbps(),
            window_s: config.window_seconds,
            eligibility: eligibility.to_string(),
            per_layer_delivery,
            aggregate_delivery,
            expired_count,
            requested_count,
            duplicate_request_count,
            runtime,
        }
    }

    /// One row per layer, then the aggregate as layer 0. Empty when
    /// nothing was measured.
    pub fn csv_rows(&self) -> Vec<CsvRow> {
        if self.per_layer_delivery.is_empty() {
            return Vec::new();
        }
        let row = |layer, delivery_ratio| CsvRow {
            strategy: self.strategy,
            seed: self.seed,
            layers: self.layers,
            layer,
            delivery_ratio,
            stream_rate_kbps: self.stream_rate_kbps,
            window_s: self.window_s,
        };
        self.per_layer_delivery
            .iter()
            .map(|l| row(l.layer, l.ratio))
            .chain(std::iter::once(row(0, self.aggregate_delivery)))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    pub strategy: Strategy,
    pub seed: u64,
    pub layers: u32,
    /// 0 for the aggregate.
    pub layer: u32,
    pub delivery_ratio: Option<f64>,
    pub stream_rate_kbps: u32,
    pub window_s: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    #[default]
    Csv,
    Json,
}

impl ReportFormat {
    pub fn extension(self) -> &'static str {
        match self {
            ReportFormat::Csv => "csv",
            ReportFormat::Json => "json",
        }
    }
}

/// Writes the rows of all `reports` under a single header.
pub fn write_csv<W: Write>(reports: &[MetricsReport], out: W) -> csv::Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(out);
    w.write_record(CSV_HEADER)?;
    for report in reports {
        for row in report.csv_rows() {
            w.serialize(row)?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv(path: &Path) -> Result<Vec<CsvRow>> {
    let csv_err = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
    r.deserialize()
        .collect::<csv::Result<Vec<CsvRow>>>()
        .map_err(csv_err)
}

pub fn emit_report(report: &MetricsReport, format: ReportFormat, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    match format {
        ReportFormat::Csv => {
            write_csv(std::slice::from_ref(report), &mut out).map_err(|source| Error::Csv {
                path: path.to_path_buf(),
                source,
            })?
        }
        ReportFormat::Json => {
            serde_json::to_writer_pretty(&mut out, report).map_err(|source| Error::Json {
                path: path.to_path_buf(),
                source,
            })?;
            out.write_all(b"\n").map_err(|e| Error::io(path, e))?;
        }
    }
    out.flush().map_err(|e| Error::io(path, e))
}
