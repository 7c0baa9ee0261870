use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::MetricsReport;
use crate::schedule::Strategy;
use crate::sim::{run_simulation, ConfigError, SimConfig};
use crate::Result;

/// Cross product to run: every strategy at every total stream rate and
/// window, for `seeds` consecutive seeds starting at the base config's.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub strategies: Vec<Strategy>,
    pub rates_kbps: Vec<u32>,
    pub windows_s: Vec<u32>,
    pub seeds: u32,
}

/// Expands the sweep into validated configs, ordered by strategy, rate,
/// window, then seed. A rate is the total stream rate and is split evenly
/// over the base config's layers.
pub fn sweep_configs(base: &SimConfig, spec: &SweepSpec) -> Result<Vec<SimConfig>, ConfigError> {
    let layers = base.stream.layers;
    let mut out = Vec::new();
    for &strategy in &spec.strategies {
        for &rate in &spec.rates_kbps {
            if rate % layers != 0 {
                return Err(ConfigError::Invalid(format!(
                    "rate {rate} Kbps does not split evenly over {layers} layers"
                )));
            }
            for &window in &spec.windows_s {
                for i in 0..spec.seeds {
                    let mut cfg = base.clone();
                    cfg.strategy = strategy;
                    cfg.stream.layer_rate_kbps = rate / layers;
                    cfg.window_seconds = window;
                    cfg.seed = base.seed + u64::from(i);
                    cfg.validate()?;
                    out.push(cfg);
                }
            }
        }
    }
    Ok(out)
}

/// Runs every config of the sweep, in parallel, returning reports in
/// sweep order.
pub fn run_sweep(base: &SimConfig, spec: &SweepSpec) -> Result<Vec<MetricsReport>> {
    let configs = sweep_configs(base, spec)?;
    configs.par_iter().map(run_simulation).collect()
}

/// Mean and sample standard deviation of one (strategy, rate, window,
/// layer) cell over seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub strategy: Strategy,
    pub layers: u32,
    pub layer: u32,
    pub stream_rate_kbps: u32,
    pub window_s: u32,
    pub runs: u32,
    pub mean: Option<f64>,
    pub stddev: Option<f64>,
}

pub fn summarize(reports: &[MetricsReport]) -> Vec<SummaryRow> {
    type Key = (Strategy, u32, u32, u32, u32);
    let mut cells: Vec<(Key, Vec<f64>, u32)> = Vec::new();
    for report in reports {
        for row in report.csv_rows() {
            let key = (
                row.strategy,
                row.layers,
                row.layer,
                row.stream_rate_kbps,
                row.window_s,
            );
            let idx = match cells.iter().position(|(k, _, _)| *k == key) {
                Some(i) => i,
                None => {
                    cells.push((key, Vec::new(), 0));
                    cells.len() - 1
                }
            };
            cells[idx].2 += 1;
            if let Some(r) = row.delivery_ratio {
                cells[idx].1.push(r);
            }
        }
    }
    cells
        .into_iter()
        .map(|((strategy, layers, layer, rate, window), values, runs)| {
            let n = values.len();
            let mean = (n > 0).then(|| values.iter().sum::<f64>() / n as f64);
            let stddev = mean.map(|m| {
                if n < 2 {
                    0.0
                } else {
                    (values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
                }
            });
            SummaryRow {
                strategy,
                layers,
                layer,
                stream_rate_kbps: rate,
                window_s: window,
                runs,
                mean,
                stddev,
            }
        })
        .collect()
}

pub fn write_summary<W: Write>(rows: &[SummaryRow], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::{LayerDelivery, RuntimeStats};

    fn spec() -> SweepSpec {
        SweepSpec {
            strategies: vec![Strategy::Rr, Strategy::Lrf],
            rates_kbps: vec![300, 400],
            windows_s: vec![3],
            seeds: 2,
        }
    }

    #[test]
    fn configs_cover_the_cross_product_in_order() {
        let base = SimConfig::desk_scale(Strategy::NAsSched, 1, 500);
        let cfgs = sweep_configs(&base, &spec()).unwrap();
        assert_eq!(cfgs.len(), 2 * 2 * 2);
        assert_eq!(cfgs[0].strategy, Strategy::Rr);
        assert_eq!(cfgs[0].seed, base.seed);
        assert_eq!(cfgs[1].seed, base.seed + 1);
        assert_eq!(cfgs[2].stream.layer_rate_kbps, 400);
        assert_eq!(cfgs[4].strategy, Strategy::Lrf);
    }

    #[test]
    fn uneven_layer_split_is_rejected() {
        let base = SimConfig::desk_scale(Strategy::AsSched, 3, 100);
        assert!(sweep_configs(&base, &spec()).is_err());
    }

    fn one(seed: u64, ratio: f64) -> MetricsReport {
        MetricsReport {
            strategy: Strategy::Rr,
            seed,
            config_hash: String::new(),
            layers: 1,
            stream_rate_kbps: 500,
            window_s: 10,
            eligibility: String::new(),
            per_layer_delivery: vec![LayerDelivery {
                layer: 1,
                ratio: Some(ratio),
                eligible_nodes: 1,
            }],
            aggregate_delivery: Some(ratio),
            expired_count: 0,
            requested_count: 0,
            duplicate_request_count: 0,
            runtime: RuntimeStats::default(),
        }
    }

    #[test]
    fn summary_mean_and_stddev() {
        let rows = summarize(&[one(0, 0.5), one(1, 0.75), one(2, 1.0)]);
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].runs, 3);
        assert_eq!(rows[0].mean, Some(0.75));
        assert_eq!(rows[0].stddev, Some(0.25));
        assert_eq!(rows[1].layer, 0);
    }
}
