//! Desk-scale experiment harnesses.
//!
//! Each runner generates seeded synthetic data, fits the estimators under
//! comparison, and returns per-replication records plus summary statistics.
//! Records are written as `<name>_records.csv` with the fixed leading
//! columns `seed,estimator,k,error_l2,test_error,runtime_ms` (experiment
//! specific columns follow), summaries as `<name>_summary.csv` with columns
//! `group,metric,value`. Every statistic in the summary is recomputable from
//! the records file. Replications use derived per-replication seeds, so
//! results do not depend on execution order; `runtime_ms` is measured and is
//! the one column that varies between runs.

mod blocks;
mod complexity_check;
mod corruption;
mod outlier_detect;
mod props;
mod timing;

pub use blocks::{run_block_strategy_compare, BlockCompareSpec};
pub use complexity_check::{run_complexity_check, ComplexityCase, ComplexityCheckSpec};
pub use corruption::{run_corruption_curve, CorruptionCurveSpec, KPolicy};
pub use outlier_detect::{run_outlier_detect, OutlierDetectSpec};
pub use props::{run_prop1, run_prop2, Prop1Spec, Prop2Spec};
pub use timing::{run_timing, TimingSpec};

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::data::format_float;
use crate::error::Result;

/// Names of the available experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentName {
    CorruptionCurve,
    BlockStrategyCompare,
    Timing,
    Prop1,
    Prop2,
    ComplexityCheck,
    OutlierDetect,
}

impl ExperimentName {
    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "corruption_curve" => ExperimentName::CorruptionCurve,
            "block_strategy_compare" => ExperimentName::BlockStrategyCompare,
            "timing" => ExperimentName::Timing,
            "prop1" => ExperimentName::Prop1,
            "prop2" => ExperimentName::Prop2,
            "complexity_check" => ExperimentName::ComplexityCheck,
            "outlier_detect" => ExperimentName::OutlierDetect,
            _ => return None,
        })
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentName::CorruptionCurve => "corruption_curve",
            ExperimentName::BlockStrategyCompare => "block_strategy_compare",
            ExperimentName::Timing => "timing",
            ExperimentName::Prop1 => "prop1",
            ExperimentName::Prop2 => "prop2",
            ExperimentName::ComplexityCheck => "complexity_check",
            ExperimentName::OutlierDetect => "outlier_detect",
        }
    }
}

/// One replication x estimator record.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub seed: u64,
    pub estimator: String,
    pub k: usize,
    pub error_l2: f64,
    /// Held-out metric; absent where the experiment has none.
    pub test_error: Option<f64>,
    pub runtime_ms: f64,
    /// Values for the experiment-specific columns, in declared order.
    pub extra: Vec<String>,
}

/// One `group,metric,value` summary row.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub group: String,
    pub metric: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub name: ExperimentName,
    /// Names of the experiment-specific record columns.
    pub extra_columns: Vec<String>,
    pub records: Vec<RunRecord>,
    pub summary: Vec<SummaryRow>,
}

impl ExperimentResult {
    /// Writes `<name>_records.csv` and `<name>_summary.csv` under `out_dir`.
    pub fn write_csvs(&self, out_dir: impl AsRef<Path>) -> Result<(PathBuf, PathBuf)> {
        let dir = out_dir.as_ref();
        std::fs::create_dir_all(dir)?;
        let rec_path = dir.join(format!("{}_records.csv", self.name.as_str()));
        let sum_path = dir.join(format!("{}_summary.csv", self.name.as_str()));

        let mut out = String::from("seed,estimator,k,error_l2,test_error,runtime_ms");
        for c in &self.extra_columns {
            let _ = write!(out, ",{c}");
        }
        out.push('\n');
        for r in &self.records {
            let _ = write!(
                out,
                "{},{},{},{},{},{}",
                r.seed,
                r.estimator,
                r.k,
                format_float(r.error_l2),
                r.test_error.map(format_float).unwrap_or_default(),
                format_float(r.runtime_ms),
            );
            for v in &r.extra {
                let _ = write!(out, ",{v}");
            }
            out.push('\n');
        }
        std::fs::write(&rec_path, out)?;

        let mut out = String::from("group,metric,value\n");
        for s in &self.summary {
            let _ = writeln!(out, "{},{},{}", s.group, s.metric, format_float(s.value));
        }
        std::fs::write(&sum_path, out)?;
        Ok((rec_path, sum_path))
    }

    /// Summary value lookup by group and metric.
    pub fn summary_value(&self, group: &str, metric: &str) -> Option<f64> {
        self.summary
            .iter()
            .find(|s| s.group == group && s.metric == metric)
            .map(|s| s.value)
    }
}

/// Empirical quantile (nearest-rank on the sorted values).
pub fn quantile(values: &[f64], q: f64) -> f64 {
    assert!(!values.is_empty());
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
    let idx = ((sorted.len() as f64 - 1.0) * q).round() as usize;
    sorted[idx.min(sorted.len() - 1)]
}

pub fn median(values: &[f64]) -> f64 {
    quantile(values, 0.5)
}

/// Milliseconds elapsed since `start`.
pub(crate) fn ms_since(start: std::time::Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

/// Pushes median/quartile rows for a metric of a record group.
pub(crate) fn push_quartiles(
    summary: &mut Vec<SummaryRow>,
    group: &str,
    metric: &str,
    values: &[f64],
) {
    if values.is_empty() {
        return;
    }
    for (suffix, q) in [("_q25", 0.25), ("_median", 0.5), ("_q75", 0.75)] {
        summary.push(SummaryRow {
            group: group.to_string(),
            metric: format!("{metric}{suffix}"),
            value: quantile(values, q),
        });
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantiles_on_small_vectors() {
        let v = [3.0, 1.0, 2.0];
        assert_eq!(median(&v), 2.0);
        assert_eq!(quantile(&v, 0.0), 1.0);
        assert_eq!(quantile(&v, 1.0), 3.0);
    }

    #[test]
    fn csv_emission_layout() {
        let res = ExperimentResult {
            name: ExperimentName::Prop1,
            extra_columns: vec!["rel_error".into()],
            records: vec![RunRecord {
                seed: 1,
                estimator: "erm".into(),
                k: 1,
                error_l2: 0.5,
                test_error: None,
                runtime_ms: 1.25,
                extra: vec!["0.25".into()],
            }],
            summary: vec![SummaryRow {
                group: "erm".into(),
                metric: "m".into(),
                value: 2.0,
            }],
        };
        let dir = std::env::temp_dir().join("minmax_mom_exp_test");
        let (rec, sum) = res.write_csvs(&dir).unwrap();
        let rec_text = std::fs::read_to_string(rec).unwrap();
        assert!(rec_text.starts_with("seed,estimator,k,error_l2,test_error,runtime_ms,rel_error\n"));
        assert!(rec_text.contains("1,erm,1,"));
        let sum_text = std::fs::read_to_string(sum).unwrap();
        assert!(sum_text.starts_with("group,metric,value\n"));
        assert_eq!(res.summary_value("erm", "m"), Some(2.0));
    }
}
