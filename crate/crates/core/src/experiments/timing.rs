//! Per-iteration cost of the MOM descent–ascent step against plain gradient
//! descent at matched iteration counts.
//!
//! The MOM runs use fixed blocks, the plain-risk median criterion and
//! precomputed per-block operator norms, so one iteration costs one loss
//! pass over the data plus a gradient on a single block; the ERM iteration
//! costs a full-data gradient. Setup cost is excluded by differencing a
//! one-iteration run from the full run.

use super::{median, ms_since, ExperimentName, ExperimentResult, RunRecord, SummaryRow};
use crate::data::Dataset;
use crate::datagen;
use crate::error::Result;
use crate::losses::LossSpec;
use crate::rng::{self, streams};
use crate::solver::{self, BlockStrategy, MedianCriterion, SolverConfig};

#[derive(Debug, Clone)]
pub struct TimingSpec {
    pub n: usize,
    pub d: usize,
    /// MOM block counts to time.
    pub k_values: Vec<usize>,
    /// Iterations per timed solve.
    pub iterations: usize,
    pub replications: usize,
    pub base_seed: u64,
    pub t_star_scale: f64,
    pub noise_sd: f64,
}

/// Wall-clock per-iteration time in milliseconds, setup excluded.
fn per_iteration_ms(
    data: &Dataset<f64>,
    loss: &LossSpec<f64>,
    cfg: &SolverConfig<f64>,
    iterations: usize,
) -> Result<f64> {
    let mut one = cfg.clone();
    one.max_iter = 1;
    let start = std::time::Instant::now();
    solver::mom_fit(data, loss, &one)?;
    let t_one = ms_since(start);

    let mut full = cfg.clone();
    full.max_iter = iterations;
    let start = std::time::Instant::now();
    solver::mom_fit(data, loss, &full)?;
    let t_full = ms_since(start);

    Ok((t_full - t_one).max(0.0) / (iterations - 1) as f64)
}

pub fn run_timing(spec: &TimingSpec) -> Result<ExperimentResult> {
    if spec.iterations < 2 {
        return Err(crate::error::Error::argument(
            "need at least 2 iterations to time",
        ));
    }
    let t_star = vec![spec.t_star_scale / (spec.d as f64).sqrt(); spec.d];
    let loss = LossSpec::logistic();
    let mut records = Vec::new();

    for rep in 0..spec.replications {
        let rep_seed = rng::derive_seed(spec.base_seed, streams::REPLICATION, rep as u64);
        let data = datagen::gen_logistic_student(spec.n, spec.d, &t_star, spec.noise_sd, rep_seed)?;
        let fit_seed = rng::derive_seed(rep_seed, streams::SOLVER_INIT, 0);

        // ERM baseline: k = 1 is the full-gradient path.
        let mut erm_cfg = SolverConfig::new(1, fit_seed);
        erm_cfg.eps = 1e-300;
        erm_cfg.block_strategy = BlockStrategy::FixedAtStart;
        let per_iter = per_iteration_ms(&data, &loss, &erm_cfg, spec.iterations)?;
        records.push(RunRecord {
            seed: fit_seed,
            estimator: "erm".into(),
            k: 1,
            error_l2: f64::NAN,
            test_error: None,
            runtime_ms: per_iter,
            extra: vec![spec.iterations.to_string()],
        });

        for &k in &spec.k_values {
            let mut cfg = SolverConfig::new(k, fit_seed);
            cfg.eps = 1e-300;
            cfg.block_strategy = BlockStrategy::FixedAtStart;
            cfg.median_criterion = MedianCriterion::PlainRisk;
            let per_iter = per_iteration_ms(&data, &loss, &cfg, spec.iterations)?;
            records.push(RunRecord {
                seed: fit_seed,
                estimator: format!("mom_k{k}"),
                k,
                error_l2: f64::NAN,
                test_error: None,
                runtime_ms: per_iter,
                extra: vec![spec.iterations.to_string()],
            });
        }
    }

    let mut summary = Vec::new();
    let erm_times: Vec<f64> = records
        .iter()
        .filter(|r| r.estimator == "erm")
        .map(|r| r.runtime_ms)
        .collect();
    let erm_median = median(&erm_times);
    summary.push(SummaryRow {
        group: "erm".into(),
        metric: "per_iter_ms_median".into(),
        value: erm_median,
    });
    for &k in &spec.k_values {
        let times: Vec<f64> = records
            .iter()
            .filter(|r| r.estimator == format!("mom_k{k}"))
            .map(|r| r.runtime_ms)
            .collect();
        let med = median(&times);
        summary.push(SummaryRow {
            group: format!("mom_k{k}"),
            metric: "per_iter_ms_median".into(),
            value: med,
        });
        summary.push(SummaryRow {
            group: format!("mom_k{k}"),
            metric: "ratio_to_erm".into(),
            value: med / erm_median,
        });
    }

    Ok(ExperimentResult {
        name: ExperimentName::Timing,
        extra_columns: vec!["iterations".into()],
        records,
        summary,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn timing_smoke() {
        let spec = TimingSpec {
            n: 400,
            d: 8,
            k_values: vec![8],
            iterations: 10,
            replications: 2,
            base_seed: 3,
            t_star_scale: 2.0,
            noise_sd: 1.0,
        };
        let res = run_timing(&spec).unwrap();
        assert_eq!(res.records.len(), 4);
        assert!(res.summary_value("mom_k8", "ratio_to_erm").unwrap() > 0.0);
    }

    #[test]
    fn k1_timing_ratio_is_near_one() {
        // k = 1 does the same work as the full-gradient path plus one loss
        // pass; the per-iteration ratio stays within a factor of two.
        let spec = TimingSpec {
            n: 4000,
            d: 20,
            k_values: vec![1],
            iterations: 40,
            replications: 3,
            base_seed: 29,
            t_star_scale: 2.0,
            noise_sd: 1.0,
        };
        let res = run_timing(&spec).unwrap();
        let ratio = res.summary_value("mom_k1", "ratio_to_erm").unwrap();
        assert!((0.5..=2.0).contains(&ratio), "k=1 timing ratio {ratio}");
    }
}
