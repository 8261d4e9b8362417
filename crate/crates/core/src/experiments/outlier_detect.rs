//! Outlier detection by median-block selection counts: planted outliers
//! should never be selected into a median block after burn-in.

use rayon::prelude::*;

use super::{ExperimentName, ExperimentResult, RunRecord, SummaryRow};
use crate::datagen;
use crate::diagnostics;
use crate::error::Result;
use crate::losses::LossSpec;
use crate::rng::{self, streams};
use crate::scalar::dist2;
use crate::solver::{self, MedianCriterion, SolverConfig};

#[derive(Debug, Clone)]
pub struct OutlierDetectSpec {
    pub n: usize,
    pub d: usize,
    pub k: usize,
    /// Row indices overwritten with the planted outliers.
    pub planted: Vec<usize>,
    /// Constant coordinate value of the planted design rows.
    pub x_value: f64,
    pub iterations: usize,
    pub burn_in: usize,
    pub replications: usize,
    pub base_seed: u64,
    pub t_star_scale: f64,
    pub noise_sd: f64,
}

pub fn run_outlier_detect(spec: &OutlierDetectSpec) -> Result<ExperimentResult> {
    let t_star = vec![spec.t_star_scale / (spec.d as f64).sqrt(); spec.d];
    let loss = LossSpec::logistic();

    let per_rep: Vec<Result<RunRecord>> = (0..spec.replications)
        .into_par_iter()
        .map(|rep| {
            let rep_seed = rng::derive_seed(spec.base_seed, streams::REPLICATION, rep as u64);
            let clean =
                datagen::gen_logistic_student(spec.n, spec.d, &t_star, spec.noise_sd, rep_seed)?;
            let data =
                datagen::plant_constant_outliers(&clean, &spec.planted, spec.x_value, &t_star)?;

            let fit_seed = rng::derive_seed(rep_seed, streams::SOLVER_INIT, 0);
            let mut cfg = SolverConfig::new(spec.k, fit_seed);
            // The plain-risk median keeps the planted blocks extreme even
            // once the two players coincide.
            cfg.median_criterion = MedianCriterion::PlainRisk;
            cfg.eps = 1e-300;
            cfg.max_iter = spec.iterations;
            cfg.record_trace = true;
            let start = std::time::Instant::now();
            let fit = solver::mom_fit(&data, &loss, &cfg)?;
            let scores = diagnostics::outlier_scores(&fit, spec.burn_in)?;

            let planted_max = spec
                .planted
                .iter()
                .map(|&i| scores.counts[i])
                .max()
                .unwrap_or(0);
            let clean_min = (0..spec.n)
                .filter(|i| !spec.planted.contains(i))
                .map(|i| scores.counts[i])
                .min()
                .unwrap_or(0);
            Ok(RunRecord {
                seed: fit_seed,
                estimator: "mom".into(),
                k: spec.k,
                error_l2: dist2(&fit.t_hat, &t_star),
                test_error: None,
                runtime_ms: super::ms_since(start),
                extra: vec![planted_max.to_string(), clean_min.to_string()],
            })
        })
        .collect();

    let records: Vec<RunRecord> = per_rep.into_iter().collect::<Result<_>>()?;
    let zero_runs = records.iter().filter(|r| r.extra[0] == "0").count() as f64;
    let summary = vec![
        SummaryRow {
            group: "mom".into(),
            metric: "runs_all_planted_zero".into(),
            value: zero_runs,
        },
        SummaryRow {
            group: "mom".into(),
            metric: "runs_total".into(),
            value: records.len() as f64,
        },
    ];

    Ok(ExperimentResult {
        name: ExperimentName::OutlierDetect,
        extra_columns: vec!["planted_max_count".into(), "clean_min_count".into()],
        records,
        summary,
    })
}
