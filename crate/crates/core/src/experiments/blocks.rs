//! Fixed versus resampled block partitions on clean heavy-tailed logistic
//! data, on matched seeds.
//!
//! A fixed partition can trap the descent–ascent dynamics in the cell of one
//! block's minimizer; resampling the partition at every step escapes these
//! cells. The runner reports the estimation error of both variants per
//! replication.

use rayon::prelude::*;

use super::{push_quartiles, ExperimentName, ExperimentResult, RunRecord, SummaryRow};
use crate::datagen;
use crate::error::Result;
use crate::losses::LossSpec;
use crate::rng::{self, streams};
use crate::scalar::dist2;
use crate::solver::{self, BlockStrategy, SolverConfig};

#[derive(Debug, Clone)]
pub struct BlockCompareSpec {
    pub n: usize,
    pub d: usize,
    pub k: usize,
    pub replications: usize,
    pub base_seed: u64,
    pub t_star_scale: f64,
    pub noise_sd: f64,
    pub eps: f64,
    pub max_iter: usize,
}

pub fn run_block_strategy_compare(spec: &BlockCompareSpec) -> Result<ExperimentResult> {
    let t_star = vec![spec.t_star_scale / (spec.d as f64).sqrt(); spec.d];
    let loss = LossSpec::logistic();

    let per_rep: Vec<Result<Vec<RunRecord>>> = (0..spec.replications)
        .into_par_iter()
        .map(|rep| {
            let rep_seed = rng::derive_seed(spec.base_seed, streams::REPLICATION, rep as u64);
            let data =
                datagen::gen_logistic_student(spec.n, spec.d, &t_star, spec.noise_sd, rep_seed)?;
            let fit_seed = rng::derive_seed(rep_seed, streams::SOLVER_INIT, 0);
            let mut records = Vec::new();
            for (name, strategy) in [
                ("fixed", BlockStrategy::FixedAtStart),
                ("resample", BlockStrategy::ResampleEachStep),
            ] {
                let mut cfg = SolverConfig::new(spec.k, fit_seed);
                cfg.block_strategy = strategy;
                cfg.eps = spec.eps;
                cfg.max_iter = spec.max_iter;
                let start = std::time::Instant::now();
                let fit = solver::mom_fit(&data, &loss, &cfg)?;
                records.push(RunRecord {
                    seed: fit_seed,
                    estimator: name.into(),
                    k: spec.k,
                    error_l2: dist2(&fit.t_hat, &t_star),
                    test_error: None,
                    runtime_ms: super::ms_since(start),
                    extra: vec![fit.iterations.to_string()],
                });
            }
            Ok(records)
        })
        .collect();

    let mut records = Vec::new();
    for r in per_rep {
        records.extend(r?);
    }

    let mut summary = Vec::new();
    let fixed: Vec<f64> = records
        .iter()
        .filter(|r| r.estimator == "fixed")
        .map(|r| r.error_l2)
        .collect();
    let resample: Vec<f64> = records
        .iter()
        .filter(|r| r.estimator == "resample")
        .map(|r| r.error_l2)
        .collect();
    push_quartiles(&mut summary, "fixed", "error_l2", &fixed);
    push_quartiles(&mut summary, "resample", "error_l2", &resample);
    let wins = fixed.iter().zip(&resample).filter(|(f, r)| r <= f).count() as f64
        / fixed.len().max(1) as f64;
    summary.push(SummaryRow {
        group: "resample".into(),
        metric: "freq_not_worse_than_fixed".into(),
        value: wins,
    });

    Ok(ExperimentResult {
        name: ExperimentName::BlockStrategyCompare,
        extra_columns: vec!["iterations".into()],
        records,
        summary,
    })
}
