//! Corruption curve: ERM versus minmax MOM logistic regression as the
//! number of adversarially corrupted observations grows.

use rayon::prelude::*;

use super::{ms_since, push_quartiles, ExperimentName, ExperimentResult, RunRecord, SummaryRow};
use crate::datagen::{self, OutlierXScale};
use crate::error::Result;
use crate::losses::LossSpec;
use crate::model_select;
use crate::rng::{self, streams};
use crate::scalar::dist2;
use crate::solver::{self, SolverConfig};

/// How the block count is chosen for the MOM fit.
#[derive(Debug, Clone, PartialEq)]
pub enum KPolicy {
    Fixed(usize),
    /// Robust cross-validation over the grid with the given fold count.
    CvGrid {
        grid: Vec<usize>,
        v_folds: usize,
    },
}

#[derive(Debug, Clone)]
pub struct CorruptionCurveSpec {
    pub n: usize,
    pub d: usize,
    /// Numbers of corrupted observations to sweep.
    pub levels: Vec<usize>,
    pub replications: usize,
    pub base_seed: u64,
    /// `t_star = scale * (1,..,1)/sqrt(d)`.
    pub t_star_scale: f64,
    pub noise_sd: f64,
    pub x_scale: OutlierXScale,
    pub k_policy: KPolicy,
    pub eps: f64,
    pub erm_max_iter: usize,
    pub mom_max_iter: usize,
    /// Size of the fresh clean test set per replication.
    pub test_n: usize,
}

impl CorruptionCurveSpec {
    pub fn t_star(&self) -> Vec<f64> {
        vec![self.t_star_scale / (self.d as f64).sqrt(); self.d]
    }
}

pub fn run_corruption_curve(spec: &CorruptionCurveSpec) -> Result<ExperimentResult> {
    let t_star = spec.t_star();
    let loss = LossSpec::logistic();

    let per_rep: Vec<Result<Vec<RunRecord>>> = (0..spec.replications)
        .into_par_iter()
        .map(|rep| {
            let rep_seed = rng::derive_seed(spec.base_seed, streams::REPLICATION, rep as u64);
            let clean =
                datagen::gen_logistic_student(spec.n, spec.d, &t_star, spec.noise_sd, rep_seed)?;
            let test = datagen::gen_logistic_student(
                spec.test_n,
                spec.d,
                &t_star,
                spec.noise_sd,
                rng::derive_seed(rep_seed, streams::DATAGEN_ROW, u64::MAX),
            )?;

            let mut records = Vec::new();
            for (li, &level) in spec.levels.iter().enumerate() {
                let data = datagen::corrupt_figure1(
                    &clean,
                    level,
                    &t_star,
                    spec.x_scale,
                    rng::derive_seed(rep_seed, streams::DATAGEN_ROW, li as u64),
                )?;
                let fit_seed = rng::derive_seed(rep_seed, streams::SOLVER_INIT, li as u64);

                let mut cfg = SolverConfig::new(1, fit_seed);
                cfg.eps = spec.eps;
                cfg.max_iter = spec.erm_max_iter;

                // Solver failures are recorded, not fatal.
                let start = std::time::Instant::now();
                match solver::erm_fit(&data, &loss, &cfg) {
                    Ok(fit) => records.push(RunRecord {
                        seed: fit_seed,
                        estimator: "erm".into(),
                        k: 1,
                        error_l2: dist2(&fit.t_hat, &t_star),
                        test_error: Some(test.classification_error(&fit.t_hat)),
                        runtime_ms: ms_since(start),
                        extra: vec![level.to_string(), rep.to_string()],
                    }),
                    Err(_) => records.push(failure_record(fit_seed, "erm", 1, level, rep)),
                }

                let k = match &spec.k_policy {
                    KPolicy::Fixed(k) => *k,
                    KPolicy::CvGrid { grid, v_folds } => {
                        let mut cv_cfg = cfg.clone();
                        cv_cfg.seed = rng::derive_seed(fit_seed, streams::CV_FOLD, 1);
                        model_select::robust_cv_select_k(&data, &loss, grid, *v_folds, &cv_cfg)?
                    }
                };
                let mut mom_cfg = cfg.clone();
                mom_cfg.k = k;
                mom_cfg.max_iter = spec.mom_max_iter;
                let start = std::time::Instant::now();
                match solver::mom_fit(&data, &loss, &mom_cfg) {
                    Ok(fit) => records.push(RunRecord {
                        seed: fit_seed,
                        estimator: "mom".into(),
                        k,
                        error_l2: dist2(&fit.t_hat, &t_star),
                        test_error: Some(test.classification_error(&fit.t_hat)),
                        runtime_ms: ms_since(start),
                        extra: vec![level.to_string(), rep.to_string()],
                    }),
                    Err(_) => records.push(failure_record(fit_seed, "mom", k, level, rep)),
                }
            }
            Ok(records)
        })
        .collect();

    let mut records = Vec::new();
    for r in per_rep {
        records.extend(r?);
    }

    let mut summary = Vec::new();
    for &level in &spec.levels {
        for est in ["erm", "mom"] {
            let group = format!("{est}_outliers_{level}");
            let sel: Vec<&RunRecord> = records
                .iter()
                .filter(|r| r.estimator == est && r.extra[0] == level.to_string())
                .collect();
            let errs: Vec<f64> = sel
                .iter()
                .filter(|r| r.error_l2.is_finite())
                .map(|r| r.error_l2)
                .collect();
            let test_errs: Vec<f64> = sel
                .iter()
                .filter_map(|r| r.test_error)
                .filter(|v| v.is_finite())
                .collect();
            push_quartiles(&mut summary, &group, "error_l2", &errs);
            push_quartiles(&mut summary, &group, "test_error", &test_errs);
            summary.push(SummaryRow {
                group,
                metric: "failures".into(),
                value: sel.iter().filter(|r| !r.error_l2.is_finite()).count() as f64,
            });
        }
    }

    Ok(ExperimentResult {
        name: ExperimentName::CorruptionCurve,
        extra_columns: vec!["n_outliers".into(), "rep".into()],
        records,
        summary,
    })
}

fn failure_record(seed: u64, estimator: &str, k: usize, level: usize, rep: usize) -> RunRecord {
    RunRecord {
        seed,
        estimator: estimator.into(),
        k,
        error_l2: f64::NAN,
        test_error: None,
        runtime_ms: f64::NAN,
        extra: vec![level.to_string(), rep.to_string()],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_curve_produces_records_and_summary() {
        let spec = CorruptionCurveSpec {
            n: 120,
            d: 4,
            levels: vec![0, 3],
            replications: 2,
            base_seed: 42,
            t_star_scale: 3.0,
            noise_sd: 1.0,
            x_scale: OutlierXScale::StdDev5,
            k_policy: KPolicy::Fixed(7),
            eps: 1e-6,
            erm_max_iter: 120,
            mom_max_iter: 120,
            test_n: 400,
        };
        let res = run_corruption_curve(&spec).unwrap();
        assert_eq!(res.records.len(), 2 * 2 * 2);
        assert!(res
            .summary_value("erm_outliers_0", "test_error_median")
            .is_some());
        assert!(res
            .summary_value("mom_outliers_3", "error_l2_median")
            .is_some());
        // Summary medians recompute from records.
        let errs: Vec<f64> = res
            .records
            .iter()
            .filter(|r| r.estimator == "mom" && r.extra[0] == "0")
            .map(|r| r.error_l2)
            .collect();
        assert_eq!(
            res.summary_value("mom_outliers_0", "error_l2_median")
                .unwrap(),
            super::super::median(&errs)
        );
    }
}
