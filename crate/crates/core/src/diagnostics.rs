//! Outlier scoring from median-block selection counts.
//!
//! Each observation scores the number of post-burn-in iterations whose
//! median block contained it. Planted outliers tend to land in blocks whose
//! risk is extreme rather than median, so they score at or near zero.

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::solver::FitResult;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutlierScores {
    /// Per-observation selection counts.
    pub counts: Vec<u64>,
    /// Number of iterations contributing to the counts.
    pub iterations_counted: usize,
    pub burn_in: usize,
}

/// Tallies median-block membership over the iterations after `burn_in`.
pub fn outlier_scores<F: Real>(result: &FitResult<F>, burn_in: usize) -> Result<OutlierScores> {
    if result.median_block_history.is_empty() {
        return Err(Error::argument(
            "outlier_scores requires a fit recorded with record_trace",
        ));
    }
    if burn_in >= result.iterations {
        return Err(Error::argument(format!(
            "burn_in {burn_in} must be below the iteration count {}",
            result.iterations
        )));
    }
    let mut counts = vec![0_u64; result.n];
    let mut iterations_counted = 0;
    for (iter, members) in &result.median_block_history {
        if *iter < burn_in {
            continue;
        }
        iterations_counted += 1;
        for &i in members {
            counts[i] += 1;
        }
    }
    Ok(OutlierScores {
        counts,
        iterations_counted,
        burn_in,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fake_fit(n: usize, history: Vec<Vec<usize>>) -> FitResult<f64> {
        let iterations = history.len();
        FitResult {
            t_hat: vec![0.0],
            t_tilde: vec![0.0],
            iterations,
            converged: false,
            n,
            k: 2,
            t_init: vec![0.0],
            t_tilde_init: vec![1.0],
            median_block_history: history.into_iter().enumerate().collect(),
            objective_history: None,
            t_history: None,
            t_tilde_history: None,
        }
    }

    #[test]
    fn tallies_after_burn_in() {
        // Blocks [[0,1],[2,3]], median history [0, 1, 0, 0], burn_in 1:
        // counted iterations 1..3 select blocks 1, 0, 0.
        let b0 = vec![0, 1];
        let b1 = vec![2, 3];
        let fit = fake_fit(4, vec![b0.clone(), b1.clone(), b0.clone(), b0]);
        let s = outlier_scores(&fit, 1).unwrap();
        assert_eq!(s.counts, vec![2, 2, 1, 1]);
        assert_eq!(s.iterations_counted, 3);

        let fit2 = fake_fit(4, vec![vec![0, 1], vec![0, 1], vec![0, 1], vec![2, 3]]);
        let s2 = outlier_scores(&fit2, 3).unwrap();
        assert_eq!(s2.counts, vec![0, 0, 1, 1]);
    }

    #[test]
    fn each_counted_iteration_contributes_block_size() {
        let fit = fake_fit(6, vec![vec![0, 1, 2], vec![3, 4, 5], vec![0, 2, 4]]);
        let s = outlier_scores(&fit, 0).unwrap();
        let total: u64 = s.counts.iter().sum();
        assert_eq!(total, 3 * 3);
    }

    #[test]
    fn rejects_missing_trace_and_bad_burn_in() {
        let no_trace = fake_fit(4, vec![]);
        assert!(outlier_scores(&no_trace, 0).is_err());
        let fit = fake_fit(4, vec![vec![0, 1]]);
        assert!(outlier_scores(&fit, 1).is_err());
    }

    #[test]
    fn permuting_rows_permutes_counts() {
        // Same selection pattern expressed through a row permutation.
        let perm = [2_usize, 0, 3, 1];
        let history = vec![vec![0, 1], vec![2, 3], vec![0, 1]];
        let permuted: Vec<Vec<usize>> = history
            .iter()
            .map(|b| b.iter().map(|&i| perm[i]).collect())
            .collect();
        let s = outlier_scores(&fake_fit(4, history), 0).unwrap();
        let sp = outlier_scores(&fake_fit(4, permuted), 0).unwrap();
        for (i, &pi) in perm.iter().enumerate() {
            assert_eq!(s.counts[i], sp.counts[pi]);
        }
    }
}
