//! Data-driven choice of the block count `K`.
//!
//! Two procedures: robust V-fold cross-validation scoring held-out data by a
//! MOM of the per-point losses, and an adaptive intersection-of-confidence-
//! sets selection over a finite grid and a finite candidate set. The latter
//! selects the smallest grid `K` whose tail intersection of threshold sets
//! is nonempty; the supremum statistic `T_K` and the intersection are taken
//! over the caller-supplied candidates, and the thresholds are caller
//! inputs (they depend on constants unknowable from data).

use std::collections::BTreeMap;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::losses::LossSpec;
use crate::mom::{self, BlockPartition, PartitionStrategy};
use crate::rng::{self, streams};
use crate::scalar::Real;
use crate::solver::{self, SolverConfig};

/// Lower median of a nonempty slice.
fn lower_median<F: Real>(xs: &[F]) -> F {
    let mut sorted = xs.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("comparable scores"));
    sorted[sorted.len().div_ceil(2) - 1]
}

/// Geometric block-count grid `{1, 2, 4, ...}` capped at `n`.
pub fn default_k_grid(n: usize) -> Vec<usize> {
    let mut grid = Vec::new();
    let mut k = 1;
    while k <= n {
        grid.push(k);
        k *= 2;
    }
    grid
}

/// Robust cross-validation over a grid of block counts.
///
/// For each `K`: fit the MOM estimator with `K` blocks on each training
/// part of a seeded V-fold split, score the held-out part by the MOM (with
/// `K_val = max(1, floor(K |val| / |train|))` blocks) of its per-point
/// losses, and aggregate the fold scores by their median. The `K` with the
/// smallest aggregate wins; ties go to the smaller `K`.
pub fn robust_cv_select_k<F: Real>(
    data: &Dataset<F>,
    loss: &LossSpec<F>,
    k_grid: &[usize],
    v_folds: usize,
    cfg: &SolverConfig<F>,
) -> Result<usize> {
    if k_grid.is_empty() {
        return Err(Error::argument("k_grid must be nonempty"));
    }
    if v_folds < 2 {
        return Err(Error::argument("v_folds must be at least 2"));
    }
    let n = data.n();
    if v_folds > n {
        return Err(Error::argument("more folds than observations"));
    }

    // Seeded fold assignment: permute indices, then V near-equal chunks.
    let fold_of = {
        let perm = mom::partition(
            n,
            1,
            rng::derive_seed(cfg.seed, streams::CV_FOLD, 0),
            PartitionStrategy::Shuffled,
        )?;
        let order = perm.block(0);
        let mut fold = vec![0_usize; n];
        for (pos, &i) in order.iter().enumerate() {
            fold[i] = pos * v_folds / n;
        }
        fold
    };

    let mut grid: Vec<usize> = k_grid.to_vec();
    grid.sort_unstable();
    grid.dedup();

    let mut best: Option<(F, usize)> = None;
    for &k in &grid {
        let mut fold_scores = Vec::with_capacity(v_folds);
        for v in 0..v_folds {
            let train: Vec<usize> = (0..n).filter(|&i| fold_of[i] != v).collect();
            let val: Vec<usize> = (0..n).filter(|&i| fold_of[i] == v).collect();
            if k > train.len() {
                return Err(Error::argument(format!(
                    "k={k} is infeasible on a training fold of size {}",
                    train.len()
                )));
            }
            let train_ds = data.subset(&train);
            let val_ds = data.subset(&val);

            let mut fit_cfg = cfg.clone();
            fit_cfg.k = k;
            fit_cfg.record_trace = false;
            fit_cfg.seed =
                rng::derive_seed(cfg.seed, streams::CV_FOLD, ((k as u64) << 32) | v as u64);
            // A block count whose fit diverges is simply never selected.
            let fit = match solver::mom_fit(&train_ds, loss, &fit_cfg) {
                Ok(fit) => fit,
                Err(crate::error::Error::Solver(_)) => {
                    fold_scores.push(F::infinity());
                    continue;
                }
                Err(e) => return Err(e),
            };

            let k_val = (k * val.len() / train.len()).max(1);
            if k_val > val.len() {
                return Err(Error::argument(format!(
                    "validation fold of size {} cannot hold {k_val} blocks",
                    val.len()
                )));
            }
            let p = mom::partition(
                val.len(),
                k_val,
                rng::derive_seed(cfg.seed, streams::CV_SCORE, ((k as u64) << 32) | v as u64),
                PartitionStrategy::Shuffled,
            )?;
            let mut values = Vec::with_capacity(val.len());
            for i in 0..val_ds.n() {
                values.push(loss.value(val_ds.margin(i, &fit.t_hat), val_ds.y[i])?);
            }
            if values.iter().any(|v| !v.is_finite()) {
                fold_scores.push(F::infinity());
            } else {
                fold_scores.push(mom::mom(&values, &p)?.value);
            }
        }
        let score = lower_median(&fold_scores);
        match &best {
            Some((s, _)) if *s <= score => {}
            _ => best = Some((score, k)),
        }
    }
    let (score, k) = best.expect("nonempty grid");
    if !score.is_finite() {
        return Err(Error::Solver(
            "every block count in the grid failed on the training folds".into(),
        ));
    }
    Ok(k)
}

/// Configuration of the adaptive block-count selection.
#[derive(Debug, Clone)]
pub struct LepskiConfig<F> {
    /// Ascending block counts to scan.
    pub k_grid: Vec<usize>,
    /// Acceptance threshold per grid `K` (the confidence-set radius).
    pub thresholds: BTreeMap<usize, F>,
    /// Finite stand-in for the function class: candidate parameter vectors.
    pub candidates: Vec<Vec<F>>,
}

/// Supremum statistic `T_K(g) = max over candidates g' of
/// MOM_K(loss_g - loss_g')`, the finite-set version of the adversarial sup.
pub fn lepski_tk<F: Real>(
    g: &[F],
    data: &Dataset<F>,
    loss: &LossSpec<F>,
    p: &BlockPartition,
    candidates: &[Vec<F>],
) -> Result<F> {
    if candidates.is_empty() {
        return Err(Error::argument("candidate set must be nonempty"));
    }
    let mut best = F::neg_infinity();
    for cand in candidates {
        let v = mom::mom_increment(data, g, cand, loss, p)?.value;
        best = best.max(v);
    }
    Ok(best)
}

/// Smallest grid `K` whose tail intersection of threshold sets is nonempty,
/// together with one member of the intersection (lowest candidate index).
///
/// Partitions are contiguous, so the procedure is deterministic in its
/// inputs. Fails with a selection error when every tail intersection is
/// empty (thresholds too tight).
pub fn lepski_select<F: Real>(
    data: &Dataset<F>,
    loss: &LossSpec<F>,
    cfg: &LepskiConfig<F>,
) -> Result<(usize, Vec<F>)> {
    if cfg.k_grid.is_empty() {
        return Err(Error::argument("k_grid must be nonempty"));
    }
    if cfg.candidates.is_empty() {
        return Err(Error::argument("candidate set must be nonempty"));
    }
    let mut grid = cfg.k_grid.clone();
    grid.sort_unstable();
    grid.dedup();
    if grid[0] == 0 || *grid.last().unwrap() > data.n() {
        return Err(Error::argument("k_grid entries must lie in [1, n]"));
    }
    for &k in &grid {
        if !cfg.thresholds.contains_key(&k) {
            return Err(Error::argument(format!("missing threshold for K={k}")));
        }
    }

    // membership[ki][ci]: candidate ci belongs to the set at grid[ki].
    let mut membership = Vec::with_capacity(grid.len());
    for &k in &grid {
        let p = mom::partition(data.n(), k, 0, PartitionStrategy::Contiguous)?;
        let thr = cfg.thresholds[&k];
        let row: Vec<bool> = cfg
            .candidates
            .iter()
            .map(|g| Ok(lepski_tk(g, data, loss, &p, &cfg.candidates)? <= thr))
            .collect::<Result<_>>()?;
        membership.push(row);
    }

    // Tail intersections from the top of the grid downwards.
    let n_cand = cfg.candidates.len();
    let mut tail = vec![true; n_cand];
    let mut chosen: Option<(usize, usize)> = None;
    for ki in (0..grid.len()).rev() {
        for ci in 0..n_cand {
            tail[ci] &= membership[ki][ci];
        }
        if let Some(ci) = tail.iter().position(|&b| b) {
            chosen = Some((grid[ki], ci));
        }
    }
    match chosen {
        Some((k, ci)) => Ok((k, cfg.candidates[ci].clone())),
        None => Err(Error::Selection(
            "every tail intersection is empty; thresholds too tight".into(),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen;
    use crate::linalg::Matrix;

    fn line_dataset(n: usize, t_star: f64, noise: f64, seed: u64) -> Dataset<f64> {
        let mut rng = rng::chacha(seed);
        let mut x = Matrix::zeros(n, 1);
        let mut y = Vec::with_capacity(n);
        for i in 0..n {
            let xi: f64 = rng::standard_normal(&mut rng);
            x.set(i, 0, xi);
            y.push(xi * t_star + noise * rng::standard_normal::<f64, _>(&mut rng));
        }
        let mut ds = Dataset::new(x, y).unwrap();
        ds.t_star = Some(vec![t_star]);
        ds
    }

    #[test]
    fn singleton_grid_returns_its_element() {
        let ds = line_dataset(60, 1.0, 0.3, 1);
        let cfg = SolverConfig::new(1, 5);
        let k = robust_cv_select_k(&ds, &LossSpec::l1(), &[1], 3, &cfg).unwrap();
        assert_eq!(k, 1);
    }

    #[test]
    fn cv_is_deterministic_and_grid_order_free() {
        let ds = line_dataset(80, 0.7, 0.5, 2);
        let mut cfg = SolverConfig::new(1, 9);
        cfg.max_iter = 150;
        let loss = LossSpec::l1();
        let a = robust_cv_select_k(&ds, &loss, &[1, 2, 5, 10], 4, &cfg).unwrap();
        let b = robust_cv_select_k(&ds, &loss, &[10, 5, 2, 1], 4, &cfg).unwrap();
        let c = robust_cv_select_k(&ds, &loss, &[1, 2, 5, 10], 4, &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, c);
    }

    #[test]
    fn cv_rejects_bad_arguments() {
        let ds = line_dataset(30, 0.7, 0.5, 3);
        let cfg = SolverConfig::new(1, 9);
        let loss = LossSpec::l1();
        assert!(robust_cv_select_k(&ds, &loss, &[], 3, &cfg).is_err());
        assert!(robust_cv_select_k(&ds, &loss, &[1], 1, &cfg).is_err());
        // K larger than any training fold.
        assert!(robust_cv_select_k(&ds, &loss, &[25], 3, &cfg).is_err());
    }

    #[test]
    fn tk_is_zero_against_itself_and_monotone_in_candidates() {
        let ds = line_dataset(40, 1.0, 0.2, 4);
        let loss = LossSpec::l1();
        let p = mom::partition(40, 4, 0, PartitionStrategy::Contiguous).unwrap();
        let g = vec![0.8];
        let only_self = vec![g.clone()];
        let t0 = lepski_tk(&g, &ds, &loss, &p, &only_self).unwrap();
        assert_eq!(t0, 0.0);
        let more = vec![g.clone(), vec![1.0], vec![0.0]];
        let t1 = lepski_tk(&g, &ds, &loss, &p, &more).unwrap();
        assert!(t1 >= t0);
        // Candidates far from the oracle have a larger statistic.
        let grid: Vec<Vec<f64>> = (-5..=5).map(|i| vec![1.0 + 0.1 * i as f64]).collect();
        let near = lepski_tk(&[1.0], &ds, &loss, &p, &grid).unwrap();
        let far = lepski_tk(&[6.0], &ds, &loss, &p, &grid).unwrap();
        assert!(near < far, "near {near} far {far}");
    }

    #[test]
    fn lepski_select_pinned_behaviors() {
        let ds = line_dataset(60, 1.0, 0.2, 5);
        let loss = LossSpec::l1();
        let candidates: Vec<Vec<f64>> = (0..=10).map(|i| vec![0.2 * i as f64]).collect();
        let grid = vec![1, 2, 4, 8];

        let mut inf_thr = BTreeMap::new();
        for &k in &grid {
            inf_thr.insert(k, f64::INFINITY);
        }
        let (k, cand) = lepski_select(
            &ds,
            &loss,
            &LepskiConfig {
                k_grid: grid.clone(),
                thresholds: inf_thr,
                candidates: candidates.clone(),
            },
        )
        .unwrap();
        assert_eq!(k, 1);
        assert_eq!(cand, candidates[0]);

        let mut neg_thr = BTreeMap::new();
        for &k in &grid {
            neg_thr.insert(k, -1.0);
        }
        let err = lepski_select(
            &ds,
            &loss,
            &LepskiConfig {
                k_grid: grid.clone(),
                thresholds: neg_thr,
                candidates: candidates.clone(),
            },
        )
        .unwrap_err();
        assert!(matches!(err, Error::Selection(_)));

        let mut missing = BTreeMap::new();
        missing.insert(1_usize, 1.0_f64);
        let err = lepski_select(
            &ds,
            &loss,
            &LepskiConfig {
                k_grid: grid,
                thresholds: missing,
                candidates,
            },
        )
        .unwrap_err();
        assert!(matches!(err, Error::Argument(_)));
    }

    #[test]
    fn lepski_selection_lands_near_the_oracle_on_calibrated_thresholds() {
        let t_star = 1.0;
        let ds = line_dataset(120, t_star, 0.1, 6);
        let loss = LossSpec::l1();
        let candidates: Vec<Vec<f64>> =
            (-20..=20).map(|i| vec![t_star + 0.05 * i as f64]).collect();
        let grid = vec![2, 4, 8];

        // Brute-force all T_K values and set each threshold just above the
        // minimum so the confidence sets are small but nonempty.
        let mut thresholds = BTreeMap::new();
        let mut allowed_radius = 0.0_f64;
        for &k in &grid {
            let p = mom::partition(ds.n(), k, 0, PartitionStrategy::Contiguous).unwrap();
            let tks: Vec<f64> = candidates
                .iter()
                .map(|g| lepski_tk(g, &ds, &loss, &p, &candidates).unwrap())
                .collect();
            let min = tks.iter().cloned().fold(f64::INFINITY, f64::min);
            let thr = min + 0.01;
            thresholds.insert(k, thr);
            for (ci, &v) in tks.iter().enumerate() {
                if v <= thr {
                    allowed_radius = allowed_radius.max((candidates[ci][0] - t_star).abs());
                }
            }
        }
        let (k_hat, chosen) = lepski_select(
            &ds,
            &loss,
            &LepskiConfig {
                k_grid: grid,
                thresholds,
                candidates,
            },
        )
        .unwrap();
        assert!(k_hat >= 2);
        assert!(
            (chosen[0] - t_star).abs() <= allowed_radius + 1e-12,
            "chosen {} outside radius {allowed_radius}",
            chosen[0]
        );
    }

    #[test]
    fn cv_prefers_moderate_k_on_clean_data() {
        // On clean data there is no incentive to over-split: the largest K
        // should win rarely. 20 seeded replications.
        let loss = LossSpec::l1();
        let grid = default_k_grid(100);
        assert_eq!(grid, vec![1, 2, 4, 8, 16, 32, 64]);
        let mut largest = 0;
        let mut picks = Vec::new();
        for rep in 0..20 {
            let ds = line_dataset(100, 1.0, 0.4, 100 + rep);
            let mut cfg = SolverConfig::new(1, 7 + rep);
            cfg.max_iter = 200;
            let k = robust_cv_select_k(&ds, &loss, &grid, 4, &cfg).unwrap();
            picks.push(k);
            if k == *grid.last().unwrap() {
                largest += 1;
            }
        }
        assert!(
            largest <= 4,
            "largest grid element selected {largest}/20 times: {picks:?}"
        );
    }

    #[test]
    fn cv_scales_k_with_contamination() {
        // 5% corrupted points: the selected K should reach at least twice
        // the outlier count in most replications.
        let loss = LossSpec::logistic();
        let grid = [1_usize, 2, 5, 10, 25, 50];
        let n = 200;
        let n_out = 10;
        let t_star = vec![2.0, -1.5];
        let mut big_enough = 0;
        for rep in 0..20 {
            let clean = datagen::gen_logistic_student(n, 2, &t_star, 1.0, 500 + rep).unwrap();
            let bad = datagen::corrupt_figure1(
                &clean,
                n_out,
                &t_star,
                datagen::OutlierXScale::StdDev5,
                900 + rep,
            )
            .unwrap();
            let mut cfg = SolverConfig::new(1, 31 + rep);
            cfg.max_iter = 250;
            cfg.eps = 1e-8;
            let k = robust_cv_select_k(&bad, &loss, &grid, 4, &cfg).unwrap();
            if k >= 2 * n_out {
                big_enough += 1;
            }
        }
        assert!(
            big_enough >= 16,
            "K >= 2|O| in only {big_enough}/20 replications"
        );
    }
}
