//! Gradient solvers: plain (sub)gradient descent for ERM and the randomized
//! descent–ascent method for the minmax MOM estimator.
//!
//! One iteration of the MOM solver:
//!
//! 1. build the block partition (once at start, or fresh every step);
//! 2. find the block realizing the MOM median — by default the median of the
//!    incremental risks `P_B(l_t - l_t~)`, optionally the median of the plain
//!    risks `P_B(l_t)`;
//! 3. set `eta = opnorm(X_B) / (4 * denom)` from the median block's design
//!    (`denom` is the block size by default, or the full sample size), and
//!    step both players by `1/eta` times their own block subgradient;
//! 4. stop when `‖t - t~‖₂ < eps` or after `max_iter` steps.
//!
//! Taking the step size from the median block keeps corrupted blocks nearly
//! harmless: a block containing a large-norm outlier has a large operator
//! norm, hence a tiny step whenever it is selected. With `k = 1` the single
//! block is always the median block and the iterate sequence is exactly plain
//! gradient descent on the full empirical risk, which is what [`erm_fit`]
//! runs (with a gradient-norm stopping rule instead of the iterate gap).
//!
//! The operator-norm step rule is the smoothness constant for the logistic
//! loss; for the non-smooth losses it is a heuristic and a constant step is
//! available through [`StepRule::Constant`].

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::linalg::operator_norm;
use crate::losses::LossSpec;
use crate::mom::{self, BlockPartition, PartitionStrategy};
use crate::rng::{self, streams};
use crate::scalar::{dist2, norm2, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockStrategy {
    /// One partition drawn at the start and reused every iteration.
    FixedAtStart,
    /// A fresh uniform partition at every descent–ascent step.
    ResampleEachStep,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepRule<F> {
    /// `eta` from the operator norm of the median block's design (default).
    MedianBlockOpNorm,
    /// `eta` from the operator norm of the full design matrix.
    FullDataOpNorm,
    /// Fixed step size multiplying the subgradient.
    Constant(F),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepDenominator {
    /// `eta = opnorm / (4 |B|)`: the gradient is a block average.
    BlockSize,
    /// `eta = opnorm / (4 N)`.
    TotalN,
}

/// Which quantity the median block is selected on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MedianCriterion {
    /// Median of the incremental risks `P_B(l_t - l_t~)` (default; this is
    /// the quantity the minmax MOM estimator evaluates).
    Incremental,
    /// Median of the plain risks `P_B(l_t)`.
    PlainRisk,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig<F> {
    pub k: usize,
    pub block_strategy: BlockStrategy,
    pub partition_strategy: PartitionStrategy,
    pub median_criterion: MedianCriterion,
    pub step_rule: StepRule<F>,
    pub step_denominator: StepDenominator,
    /// Stopping threshold on `‖t - t~‖₂` (or on the gradient norm for ERM).
    pub eps: F,
    pub max_iter: usize,
    pub seed: u64,
    pub record_trace: bool,
}

impl<F: Real> SolverConfig<F> {
    pub fn new(k: usize, seed: u64) -> Self {
        SolverConfig {
            k,
            block_strategy: BlockStrategy::ResampleEachStep,
            partition_strategy: PartitionStrategy::Shuffled,
            median_criterion: MedianCriterion::Incremental,
            step_rule: StepRule::MedianBlockOpNorm,
            step_denominator: StepDenominator::BlockSize,
            eps: F::from64(1e-6),
            max_iter: 10_000,
            seed,
            record_trace: false,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.eps > F::zero()) {
            return Err(Error::argument("eps must be positive"));
        }
        if self.max_iter == 0 {
            return Err(Error::argument("max_iter must be at least 1"));
        }
        if self.k == 0 {
            return Err(Error::argument("block count k must be at least 1"));
        }
        if let StepRule::Constant(c) = self.step_rule {
            if !(c > F::zero()) || !c.is_finite() {
                return Err(Error::argument("constant step must be positive and finite"));
            }
        }
        Ok(())
    }
}

/// Outcome of a solve, with optional per-iteration trace.
#[derive(Debug, Clone, PartialEq)]
pub struct FitResult<F> {
    /// Minimizing player's iterate at termination.
    pub t_hat: Vec<F>,
    /// Maximizing player's iterate at termination.
    pub t_tilde: Vec<F>,
    pub iterations: usize,
    pub converged: bool,
    /// Dataset size the fit ran on.
    pub n: usize,
    pub k: usize,
    /// Initial iterates (drawn i.i.d. standard normal from the seed).
    pub t_init: Vec<F>,
    pub t_tilde_init: Vec<F>,
    /// Per iteration: `(iteration index, member indices of the median block)`.
    /// Populated when `record_trace` is set.
    pub median_block_history: Vec<(usize, Vec<usize>)>,
    /// Median objective value used for selection at each iteration.
    pub objective_history: Option<Vec<F>>,
    /// `t` after each update.
    pub t_history: Option<Vec<Vec<F>>>,
    /// `t~` after each update.
    pub t_tilde_history: Option<Vec<Vec<F>>>,
}

/// Average subgradient of the block empirical risk at `t`:
/// `(1/|B|) Σ_{i in B} loss'(<x_i, t>, y_i) x_i`.
pub fn block_gradient<F: Real>(
    data: &Dataset<F>,
    block: &[usize],
    loss: &LossSpec<F>,
    t: &[F],
) -> Result<Vec<F>> {
    if block.is_empty() {
        return Err(Error::argument("block_gradient on an empty block"));
    }
    if t.len() != data.dim() {
        return Err(Error::argument("parameter dimension mismatch"));
    }
    let mut g = vec![F::zero(); data.dim()];
    for &i in block {
        let s = loss.subgrad(data.margin(i, t), data.y[i])?;
        for (gj, &xj) in g.iter_mut().zip(data.x.row(i)) {
            *gj += s * xj;
        }
    }
    let inv = F::one() / F::from64(block.len() as f64);
    g.iter_mut().for_each(|v| *v *= inv);
    Ok(g)
}

enum StopRule {
    IterateGap,
    GradNorm,
}

/// Minmax MOM descent–ascent fit.
pub fn mom_fit<F: Real>(
    data: &Dataset<F>,
    loss: &LossSpec<F>,
    cfg: &SolverConfig<F>,
) -> Result<FitResult<F>> {
    fit_engine(data, loss, cfg, StopRule::IterateGap)
}

/// Plain (sub)gradient descent on the full empirical risk: the `k = 1` code
/// path with a gradient-norm stopping rule.
pub fn erm_fit<F: Real>(
    data: &Dataset<F>,
    loss: &LossSpec<F>,
    cfg: &SolverConfig<F>,
) -> Result<FitResult<F>> {
    let mut cfg = cfg.clone();
    cfg.k = 1;
    fit_engine(data, loss, &cfg, StopRule::GradNorm)
}

fn fit_engine<F: Real>(
    data: &Dataset<F>,
    loss: &LossSpec<F>,
    cfg: &SolverConfig<F>,
    stop: StopRule,
) -> Result<FitResult<F>> {
    cfg.validate()?;
    let n = data.n();
    let d = data.dim();
    if d == 0 {
        return Err(Error::argument("design must have at least one column"));
    }
    if cfg.k > n {
        return Err(Error::argument(format!(
            "k={} exceeds sample size {n}",
            cfg.k
        )));
    }
    if !matches!(cfg.step_rule, StepRule::Constant(_)) && data.x.max_abs() == F::zero() {
        return Err(Error::Solver(
            "zero design matrix: step size undefined".into(),
        ));
    }

    // Initial points: i.i.d. standard normal, redrawn until they differ.
    let mut init_rng = rng::chacha(rng::derive_seed(cfg.seed, streams::SOLVER_INIT, 0));
    let t_init: Vec<F> = (0..d)
        .map(|_| rng::standard_normal(&mut init_rng))
        .collect();
    let mut t_tilde_init: Vec<F> = (0..d)
        .map(|_| rng::standard_normal(&mut init_rng))
        .collect();
    while t_tilde_init == t_init {
        t_tilde_init = (0..d)
            .map(|_| rng::standard_normal(&mut init_rng))
            .collect();
    }

    // With a single block, resampling would only permute the summation
    // order; build the partition once so its operator norm is reused.
    let effective_strategy = if cfg.k == 1 {
        BlockStrategy::FixedAtStart
    } else {
        cfg.block_strategy
    };
    let fixed_partition = match effective_strategy {
        BlockStrategy::FixedAtStart => Some(mom::partition(
            n,
            cfg.k,
            rng::derive_seed(cfg.seed, streams::PARTITION, 0),
            cfg.partition_strategy,
        )?),
        BlockStrategy::ResampleEachStep => None,
    };

    // Per-block operator norms are reusable when the partition is fixed.
    let mut block_opnorms: Vec<Option<F>> = vec![None; cfg.k];
    if let (Some(p), StepRule::MedianBlockOpNorm) = (&fixed_partition, &cfg.step_rule) {
        for (k, slot) in block_opnorms.iter_mut().enumerate() {
            *slot = Some(operator_norm(&data.x.select_rows(p.block(k))));
        }
    }
    let full_opnorm = match cfg.step_rule {
        StepRule::FullDataOpNorm => Some(operator_norm(&data.x)),
        _ => None,
    };

    let mut t = t_init.clone();
    let mut t_tilde = t_tilde_init.clone();
    let mut median_block_history = Vec::new();
    let mut objective_history = cfg.record_trace.then(Vec::new);
    let mut t_history = cfg.record_trace.then(Vec::new);
    let mut t_tilde_history = cfg.record_trace.then(Vec::new);
    let mut converged = false;
    let mut iterations = 0;

    for iter in 0..cfg.max_iter {
        if matches!(stop, StopRule::IterateGap) && dist2(&t, &t_tilde) < cfg.eps {
            converged = true;
            break;
        }

        let scratch;
        let p: &BlockPartition = match &fixed_partition {
            Some(p) => p,
            None => {
                scratch = mom::partition(
                    n,
                    cfg.k,
                    rng::derive_seed(cfg.seed, streams::SOLVER_STEP, iter as u64),
                    cfg.partition_strategy,
                )?;
                &scratch
            }
        };

        let selection = match cfg.median_criterion {
            MedianCriterion::Incremental => mom::mom_increment(data, &t, &t_tilde, loss, p)?,
            MedianCriterion::PlainRisk => mom::mom_plain_risk(data, &t, loss, p)?,
        };
        let block = p.block(selection.median_block);

        let g_t = block_gradient(data, block, loss, &t)?;
        if matches!(stop, StopRule::GradNorm) && norm2(&g_t) < cfg.eps {
            converged = true;
            break;
        }

        let step = match cfg.step_rule {
            StepRule::Constant(c) => c,
            _ => {
                let opnorm = match cfg.step_rule {
                    StepRule::MedianBlockOpNorm => match &fixed_partition {
                        Some(_) => *block_opnorms[selection.median_block]
                            .get_or_insert_with(|| operator_norm(&data.x.select_rows(block))),
                        None => operator_norm(&data.x.select_rows(block)),
                    },
                    StepRule::FullDataOpNorm => full_opnorm.unwrap(),
                    StepRule::Constant(_) => unreachable!(),
                };
                let denom = match cfg.step_denominator {
                    StepDenominator::BlockSize => F::from64(block.len() as f64),
                    StepDenominator::TotalN => F::from64(n as f64),
                };
                let eta = opnorm / (F::from64(4.0) * denom);
                if eta == F::zero() {
                    return Err(Error::Solver(
                        "zero design block: step size undefined".into(),
                    ));
                }
                F::one() / eta
            }
        };

        let g_tilde = block_gradient(data, block, loss, &t_tilde)?;
        for j in 0..d {
            t[j] -= step * g_t[j];
            t_tilde[j] -= step * g_tilde[j];
        }
        if t.iter().chain(t_tilde.iter()).any(|v| !v.is_finite()) {
            return Err(Error::Solver(format!(
                "non-finite iterate at iteration {iter}"
            )));
        }

        iterations = iter + 1;
        if cfg.record_trace {
            median_block_history.push((iter, block.to_vec()));
            if let Some(h) = objective_history.as_mut() {
                h.push(selection.value);
            }
            if let Some(h) = t_history.as_mut() {
                h.push(t.clone());
            }
            if let Some(h) = t_tilde_history.as_mut() {
                h.push(t_tilde.clone());
            }
        }
    }

    if !converged {
        converged = match stop {
            StopRule::IterateGap => dist2(&t, &t_tilde) < cfg.eps,
            StopRule::GradNorm => {
                // Full-data gradient at the final iterate.
                let all: Vec<usize> = (0..n).collect();
                norm2(&block_gradient(data, &all, loss, &t)?) < cfg.eps
            }
        };
    }

    Ok(FitResult {
        t_hat: t,
        t_tilde,
        iterations,
        converged,
        n,
        k: cfg.k,
        t_init,
        t_tilde_init,
        median_block_history,
        objective_history,
        t_history,
        t_tilde_history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen;
    use crate::linalg::Matrix;
    use crate::rng;

    fn logistic_toy(n: usize, d: usize, seed: u64) -> Dataset<f64> {
        let t_star: Vec<f64> = (0..d)
            .map(|j| if j % 2 == 0 { 1.0 } else { -0.5 })
            .collect();
        datagen::gen_logistic_student(n, d, &t_star, 1.0, seed).unwrap()
    }

    #[test]
    fn block_gradient_pinned_cases() {
        // Logistic, single point X = (1, 0), Y = 1, t = 0 -> (-0.5, 0).
        let x = Matrix::from_rows(vec![vec![1.0_f64, 0.0]]).unwrap();
        let ds = Dataset::new(x, vec![1.0]).unwrap();
        let g = block_gradient(&ds, &[0], &LossSpec::logistic(), &[0.0, 0.0]).unwrap();
        assert_eq!(g, vec![-0.5, 0.0]);

        // Quantile with all residuals zero at t: min-norm subgradient is 0.
        let x = Matrix::from_rows(vec![vec![2.0_f64], vec![-1.0]]).unwrap();
        let ds = Dataset::new(x, vec![2.0, -1.0]).unwrap();
        let g = block_gradient(&ds, &[0, 1], &LossSpec::l1(), &[1.0]).unwrap();
        assert_eq!(g, vec![0.0]);

        assert!(block_gradient(&ds, &[], &LossSpec::l1(), &[1.0]).is_err());
    }

    #[test]
    fn block_gradient_matches_finite_differences() {
        let ds = logistic_toy(40, 3, 7);
        let loss = LossSpec::logistic();
        let block: Vec<usize> = (0..40).collect();
        let t = vec![0.3, -0.2, 0.5];
        let g = block_gradient(&ds, &block, &loss, &t).unwrap();
        let h = 1e-6;
        for j in 0..3 {
            let mut tp = t.clone();
            let mut tm = t.clone();
            tp[j] += h;
            tm[j] -= h;
            let risk = |tv: &[f64]| -> f64 {
                block
                    .iter()
                    .map(|&i| loss.value(ds.margin(i, tv), ds.y[i]).unwrap())
                    .sum::<f64>()
                    / block.len() as f64
            };
            let fd = (risk(&tp) - risk(&tm)) / (2.0 * h);
            assert!((fd - g[j]).abs() < 1e-4, "coord {j}: fd {fd} vs {}", g[j]);
        }
    }

    #[test]
    fn k1_mom_equals_erm_iterates_exactly() {
        let ds = logistic_toy(60, 4, 3);
        let loss = LossSpec::logistic();
        let mut cfg = SolverConfig::new(1, 17);
        cfg.eps = 1e-14;
        cfg.max_iter = 60;
        cfg.record_trace = true;
        let mom = mom_fit(&ds, &loss, &cfg).unwrap();
        let erm = erm_fit(&ds, &loss, &cfg).unwrap();
        assert_eq!(mom.t_init, erm.t_init);
        let mh = mom.t_history.as_ref().unwrap();
        let eh = erm.t_history.as_ref().unwrap();
        let common = mh.len().min(eh.len());
        assert!(common >= 50);
        for i in 0..common {
            assert_eq!(mh[i], eh[i], "iterate {i} differs");
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let ds = logistic_toy(50, 3, 5);
        let loss = LossSpec::logistic();
        let mut cfg = SolverConfig::new(5, 11);
        cfg.max_iter = 40;
        cfg.eps = 1e-12;
        cfg.record_trace = true;
        let a = mom_fit(&ds, &loss, &cfg).unwrap();
        let b = mom_fit(&ds, &loss, &cfg).unwrap();
        assert_eq!(a, b);
        let mut cfg2 = cfg.clone();
        cfg2.seed = 12;
        let c = mom_fit(&ds, &loss, &cfg2).unwrap();
        assert_ne!(a.t_hat, c.t_hat);
    }

    #[test]
    fn erm_descends_logistic_risk_monotonically() {
        let ds = logistic_toy(80, 4, 9);
        let loss = LossSpec::logistic();
        let mut cfg = SolverConfig::new(1, 2);
        cfg.eps = 1e-12;
        cfg.max_iter = 120;
        cfg.record_trace = true;
        let fit = erm_fit(&ds, &loss, &cfg).unwrap();
        let risk = |tv: &[f64]| -> f64 {
            (0..ds.n())
                .map(|i| loss.value(ds.margin(i, tv), ds.y[i]).unwrap())
                .sum::<f64>()
                / ds.n() as f64
        };
        let hist = fit.t_history.as_ref().unwrap();
        let mut prev = risk(&fit.t_init);
        for t in hist {
            let r = risk(t);
            assert!(r <= prev + 1e-12, "risk increased: {prev} -> {r}");
            prev = r;
        }
    }

    #[test]
    fn median_block_realizes_lower_median_of_increments() {
        let ds = logistic_toy(60, 3, 21);
        let loss = LossSpec::logistic();
        let mut cfg = SolverConfig::new(5, 8);
        cfg.block_strategy = BlockStrategy::FixedAtStart;
        cfg.eps = 1e-12;
        cfg.max_iter = 30;
        cfg.record_trace = true;
        let fit = mom_fit(&ds, &loss, &cfg).unwrap();
        let p = mom::partition(
            ds.n(),
            5,
            rng::derive_seed(cfg.seed, rng::streams::PARTITION, 0),
            cfg.partition_strategy,
        )
        .unwrap();
        let th = fit.t_history.as_ref().unwrap();
        let tth = fit.t_tilde_history.as_ref().unwrap();
        for (idx, (iter, members)) in fit.median_block_history.iter().enumerate() {
            let (t_pre, tt_pre) = if idx == 0 {
                (fit.t_init.clone(), fit.t_tilde_init.clone())
            } else {
                (th[idx - 1].clone(), tth[idx - 1].clone())
            };
            let sel = mom::mom_increment(&ds, &t_pre, &tt_pre, &loss, &p).unwrap();
            assert_eq!(
                p.block(sel.median_block),
                members.as_slice(),
                "iteration {iter}"
            );
        }
    }

    #[test]
    fn update_steps_are_bounded_by_lipschitz_over_eta() {
        let ds = logistic_toy(60, 4, 33);
        let loss = LossSpec::logistic();
        let mut cfg = SolverConfig::new(4, 5);
        cfg.block_strategy = BlockStrategy::FixedAtStart;
        cfg.eps = 1e-12;
        cfg.max_iter = 50;
        cfg.record_trace = true;
        let fit = mom_fit(&ds, &loss, &cfg).unwrap();
        let max_row_norm = (0..ds.n())
            .map(|i| norm2(ds.x.row(i)))
            .fold(0.0_f64, f64::max);
        let p = mom::partition(
            ds.n(),
            4,
            rng::derive_seed(cfg.seed, rng::streams::PARTITION, 0),
            cfg.partition_strategy,
        )
        .unwrap();
        // Smallest eta over blocks gives the largest admissible step.
        let max_step = (0..4)
            .map(|b| {
                let op = operator_norm(&ds.x.select_rows(p.block(b)));
                4.0 * p.block(b).len() as f64 / op
            })
            .fold(0.0_f64, f64::max);
        let th = fit.t_history.as_ref().unwrap();
        let mut prev = fit.t_init.clone();
        for t in th {
            let step_norm = dist2(&prev, t);
            assert!(step_norm <= loss.lipschitz() * max_row_norm * max_step + 1e-9);
            prev = t.clone();
        }
    }

    #[test]
    fn erm_reaches_the_reference_logistic_risk() {
        // Noisy (non-separable) logistic toy: the final empirical risk must
        // come within 1e-3 of a long-run reference solve.
        let ds = logistic_toy(100, 2, 41);
        let loss = LossSpec::logistic();
        let risk = |tv: &[f64]| -> f64 {
            (0..ds.n())
                .map(|i| loss.value(ds.margin(i, tv), ds.y[i]).unwrap())
                .sum::<f64>()
                / ds.n() as f64
        };
        let mut long = SolverConfig::new(1, 6);
        long.eps = 1e-12;
        long.max_iter = 20_000;
        let reference = erm_fit(&ds, &loss, &long).unwrap();

        let mut cfg = SolverConfig::new(1, 6);
        cfg.eps = 1e-7;
        cfg.max_iter = 2_000;
        let fit = erm_fit(&ds, &loss, &cfg).unwrap();
        assert!(risk(&fit.t_hat) <= risk(&reference.t_hat) + 1e-3);
    }

    #[test]
    fn zero_design_is_a_solver_error() {
        let x = Matrix::zeros(10, 2);
        let ds = Dataset::new(x, vec![0.5; 10]).unwrap();
        let cfg = SolverConfig::new(1, 4);
        let err = erm_fit(&ds, &LossSpec::l1(), &cfg).unwrap_err();
        assert!(matches!(err, Error::Solver(_)), "got {err:?}");
    }

    #[test]
    fn solver_runs_in_single_precision() {
        // The whole pipeline is generic over the scalar; exercise f32.
        let ds: Dataset<f32> =
            datagen::gen_logistic_student(60, 3, &[1.0_f32, -0.5, 0.25], 1.0, 77).unwrap();
        let loss = LossSpec::<f32>::logistic();
        let mut cfg = SolverConfig::<f32>::new(4, 3);
        cfg.eps = 1e-4_f32;
        cfg.max_iter = 200;
        let fit = mom_fit(&ds, &loss, &cfg).unwrap();
        assert_eq!(fit.t_hat.len(), 3);
        assert!(fit.t_hat.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn converged_implies_iterate_gap_below_eps() {
        let ds = logistic_toy(100, 3, 13);
        let loss = LossSpec::logistic();
        let mut cfg = SolverConfig::new(4, 7);
        cfg.eps = 1e-3;
        cfg.max_iter = 5000;
        let fit = mom_fit(&ds, &loss, &cfg).unwrap();
        if fit.converged {
            assert!(dist2(&fit.t_hat, &fit.t_tilde) < cfg.eps);
        }
        assert!(fit.iterations <= cfg.max_iter);
    }
}
