//! Seeded synthetic data generators and the exact one-dimensional L1 solver.
//!
//! The generators cover: logistic labels over a heavy-tailed Student t(5)
//! design, the corruption scheme flipping labels on large Gaussian inputs,
//! the single-contaminated-row construction defeating the L1 ERM, and the
//! heavy-tailed 1-d construction on which the empirical median misbehaves.
//! Rows are generated from per-row derived seeds (see [`crate::rng`]), so a
//! dataset is reproducible row by row and generation may be parallelized.

use rand::Rng;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::losses::sigmoid;
use crate::rng::{self, streams};
use crate::scalar::{dot, norm2, Real};

/// Logistic labels over an i.i.d. Student t(5) design:
/// `P(Y = 1 | X) = sigmoid(<X, t_star> + eps)` with `eps ~ N(0, noise_sd²)`.
pub fn gen_logistic_student<F: Real>(
    n: usize,
    d: usize,
    t_star: &[F],
    noise_sd: F,
    seed: u64,
) -> Result<Dataset<F>> {
    if n == 0 || d == 0 {
        return Err(Error::argument("n and d must be at least 1"));
    }
    if t_star.len() != d {
        return Err(Error::argument("t_star dimension mismatch"));
    }
    let mut x = Matrix::zeros(n, d);
    let mut y = Vec::with_capacity(n);
    for i in 0..n {
        let mut row_rng = rng::chacha(rng::derive_seed(seed, streams::DATAGEN_ROW, i as u64));
        for j in 0..d {
            x.set(i, j, rng::student_t5(&mut row_rng));
        }
        let eps: F = rng::standard_normal::<F, _>(&mut row_rng) * noise_sd;
        let p = sigmoid(dot(x.row(i), t_star) + eps);
        let u: F = rng::uniform01(&mut row_rng);
        y.push(if u < p { F::one() } else { -F::one() });
    }
    let mut ds = Dataset::new(x, y)?;
    ds.t_star = Some(t_star.to_vec());
    ds.seed = seed;
    Ok(ds)
}

/// Coordinate scale of the corrupted design rows: the corruption draws
/// `N(0, scale²)` coordinates with `scale = 5` by default, or `sqrt(5)` to
/// read the variance as 5 instead.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutlierXScale {
    StdDev5,
    Var5,
}

impl OutlierXScale {
    fn sd(self) -> f64 {
        match self {
            OutlierXScale::StdDev5 => 5.0,
            OutlierXScale::Var5 => 5.0_f64.sqrt(),
        }
    }
}

/// Replaces the first `n_out` rows with label-flipped wide-Gaussian inputs:
/// `X_i` has i.i.d. `N(0, scale²)` coordinates and
/// `Y_i = -sign(<X_i, t_star> + eps_i)`, `eps_i ~ N(0, 1)`. The replaced
/// indices are recorded as outliers.
pub fn corrupt_figure1<F: Real>(
    data: &Dataset<F>,
    n_out: usize,
    t_star: &[F],
    scale: OutlierXScale,
    seed: u64,
) -> Result<Dataset<F>> {
    if n_out > data.n() {
        return Err(Error::argument(format!(
            "n_out={n_out} exceeds dataset size {}",
            data.n()
        )));
    }
    if t_star.len() != data.dim() {
        return Err(Error::argument("t_star dimension mismatch"));
    }
    let mut out = data.clone();
    let sd = F::from64(scale.sd());
    for i in 0..n_out {
        let mut row_rng = rng::chacha(rng::derive_seed(seed, streams::DATAGEN_ROW, i as u64));
        for j in 0..data.dim() {
            out.x
                .set(i, j, rng::standard_normal::<F, _>(&mut row_rng) * sd);
        }
        let eps: F = rng::standard_normal(&mut row_rng);
        let m = dot(out.x.row(i), t_star) + eps;
        out.y[i] = if m >= F::zero() { -F::one() } else { F::one() };
    }
    out.outliers = (0..n_out).collect();
    Ok(out)
}

/// Noiseless Gaussian linear data with one contaminated input row:
/// `X_i ~ N(0, I)`, `Y_i = <X_i, t_star>`, then `X_0 <- X_0 + v` with
/// `v = v_scale * n * t_star / ‖t_star‖` (so `‖v‖₂ = v_scale * n` and `v` is
/// parallel to `t_star`).
pub fn gen_prop1<F: Real>(
    n: usize,
    d: usize,
    t_star: &[F],
    v_scale: F,
    seed: u64,
) -> Result<Dataset<F>> {
    if n == 0 || d == 0 {
        return Err(Error::argument("n and d must be at least 1"));
    }
    if t_star.len() != d {
        return Err(Error::argument("t_star dimension mismatch"));
    }
    let t_norm = norm2(t_star);
    if t_norm == F::zero() {
        return Err(Error::argument("t_star must be nonzero"));
    }
    if v_scale < F::zero() {
        return Err(Error::argument("v_scale must be nonnegative"));
    }
    let mut x = Matrix::zeros(n, d);
    let mut y = Vec::with_capacity(n);
    for i in 0..n {
        let mut row_rng = rng::chacha(rng::derive_seed(seed, streams::DATAGEN_ROW, i as u64));
        for j in 0..d {
            x.set(i, j, rng::standard_normal(&mut row_rng));
        }
        y.push(dot(x.row(i), t_star));
    }
    // Contaminate the first input row after outputs are formed.
    let vmag = v_scale * F::from64(n as f64) / t_norm;
    for (j, &ts) in t_star.iter().enumerate() {
        let v = x.get(0, j) + vmag * ts;
        x.set(0, j, v);
    }
    let mut ds = Dataset::new(x, y)?;
    ds.t_star = Some(t_star.to_vec());
    ds.seed = seed;
    ds.outliers = if v_scale > F::zero() {
        vec![0]
    } else {
        Vec::new()
    };
    Ok(ds)
}

/// Derived constants of the heavy-tailed 1-d construction.
#[derive(Debug, Clone, Copy)]
pub struct Prop2Constants {
    /// Half-width of the central noise piece: `(1/8) sqrt(x / (2n))`.
    pub delta_prime: f64,
    /// Heavy design magnitude: `R = 4 sqrt(x n)`.
    pub r_heavy: f64,
    /// Bernoulli rate of the heavy design: `1 / (x n)`.
    pub delta_rate: f64,
    /// Second moment of the design: `1 + 2 R delta + R² delta`.
    pub x_second_moment: f64,
}

pub fn prop2_constants(n: usize, x_level: f64) -> Prop2Constants {
    let nf = n as f64;
    let delta_prime = 0.125 * (x_level / (2.0 * nf)).sqrt();
    let delta_rate = 1.0 / (x_level * nf);
    let r_heavy = 4.0 * (x_level * nf).sqrt();
    Prop2Constants {
        delta_prime,
        r_heavy,
        delta_rate,
        x_second_moment: 1.0 + 2.0 * r_heavy * delta_rate + r_heavy * r_heavy * delta_rate,
    }
}

/// Heavy-tailed 1-d regression: noise `zeta` uniform on the union
/// `[-x-1/2+d', -x] ∪ [-d', d'] ∪ [x, x+1/2-d']` (pieces weighted by length),
/// design `X = eps (1 + R eta)` with `eps` Rademacher and `eta`
/// Bernoulli(1/(x n)), outputs `Y = X t_star + zeta`.
///
/// The hypotheses `n >= 8000`, `10 <= x <= n/800` are enforced unless
/// `relax` is set.
pub fn gen_prop2<F: Real>(
    n: usize,
    x_level: f64,
    t_star: F,
    relax: bool,
    seed: u64,
) -> Result<Dataset<F>> {
    if !relax && (n < 8000 || x_level < 10.0 || x_level > n as f64 / 800.0) {
        return Err(Error::argument(format!(
            "prop2 hypotheses violated (need n >= 8000 and 10 <= x <= n/800, \
             got n={n}, x={x_level}); pass relax to override"
        )));
    }
    if n == 0 || x_level <= 0.0 {
        return Err(Error::argument("n and x_level must be positive"));
    }
    let c = prop2_constants(n, x_level);
    // The three noise pieces must be disjoint.
    if c.delta_prime >= x_level {
        return Err(Error::argument("degenerate noise pieces: delta' >= x"));
    }
    let outer = 0.5 - c.delta_prime;
    let middle = 2.0 * c.delta_prime;
    debug_assert!((2.0 * outer + middle - 1.0).abs() < 1e-12);

    let mut x = Matrix::zeros(n, 1);
    let mut y = Vec::with_capacity(n);
    for i in 0..n {
        let mut row_rng = rng::chacha(rng::derive_seed(seed, streams::DATAGEN_ROW, i as u64));
        let u: f64 = row_rng.random();
        let zeta = if u < outer {
            -x_level - 0.5 + c.delta_prime + u
        } else if u < outer + middle {
            -c.delta_prime + (u - outer)
        } else {
            x_level + (u - outer - middle)
        };
        let eps: f64 = if row_rng.random::<bool>() { 1.0 } else { -1.0 };
        let eta = row_rng.random::<f64>() < c.delta_rate;
        let xi = eps * if eta { 1.0 + c.r_heavy } else { 1.0 };
        x.set(i, 0, F::from64(xi));
        y.push(F::from64(xi) * t_star + F::from64(zeta));
    }
    let mut ds = Dataset::new(x, y)?;
    ds.t_star = Some(vec![t_star]);
    ds.seed = seed;
    Ok(ds)
}

/// Overwrites the given rows with a constant design vector and the flipped
/// noiseless label `Y = -sign(<X, t_star>)`, recording them as outliers.
pub fn plant_constant_outliers<F: Real>(
    data: &Dataset<F>,
    indices: &[usize],
    x_value: F,
    t_star: &[F],
) -> Result<Dataset<F>> {
    if t_star.len() != data.dim() {
        return Err(Error::argument("t_star dimension mismatch"));
    }
    let mut out = data.clone();
    for &i in indices {
        if i >= data.n() {
            return Err(Error::argument(format!("outlier index {i} out of range")));
        }
        for j in 0..data.dim() {
            out.x.set(i, j, x_value);
        }
        let m = dot(out.x.row(i), t_star);
        out.y[i] = if m >= F::zero() { -F::one() } else { F::one() };
    }
    let mut sorted = indices.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    out.outliers = sorted;
    Ok(out)
}

/// Smallest input value `v` such that the total weight of `{values <= v}`
/// reaches half the total weight: the lower endpoint of the minimizer set of
/// `t -> Σ w_i |values_i - t|`.
pub fn weighted_median<F: Real>(values: &[F], weights: &[F]) -> Result<F> {
    if values.is_empty() || values.len() != weights.len() {
        return Err(Error::argument(
            "weighted_median needs equal-length nonempty values and weights",
        ));
    }
    if weights.iter().any(|w| !(*w > F::zero()) || !w.is_finite()) {
        return Err(Error::argument("weights must be positive and finite"));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::domain("non-finite value in weighted_median"));
    }
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).expect("finite values"));
    let total: F = weights.iter().copied().sum();
    let half = total / F::from64(2.0);
    let mut cum = F::zero();
    for &i in &order {
        cum += weights[i];
        if cum >= half {
            return Ok(values[i]);
        }
    }
    Ok(values[*order.last().expect("nonempty")])
}

/// Exact 1-d L1 regression through the origin: minimizes
/// `t -> Σ_i |y_i - x_i t|` via the weighted median of `y_i / x_i` with
/// weights `|x_i|`. Rows with `x_i = 0` contribute a constant and are
/// skipped; it is an error if every row has `x_i = 0`.
pub fn l1_erm_1d<F: Real>(data: &Dataset<F>) -> Result<F> {
    if data.dim() != 1 {
        return Err(Error::argument(
            "l1_erm_1d requires a one-dimensional design",
        ));
    }
    let mut ratios = Vec::with_capacity(data.n());
    let mut weights = Vec::with_capacity(data.n());
    for i in 0..data.n() {
        let xi = data.x.get(i, 0);
        if xi != F::zero() {
            ratios.push(data.y[i] / xi);
            weights.push(xi.abs());
        }
    }
    if ratios.is_empty() {
        return Err(Error::Domain("all design entries are zero".into()));
    }
    weighted_median(&ratios, &weights)
}
