//! Numerical verification of local Bernstein conditions.
//!
//! For synthetic models whose conditional output law is known, the excess
//! risk `P L_f = E[ E[loss(f(X), Y) - loss(f*(X), Y) | X] ]` is computable:
//! exactly for label models, by adaptive quadrature over the output for
//! additive-noise models. Sampling directions on the L2(mu)-sphere of a
//! prescribed radius around `f*` then gives the smallest observed ratio
//! `P L_f / ‖f - f*‖²_{L2}`, which is compared against the reciprocal of the
//! theorem constant for the loss at hand:
//!
//! - quantile: `A = 4/alpha`, `alpha` a conditional-density lower bound;
//! - Huber: `A = 4/alpha`, `alpha` a lower bound on `F(z+delta) - F(z-delta)`;
//! - hinge: `A = 2/alpha`, `alpha` a margin lower bound on
//!   `min(eta, 1-eta, |1-2eta|)`;
//! - logistic: `A = 2 (1+e^m)² e^m` with `m = c0 + r (2C')^{(2+eps)/eps}`.
//!
//! The localization interval half-width is `r (sqrt(2) C')^{(2+eps)/eps}`,
//! where `C'` is an `L_{2+eps}/L_2` norm-equivalence constant (estimated
//! from an empirical `L4/L2` ratio by default, with `eps = 2`).

use rand::Rng;

use crate::error::{Error, Result};
use crate::losses::{sigmoid, LossKind, LossSpec};
use crate::rng::{self, streams};
use crate::scalar::{dot, Real};

/// Design distribution of the synthetic model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DesignLaw {
    /// Every coordinate equals one (degenerate design; useful for d = 1).
    ConstantOne { d: usize },
    /// I.i.d. standard normal coordinates.
    Gaussian { d: usize },
    /// I.i.d. Rademacher (±1) coordinates.
    Rademacher { d: usize },
    /// I.i.d. Student t(5) coordinates.
    StudentT5 { d: usize },
}

impl DesignLaw {
    pub fn dim(&self) -> usize {
        match *self {
            DesignLaw::ConstantOne { d }
            | DesignLaw::Gaussian { d }
            | DesignLaw::Rademacher { d }
            | DesignLaw::StudentT5 { d } => d,
        }
    }

    fn sample<F: Real, R: Rng>(&self, rng: &mut R) -> Vec<F> {
        match *self {
            DesignLaw::ConstantOne { d } => vec![F::one(); d],
            DesignLaw::Gaussian { d } => (0..d).map(|_| rng::standard_normal(rng)).collect(),
            DesignLaw::Rademacher { d } => (0..d).map(|_| rng::rademacher(rng)).collect(),
            DesignLaw::StudentT5 { d } => (0..d).map(|_| rng::student_t5(rng)).collect(),
        }
    }
}

/// Conditional law of the output given the design.
#[derive(Debug, Clone, PartialEq)]
pub enum NoiseLaw<F> {
    /// `Y = <X, t*> + N(0, sd²)`.
    Gaussian { sd: F },
    /// `Y = <X, t*> + U[lo, hi]`.
    Uniform { lo: F, hi: F },
    /// `Y in {-1, +1}` with `P(Y = 1 | X) = sigmoid(<X, t*>)`.
    LogisticLabel,
}

/// How far the Gaussian density is integrated; the truncated mass is far
/// below every tolerance used here.
const GAUSSIAN_SUPPORT_SIGMAS: f64 = 12.0;

impl<F: Real> NoiseLaw<F> {
    fn is_label(&self) -> bool {
        matches!(self, NoiseLaw::LogisticLabel)
    }

    /// Density of the additive noise at `z` (label models have none).
    pub fn density(&self, z: f64) -> Result<f64> {
        match self {
            NoiseLaw::Gaussian { sd } => {
                let s = sd.to64();
                Ok((-z * z / (2.0 * s * s)).exp() / (s * (2.0 * std::f64::consts::PI).sqrt()))
            }
            NoiseLaw::Uniform { lo, hi } => {
                let (a, b) = (lo.to64(), hi.to64());
                Ok(if (a..=b).contains(&z) {
                    1.0 / (b - a)
                } else {
                    0.0
                })
            }
            NoiseLaw::LogisticLabel => Err(Error::domain("label noise has no additive density")),
        }
    }

    /// Cumulative distribution of the additive noise at `z`.
    pub fn cdf(&self, z: f64) -> Result<f64> {
        match self {
            NoiseLaw::Gaussian { sd } => Ok(norm_cdf(z / sd.to64())),
            NoiseLaw::Uniform { lo, hi } => {
                let (a, b) = (lo.to64(), hi.to64());
                Ok(((z - a) / (b - a)).clamp(0.0, 1.0))
            }
            NoiseLaw::LogisticLabel => Err(Error::domain("label noise has no cdf")),
        }
    }

    fn support(&self) -> Result<(f64, f64)> {
        match self {
            NoiseLaw::Gaussian { sd } => {
                let s = sd.to64();
                Ok((-GAUSSIAN_SUPPORT_SIGMAS * s, GAUSSIAN_SUPPORT_SIGMAS * s))
            }
            NoiseLaw::Uniform { lo, hi } => Ok((lo.to64(), hi.to64())),
            NoiseLaw::LogisticLabel => Err(Error::domain("label noise has no support")),
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            NoiseLaw::Gaussian { sd } => {
                if !(*sd > F::zero()) {
                    return Err(Error::argument("gaussian sd must be positive"));
                }
            }
            NoiseLaw::Uniform { lo, hi } => {
                if !(*hi > *lo) {
                    return Err(Error::argument("uniform bounds must satisfy lo < hi"));
                }
            }
            NoiseLaw::LogisticLabel => return Ok(()),
        }
        // The density must integrate to one over its support.
        let (a, b) = self.support()?;
        let mass = adaptive_simpson(&|z| self.density(z).unwrap_or(0.0), a, b, 1e-9)?;
        if (mass - 1.0).abs() > 1e-6 {
            return Err(Error::Numeric(format!(
                "noise density integrates to {mass}"
            )));
        }
        Ok(())
    }
}

/// Synthetic model with known oracle and conditional output law.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalModel<F> {
    pub design: DesignLaw,
    pub t_star: Vec<F>,
    pub noise: NoiseLaw<F>,
}

impl<F: Real> ConditionalModel<F> {
    pub fn new(design: DesignLaw, t_star: Vec<F>, noise: NoiseLaw<F>) -> Result<Self> {
        if t_star.len() != design.dim() {
            return Err(Error::argument("t_star dimension mismatch"));
        }
        if t_star.iter().any(|v| !v.is_finite()) {
            return Err(Error::argument("t_star must be finite"));
        }
        noise.validate()?;
        Ok(ConditionalModel {
            design,
            t_star,
            noise,
        })
    }

    fn sample_design_set(&self, n_x: usize, seed: u64) -> Vec<Vec<F>> {
        (0..n_x)
            .map(|i| {
                let mut rng = rng::chacha(rng::derive_seed(seed, streams::MC_DRAW, i as u64));
                self.design.sample(&mut rng)
            })
            .collect()
    }

    /// Conditional expected loss difference at one design point.
    fn conditional_excess(&self, loss: &LossSpec<F>, x: &[F], t: &[F]) -> Result<f64> {
        let u = dot(x, t).to64();
        let u_star = dot(x, &self.t_star).to64();
        match &self.noise {
            NoiseLaw::LogisticLabel => {
                let eta = sigmoid(u_star);
                let lf = |uu: f64, yy: f64| loss.value(F::from64(uu), F::from64(yy));
                let pos = lf(u, 1.0)?.to64() - lf(u_star, 1.0)?.to64();
                let neg = lf(u, -1.0)?.to64() - lf(u_star, -1.0)?.to64();
                Ok(eta * pos + (1.0 - eta) * neg)
            }
            _ => {
                if loss.kind().is_classification() {
                    return Err(Error::argument(format!(
                        "{} loss requires a label noise model",
                        loss.kind().name()
                    )));
                }
                let (lo, hi) = self.noise.support()?;
                let mut kinks: Vec<f64> = Vec::new();
                for anchor in [u, u_star] {
                    for k in loss_kinks_in_y(loss, anchor) {
                        let z = k - u_star; // y = u_star + z
                        if z > lo && z < hi {
                            kinks.push(z);
                        }
                    }
                }
                let f = |z: f64| -> f64 {
                    let y = F::from64(u_star + z);
                    let diff = loss.value(F::from64(u), y).unwrap().to64()
                        - loss.value(F::from64(u_star), y).unwrap().to64();
                    diff * self.noise.density(z).unwrap_or(0.0)
                };
                integrate_with_breaks(&f, lo, hi, &kinks, 1e-8)
            }
        }
    }
}

/// `y`-locations where `loss(u, y)` is non-smooth, for quadrature splitting.
fn loss_kinks_in_y<F: Real>(loss: &LossSpec<F>, u: f64) -> Vec<f64> {
    match loss.kind() {
        LossKind::Logistic => Vec::new(),
        LossKind::Hinge => {
            if u != 0.0 {
                vec![1.0 / u]
            } else {
                Vec::new()
            }
        }
        LossKind::Huber => {
            let d = loss.delta().unwrap().to64();
            vec![u - d, u + d]
        }
        LossKind::Quantile => vec![u],
    }
}

/// Monte Carlo excess risk `P L_t` over `n_x` seeded design draws; the
/// conditional expectation over the output is exact for label models and
/// quadrature (absolute tolerance 1e-8) for additive noise.
pub fn excess_risk_numeric<F: Real>(
    model: &ConditionalModel<F>,
    loss: &LossSpec<F>,
    t: &[F],
    n_x: usize,
    seed: u64,
) -> Result<F> {
    if t.len() != model.design.dim() {
        return Err(Error::argument("parameter dimension mismatch"));
    }
    if n_x == 0 {
        return Err(Error::argument("n_x must be at least 1"));
    }
    let xs = model.sample_design_set(n_x, seed);
    let mut acc = 0.0;
    for x in &xs {
        acc += model.conditional_excess(loss, x, t)?;
    }
    Ok(F::from64(acc / n_x as f64))
}

/// Parameters feeding the theorem constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BernsteinParams<F> {
    /// Conditional-density (quantile) or cdf-increment (Huber) lower bound.
    MinDensity { alpha: F },
    /// Margin lower bound for the hinge loss.
    Margin { alpha: F },
    /// Logistic-case inputs.
    Logistic { c0: F, c_prime: F, eps: F, r: F },
}

/// Bernstein constant `A` such that `‖f - f*‖² <= A P L_f` holds locally.
pub fn theorem_constant<F: Real>(kind: LossKind, params: &BernsteinParams<F>) -> Result<F> {
    match (kind, params) {
        (LossKind::Quantile | LossKind::Huber, BernsteinParams::MinDensity { alpha }) => {
            if !(*alpha > F::zero()) {
                return Err(Error::argument("alpha must be positive"));
            }
            Ok(F::from64(4.0) / *alpha)
        }
        (LossKind::Hinge, BernsteinParams::Margin { alpha }) => {
            if !(*alpha > F::zero()) {
                return Err(Error::argument("alpha must be positive"));
            }
            Ok(F::from64(2.0) / *alpha)
        }
        (
            LossKind::Logistic,
            BernsteinParams::Logistic {
                c0,
                c_prime,
                eps,
                r,
            },
        ) => {
            if !(*c_prime > F::zero()) || !(*eps > F::zero()) {
                return Err(Error::argument("c_prime and eps must be positive"));
            }
            if *c0 < F::zero() || *r < F::zero() {
                return Err(Error::argument("c0 and r must be nonnegative"));
            }
            let expo = (F::from64(2.0) + *eps) / *eps;
            let m = *c0 + *r * (F::from64(2.0) * *c_prime).powf(expo);
            let em = m.to64().exp();
            Ok(F::from64(2.0 * (1.0 + em) * (1.0 + em) * em))
        }
        _ => Err(Error::argument(
            "loss kind and parameter family do not match",
        )),
    }
}

/// Controls for [`check_local_bernstein`].
#[derive(Debug, Clone, PartialEq)]
pub struct BernsteinCheckConfig<F> {
    /// L2(mu) radius of the verification sphere.
    pub r: F,
    pub n_dirs: usize,
    pub n_x: usize,
    pub seed: u64,
    /// Norm-equivalence constant; estimated from the empirical L4/L2 ratio
    /// of the sampled directions when absent.
    pub c_prime: Option<F>,
    /// Moment exponent `eps` of the norm equivalence.
    pub moment_eps: F,
    /// Relative slack when comparing against `1/A`.
    pub rel_tol: F,
}

impl<F: Real> BernsteinCheckConfig<F> {
    pub fn new(r: F, n_dirs: usize, n_x: usize, seed: u64) -> Self {
        BernsteinCheckConfig {
            r,
            n_dirs,
            n_x,
            seed,
            c_prime: None,
            moment_eps: F::from64(2.0),
            rel_tol: F::from64(0.05),
        }
    }
}

/// Verification report: the smallest observed excess-risk ratio against the
/// theorem constant.
#[derive(Debug, Clone, PartialEq)]
pub struct BernsteinReport<F> {
    pub loss: LossSpec<F>,
    pub r: F,
    pub directions_tested: usize,
    /// `min over directions of P L_f / ‖f - f*‖²_{L2}`.
    pub min_ratio: F,
    pub theorem_a: F,
    /// Half-width of the localization interval used for `alpha`/`c0`.
    pub interval_half_width: F,
    /// Norm-equivalence constant actually used.
    pub c_prime: F,
    pub passed: bool,
}

/// Samples directions on the L2(mu)-sphere of radius `r` around the oracle,
/// evaluates the excess-risk ratio on each, and compares the minimum against
/// the theorem constant computed from the model's known noise law.
pub fn check_local_bernstein<F: Real>(
    model: &ConditionalModel<F>,
    loss: &LossSpec<F>,
    cfg: &BernsteinCheckConfig<F>,
) -> Result<BernsteinReport<F>> {
    if !(cfg.r > F::zero()) {
        return Err(Error::argument("radius r must be positive"));
    }
    if cfg.n_dirs == 0 || cfg.n_x == 0 {
        return Err(Error::argument("n_dirs and n_x must be at least 1"));
    }
    let d = model.design.dim();
    let xs = model.sample_design_set(cfg.n_x, cfg.seed);

    // Unit directions in L2(mu), normalized against the sampled design.
    let mut dirs: Vec<Vec<F>> = Vec::with_capacity(cfg.n_dirs);
    let mut l4l2_max = F::zero();
    for j in 0..cfg.n_dirs {
        let mut dir_rng = rng::chacha(rng::derive_seed(cfg.seed, streams::DIRECTION, j as u64));
        let mut unit = None;
        for _attempt in 0..100 {
            let raw: Vec<F> = (0..d).map(|_| rng::standard_normal(&mut dir_rng)).collect();
            let m2 = xs
                .iter()
                .map(|x| {
                    let v = dot(x, &raw);
                    v * v
                })
                .sum::<F>()
                / F::from64(cfg.n_x as f64);
            if m2 > F::zero() {
                let inv = F::one() / m2.sqrt();
                unit = Some(raw.into_iter().map(|v| v * inv).collect::<Vec<F>>());
                break;
            }
        }
        let u = unit.ok_or_else(|| {
            Error::Numeric("could not sample a direction with positive L2 norm".into())
        })?;
        let (mut m2, mut m4) = (F::zero(), F::zero());
        for x in &xs {
            let v = dot(x, &u);
            m2 += v * v;
            m4 += v * v * v * v;
        }
        m2 /= F::from64(cfg.n_x as f64);
        m4 /= F::from64(cfg.n_x as f64);
        l4l2_max = l4l2_max.max(m4.powf(F::from64(0.25)) / m2.sqrt());
        dirs.push(u);
    }
    let c_prime = cfg.c_prime.unwrap_or(l4l2_max.max(F::one()));
    let expo = (F::from64(2.0) + cfg.moment_eps) / cfg.moment_eps;
    let half_width = cfg.r * (F::from64(2.0).sqrt() * c_prime).powf(expo);

    // Smallest observed ratio over the sphere.
    let mut min_ratio = F::infinity();
    for u in &dirs {
        let t: Vec<F> = model
            .t_star
            .iter()
            .zip(u)
            .map(|(&ts, &uj)| ts + cfg.r * uj)
            .collect();
        let mut excess = 0.0;
        let mut dist_sq = F::zero();
        for x in &xs {
            excess += model.conditional_excess(loss, x, &t)?;
            let gap = dot(x, &t) - dot(x, &model.t_star);
            dist_sq += gap * gap;
        }
        let excess = F::from64(excess / cfg.n_x as f64);
        dist_sq /= F::from64(cfg.n_x as f64);
        if dist_sq == F::zero() {
            return Err(Error::Numeric(
                "degenerate direction with zero spread".into(),
            ));
        }
        min_ratio = min_ratio.min(excess / dist_sq);
    }

    let theorem_a = theorem_a_from_model(model, loss, cfg, &xs, c_prime, half_width)?;
    let threshold = (F::one() - cfg.rel_tol) / theorem_a;
    Ok(BernsteinReport {
        loss: *loss,
        r: cfg.r,
        directions_tested: dirs.len(),
        min_ratio,
        theorem_a,
        interval_half_width: half_width,
        c_prime,
        passed: min_ratio >= threshold,
    })
}

/// Derives the theorem constant from the model's known noise law over the
/// localization interval.
fn theorem_a_from_model<F: Real>(
    model: &ConditionalModel<F>,
    loss: &LossSpec<F>,
    cfg: &BernsteinCheckConfig<F>,
    xs: &[Vec<F>],
    c_prime: F,
    half_width: F,
) -> Result<F> {
    let hw = half_width.to64();
    match loss.kind() {
        LossKind::Quantile => {
            // Additive noise: the conditional density at distance z from the
            // oracle prediction is the noise density at z.
            let alpha = match &model.noise {
                NoiseLaw::Gaussian { .. } => model.noise.density(hw)?,
                NoiseLaw::Uniform { lo, hi } => {
                    if -hw >= lo.to64() && hw <= hi.to64() {
                        model.noise.density(0.0)?
                    } else {
                        0.0
                    }
                }
                NoiseLaw::LogisticLabel => {
                    return Err(Error::argument(
                        "quantile check requires an additive noise law",
                    ))
                }
            };
            theorem_constant(
                loss.kind(),
                &BernsteinParams::MinDensity {
                    alpha: F::from64(alpha),
                },
            )
        }
        LossKind::Huber => {
            let delta = loss.delta().unwrap().to64();
            let alpha = match &model.noise {
                NoiseLaw::LogisticLabel => {
                    return Err(Error::argument(
                        "huber check requires an additive noise law",
                    ))
                }
                _ => model.noise.cdf(hw + delta)? - model.noise.cdf(hw - delta)?,
            };
            theorem_constant(
                loss.kind(),
                &BernsteinParams::MinDensity {
                    alpha: F::from64(alpha),
                },
            )
        }
        LossKind::Hinge => {
            if !model.noise.is_label() {
                return Err(Error::argument("hinge check requires a label model"));
            }
            let mut alpha = f64::INFINITY;
            for x in xs {
                let eta = sigmoid(dot(x, &model.t_star).to64());
                alpha = alpha.min(eta.min(1.0 - eta).min((1.0 - 2.0 * eta).abs()));
            }
            theorem_constant(
                loss.kind(),
                &BernsteinParams::Margin {
                    alpha: F::from64(alpha),
                },
            )
        }
        LossKind::Logistic => {
            if !model.noise.is_label() {
                return Err(Error::argument("logistic check requires a label model"));
            }
            // c0: empirical (1 - (2C')^{-(4+2eps)/eps})-quantile of |f*(X)|.
            let eps = cfg.moment_eps;
            let level_expo = (F::from64(4.0) + F::from64(2.0) * eps) / eps;
            let level = 1.0 - (F::from64(2.0) * c_prime).powf(level_expo).to64().recip();
            let mut margins: Vec<f64> = xs
                .iter()
                .map(|x| dot(x, &model.t_star).to64().abs())
                .collect();
            margins.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let idx = ((margins.len() as f64 - 1.0) * level).ceil() as usize;
            let c0 = margins[idx.min(margins.len() - 1)];
            theorem_constant(
                loss.kind(),
                &BernsteinParams::Logistic {
                    c0: F::from64(c0),
                    c_prime,
                    eps,
                    r: cfg.r,
                },
            )
        }
    }
}

/// Standard normal cdf.
pub fn norm_cdf(z: f64) -> f64 {
    0.5 * (1.0 + libm::erf(z / std::f64::consts::SQRT_2))
}

/// Standard normal density.
pub fn norm_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Adaptive Simpson quadrature to absolute tolerance `tol`.
fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, fa, m, fm, b, fb, whole, tol, 60)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    fa: f64,
    m: f64,
    fm: f64,
    b: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64> {
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * tol {
        return Ok(left + right + delta / 15.0);
    }
    if depth == 0 {
        return Err(Error::Numeric("quadrature did not converge".into()));
    }
    let half = 0.5 * tol;
    Ok(
        simpson_step(f, a, fa, lm, flm, m, fm, left, half, depth - 1)?
            + simpson_step(f, m, fm, rm, frm, b, fb, right, half, depth - 1)?,
    )
}

/// Quadrature over `[a, b]` split at the given interior break points.
fn integrate_with_breaks(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    breaks: &[f64],
    tol: f64,
) -> Result<f64> {
    let mut pts: Vec<f64> = breaks
        .iter()
        .copied()
        .filter(|z| *z > a && *z < b)
        .collect();
    pts.push(a);
    pts.push(b);
    pts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    pts.dedup();
    let total_len = b - a;
    let mut acc = 0.0;
    for w in pts.windows(2) {
        let piece_tol = tol * ((w[1] - w[0]) / total_len).max(1e-3);
        acc += adaptive_simpson(f, w[0], w[1], piece_tol)?;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn l1_gaussian_model() -> ConditionalModel<f64> {
        ConditionalModel::new(
            DesignLaw::ConstantOne { d: 1 },
            vec![0.4],
            NoiseLaw::Gaussian { sd: 1.0 },
        )
        .unwrap()
    }

    #[test]
    fn theorem_constant_pinned_values() {
        let a = theorem_constant(
            LossKind::Quantile,
            &BernsteinParams::MinDensity { alpha: 0.5_f64 },
        )
        .unwrap();
        assert_eq!(a, 8.0);
        let a = theorem_constant(
            LossKind::Hinge,
            &BernsteinParams::Margin { alpha: 0.25_f64 },
        )
        .unwrap();
        assert_eq!(a, 8.0);
        let a = theorem_constant(
            LossKind::Logistic,
            &BernsteinParams::Logistic {
                c0: 0.0_f64,
                c_prime: 1.0,
                eps: 2.0,
                r: 0.0,
            },
        )
        .unwrap();
        assert!((a - 8.0).abs() < 1e-12);
        assert!(theorem_constant(
            LossKind::Quantile,
            &BernsteinParams::MinDensity { alpha: 0.0_f64 }
        )
        .is_err());
        assert!(theorem_constant(
            LossKind::Logistic,
            &BernsteinParams::MinDensity { alpha: 1.0_f64 }
        )
        .is_err());
    }

    #[test]
    fn constant_is_decreasing_in_alpha() {
        let mut prev = f64::INFINITY;
        for alpha in [0.1, 0.2, 0.5, 0.9] {
            let a = theorem_constant(LossKind::Quantile, &BernsteinParams::MinDensity { alpha })
                .unwrap();
            assert!(a < prev);
            prev = a;
        }
    }

    #[test]
    fn excess_risk_vanishes_at_the_oracle() {
        let model = l1_gaussian_model();
        let e = excess_risk_numeric(&model, &LossSpec::l1(), &[0.4], 50, 3).unwrap();
        assert!(e.abs() < 1e-8, "excess at oracle {e}");
    }

    #[test]
    fn excess_risk_matches_gaussian_closed_form() {
        // d = 1, X = 1, Gaussian(1) noise, L1 loss, offset u = 1:
        // pinball(1/2) excess = (E|Z - 1| - E|Z|) / 2
        //                     = ([2Phi(1) - 1] + 2 phi(1) - 2 phi(0)) / 2.
        let model = l1_gaussian_model();
        let e: f64 = excess_risk_numeric(&model, &LossSpec::l1(), &[1.4], 10, 5).unwrap();
        let oracle =
            ((2.0 * norm_cdf(1.0) - 1.0) + 2.0 * norm_pdf(1.0) - 2.0 * norm_pdf(0.0)) / 2.0;
        assert!(
            (e - oracle).abs() < 1e-7,
            "quadrature {e} vs closed form {oracle}"
        );
    }

    #[test]
    fn excess_risk_is_nonnegative_around_the_oracle() {
        let model = l1_gaussian_model();
        let loss = LossSpec::l1();
        for (i, dt) in [-1.0, -0.3, 0.2, 0.8, 2.5].iter().enumerate() {
            let e: f64 = excess_risk_numeric(&model, &loss, &[0.4 + dt], 30, 7 + i as u64).unwrap();
            assert!(e >= -1e-6, "negative excess {e} at offset {dt}");
        }
    }

    #[test]
    fn l1_gaussian_certificate_passes() {
        let model = l1_gaussian_model();
        let cfg = BernsteinCheckConfig::new(0.1_f64, 8, 64, 11);
        let report = check_local_bernstein(&model, &LossSpec::l1(), &cfg).unwrap();
        // Constant design: C' = 1, half-width = 0.2, alpha = phi(0.2).
        assert!((report.interval_half_width - 0.2).abs() < 1e-9);
        let alpha = norm_pdf(0.2);
        assert!((report.theorem_a - 4.0 / alpha).abs() < 1e-9);
        assert!(
            report.passed,
            "min ratio {} vs 1/A {}",
            report.min_ratio,
            1.0 / report.theorem_a
        );
    }

    #[test]
    fn huber_gaussian_certificate_passes() {
        let model = l1_gaussian_model();
        let loss = LossSpec::huber(1.0).unwrap();
        let cfg = BernsteinCheckConfig::new(0.1_f64, 8, 64, 13);
        let report = check_local_bernstein(&model, &loss, &cfg).unwrap();
        let alpha = norm_cdf(0.2 + 1.0) - norm_cdf(0.2 - 1.0);
        assert!((report.theorem_a - 4.0 / alpha).abs() < 1e-9);
        assert!(report.passed);
    }

    #[test]
    fn logistic_label_certificate_passes() {
        let model = ConditionalModel::new(
            DesignLaw::Gaussian { d: 1 },
            vec![1.0_f64],
            NoiseLaw::LogisticLabel,
        )
        .unwrap();
        let cfg = BernsteinCheckConfig::new(0.1_f64, 8, 400, 17);
        let report = check_local_bernstein(&model, &LossSpec::logistic(), &cfg).unwrap();
        assert!(
            report.passed,
            "min ratio {} vs 1/A {}",
            report.min_ratio,
            1.0 / report.theorem_a
        );
    }

    #[test]
    fn hinge_margin_certificate_passes() {
        // Rademacher design with t* = 1: the oracle is the Bayes rule and
        // eta(x) = sigmoid(x) is bounded away from 1/2.
        let model = ConditionalModel::new(
            DesignLaw::Rademacher { d: 1 },
            vec![1.0_f64],
            NoiseLaw::LogisticLabel,
        )
        .unwrap();
        let cfg = BernsteinCheckConfig::new(0.1_f64, 8, 64, 19);
        let report = check_local_bernstein(&model, &LossSpec::hinge(), &cfg).unwrap();
        let eta = sigmoid(1.0_f64);
        let alpha = (1.0 - eta).min((1.0 - 2.0 * eta).abs());
        assert!((report.theorem_a - 2.0 / alpha).abs() < 1e-9);
        assert!(report.passed);
    }

    #[test]
    fn ratio_shrinks_with_radius_for_l1_gaussian() {
        let model = l1_gaussian_model();
        let loss = LossSpec::l1();
        let small =
            check_local_bernstein(&model, &loss, &BernsteinCheckConfig::new(0.1, 8, 64, 23))
                .unwrap();
        let large =
            check_local_bernstein(&model, &loss, &BernsteinCheckConfig::new(1.0, 8, 64, 23))
                .unwrap();
        assert!(small.min_ratio >= large.min_ratio);
    }

    #[test]
    fn report_is_deterministic() {
        let model = l1_gaussian_model();
        let cfg = BernsteinCheckConfig::new(0.1_f64, 4, 32, 29);
        let a = check_local_bernstein(&model, &LossSpec::l1(), &cfg).unwrap();
        let b = check_local_bernstein(&model, &LossSpec::l1(), &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn bad_models_are_rejected() {
        assert!(ConditionalModel::new(
            DesignLaw::Gaussian { d: 2 },
            vec![1.0_f64],
            NoiseLaw::LogisticLabel
        )
        .is_err());
        assert!(ConditionalModel::new(
            DesignLaw::Gaussian { d: 1 },
            vec![1.0_f64],
            NoiseLaw::Uniform { lo: 1.0, hi: -1.0 }
        )
        .is_err());
        // Hinge against additive noise is not a supported certificate.
        let model = l1_gaussian_model();
        let cfg = BernsteinCheckConfig::new(0.1_f64, 2, 16, 31);
        assert!(check_local_bernstein(&model, &LossSpec::hinge(), &cfg).is_err());
    }
}
