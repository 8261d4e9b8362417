//! Monte Carlo fixed-point estimation of the localized Rademacher complexity
//! of a linear class, and the closed-form rank bound it is checked against.
//!
//! For the linear class `{<t, ·> : t real d-vector}` localized by the
//! covariance ellipsoid `{t : tᵀ Σ t <= r²}`, the supremum of the normalized
//! Rademacher process over the ellipsoid has the closed form
//!
//! `sup_{tᵀΣt <= r²} <t, S/sqrt(J)> = r · ‖Σ^{+1/2} S‖₂ / sqrt(J)`,
//!
//! where `S = Σ_i σ_i X_i` is the signed row sum over the `J` rows and
//! `Σ^{+1/2}` is the pseudo-inverse square root of `Σ` restricted to its
//! range. Monte Carlo over the signs estimates the expectation; since the
//! expectation is linear in `r`, the complexity fixed point of
//! `r ↦ E sup / (r² J γ)` is available in closed form, no bisection needed:
//! `r_fixed = c / (J γ)` with `c` the Monte Carlo mean at `r = 1`.
//!
//! The closed-form bound `sqrt(Rank(Σ) / (2 γ² n))` serves as the reference
//! value the Monte Carlo estimate is compared against.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{sym_eigen, Matrix};
use crate::rng::{self, streams};
use crate::scalar::Real;

/// Relative eigenvalue cutoff below which `Σ` is treated as rank-deficient.
const RANK_CUTOFF: f64 = 1e-10;
/// Relative tolerance for the negative-eigenvalue (non-PSD) check.
const PSD_TOL: f64 = 1e-8;
/// Relative tolerance for the "row lies in the range of Σ" check.
const RANGE_TOL: f64 = 1e-8;

/// Result of a fixed-point estimation run.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexityEstimate<F> {
    /// Monte Carlo estimate of the complexity fixed point.
    pub r_fixed: F,
    pub gamma: F,
    pub n_monte_carlo: usize,
    /// Standard error of `r_fixed` across Monte Carlo draws.
    pub std_error: F,
    /// Closed-form reference `sqrt(Rank(Σ) / (2 γ² J))`.
    pub lemma1_bound: F,
}

/// Eigendecomposition of a PSD matrix prepared for pseudo-inverse square
/// root applications.
struct PsdFactor<F> {
    /// Eigenvalues in descending order.
    values: Vec<F>,
    /// Matching eigenvectors as rows.
    vectors: Matrix<F>,
    rank: usize,
}

impl<F: Real> PsdFactor<F> {
    fn new(sigma: &Matrix<F>) -> Result<Self> {
        let (values, vectors) = sym_eigen(sigma)?;
        let lam_max = values.first().copied().unwrap_or(F::zero()).max(F::zero());
        if values.iter().any(|&v| v < -F::from64(PSD_TOL) * lam_max) {
            return Err(Error::domain(format!(
                "covariance is not positive semi-definite (min eigenvalue {})",
                values.last().copied().unwrap_or(F::zero())
            )));
        }
        let cutoff = F::from64(RANK_CUTOFF) * lam_max;
        let rank = values.iter().filter(|&&v| v > cutoff).count();
        Ok(PsdFactor {
            values,
            vectors,
            rank,
        })
    }

    /// `‖Σ^{+1/2} v‖₂²` over the range of `Σ`.
    fn pinv_sqrt_norm_sq(&self, v: &[F]) -> F {
        let mut s = F::zero();
        for j in 0..self.rank {
            let w = crate::scalar::dot(self.vectors.row(j), v);
            s += w * w / self.values[j];
        }
        s
    }

    /// Component of `v` outside the range of `Σ`.
    fn null_component_norm(&self, v: &[F]) -> F {
        let d = v.len();
        let mut s = F::zero();
        for j in self.rank..d {
            let w = crate::scalar::dot(self.vectors.row(j), v);
            s += w * w;
        }
        s.sqrt()
    }
}

fn check_rows_in_range<F: Real>(x_rows: &Matrix<F>, factor: &PsdFactor<F>) -> Result<()> {
    if factor.rank == x_rows.cols() {
        return Ok(());
    }
    for i in 0..x_rows.rows() {
        let row = x_rows.row(i);
        let null = factor.null_component_norm(row);
        let scale = crate::scalar::norm2(row).max(F::one());
        if null > F::from64(RANGE_TOL) * scale {
            return Err(Error::domain(format!(
                "design row {i} has a component outside the range of the \
                 covariance; the localized supremum is infinite"
            )));
        }
    }
    Ok(())
}

/// Monte Carlo mean and standard error of `‖Σ^{+1/2} S‖ / sqrt(J)` over
/// seeded sign draws, with per-draw derived seeds.
fn normalized_sup_draws<F: Real>(
    x_rows: &Matrix<F>,
    factor: &PsdFactor<F>,
    n_mc: usize,
    seed: u64,
) -> (F, F) {
    let j = x_rows.rows();
    let inv_sqrt_j = F::one() / F::from64(j as f64).sqrt();
    let draws: Vec<F> = (0..n_mc)
        .into_par_iter()
        .map(|m| {
            let mut rng = rng::chacha(rng::derive_seed(seed, streams::MC_DRAW, m as u64));
            let mut s = vec![F::zero(); x_rows.cols()];
            for i in 0..j {
                let sign: F = rng::rademacher(&mut rng);
                for (acc, &x) in s.iter_mut().zip(x_rows.row(i)) {
                    *acc += sign * x;
                }
            }
            factor.pinv_sqrt_norm_sq(&s).sqrt() * inv_sqrt_j
        })
        .collect();
    let nf = F::from64(n_mc as f64);
    let mean = draws.iter().copied().sum::<F>() / nf;
    let var =
        draws.iter().map(|&v| (v - mean) * (v - mean)).sum::<F>() / (nf - F::one()).max(F::one());
    (mean, (var / nf).sqrt())
}

/// Monte Carlo estimate of the expected supremum of the normalized
/// Rademacher process over the Σ-ellipsoid of radius `r`:
/// `E sup_{tᵀΣt <= r²} <t, (1/sqrt(J)) Σ_i σ_i X_i>`.
///
/// Errors if some design row has a component outside the range of `Σ`
/// (the supremum is then infinite).
pub fn rademacher_sup_linear<F: Real>(
    x_rows: &Matrix<F>,
    sigma_cov: &Matrix<F>,
    r: F,
    n_mc: usize,
    seed: u64,
) -> Result<F> {
    if r < F::zero() || !r.is_finite() {
        return Err(Error::argument("radius r must be nonnegative and finite"));
    }
    if n_mc == 0 || x_rows.rows() == 0 {
        return Err(Error::argument("need at least one draw and one row"));
    }
    if sigma_cov.rows() != x_rows.cols() {
        return Err(Error::argument("covariance dimension mismatch"));
    }
    let factor = PsdFactor::new(sigma_cov)?;
    check_rows_in_range(x_rows, &factor)?;
    let (mean, _) = normalized_sup_draws(x_rows, &factor, n_mc, seed);
    Ok(r * mean)
}

/// Closed-form complexity fixed point for the linear class:
/// `r_fixed = c / (J γ)` with `c` the Monte Carlo scalar of
/// [`rademacher_sup_linear`] at `r = 1`, plus its standard error and the
/// closed-form rank bound for the same `J` rows.
pub fn fixed_point_linear<F: Real>(
    x_rows: &Matrix<F>,
    sigma_cov: &Matrix<F>,
    gamma: F,
    n_mc: usize,
    seed: u64,
) -> Result<ComplexityEstimate<F>> {
    if !(gamma > F::zero()) {
        return Err(Error::argument("gamma must be positive"));
    }
    if n_mc == 0 || x_rows.rows() == 0 {
        return Err(Error::argument("need at least one draw and one row"));
    }
    if sigma_cov.rows() != x_rows.cols() {
        return Err(Error::argument("covariance dimension mismatch"));
    }
    let factor = PsdFactor::new(sigma_cov)?;
    check_rows_in_range(x_rows, &factor)?;
    let (mean, se) = normalized_sup_draws(x_rows, &factor, n_mc, seed);
    let scale = F::one() / (F::from64(x_rows.rows() as f64) * gamma);
    Ok(ComplexityEstimate {
        r_fixed: mean * scale,
        gamma,
        n_monte_carlo: n_mc,
        std_error: se * scale,
        lemma1_bound: lemma1_bound(sigma_cov, gamma, x_rows.rows())?,
    })
}

/// Closed-form rank bound `sqrt(Rank(Σ) / (2 γ² n))`.
///
/// The rank counts eigenvalues above `1e-10` times the largest; an
/// eigenvalue below `-1e-8` times the largest is a domain error.
pub fn lemma1_bound<F: Real>(sigma_cov: &Matrix<F>, gamma: F, n: usize) -> Result<F> {
    if !(gamma > F::zero()) {
        return Err(Error::argument("gamma must be positive"));
    }
    if n == 0 {
        return Err(Error::argument("n must be at least 1"));
    }
    let factor = PsdFactor::new(sigma_cov)?;
    let rank = F::from64(factor.rank as f64);
    Ok((rank / (F::from64(2.0) * gamma * gamma * F::from64(n as f64))).sqrt())
}

/// Default localization constant `1 / (575 A L)` given the Bernstein
/// constant `A` and the loss Lipschitz constant `L`.
pub fn default_gamma<F: Real>(a: F, lipschitz: F) -> Result<F> {
    if !(a > F::zero()) || !(lipschitz > F::zero()) {
        return Err(Error::argument("A and L must be positive"));
    }
    Ok(F::one() / (F::from64(575.0) * a * lipschitz))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian_rows(n: usize, d: usize, seed: u64) -> Matrix<f64> {
        let mut rng = rng::chacha(seed);
        let mut m = Matrix::zeros(n, d);
        for i in 0..n {
            for j in 0..d {
                m.set(i, j, rng::standard_normal(&mut rng));
            }
        }
        m
    }

    /// Mean of the chi distribution with k degrees of freedom.
    fn chi_mean(k: usize) -> f64 {
        2.0_f64.sqrt() * libm::tgamma((k as f64 + 1.0) / 2.0) / libm::tgamma(k as f64 / 2.0)
    }

    #[test]
    fn lemma1_pinned_values() {
        let eye10 = Matrix::diag(&[1.0_f64; 10]);
        let b = lemma1_bound(&eye10, 0.1, 1000).unwrap();
        assert!((b - 0.5_f64.sqrt()).abs() < 1e-12);

        let zero = Matrix::<f64>::zeros(4, 4);
        assert_eq!(lemma1_bound(&zero, 1.0, 10).unwrap(), 0.0);

        let d10 = Matrix::diag(&[1.0_f64, 0.0]);
        assert_eq!(lemma1_bound(&d10, 1.0, 2).unwrap(), 0.5);

        let neg = Matrix::diag(&[1.0_f64, -0.5]);
        assert!(lemma1_bound(&neg, 1.0, 2).is_err());
    }

    #[test]
    fn sup_is_zero_at_zero_radius_and_linear_in_r() {
        let x = gaussian_rows(40, 3, 1);
        let sigma = Matrix::diag(&[1.0_f64; 3]);
        let at0 = rademacher_sup_linear(&x, &sigma, 0.0, 200, 7).unwrap();
        assert_eq!(at0, 0.0);
        let at1 = rademacher_sup_linear(&x, &sigma, 1.0, 200, 7).unwrap();
        let at2 = rademacher_sup_linear(&x, &sigma, 2.0, 200, 7).unwrap();
        assert!((at2 - 2.0 * at1).abs() < 1e-12);
        // r -> E(r)/r² is strictly decreasing (equals c/r).
        assert!(at2 / 4.0 < at1 / 1.0);
    }

    #[test]
    fn sup_respects_jensen_bound_for_gaussian_rows() {
        let (n, d) = (60, 4);
        let x = gaussian_rows(n, d, 3);
        let sigma = Matrix::diag(&vec![1.0_f64; d]);
        let out = rademacher_sup_linear(&x, &sigma, 1.0, 2000, 11).unwrap();
        assert!(out <= ((n * d) as f64).sqrt());
    }

    #[test]
    fn row_outside_range_is_a_domain_error() {
        let x = Matrix::from_rows(vec![vec![0.0_f64, 1.0]]).unwrap();
        let sigma = Matrix::diag(&[1.0_f64, 0.0]);
        let err = rademacher_sup_linear(&x, &sigma, 1.0, 10, 1).unwrap_err();
        assert!(matches!(err, Error::Domain(_)));
    }

    #[test]
    fn doubling_gamma_halves_the_fixed_point() {
        let x = gaussian_rows(80, 4, 5);
        let sigma = Matrix::diag(&[1.0_f64; 4]);
        let a = fixed_point_linear(&x, &sigma, 0.5, 400, 9).unwrap();
        let b = fixed_point_linear(&x, &sigma, 1.0, 400, 9).unwrap();
        assert!((a.r_fixed - 2.0 * b.r_fixed).abs() < 1e-12);
    }

    #[test]
    fn fixed_point_stays_below_rank_bound_on_gaussian_design() {
        let x = gaussian_rows(500, 5, 21);
        let sigma = Matrix::diag(&[1.0_f64; 5]);
        let est = fixed_point_linear(&x, &sigma, 0.5, 2000, 13).unwrap();
        assert!((est.lemma1_bound - (5.0 / 250.0_f64).sqrt()).abs() < 1e-12);
        assert!(
            est.r_fixed <= est.lemma1_bound + 3.0 * est.std_error,
            "r_fixed {} vs bound {}",
            est.r_fixed,
            est.lemma1_bound
        );
    }

    #[test]
    fn rank_deficiency_tracks_effective_rank() {
        // Rows supported on the first 3 of 10 coordinates, Σ matching.
        let n = 400;
        let base = gaussian_rows(n, 3, 17);
        let mut x = Matrix::zeros(n, 10);
        for i in 0..n {
            for j in 0..3 {
                x.set(i, j, base.get(i, j));
            }
        }
        let mut diag = vec![0.0_f64; 10];
        diag[..3].fill(1.0);
        let sigma3 = Matrix::diag(&diag);
        let est3 = fixed_point_linear(&x, &sigma3, 0.5, 2000, 19).unwrap();
        assert!(est3.r_fixed <= est3.lemma1_bound + 3.0 * est3.std_error);

        let full = gaussian_rows(n, 10, 18);
        let sigma10 = Matrix::diag(&[1.0_f64; 10]);
        let est10 = fixed_point_linear(&full, &sigma10, 0.5, 2000, 19).unwrap();

        // The ratio should match E[chi_3]/E[chi_10], not sqrt(10/10) = 1.
        let expected = chi_mean(3) / chi_mean(10);
        let ratio = est3.r_fixed / est10.r_fixed;
        assert!(
            (ratio - expected).abs() < 0.05,
            "ratio {ratio} vs expected {expected}"
        );
    }

    #[test]
    fn std_error_shrinks_like_inverse_sqrt_n_mc() {
        let x = gaussian_rows(200, 5, 23);
        let sigma = Matrix::diag(&[1.0_f64; 5]);
        let small = fixed_point_linear(&x, &sigma, 0.5, 500, 29).unwrap();
        let large = fixed_point_linear(&x, &sigma, 0.5, 2000, 29).unwrap();
        let ratio = small.std_error / large.std_error;
        assert!((1.5..=2.7).contains(&ratio), "se ratio {ratio}");
    }

    #[test]
    fn determinism_and_gamma_default() {
        let x = gaussian_rows(50, 3, 31);
        let sigma = Matrix::diag(&[1.0_f64; 3]);
        let a = fixed_point_linear(&x, &sigma, 0.7, 300, 37).unwrap();
        let b = fixed_point_linear(&x, &sigma, 0.7, 300, 37).unwrap();
        assert_eq!(a, b);
        let g = default_gamma(2.0_f64, 1.0).unwrap();
        assert!((g - 1.0 / 1150.0).abs() < 1e-15);
    }
}
