//! Convex Lipschitz loss families: logistic, hinge, Huber and quantile.
//!
//! Each loss is a function `(u, y) -> loss(u, y)` of a prediction `u` and an
//! output `y`, convex and Lipschitz in `u`. Values, subgradients in `u` and
//! the Lipschitz constant are exposed; at kinks the minimum-norm element of
//! the subdifferential is returned so that gradient steps do not drift at
//! optima.
//!
//! Conventions:
//! - logistic: `log(1 + exp(-y u))`, labels in `{-1, +1}`, constant 1;
//! - hinge: `max(1 - y u, 0)`, labels in `{-1, +1}`, constant 1;
//! - Huber with threshold `delta`: quadratic within `delta`, linear outside,
//!   constant `delta`;
//! - quantile at level `tau`: pinball loss `r (tau - 1{r <= 0})` of the
//!   residual `r = y - u`. The constant is reported as 1 (the conservative
//!   value used by the rate constants; `max(tau, 1-tau)` would be tighter).

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Loss family tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LossKind {
    Logistic,
    Hinge,
    Huber,
    Quantile,
}

impl LossKind {
    pub fn name(self) -> &'static str {
        match self {
            LossKind::Logistic => "logistic",
            LossKind::Hinge => "hinge",
            LossKind::Huber => "huber",
            LossKind::Quantile => "quantile",
        }
    }

    /// Classification losses require labels in `{-1, +1}`.
    pub fn is_classification(self) -> bool {
        matches!(self, LossKind::Logistic | LossKind::Hinge)
    }
}

/// A loss family together with its parameters. Stateless value object.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossSpec<F> {
    kind: LossKind,
    /// Huber threshold, present iff `kind == Huber`.
    delta: Option<F>,
    /// Quantile level in (0, 1), present iff `kind == Quantile`.
    tau: Option<F>,
}

impl<F: Real> LossSpec<F> {
    pub fn logistic() -> Self {
        LossSpec {
            kind: LossKind::Logistic,
            delta: None,
            tau: None,
        }
    }

    pub fn hinge() -> Self {
        LossSpec {
            kind: LossKind::Hinge,
            delta: None,
            tau: None,
        }
    }

    pub fn huber(delta: F) -> Result<Self> {
        if !(delta > F::zero()) || !delta.is_finite() {
            return Err(Error::argument("huber delta must be positive and finite"));
        }
        Ok(LossSpec {
            kind: LossKind::Huber,
            delta: Some(delta),
            tau: None,
        })
    }

    pub fn quantile(tau: F) -> Result<Self> {
        if !(tau > F::zero() && tau < F::one()) {
            return Err(Error::argument("quantile tau must lie in (0, 1)"));
        }
        Ok(LossSpec {
            kind: LossKind::Quantile,
            delta: None,
            tau: Some(tau),
        })
    }

    /// The L1 loss is the quantile loss at `tau = 1/2`.
    pub fn l1() -> Self {
        LossSpec::quantile(F::from64(0.5)).expect("1/2 lies in (0,1)")
    }

    pub fn kind(&self) -> LossKind {
        self.kind
    }

    pub fn delta(&self) -> Option<F> {
        self.delta
    }

    pub fn tau(&self) -> Option<F> {
        self.tau
    }

    /// Lipschitz constant in the prediction argument.
    pub fn lipschitz(&self) -> F {
        match self.kind {
            LossKind::Logistic | LossKind::Hinge | LossKind::Quantile => F::one(),
            LossKind::Huber => self.delta.expect("huber carries delta"),
        }
    }

    fn check_inputs(&self, u: F, y: F) -> Result<()> {
        if !u.is_finite() || !y.is_finite() {
            return Err(Error::domain("non-finite loss input"));
        }
        if self.kind.is_classification() && !(y == F::one() || y == -F::one()) {
            return Err(Error::domain(format!(
                "{} loss requires labels in {{-1, +1}}, got {y}",
                self.kind.name()
            )));
        }
        Ok(())
    }

    /// Loss value at prediction `u` and output `y`.
    pub fn value(&self, u: F, y: F) -> Result<F> {
        self.check_inputs(u, y)?;
        Ok(match self.kind {
            LossKind::Logistic => softplus(-y * u),
            LossKind::Hinge => (F::one() - u * y).max(F::zero()),
            LossKind::Huber => {
                let delta = self.delta.unwrap();
                let r = (y - u).abs();
                if r <= delta {
                    F::from64(0.5) * r * r
                } else {
                    delta * r - F::from64(0.5) * delta * delta
                }
            }
            LossKind::Quantile => {
                let tau = self.tau.unwrap();
                let r = y - u;
                if r > F::zero() {
                    r * tau
                } else {
                    r * (tau - F::one())
                }
            }
        })
    }

    /// Minimum-norm subgradient of the loss in `u`.
    ///
    /// At kinks (hinge at `uy = 1`, quantile at `u = y`) the subdifferential
    /// contains 0 and 0 is returned.
    pub fn subgrad(&self, u: F, y: F) -> Result<F> {
        self.check_inputs(u, y)?;
        Ok(match self.kind {
            LossKind::Logistic => -y * sigmoid(-y * u),
            LossKind::Hinge => {
                match (u * y).partial_cmp(&F::one()) {
                    Some(std::cmp::Ordering::Less) => -y,
                    // kink: subdifferential is conv{-y, 0}, min-norm element 0
                    _ => F::zero(),
                }
            }
            LossKind::Huber => {
                let delta = self.delta.unwrap();
                let r = u - y;
                if r.abs() <= delta {
                    r
                } else {
                    delta * r.signum()
                }
            }
            LossKind::Quantile => {
                let tau = self.tau.unwrap();
                let r = y - u;
                if r > F::zero() {
                    -tau
                } else if r < F::zero() {
                    F::one() - tau
                } else {
                    // kink: subdifferential [-tau, 1 - tau] contains 0
                    F::zero()
                }
            }
        })
    }
}

/// Numerically stable `log(1 + exp(z))`.
pub fn softplus<F: Real>(z: F) -> F {
    if z > F::zero() {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// Logistic sigmoid `1 / (1 + exp(-z))`.
pub fn sigmoid<F: Real>(z: F) -> F {
    if z >= F::zero() {
        F::one() / (F::one() + (-z).exp())
    } else {
        let e = z.exp();
        e / (F::one() + e)
    }
}
