//! Unnormalized target densities and their Stein operator coefficients.
//!
//! A target contributes three ingredients: the score ∇log p (normalizing
//! constant never needed), a scalar diffusion coefficient a(x) with its
//! gradient, and the drift b(x) = (a·∇log p + ∇a)/2 they induce. Gaussian
//! kinds run with a ≡ 1 (plain Langevin); the Student-t carries
//! a(x) = 1 + ‖x‖²/ν, which restores the dissipativity its heavy tails
//! deny to the Langevin operator.
//!
//! [`Target`] is the serializable closed set used by the CLI and the
//! experiment configs. Library users with their own density can implement
//! [`SteinTarget`] directly or wrap closures in [`CustomTarget`].

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// What the discrepancy machinery needs from a target.
///
/// `x` slices must have length `dim()`; implementations may assume it.
pub trait SteinTarget {
    fn dim(&self) -> usize;

    /// Writes ∇log p(x) into `out`.
    fn score(&self, x: &[f64], out: &mut [f64]);

    /// Scalar diffusion coefficient a(x). Defaults to the Langevin constant 1.
    fn scalar_coeff(&self, x: &[f64]) -> f64 {
        let _ = x;
        1.0
    }

    /// Writes ∇a(x) into `out`. Defaults to zero.
    fn scalar_coeff_grad(&self, x: &[f64], out: &mut [f64]) {
        let _ = x;
        out.fill(0.0);
    }

    /// Growth order q_a of the coefficient: 0 when a is bounded, 1 when it
    /// grows like ‖x‖². Diagnostics use this to gate tilt-exponent warnings.
    fn growth_exponent(&self) -> u8 {
        0
    }

    /// Writes the drift b(x) = (a(x)·∇log p(x) + ∇a(x))/2 into `out`.
    fn drift(&self, x: &[f64], out: &mut [f64]) {
        let a = self.scalar_coeff(x);
        self.score(x, out);
        let mut grad_a = vec![0.0; x.len()];
        self.scalar_coeff_grad(x, &mut grad_a);
        for (o, g) in out.iter_mut().zip(&grad_a) {
            *o = 0.5 * (a * *o + g);
        }
    }
}

// ===== built-in targets =====

fn default_variance() -> f64 {
    1.0
}
fn default_weight() -> f64 {
    0.5
}

/// The built-in target family. Serializes as `{"kind": ..., ...params}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Target {
    /// Isotropic Gaussian N(mean, variance·I).
    Gaussian {
        mean: Vec<f64>,
        #[serde(default = "default_variance")]
        variance: f64,
    },
    /// Two-component Gaussian mixture weight·N(mean1, I) + (1−weight)·N(mean2, I),
    /// shared unit covariance.
    Mixture2 {
        mean1: Vec<f64>,
        mean2: Vec<f64>,
        #[serde(default = "default_weight")]
        weight: f64,
    },
    /// Standard multivariate Student-t with dof > 2.
    StudentT { dof: f64, dim: usize },
}

impl Target {
    pub fn gaussian(mean: Vec<f64>, variance: f64) -> Result<Self> {
        let t = Target::Gaussian { mean, variance };
        t.validate()?;
        Ok(t)
    }

    pub fn standard_gaussian(dim: usize) -> Result<Self> {
        Self::gaussian(vec![0.0; dim], 1.0)
    }

    pub fn mixture2(mean1: Vec<f64>, mean2: Vec<f64>, weight: f64) -> Result<Self> {
        let t = Target::Mixture2 {
            mean1,
            mean2,
            weight,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn student_t(dof: f64, dim: usize) -> Result<Self> {
        let t = Target::StudentT { dof, dim };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Target::Gaussian { mean, variance } => {
                if mean.is_empty() || mean.iter().any(|m| !m.is_finite()) {
                    return Err(Error::Config(
                        "gaussian mean must be nonempty and finite".into(),
                    ));
                }
                if !(*variance > 0.0) || !variance.is_finite() {
                    return Err(Error::InvalidParameter {
                        name: "variance",
                        value: *variance,
                        reason: "must be positive and finite",
                    });
                }
                Ok(())
            }
            Target::Mixture2 {
                mean1,
                mean2,
                weight,
            } => {
                if mean1.is_empty() || mean1.len() != mean2.len() {
                    return Err(Error::DimensionMismatch {
                        expected: mean1.len(),
                        got: mean2.len(),
                    });
                }
                if mean1.iter().chain(mean2).any(|m| !m.is_finite()) {
                    return Err(Error::Config("mixture means must be finite".into()));
                }
                if !(*weight >= 0.0 && *weight <= 1.0) {
                    return Err(Error::InvalidParameter {
                        name: "weight",
                        value: *weight,
                        reason: "mixture weight must lie in [0, 1]",
                    });
                }
                Ok(())
            }
            Target::StudentT { dof, dim } => {
                if !(*dof > 2.0) || !dof.is_finite() {
                    return Err(Error::InvalidParameter {
                        name: "dof",
                        value: *dof,
                        reason: "Student-t requires dof > 2 (dissipativity fails otherwise)",
                    });
                }
                if *dim == 0 {
                    return Err(Error::Config("dimension must be at least 1".into()));
                }
                Ok(())
            }
        }
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        Ok(())
    }

    /// Checked score: ∇log p(x).
    pub fn score_at(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(x)?;
        let mut out = vec![0.0; x.len()];
        self.score(x, &mut out);
        Ok(out)
    }

    /// Checked drift and coefficient (b(x), a(x)).
    pub fn diffusion(&self, x: &[f64]) -> Result<(Vec<f64>, f64)> {
        self.check_dim(x)?;
        let mut b = vec![0.0; x.len()];
        self.drift(x, &mut b);
        Ok((b, self.scalar_coeff(x)))
    }

    /// log p(x) up to an additive constant; zero at the natural reference
    /// point (the mean, or the origin for Student-t).
    pub fn log_density_unnormalized(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x)?;
        Ok(match self {
            Target::Gaussian { mean, variance } => {
                -0.5 * sq_dist(x, mean) / variance
            }
            Target::Mixture2 {
                mean1,
                mean2,
                weight,
            } => {
                let (l1, l2) = component_logs(x, mean1, mean2, *weight);
                log_sum_exp(l1, l2)
            }
            Target::StudentT { dof, .. } => {
                -0.5 * (dof + x.len() as f64) * (sq_norm(x) / dof).ln_1p()
            }
        })
    }

    /// Posterior probability that `x` came from component 1 of a mixture.
    /// Errors for non-mixture targets.
    pub fn mixture_posterior(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x)?;
        match self {
            Target::Mixture2 {
                mean1,
                mean2,
                weight,
            } => {
                let (l1, l2) = component_logs(x, mean1, mean2, *weight);
                let m = l1.max(l2);
                let r1 = (l1 - m).exp();
                Ok(r1 / (r1 + (l2 - m).exp()))
            }
            _ => Err(Error::InvalidParameter {
                name: "kind",
                value: f64::NAN,
                reason: "mixture_posterior is defined only for mixture2 targets",
            }),
        }
    }

    /// Upper limit on the tilt exponent p under which the linear coercive
    /// diagnostic keeps a positive plateau, when the target's diffusion
    /// coefficient grows (q_a = 1): p < 2α/λ_a with α = 1 − 2/ν and λ_a = 4.
    /// `None` means unconstrained (constant coefficient).
    pub fn tilt_exponent_limit(&self) -> Option<f64> {
        match self {
            Target::StudentT { dof, .. } => Some(0.5 * (1.0 - 2.0 / dof)),
            _ => None,
        }
    }
}

/// Mixture component log-masses (log weight + Gaussian exponent), the common
/// input to the posterior and the log-sum-exp density.
fn component_logs(x: &[f64], mean1: &[f64], mean2: &[f64], weight: f64) -> (f64, f64) {
    (
        weight.ln() - 0.5 * sq_dist(x, mean1),
        (1.0 - weight).ln() - 0.5 * sq_dist(x, mean2),
    )
}

/// max + ln(exp(a−max) + exp(b−max)); tolerates one operand at −∞.
fn log_sum_exp(a: f64, b: f64) -> f64 {
    let m = a.max(b);
    if m == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    m + ((a - m).exp() + (b - m).exp()).ln()
}

impl SteinTarget for Target {
    fn dim(&self) -> usize {
        match self {
            Target::Gaussian { mean, .. } => mean.len(),
            Target::Mixture2 { mean1, .. } => mean1.len(),
            Target::StudentT { dim, .. } => *dim,
        }
    }

    fn score(&self, x: &[f64], out: &mut [f64]) {
        match self {
            Target::Gaussian { mean, variance } => {
                for i in 0..x.len() {
                    out[i] = (mean[i] - x[i]) / variance;
                }
            }
            Target::Mixture2 {
                mean1,
                mean2,
                weight,
            } => {
                // score = π̃(x)·(μ₁−x) + (1−π̃(x))·(μ₂−x) with the posterior
                // computed in log space; exponent gaps of ~10³ nats appear at
                // the default mode separations and would underflow naively.
                let (l1, l2) = component_logs(x, mean1, mean2, *weight);
                let m = l1.max(l2);
                let r1 = (l1 - m).exp();
                let r2 = (l2 - m).exp();
                let post = r1 / (r1 + r2);
                for i in 0..x.len() {
                    out[i] = post * (mean1[i] - x[i]) + (1.0 - post) * (mean2[i] - x[i]);
                }
            }
            Target::StudentT { dof, .. } => {
                let scale = -(dof + x.len() as f64) / (dof + sq_norm(x));
                for i in 0..x.len() {
                    out[i] = scale * x[i];
                }
            }
        }
    }

    fn scalar_coeff(&self, x: &[f64]) -> f64 {
        match self {
            Target::StudentT { dof, .. } => 1.0 + sq_norm(x) / dof,
            _ => 1.0,
        }
    }

    fn scalar_coeff_grad(&self, x: &[f64], out: &mut [f64]) {
        match self {
            Target::StudentT { dof, .. } => {
                for i in 0..x.len() {
                    out[i] = 2.0 * x[i] / dof;
                }
            }
            _ => out.fill(0.0),
        }
    }

    fn growth_exponent(&self) -> u8 {
        match self {
            Target::StudentT { .. } => 1,
            _ => 0,
        }
    }

    fn drift(&self, x: &[f64], out: &mut [f64]) {
        match self {
            // b = −((ν+D−2)/(2ν))·x in closed form; the generic
            // (a·score + ∇a)/2 assembly reproduces it only up to roundoff.
            Target::StudentT { dof, .. } => {
                let scale = -(dof + x.len() as f64 - 2.0) / (2.0 * dof);
                for i in 0..x.len() {
                    out[i] = scale * x[i];
                }
            }
            Target::Gaussian { .. } | Target::Mixture2 { .. } => {
                self.score(x, out);
                for o in out.iter_mut() {
                    *o *= 0.5;
                }
            }
        }
    }
}

// ===== closure-backed targets =====

type ScoreFn = dyn Fn(&[f64], &mut [f64]) + Send + Sync;
type CoeffFn = dyn Fn(&[f64]) -> f64 + Send + Sync;

/// A target defined by user closures, for densities outside the built-in
/// family. Not serializable; library use only.
///
/// ```
/// use stein::targets::{CustomTarget, SteinTarget};
/// // 1-D density p(x) ∝ exp(−x⁴/4): score is −x³.
/// let quartic = CustomTarget::from_score(1, |x, out| out[0] = -x[0].powi(3));
/// let mut s = [0.0];
/// quartic.score(&[2.0], &mut s);
/// assert_eq!(s[0], -8.0);
/// ```
pub struct CustomTarget {
    dim: usize,
    score: Box<ScoreFn>,
    coeff: Option<Box<CoeffFn>>,
    coeff_grad: Option<Box<ScoreFn>>,
    growth_exponent: u8,
}

impl CustomTarget {
    /// Langevin target from a score closure (a ≡ 1).
    pub fn from_score(
        dim: usize,
        score: impl Fn(&[f64], &mut [f64]) + Send + Sync + 'static,
    ) -> Self {
        CustomTarget {
            dim,
            score: Box::new(score),
            coeff: None,
            coeff_grad: None,
            growth_exponent: 0,
        }
    }

    /// Attach a scalar diffusion coefficient a(x), its gradient, and its
    /// growth order.
    pub fn with_scalar_coeff(
        mut self,
        coeff: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        coeff_grad: impl Fn(&[f64], &mut [f64]) + Send + Sync + 'static,
        growth_exponent: u8,
    ) -> Self {
        self.coeff = Some(Box::new(coeff));
        self.coeff_grad = Some(Box::new(coeff_grad));
        self.growth_exponent = growth_exponent;
        self
    }
}

impl SteinTarget for CustomTarget {
    fn dim(&self) -> usize {
        self.dim
    }

    fn score(&self, x: &[f64], out: &mut [f64]) {
        (self.score)(x, out);
    }

    fn scalar_coeff(&self, x: &[f64]) -> f64 {
        match &self.coeff {
            Some(f) => f(x),
            None => 1.0,
        }
    }

    fn scalar_coeff_grad(&self, x: &[f64], out: &mut [f64]) {
        match &self.coeff_grad {
            Some(f) => f(x, out),
            None => out.fill(0.0),
        }
    }

    fn growth_exponent(&self) -> u8 {
        self.growth_exponent
    }
}

#[inline]
fn sq_norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

#[inline]
fn sq_dist(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum()
}
