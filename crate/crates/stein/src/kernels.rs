//! Composable positive-definite kernels with exact derivatives.
//!
//! A [`KernelSpec`] is a small expression tree: radial bases (IMQ, exponential
//! quadratic, Matérn-3/2), a normalized linear kernel, polynomial tilts, and
//! sums. Every node implements four primitives in closed form:
//!
//! * `eval`: k(x, y)
//! * `grad_x`: ∇ₓ k(x, y)
//! * `grad_y`: ∇ᵧ k(x, y)
//! * `cross_trace`: Σᵢ ∂²k/∂xᵢ∂yᵢ (x, y)
//!
//! which is exactly the set the Stein kernel expansion consumes. Tilting by a
//! [`WeightFunction`] multiplies a kernel by w(x)w(y) and is what lets the
//! induced Stein class grow polynomially; the normalized linear kernel is the
//! bounded companion whose derivatives still carry linear growth after a
//! tilt. Positive semidefiniteness is preserved by every node kind.
//!
//! Derivatives are hand-derived (product and chain rules through the tree)
//! rather than autodiffed, and validated against central finite differences
//! by [`derivative_report`] and the test suite.
//!
//! # JSON form
//!
//! Specs serialize losslessly via serde. The `kind` tag selects the node:
//!
//! ```json
//! {"kind": "tilted",
//!  "weight": {"v": 1.0, "p": 0.05},
//!  "child": {"kind": "sum",
//!            "left": {"kind": "imq", "c": 1.0, "beta": -0.5, "sigma": 1.0},
//!            "right": {"kind": "normlin", "v": 1.0}}}
//! ```

use serde::{Deserialize, Serialize};

use crate::rng::SplitMix64;
use crate::{Error, Result};

// ===== weight functions =====

/// Polynomial tilt w(x) = (v² + ‖x‖²)^p with v ≥ 1 and p ≥ 0.
///
/// `p = 0` is the identity tilt (w ≡ 1). The two named constructors map the
/// (q, θ) parametrization of moment orders onto the single exponent stored
/// here: [`WeightFunction::linear_growth`] gives p = (q + θ − 1)/2, and
/// [`WeightFunction::quadratic_growth`] gives p = (q + θ)/2, one weight-decay
/// step stronger.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightFunction {
    pub v: f64,
    pub p: f64,
}

impl WeightFunction {
    pub fn new(v: f64, p: f64) -> Result<Self> {
        let w = WeightFunction { v, p };
        w.validate()?;
        Ok(w)
    }

    /// Weight for detecting divergence of q-th moments when the Stein class
    /// already carries one order of growth: p = (q + θ − 1)/2.
    pub fn linear_growth(q: f64, theta: f64, v: f64) -> Result<Self> {
        if !(q + theta >= 1.0) {
            return Err(Error::InvalidParameter {
                name: "q + theta",
                value: q + theta,
                reason: "linear-growth weight needs q + theta >= 1 so the exponent is nonnegative",
            });
        }
        Self::new(v, 0.5 * (q + theta - 1.0))
    }

    /// One growth order stronger: p = (q + θ)/2. Used when the base kernel's
    /// Stein class has no growth of its own to lean on.
    pub fn quadratic_growth(q: f64, theta: f64, v: f64) -> Result<Self> {
        if !(q + theta >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "q + theta",
                value: q + theta,
                reason: "quadratic-growth weight needs q + theta >= 0",
            });
        }
        Self::new(v, 0.5 * (q + theta))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.v >= 1.0) || !self.v.is_finite() {
            return Err(Error::InvalidParameter {
                name: "v",
                value: self.v,
                reason: "weight offset must satisfy v >= 1",
            });
        }
        if !(self.p >= 0.0) || !self.p.is_finite() {
            return Err(Error::InvalidParameter {
                name: "p",
                value: self.p,
                reason: "weight exponent must satisfy p >= 0",
            });
        }
        Ok(())
    }

    #[inline]
    pub fn eval(&self, x: &[f64]) -> f64 {
        (self.v * self.v + sq_norm(x)).powf(self.p)
    }

    /// ∇w(x) = 2p·x·(v² + ‖x‖²)^{p−1}, written into `out`.
    pub fn grad(&self, x: &[f64], out: &mut [f64]) {
        let scale = self.grad_scale(x);
        for (o, &xi) in out.iter_mut().zip(x) {
            *o = scale * xi;
        }
    }

    /// The scalar 2p·(v² + ‖x‖²)^{p−1}, so ∇w(x) = grad_scale(x) · x.
    #[inline]
    fn grad_scale(&self, x: &[f64]) -> f64 {
        if self.p == 0.0 {
            return 0.0;
        }
        2.0 * self.p * (self.v * self.v + sq_norm(x)).powf(self.p - 1.0)
    }
}

// ===== kernel spec =====

fn default_sigma() -> f64 {
    1.0
}
fn default_c() -> f64 {
    1.0
}
fn default_beta() -> f64 {
    -0.5
}
fn default_v() -> f64 {
    1.0
}

/// A positive-definite kernel as a composition tree.
///
/// Radial nodes share the parametrization k(x, y) = g(‖x−y‖²/σ²); `sigma` is
/// the bandwidth everywhere. All nodes are immutable and all operations pure,
/// so a spec can be shared freely across threads.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KernelSpec {
    /// Inverse multiquadric (c² + ‖x−y‖²/σ²)^β with c > 0 and β ∈ (−1, 0).
    Imq {
        #[serde(default = "default_c")]
        c: f64,
        #[serde(default = "default_beta")]
        beta: f64,
        #[serde(default = "default_sigma")]
        sigma: f64,
    },
    /// Exponentiated quadratic exp(−‖x−y‖²/(2σ²)).
    Eq {
        #[serde(default = "default_sigma")]
        sigma: f64,
    },
    /// Matérn-3/2: (1 + a‖x−y‖)·exp(−a‖x−y‖) with a = √3/σ.
    Matern32 {
        #[serde(default = "default_sigma")]
        sigma: f64,
    },
    /// Normalized linear kernel (v² + ⟨x,y⟩)/√((v²+‖x‖²)(v²+‖y‖²)).
    ///
    /// Bounded by 1 in absolute value, yet its gradients keep linear growth
    /// after tilting, which is what the moment-detecting constructions need.
    #[serde(rename = "normlin")]
    NormalizedLinear {
        #[serde(default = "default_v")]
        v: f64,
    },
    /// w(x)·k(x,y)·w(y) for a polynomial weight w.
    Tilted {
        weight: WeightFunction,
        child: Box<KernelSpec>,
    },
    /// k₁ + k₂.
    Sum {
        left: Box<KernelSpec>,
        right: Box<KernelSpec>,
    },
}

impl KernelSpec {
    /// IMQ with c = 1, β = −1/2, σ = 1: the all-purpose bounded default.
    pub fn imq_default() -> Self {
        KernelSpec::Imq {
            c: 1.0,
            beta: -0.5,
            sigma: 1.0,
        }
    }

    pub fn imq(c: f64, beta: f64, sigma: f64) -> Result<Self> {
        let k = KernelSpec::Imq { c, beta, sigma };
        k.validate()?;
        Ok(k)
    }

    pub fn eq(sigma: f64) -> Result<Self> {
        let k = KernelSpec::Eq { sigma };
        k.validate()?;
        Ok(k)
    }

    pub fn matern32(sigma: f64) -> Result<Self> {
        let k = KernelSpec::Matern32 { sigma };
        k.validate()?;
        Ok(k)
    }

    pub fn normalized_linear(v: f64) -> Result<Self> {
        let k = KernelSpec::NormalizedLinear { v };
        k.validate()?;
        Ok(k)
    }

    pub fn tilted(weight: WeightFunction, child: KernelSpec) -> Self {
        KernelSpec::Tilted {
            weight,
            child: Box::new(child),
        }
    }

    pub fn sum(left: KernelSpec, right: KernelSpec) -> Self {
        KernelSpec::Sum {
            left: Box::new(left),
            right: Box::new(right),
        }
    }

    /// The moment-detecting construction for targets whose Stein class
    /// already grows linearly: tilt (base + normlin(v)) by the linear-growth
    /// weight with parameters (q, θ, v).
    ///
    /// ```
    /// use stein::kernels::KernelSpec;
    /// let k = KernelSpec::linear_growth_kernel(KernelSpec::imq_default(), 1.0, 0.1, 1.0)?;
    /// assert!((k.eval(&[0.0], &[0.0])? - 2.0).abs() < 1e-15); // w(0)²·(1 + 1)
    /// # Ok::<(), stein::Error>(())
    /// ```
    pub fn linear_growth_kernel(base: KernelSpec, q: f64, theta: f64, v: f64) -> Result<Self> {
        base.validate()?;
        let w = WeightFunction::linear_growth(q, theta, v)?;
        Ok(Self::tilted(
            w,
            Self::sum(base, Self::normalized_linear(v)?),
        ))
    }

    /// As [`Self::linear_growth_kernel`] but with the quadratic-growth weight
    /// exponent (q + θ)/2.
    pub fn quadratic_growth_kernel(base: KernelSpec, q: f64, theta: f64, v: f64) -> Result<Self> {
        base.validate()?;
        let w = WeightFunction::quadratic_growth(q, theta, v)?;
        Ok(Self::tilted(
            w,
            Self::sum(base, Self::normalized_linear(v)?),
        ))
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            KernelSpec::Imq { c, beta, sigma } => {
                positive("sigma", *sigma)?;
                positive("c", *c)?;
                if !(*beta > -1.0 && *beta < 0.0) {
                    return Err(Error::InvalidParameter {
                        name: "beta",
                        value: *beta,
                        reason: "IMQ exponent must lie in (-1, 0)",
                    });
                }
                Ok(())
            }
            KernelSpec::Eq { sigma } | KernelSpec::Matern32 { sigma } => positive("sigma", *sigma),
            KernelSpec::NormalizedLinear { v } => positive("v", *v),
            KernelSpec::Tilted { weight, child } => {
                weight.validate()?;
                child.validate()
            }
            KernelSpec::Sum { left, right } => {
                left.validate()?;
                right.validate()
            }
        }
    }

    /// Bandwidth of the leftmost radial node, if the tree has one.
    pub fn bandwidth(&self) -> Option<f64> {
        match self {
            KernelSpec::Imq { sigma, .. }
            | KernelSpec::Eq { sigma }
            | KernelSpec::Matern32 { sigma } => Some(*sigma),
            KernelSpec::NormalizedLinear { .. } => None,
            KernelSpec::Tilted { child, .. } => child.bandwidth(),
            KernelSpec::Sum { left, right } => left.bandwidth().or_else(|| right.bandwidth()),
        }
    }

    /// A copy with every radial node's bandwidth replaced by `sigma`.
    /// Non-radial nodes (normlin, weights) are untouched.
    pub fn with_bandwidth(&self, sigma: f64) -> KernelSpec {
        match self {
            KernelSpec::Imq { c, beta, .. } => KernelSpec::Imq {
                c: *c,
                beta: *beta,
                sigma,
            },
            KernelSpec::Eq { .. } => KernelSpec::Eq { sigma },
            KernelSpec::Matern32 { .. } => KernelSpec::Matern32 { sigma },
            KernelSpec::NormalizedLinear { v } => KernelSpec::NormalizedLinear { v: *v },
            KernelSpec::Tilted { weight, child } => KernelSpec::Tilted {
                weight: *weight,
                child: Box::new(child.with_bandwidth(sigma)),
            },
            KernelSpec::Sum { left, right } => KernelSpec::Sum {
                left: Box::new(left.with_bandwidth(sigma)),
                right: Box::new(right.with_bandwidth(sigma)),
            },
        }
    }

    // ===== evaluation =====

    pub fn eval(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        check_dims(x, y)?;
        let (mut gx, mut gy) = (vec![0.0; x.len()], vec![0.0; x.len()]);
        Ok(self
            .eval_parts(x, y, &mut gx, &mut gy, &mut Workspace::default())
            .0)
    }

    pub fn grad_x(&self, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
        check_dims(x, y)?;
        let (mut gx, mut gy) = (vec![0.0; x.len()], vec![0.0; x.len()]);
        self.eval_parts(x, y, &mut gx, &mut gy, &mut Workspace::default());
        Ok(gx)
    }

    pub fn grad_y(&self, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
        check_dims(x, y)?;
        let (mut gx, mut gy) = (vec![0.0; x.len()], vec![0.0; x.len()]);
        self.eval_parts(x, y, &mut gx, &mut gy, &mut Workspace::default());
        Ok(gy)
    }

    /// Σᵢ ∂²k/∂xᵢ∂yᵢ, the trace of the cross-derivative matrix.
    pub fn cross_trace(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        check_dims(x, y)?;
        let (mut gx, mut gy) = (vec![0.0; x.len()], vec![0.0; x.len()]);
        Ok(self
            .eval_parts(x, y, &mut gx, &mut gy, &mut Workspace::default())
            .1)
    }

    /// All four primitives in one pass: returns (value, cross_trace) and
    /// writes the gradients into `gx`/`gy`.
    ///
    /// This is the hot path behind the Stein kernel; callers validate
    /// dimensions once per sample, not per pair. `ws` recycles the scratch
    /// buffers composite nodes need, so an N² sweep allocates only on its
    /// first pair.
    pub fn eval_parts(
        &self,
        x: &[f64],
        y: &[f64],
        gx: &mut [f64],
        gy: &mut [f64],
        ws: &mut Workspace,
    ) -> (f64, f64) {
        let d = x.len();
        match self {
            KernelSpec::Imq { c, beta, sigma } => {
                let inv_s2 = 1.0 / (sigma * sigma);
                let t = sq_dist(x, y);
                let base = c * c + t * inv_s2;
                let k = base.powf(*beta);
                // First and second derivatives of k in t = ‖x−y‖², with the
                // σ-scaling folded into the coefficients.
                let g1 = beta * inv_s2 * base.powf(beta - 1.0);
                let g2 = beta * (beta - 1.0) * inv_s2 * inv_s2 * base.powf(beta - 2.0);
                radial_grads(x, y, g1, gx, gy);
                (k, -2.0 * d as f64 * g1 - 4.0 * t * g2)
            }
            KernelSpec::Eq { sigma } => {
                let inv_s2 = 1.0 / (sigma * sigma);
                let t = sq_dist(x, y);
                let k = (-0.5 * t * inv_s2).exp();
                let g1 = -0.5 * inv_s2 * k;
                let g2 = 0.25 * inv_s2 * inv_s2 * k;
                radial_grads(x, y, g1, gx, gy);
                (k, -2.0 * d as f64 * g1 - 4.0 * t * g2)
            }
            KernelSpec::Matern32 { sigma } => {
                // k = (1 + ar)e^{−ar}, a = √3/σ. Gradient −a²e^{−ar}(x−y)
                // has no 1/r factor, and the cross trace a²e^{−ar}(D − ar)
                // carries its r → 0 limit built in.
                let a = 3f64.sqrt() / sigma;
                let r = sq_dist(x, y).sqrt();
                let e = (-a * r).exp();
                let k = (1.0 + a * r) * e;
                let scale = -a * a * e;
                for i in 0..d {
                    let u = x[i] - y[i];
                    gx[i] = scale * u;
                    gy[i] = -gx[i];
                }
                (k, a * a * e * (d as f64 - a * r))
            }
            KernelSpec::NormalizedLinear { v } => {
                let v2 = v * v;
                let a = v2 + sq_norm(x);
                let b = v2 + sq_norm(y);
                let s = v2 + dot(x, y);
                let inv_ab = 1.0 / (a * b).sqrt();
                let k = s * inv_ab;
                for i in 0..d {
                    gx[i] = (y[i] - s / a * x[i]) * inv_ab;
                    gy[i] = (x[i] - s / b * y[i]) * inv_ab;
                }
                // Grouping the two norm terms keeps the value bit-identical
                // under x ↔ y (f64 addition commutes; chained subtraction
                // would reassociate).
                let norm_terms = sq_norm(y) / b + sq_norm(x) / a;
                let cross = inv_ab * (d as f64 - norm_terms + s * dot(x, y) / (a * b));
                (k, cross)
            }
            KernelSpec::Tilted { weight, child } => {
                let (mut cgx, mut cgy) = (ws.take(d), ws.take(d));
                let (k0, ct0) = child.eval_parts(x, y, &mut cgx, &mut cgy, ws);
                let wx = weight.eval(x);
                let wy = weight.eval(y);
                // ∇w(x) = sx·x and ∇w(y) = sy·y, so every inner product with
                // a weight gradient collapses to a scalar times a dot product.
                let sx = weight.grad_scale(x);
                let sy = weight.grad_scale(y);
                // Term shapes mirror each other so that swapping x and y
                // reproduces the other gradient bit for bit.
                for i in 0..d {
                    gx[i] = sx * x[i] * wy * k0 + wx * wy * cgx[i];
                    gy[i] = sy * y[i] * wx * k0 + wx * wy * cgy[i];
                }
                let mixed = wy * sx * dot(x, &cgy) + wx * sy * dot(y, &cgx);
                let cross = sx * sy * dot(x, y) * k0 + mixed + wx * wy * ct0;
                ws.put(cgy);
                ws.put(cgx);
                (wx * wy * k0, cross)
            }
            KernelSpec::Sum { left, right } => {
                let (kl, ctl) = left.eval_parts(x, y, gx, gy, ws);
                let (mut rgx, mut rgy) = (ws.take(d), ws.take(d));
                let (kr, ctr) = right.eval_parts(x, y, &mut rgx, &mut rgy, ws);
                for i in 0..d {
                    gx[i] += rgx[i];
                    gy[i] += rgy[i];
                }
                ws.put(rgy);
                ws.put(rgx);
                (kl + kr, ctl + ctr)
            }
        }
    }
}

/// Scratch buffers for composite-node evaluation, recycled across pairs.
#[derive(Debug, Default)]
pub struct Workspace {
    free: Vec<Vec<f64>>,
}

impl Workspace {
    fn take(&mut self, dim: usize) -> Vec<f64> {
        let mut buf = self.free.pop().unwrap_or_default();
        buf.clear();
        buf.resize(dim, 0.0);
        buf
    }

    fn put(&mut self, buf: Vec<f64>) {
        self.free.push(buf);
    }
}

fn positive(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be positive and finite",
        })
    }
}

fn check_dims(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() || x.is_empty() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    Ok(())
}

#[inline]
fn sq_norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

#[inline]
fn sq_dist(x: &[f64], y: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(a, b)| (a - b) * (a - b))
        .sum()
}

#[inline]
fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// grad_x = 2·g'(t)·(x−y) for radial kernels k = g(‖x−y‖²); grad_y is its
/// negation, exactly.
#[inline]
fn radial_grads(x: &[f64], y: &[f64], g1: f64, gx: &mut [f64], gy: &mut [f64]) {
    for i in 0..x.len() {
        let u = x[i] - y[i];
        gx[i] = 2.0 * g1 * u;
        gy[i] = -gx[i];
    }
}

// ===== finite-difference and PSD harness =====

/// Outcome of [`derivative_report`]: worst relative errors over all sampled
/// pairs, plus the smallest Gram eigenvalue seen in the PSD spot check.
#[derive(Debug, Clone)]
pub struct DerivativeReport {
    pub grad_x_max_rel: f64,
    pub grad_y_max_rel: f64,
    pub cross_trace_max_rel: f64,
    pub min_gram_eigenvalue: f64,
    pub pairs_checked: usize,
    pub pass: bool,
}

const FD_STEP: f64 = 1e-5;
const FD_REL_TOL: f64 = 1e-5;
const FD_ABS_FLOOR: f64 = 1e-8;
const PSD_EIG_FLOOR: f64 = -1e-8;

/// Validates a spec's analytic derivatives against central finite differences
/// and spot-checks positive semidefiniteness on random Gram matrices.
///
/// Gradients are differenced from `eval`; the cross trace is differenced from
/// the analytic `grad_x` (one finite-difference layer over an exact first
/// derivative, since a double difference of `eval` at this step size drowns
/// in truncation noise). Pairs closer than 0.1 are redrawn: the Matérn-3/2
/// cross derivative is only C⁰ in r at coincidence, which starves the
/// difference quotient of accuracy there while the analytic value stays
/// exact.
pub fn derivative_report(
    spec: &KernelSpec,
    dims: &[usize],
    trials: usize,
    seed: u64,
) -> Result<DerivativeReport> {
    spec.validate()?;
    let mut rng = SplitMix64::new(seed);
    let mut report = DerivativeReport {
        grad_x_max_rel: 0.0,
        grad_y_max_rel: 0.0,
        cross_trace_max_rel: 0.0,
        min_gram_eigenvalue: f64::INFINITY,
        pairs_checked: 0,
        pass: true,
    };

    for &d in dims {
        let (mut x, mut y) = (vec![0.0; d], vec![0.0; d]);
        for _ in 0..trials {
            loop {
                rng.fill_normal(&mut x);
                rng.fill_normal(&mut y);
                if sq_dist(&x, &y) > 0.01 {
                    break;
                }
            }
            check_pair(spec, &x, &y, &mut report)?;
            report.pairs_checked += 1;
        }

        // PSD spot check: ten 8-point Gram matrices per dimension.
        for _ in 0..10 {
            let mut pts = vec![0.0; 8 * d];
            rng.fill_normal(&mut pts);
            let mut gram = [[0.0; 8]; 8];
            for i in 0..8 {
                for j in 0..8 {
                    gram[i][j] = spec.eval(&pts[i * d..(i + 1) * d], &pts[j * d..(j + 1) * d])?;
                }
            }
            let min_eig = jacobi_min_eigenvalue(&mut gram);
            report.min_gram_eigenvalue = report.min_gram_eigenvalue.min(min_eig);
        }
    }

    report.pass = report.pass && report.min_gram_eigenvalue >= PSD_EIG_FLOOR;
    Ok(report)
}

fn check_pair(
    spec: &KernelSpec,
    x: &[f64],
    y: &[f64],
    report: &mut DerivativeReport,
) -> Result<()> {
    let d = x.len();
    let gx = spec.grad_x(x, y)?;
    let gy = spec.grad_y(x, y)?;
    let ct = spec.cross_trace(x, y)?;

    let mut xp = x.to_vec();
    let mut yp = y.to_vec();
    let mut ct_fd = 0.0;
    for i in 0..d {
        xp[i] = x[i] + FD_STEP;
        let up = spec.eval(&xp, y)?;
        xp[i] = x[i] - FD_STEP;
        let dn = spec.eval(&xp, y)?;
        xp[i] = x[i];
        track(&mut report.grad_x_max_rel, &mut report.pass, gx[i], (up - dn) / (2.0 * FD_STEP));

        yp[i] = y[i] + FD_STEP;
        let up = spec.eval(x, &yp)?;
        let gxp = spec.grad_x(x, &yp)?;
        yp[i] = y[i] - FD_STEP;
        let dn = spec.eval(x, &yp)?;
        let gxd = spec.grad_x(x, &yp)?;
        yp[i] = y[i];
        track(&mut report.grad_y_max_rel, &mut report.pass, gy[i], (up - dn) / (2.0 * FD_STEP));
        ct_fd += (gxp[i] - gxd[i]) / (2.0 * FD_STEP);
    }
    track(&mut report.cross_trace_max_rel, &mut report.pass, ct, ct_fd);
    Ok(())
}

/// Records the relative error of `analytic` vs `fd` and folds the pass/fail
/// decision (relative 1e−5 with an absolute floor of 1e−8 near zero).
fn track(max_rel: &mut f64, pass: &mut bool, analytic: f64, fd: f64) {
    let scale = analytic.abs().max(fd.abs());
    let err = (analytic - fd).abs();
    *max_rel = max_rel.max(err / scale.max(FD_ABS_FLOOR));
    if err > FD_REL_TOL * scale + FD_ABS_FLOOR {
        *pass = false;
    }
}

/// Smallest eigenvalue of a symmetric 8×8 matrix by cyclic Jacobi sweeps.
/// Plenty for the spot check; not a general-purpose eigensolver.
fn jacobi_min_eigenvalue(a: &mut [[f64; 8]; 8]) -> f64 {
    let n = 8;
    for _sweep in 0..50 {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[p][q] * a[p][q];
            }
        }
        if off < 1e-24 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if a[p][q].abs() < 1e-18 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..n).map(|i| a[i][i]).fold(f64::INFINITY, f64::min)
}

// ===== tests =====
