//! The Stein kernel and exact discrepancies on weighted samples.
//!
//! For a target with score s, drift b, and scalar coefficient a, and a base
//! kernel k, the Stein kernel is
//!
//! ```text
//! h(x, y) = ⟨t(x), t(y)⟩·k(x,y) + a(y)·⟨t(x), ∇ᵧk⟩ + a(x)·⟨t(y), ∇ₓk⟩
//!           + a(x)·a(y)·Σᵢ ∂²k/∂xᵢ∂yᵢ,        t = a·s + ∇a = 2b.
//! ```
//!
//! With a ≡ 1 this is the classic four-term Langevin expansion; with a
//! genuine coefficient it equals, term for term, the Langevin expansion of
//! the reweighted kernel a(x)·k(x,y)·a(y), which is the reduction that makes
//! the diffusion variant a one-line change rather than a separate code path.
//!
//! The squared discrepancy on a weighted sample is the exact double sum
//! Σᵢⱼ wᵢwⱼ h(xᵢ,xⱼ) (a V-statistic: diagonal included). Computation is
//! parallel over rows with each row summed sequentially in index order, so
//! results are bit-identical across thread counts.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::kernels::{KernelSpec, Workspace};
use crate::targets::SteinTarget;
use crate::{Error, Result};

// ===== weighted samples =====

/// A finite measure Σᵢ wᵢ·δ_{xᵢ} with nonnegative weights summing to one.
///
/// Points are stored row-major; construction validates finiteness and the
/// weight simplex (small float drift in the sum is renormalized away, drift
/// beyond 1e−8 is rejected as a caller bug).
#[derive(Debug, Clone)]
pub struct WeightedEmpirical {
    points: Vec<f64>,
    weights: Vec<f64>,
    dim: usize,
}

impl WeightedEmpirical {
    pub fn new(points: Vec<f64>, weights: Vec<f64>, dim: usize) -> Result<Self> {
        let sum = Self::validate(&points, &weights, dim)?;
        if (sum - 1.0).abs() > 1e-8 {
            return Err(Error::BadWeights { sum });
        }
        Ok(Self::renormalize(points, weights, dim, sum))
    }

    /// Uniform weights 1/N.
    pub fn from_points(points: Vec<f64>, dim: usize) -> Result<Self> {
        if dim == 0 || points.len() % dim != 0 {
            return Err(Error::DimensionMismatch {
                expected: dim.max(1),
                got: points.len(),
            });
        }
        let n = points.len() / dim;
        Self::new(points, vec![1.0 / n.max(1) as f64; n], dim)
    }

    /// Accepts raw weights whose sum lies in [0.99, 1.01] and renormalizes;
    /// anything further off is rejected. This is the lenient gate for data
    /// read from files.
    pub fn renormalized(points: Vec<f64>, weights: Vec<f64>, dim: usize) -> Result<Self> {
        let sum = Self::validate(&points, &weights, dim)?;
        if !(0.99..=1.01).contains(&sum) {
            return Err(Error::BadWeights { sum });
        }
        Ok(Self::renormalize(points, weights, dim, sum))
    }

    fn validate(points: &[f64], weights: &[f64], dim: usize) -> Result<f64> {
        if dim == 0 || points.len() % dim != 0 {
            return Err(Error::DimensionMismatch {
                expected: dim.max(1),
                got: points.len(),
            });
        }
        let n = points.len() / dim;
        if n == 0 {
            return Err(Error::EmptySample);
        }
        if n != weights.len() {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: weights.len(),
            });
        }
        if let Some(i) = points.iter().position(|p| !p.is_finite()) {
            return Err(Error::NonFinite {
                what: "sample point coordinate",
                index: i,
            });
        }
        let mut sum = 0.0;
        for (i, &w) in weights.iter().enumerate() {
            if !w.is_finite() || w < 0.0 {
                return Err(Error::NonFinite {
                    what: "weight",
                    index: i,
                });
            }
            sum += w;
        }
        Ok(sum)
    }

    fn renormalize(points: Vec<f64>, mut weights: Vec<f64>, dim: usize, sum: f64) -> Self {
        for w in weights.iter_mut() {
            *w /= sum;
        }
        WeightedEmpirical {
            points,
            weights,
            dim,
        }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

// ===== the Stein kernel =====

/// Which Stein operator drives the discrepancy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OperatorMode {
    /// Score-only operator; the target's diffusion coefficient is ignored.
    #[serde(rename = "langevin")]
    Langevin,
    /// Uses the target's scalar coefficient a(x); equivalent to Langevin with
    /// the kernel reweighted by a.
    #[serde(rename = "diffusion")]
    DiffusionScalar,
}

/// A target, kernel, and operator mode bundled for repeated h evaluation.
#[derive(Debug, Clone, Copy)]
pub struct SteinKernel<'a, T: SteinTarget> {
    target: &'a T,
    kernel: &'a KernelSpec,
    mode: OperatorMode,
}

impl<'a, T: SteinTarget> SteinKernel<'a, T> {
    pub fn new(target: &'a T, kernel: &'a KernelSpec, mode: OperatorMode) -> Result<Self> {
        kernel.validate()?;
        Ok(SteinKernel {
            target,
            kernel,
            mode,
        })
    }

    /// The Stein kernel h(x, y). Symmetric; h(x, x) ≥ 0 for PSD base kernels.
    pub fn eval(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        let d = self.target.dim();
        if x.len() != d || y.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: if x.len() != d { x.len() } else { y.len() },
            });
        }
        let (tx, ax) = self.point_coeffs(x);
        let (ty, ay) = self.point_coeffs(y);
        let mut ws = Workspace::default();
        let (mut gx, mut gy) = (vec![0.0; d], vec![0.0; d]);
        let h = h_pair(
            self.kernel,
            x,
            y,
            &tx,
            &ty,
            ax,
            ay,
            &mut gx,
            &mut gy,
            &mut ws,
        );
        if !h.is_finite() {
            return Err(Error::NonFinite {
                what: "stein kernel value",
                index: 0,
            });
        }
        Ok(h)
    }

    /// KSD² as the exact V-statistic Σᵢⱼ wᵢwⱼ h(xᵢ,xⱼ).
    ///
    /// Returns the raw double sum; roundoff can leave values like −1e−15 on
    /// near-perfect samples, which callers display as 0 via
    /// `max(value, 0)` without losing the raw number.
    pub fn ksd_squared(&self, sample: &WeightedEmpirical) -> Result<f64> {
        let rows = self.rows(sample)?;
        Ok(weighted_sum(sample.weights(), &rows.row_means))
    }

    /// U-statistic variant: diagonal removed, weights renormalized by
    /// 1 − Σwᵢ². Unbiased for iid samples but can go genuinely negative;
    /// the V-statistic is the canonical estimator here.
    pub fn ksd_squared_u(&self, sample: &WeightedEmpirical) -> Result<f64> {
        let rows = self.rows(sample)?;
        let w = sample.weights();
        let v = weighted_sum(w, &rows.row_means);
        let diag: f64 = w.iter().zip(&rows.diag).map(|(wi, hi)| wi * wi * hi).sum();
        let wsq: f64 = w.iter().map(|wi| wi * wi).sum();
        if 1.0 - wsq <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "effective sample size",
                value: 1.0 - wsq,
                reason: "U-statistic undefined when one point carries all weight",
            });
        }
        Ok((v - diag) / (1.0 - wsq))
    }

    /// Bandwidth-selection objective KSD²/√v with
    /// v = Σᵢ wᵢ(mᵢ − m̄)², mᵢ = Σⱼ wⱼ h(xᵢ,xⱼ), m̄ = Σᵢ wᵢmᵢ.
    ///
    /// Degenerate spread (v below 1e−300, e.g. all points identical) returns
    /// a +∞ sentinel with the flag set instead of dividing by zero.
    pub fn power_proxy(&self, sample: &WeightedEmpirical) -> Result<PowerProxy> {
        if sample.len() < 2 {
            return Err(Error::InvalidParameter {
                name: "N",
                value: sample.len() as f64,
                reason: "power proxy needs at least two points",
            });
        }
        let rows = self.rows(sample)?;
        let w = sample.weights();
        let mean = weighted_sum(w, &rows.row_means);
        let var: f64 = w
            .iter()
            .zip(&rows.row_means)
            .map(|(wi, mi)| {
                let d = mi - mean;
                wi * d * d
            })
            .sum();
        if var < 1e-300 {
            return Ok(PowerProxy {
                value: f64::INFINITY,
                degenerate: true,
            });
        }
        Ok(PowerProxy {
            value: mean / var.sqrt(),
            degenerate: false,
        })
    }

    /// t(x) = a·s + ∇a = 2b and a(x) under the configured mode.
    fn point_coeffs(&self, x: &[f64]) -> (Vec<f64>, f64) {
        let mut t = vec![0.0; x.len()];
        match self.mode {
            OperatorMode::Langevin => {
                self.target.score(x, &mut t);
                (t, 1.0)
            }
            OperatorMode::DiffusionScalar => {
                self.target.drift(x, &mut t);
                for ti in t.iter_mut() {
                    *ti *= 2.0;
                }
                (t, self.target.scalar_coeff(x))
            }
        }
    }

    /// Row sums mᵢ = Σⱼ wⱼ h(xᵢ,xⱼ) and the diagonal h(xᵢ,xᵢ).
    ///
    /// Rows run in parallel; within a row, j advances 0..N sequentially, and
    /// the assembled vectors are reduced in index order downstream, so the
    /// result does not depend on the thread count.
    fn rows(&self, sample: &WeightedEmpirical) -> Result<RowStats> {
        if sample.is_empty() {
            return Err(Error::EmptySample);
        }
        if sample.dim() != self.target.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.target.dim(),
                got: sample.dim(),
            });
        }
        let n = sample.len();
        let d = sample.dim();

        // Per-point operator coefficients, once per point rather than once
        // per pair.
        let mut coeff_t = vec![0.0; n * d];
        let mut coeff_a = vec![1.0; n];
        for i in 0..n {
            let (t, a) = self.point_coeffs(sample.point(i));
            coeff_t[i * d..(i + 1) * d].copy_from_slice(&t);
            coeff_a[i] = a;
            if t.iter().any(|v| !v.is_finite()) || !a.is_finite() {
                return Err(Error::NonFinite {
                    what: "operator coefficient",
                    index: i,
                });
            }
        }

        let w = sample.weights();
        let per_row: Vec<Result<(f64, f64)>> = (0..n)
            .into_par_iter()
            .map_init(
                || (Workspace::default(), vec![0.0; d], vec![0.0; d]),
                |(ws, gx, gy), i| {
                    let xi = sample.point(i);
                    let ti = &coeff_t[i * d..(i + 1) * d];
                    let ai = coeff_a[i];
                    let mut m = 0.0;
                    let mut diag = 0.0;
                    for j in 0..n {
                        let h = h_pair(
                            self.kernel,
                            xi,
                            sample.point(j),
                            ti,
                            &coeff_t[j * d..(j + 1) * d],
                            ai,
                            coeff_a[j],
                            gx,
                            gy,
                            ws,
                        );
                        if !h.is_finite() {
                            return Err(Error::NonFinite {
                                what: "stein kernel value",
                                index: i * n + j,
                            });
                        }
                        m += w[j] * h;
                        if j == i {
                            diag = h;
                        }
                    }
                    Ok((m, diag))
                },
            )
            .collect();

        let mut row_means = Vec::with_capacity(n);
        let mut diag = Vec::with_capacity(n);
        for r in per_row {
            let (m, h) = r?;
            row_means.push(m);
            diag.push(h);
        }
        Ok(RowStats { row_means, diag })
    }
}

struct RowStats {
    row_means: Vec<f64>,
    diag: Vec<f64>,
}

/// Result of [`SteinKernel::power_proxy`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerProxy {
    pub value: f64,
    /// True when the row-mean spread collapsed and `value` is the +∞ sentinel.
    pub degenerate: bool,
}

/// The four-term assembly shared by every entry point.
#[allow(clippy::too_many_arguments)]
#[inline]
fn h_pair(
    kernel: &KernelSpec,
    x: &[f64],
    y: &[f64],
    tx: &[f64],
    ty: &[f64],
    ax: f64,
    ay: f64,
    gx: &mut [f64],
    gy: &mut [f64],
    ws: &mut Workspace,
) -> f64 {
    let (k, ct) = kernel.eval_parts(x, y, gx, gy, ws);
    let mut tt = 0.0;
    let mut t_gy = 0.0;
    let mut t_gx = 0.0;
    for i in 0..x.len() {
        tt += tx[i] * ty[i];
        t_gy += tx[i] * gy[i];
        t_gx += ty[i] * gx[i];
    }
    tt * k + ay * t_gy + ax * t_gx + ax * ay * ct
}

fn weighted_sum(w: &[f64], values: &[f64]) -> f64 {
    w.iter().zip(values).map(|(wi, vi)| wi * vi).sum()
}

// ===== convenience entry points =====

/// KSD² of `sample` against `target` (V-statistic). See [`SteinKernel`].
pub fn ksd_squared(
    target: &(impl SteinTarget + Sync),
    kernel: &KernelSpec,
    sample: &WeightedEmpirical,
    mode: OperatorMode,
) -> Result<f64> {
    SteinKernel::new(target, kernel, mode)?.ksd_squared(sample)
}

/// U-statistic variant of [`ksd_squared`].
pub fn ksd_squared_u(
    target: &(impl SteinTarget + Sync),
    kernel: &KernelSpec,
    sample: &WeightedEmpirical,
    mode: OperatorMode,
) -> Result<f64> {
    SteinKernel::new(target, kernel, mode)?.ksd_squared_u(sample)
}

/// Power proxy KSD²/√v. See [`SteinKernel::power_proxy`].
pub fn power_proxy(
    target: &(impl SteinTarget + Sync),
    kernel: &KernelSpec,
    sample: &WeightedEmpirical,
    mode: OperatorMode,
) -> Result<PowerProxy> {
    SteinKernel::new(target, kernel, mode)?.power_proxy(sample)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::WeightFunction;
    use crate::rng::SplitMix64;
    use crate::targets::Target;
    use proptest::prelude::*;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    fn random_sample(rng: &mut SplitMix64, n: usize, d: usize) -> WeightedEmpirical {
        let mut pts = vec![0.0; n * d];
        rng.fill_normal(&mut pts);
        let mut w: Vec<f64> = (0..n).map(|_| rng.uniform()).collect();
        let s: f64 = w.iter().sum();
        for wi in &mut w {
            *wi /= s;
        }
        WeightedEmpirical::new(pts, w, d).unwrap()
    }

    #[test]
    fn h_at_gaussian_mode_is_one() {
        // Score and kernel gradients vanish at x = y = 0; only the cross
        // trace (= 1 for default IMQ in D = 1) survives.
        let target = Target::standard_gaussian(1).unwrap();
        let kernel = KernelSpec::imq_default();
        let sk = SteinKernel::new(&target, &kernel, OperatorMode::Langevin).unwrap();
        assert_close(sk.eval(&[0.0], &[0.0]).unwrap(), 1.0, 1e-10);
    }

    #[test]
    fn h_is_symmetric() {
        let target = Target::student_t(4.0, 3).unwrap();
        let kernel =
            KernelSpec::linear_growth_kernel(KernelSpec::imq_default(), 1.0, 0.5, 1.0).unwrap();
        let mut rng = SplitMix64::new(3);
        let (mut x, mut y) = (vec![0.0; 3], vec![0.0; 3]);
        for mode in [OperatorMode::Langevin, OperatorMode::DiffusionScalar] {
            let sk = SteinKernel::new(&target, &kernel, mode).unwrap();
            for _ in 0..50 {
                rng.fill_normal(&mut x);
                rng.fill_normal(&mut y);
                let hxy = sk.eval(&x, &y).unwrap();
                let hyx = sk.eval(&y, &x).unwrap();
                assert_close(hxy, hyx, 1e-12 * hxy.abs().max(1.0));
            }
        }
    }

    #[test]
    fn single_point_sum_is_h_at_that_point() {
        let target = Target::standard_gaussian(1).unwrap();
        let kernel = KernelSpec::imq_default();
        let sk = SteinKernel::new(&target, &kernel, OperatorMode::Langevin).unwrap();
        let sample = WeightedEmpirical::new(vec![0.0], vec![1.0], 1).unwrap();
        assert_close(sk.ksd_squared(&sample).unwrap(), 1.0, 1e-12);
    }

    #[test]
    fn two_point_closed_form() {
        let target = Target::standard_gaussian(1).unwrap();
        let kernel = KernelSpec::imq_default();
        let sk = SteinKernel::new(&target, &kernel, OperatorMode::Langevin).unwrap();
        let sample = WeightedEmpirical::from_points(vec![-0.7, 1.2], 1).unwrap();
        let h11 = sk.eval(&[-0.7], &[-0.7]).unwrap();
        let h12 = sk.eval(&[-0.7], &[1.2]).unwrap();
        let h22 = sk.eval(&[1.2], &[1.2]).unwrap();
        assert_close(
            sk.ksd_squared(&sample).unwrap(),
            (h11 + 2.0 * h12 + h22) / 4.0,
            1e-14,
        );
    }

    #[test]
    fn matches_naive_double_loop() {
        let target = Target::student_t(4.0, 2).unwrap();
        let kernel =
            KernelSpec::linear_growth_kernel(KernelSpec::imq_default(), 1.0, 0.1, 1.0).unwrap();
        let mut rng = SplitMix64::new(21);
        for mode in [OperatorMode::Langevin, OperatorMode::DiffusionScalar] {
            let sk = SteinKernel::new(&target, &kernel, mode).unwrap();
            let sample = random_sample(&mut rng, 23, 2);
            let fast = sk.ksd_squared(&sample).unwrap();
            let mut naive = 0.0;
            for i in 0..sample.len() {
                for j in 0..sample.len() {
                    naive += sample.weights()[i]
                        * sample.weights()[j]
                        * sk.eval(sample.point(i), sample.point(j)).unwrap();
                }
            }
            assert_close(fast, naive, 1e-12 * naive.abs().max(1.0));
        }
    }

    #[test]
    fn permutation_invariance() {
        let target = Target::standard_gaussian(2).unwrap();
        let kernel = KernelSpec::imq_default();
        let sk = SteinKernel::new(&target, &kernel, OperatorMode::Langevin).unwrap();
        let mut rng = SplitMix64::new(8);
        let sample = random_sample(&mut rng, 17, 2);
        let base = sk.ksd_squared(&sample).unwrap();

        // Reverse the (point, weight) pairing.
        let n = sample.len();
        let mut pts = Vec::with_capacity(n * 2);
        let mut w = Vec::with_capacity(n);
        for i in (0..n).rev() {
            pts.extend_from_slice(sample.point(i));
            w.push(sample.weights()[i]);
        }
        let reversed = WeightedEmpirical::new(pts, w, 2).unwrap();
        assert_close(sk.ksd_squared(&reversed).unwrap(), base, 1e-12 * base.max(1.0));
    }

    // The diffusion-mode value must match the Langevin value computed with
    // the kernel tilted by w(x) = ν·a(x) = (√ν)² + ‖x‖², up to the ν² the
    // weight constructor cannot absorb. Distinct code paths: diffusion mode
    // never builds a Tilted node.
    #[test]
    fn diffusion_equals_tilted_langevin() {
        let nu = 4.0;
        let target = Target::student_t(nu, 2).unwrap();
        let base = KernelSpec::imq_default();
        let tilted = KernelSpec::tilted(
            WeightFunction::new(nu.sqrt(), 1.0).unwrap(),
            base.clone(),
        );
        let diff = SteinKernel::new(&target, &base, OperatorMode::DiffusionScalar).unwrap();
        let lang = SteinKernel::new(&target, &tilted, OperatorMode::Langevin).unwrap();
        let mut rng = SplitMix64::new(31);
        for _ in 0..5 {
            let sample = random_sample(&mut rng, 12, 2);
            let a = diff.ksd_squared(&sample).unwrap();
            let b = lang.ksd_squared(&sample).unwrap() / (nu * nu);
            assert_close(a, b, 1e-10 * a.abs().max(1.0));
        }
    }

    #[test]
    fn u_statistic_removes_diagonal() {
        let target = Target::standard_gaussian(1).unwrap();
        let kernel = KernelSpec::imq_default();
        let sk = SteinKernel::new(&target, &kernel, OperatorMode::Langevin).unwrap();
        let mut rng = SplitMix64::new(13);
        let sample = random_sample(&mut rng, 9, 1);
        let w = sample.weights();
        let mut off_diag = 0.0;
        let mut wsq = 0.0;
        for i in 0..9 {
            wsq += w[i] * w[i];
            for j in 0..9 {
                if i != j {
                    off_diag += w[i] * w[j] * sk.eval(sample.point(i), sample.point(j)).unwrap();
                }
            }
        }
        let expected = off_diag / (1.0 - wsq);
        assert_close(sk.ksd_squared_u(&sample).unwrap(), expected, 1e-12);
    }

    #[test]
    fn u_statistic_rejects_point_mass() {
        let target = Target::standard_gaussian(1).unwrap();
        let kernel = KernelSpec::imq_default();
        let sk = SteinKernel::new(&target, &kernel, OperatorMode::Langevin).unwrap();
        let sample = WeightedEmpirical::new(vec![0.3], vec![1.0], 1).unwrap();
        assert!(sk.ksd_squared_u(&sample).is_err());
    }

    #[test]
    fn power_proxy_two_point_enumeration() {
        let target = Target::standard_gaussian(1).unwrap();
        let kernel = KernelSpec::imq_default();
        let sk = SteinKernel::new(&target, &kernel, OperatorMode::Langevin).unwrap();
        let (w1, w2) = (0.3, 0.7);
        let (x1, x2) = (-0.4, 1.1);
        let sample = WeightedEmpirical::new(vec![x1, x2], vec![w1, w2], 1).unwrap();

        let h11 = sk.eval(&[x1], &[x1]).unwrap();
        let h12 = sk.eval(&[x1], &[x2]).unwrap();
        let h22 = sk.eval(&[x2], &[x2]).unwrap();
        let m1 = w1 * h11 + w2 * h12;
        let m2 = w1 * h12 + w2 * h22;
        let mean = w1 * m1 + w2 * m2;
        let var = w1 * (m1 - mean).powi(2) + w2 * (m2 - mean).powi(2);

        let proxy = sk.power_proxy(&sample).unwrap();
        assert!(!proxy.degenerate);
        assert_close(proxy.value, mean / var.sqrt(), 1e-12);
    }

    #[test]
    fn power_proxy_degenerate_on_identical_points() {
        let target = Target::standard_gaussian(1).unwrap();
        let kernel = KernelSpec::imq_default();
        let sk = SteinKernel::new(&target, &kernel, OperatorMode::Langevin).unwrap();
        let sample = WeightedEmpirical::from_points(vec![0.5, 0.5, 0.5], 1).unwrap();
        let proxy = sk.power_proxy(&sample).unwrap();
        assert!(proxy.degenerate);
        assert!(proxy.value.is_infinite());
    }

    // KSD² is linear in the kernel, so doubling the kernel (k + k) scales
    // both KSD² and √v by the same factor and the proxy is unchanged. (The
    // proxy is scale-invariant, not √c-homogeneous.)
    #[test]
    fn power_proxy_scale_invariance() {
        let target = Target::standard_gaussian(2).unwrap();
        let kernel = KernelSpec::imq_default();
        let doubled = KernelSpec::sum(kernel.clone(), kernel.clone());
        let mut rng = SplitMix64::new(4);
        let sample = random_sample(&mut rng, 15, 2);
        let p1 = power_proxy(&target, &kernel, &sample, OperatorMode::Langevin).unwrap();
        let p2 = power_proxy(&target, &doubled, &sample, OperatorMode::Langevin).unwrap();
        assert_close(p1.value, p2.value, 1e-12 * p1.value.abs());
    }

    #[test]
    fn power_proxy_needs_two_points() {
        let target = Target::standard_gaussian(1).unwrap();
        let kernel = KernelSpec::imq_default();
        let sample = WeightedEmpirical::new(vec![0.0], vec![1.0], 1).unwrap();
        assert!(power_proxy(&target, &kernel, &sample, OperatorMode::Langevin).is_err());
    }

    #[test]
    fn results_identical_across_thread_counts() {
        let target = Target::student_t(4.0, 3).unwrap();
        let kernel =
            KernelSpec::linear_growth_kernel(KernelSpec::imq_default(), 1.0, 0.1, 1.0).unwrap();
        let mut rng = SplitMix64::new(77);
        let sample = random_sample(&mut rng, 40, 3);
        let run = |threads: usize| {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap();
            pool.install(|| {
                ksd_squared(&target, &kernel, &sample, OperatorMode::DiffusionScalar).unwrap()
            })
        };
        assert_eq!(run(1).to_bits(), run(4).to_bits());
    }

    #[test]
    fn weighted_empirical_validation() {
        assert!(WeightedEmpirical::new(vec![], vec![], 1).is_err());
        assert!(WeightedEmpirical::new(vec![0.0], vec![0.5], 1).is_err());
        assert!(WeightedEmpirical::new(vec![0.0, 1.0], vec![0.5, -0.5], 1).is_err());
        assert!(WeightedEmpirical::new(vec![f64::NAN], vec![1.0], 1).is_err());
        assert!(WeightedEmpirical::new(vec![0.0, 1.0, 2.0], vec![1.0], 2).is_err());

        // The lenient gate accepts 2% drift only through `renormalized`.
        assert!(WeightedEmpirical::new(vec![0.0, 1.0], vec![0.5, 0.505], 1).is_err());
        let s = WeightedEmpirical::renormalized(vec![0.0, 1.0], vec![0.5, 0.505], 1).unwrap();
        assert_close(s.weights().iter().sum::<f64>(), 1.0, 1e-15);
        assert!(WeightedEmpirical::renormalized(vec![0.0, 1.0], vec![0.5, 0.6], 1).is_err());
    }

    proptest! {
        // PSD Stein kernel: the V-statistic is a quadratic form in the
        // weights, so it stays above the roundoff floor.
        #[test]
        fn ksd_squared_nonnegative(seed in 0u64..500) {
            let target = Target::standard_gaussian(2).unwrap();
            let kernel = KernelSpec::imq_default();
            let mut rng = SplitMix64::new(seed);
            let sample = random_sample(&mut rng, 12, 2);
            let v = ksd_squared(&target, &kernel, &sample, OperatorMode::Langevin).unwrap();
            prop_assert!(v >= -1e-10);
        }
    }
}
