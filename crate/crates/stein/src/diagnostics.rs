//! Coercivity diagnostics, the integrability-rate bound, and a quadrature
//! check that the Stein operator really produces zero-mean functions.
//!
//! The diagnostics evaluate T g(x) = 2⟨b(x), g(x)⟩ + a(x)·div g(x) for two
//! closed-form witness fields g. Their growth as ‖x‖ → ∞ is what certifies
//! that a tilted kernel controls moments of the given order; the CLI surfaces
//! them so a user can see whether a proposed (target, weight) pair is in the
//! admissible regime before trusting a discrepancy value.

use crate::kernels::WeightFunction;
use crate::targets::{SteinTarget, Target};
use crate::{Error, Result};

/// T g(x) for the linear witness g(x) = −w(x)·x.
///
/// Closed form, with p and v the weight's exponent and offset:
///
/// ```text
/// w(x)·(−2⟨b(x), x⟩ − D·a(x) − 2p·a(x)·‖x‖²/(v² + ‖x‖²))
/// ```
///
/// For a target whose drift is inward this grows like ‖x‖^{2(p+1)}; the
/// large-‖x‖ ratio to that power is the moment-control rate.
pub fn coercive_linear_diag(
    target: &impl SteinTarget,
    weight: &WeightFunction,
    x: &[f64],
) -> Result<f64> {
    let d = target.dim();
    if x.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: x.len(),
        });
    }
    let mut b = vec![0.0; d];
    target.drift(x, &mut b);
    let a = target.scalar_coeff(x);
    let sq_norm: f64 = x.iter().map(|v| v * v).sum();
    let b_dot_x: f64 = b.iter().zip(x).map(|(bi, xi)| bi * xi).sum();
    let tilt_term = 2.0 * weight.p * a * sq_norm / (weight.v * weight.v + sq_norm);
    Ok(weight.eval(x) * (-2.0 * b_dot_x - d as f64 * a - tilt_term))
}

/// T g(x) for the inverse-multiquadric witness
/// g(x) = −2α·x·(w_off² + ‖x‖²)^{s−1}.
///
/// Closed form:
///
/// ```text
/// −2α·(w_off² + ‖x‖²)^{s−1}·(2⟨b,x⟩ + a·(D − 2(1−s)·‖x‖²/(w_off² + ‖x‖²)))
/// ```
pub fn coercive_imq_diag(
    target: &impl SteinTarget,
    alpha: f64,
    w_off: f64,
    s: f64,
    x: &[f64],
) -> Result<f64> {
    if !alpha.is_finite() {
        return Err(Error::InvalidParameter {
            name: "alpha",
            value: alpha,
            reason: "must be finite",
        });
    }
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::InvalidParameter {
            name: "s",
            value: s,
            reason: "must lie strictly inside (0, 1)",
        });
    }
    if !(w_off > 0.0 && w_off.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "w_off",
            value: w_off,
            reason: "must be positive and finite",
        });
    }
    let d = target.dim();
    if x.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: x.len(),
        });
    }
    let mut b = vec![0.0; d];
    target.drift(x, &mut b);
    let a = target.scalar_coeff(x);
    let sq_norm: f64 = x.iter().map(|v| v * v).sum();
    let b_dot_x: f64 = b.iter().zip(x).map(|(bi, xi)| bi * xi).sum();
    let denom = w_off * w_off + sq_norm;
    let scale = denom.powf(s - 1.0);
    let bracket = 2.0 * b_dot_x + a * (d as f64 - 2.0 * (1.0 - s) * sq_norm / denom);
    Ok(-2.0 * alpha * scale * bracket)
}

/// Upper bound on the q-th integrability rate given a discrepancy level:
///
/// ```text
/// { 2·(1 + q/θ)·(S − ν)/(η·ε) }^{max(1/θ, q/θ)}
/// ```
///
/// `s_cap` is the available moment budget S and `nu` its floor; `eta` the
/// coercivity rate, `eps` the discrepancy level, `q` the moment order being
/// bounded, and `theta` the tilt exponent margin.
pub fn integrability_rate_bound(
    s_cap: f64,
    nu: f64,
    eta: f64,
    eps: f64,
    q: f64,
    theta: f64,
) -> Result<f64> {
    for (name, value, ok) in [
        ("S", s_cap, s_cap.is_finite() && s_cap >= nu),
        ("nu", nu, nu.is_finite()),
        ("eta", eta, eta > 0.0 && eta.is_finite()),
        ("eps", eps, eps > 0.0 && eps.is_finite()),
        ("q", q, q >= 0.0 && q.is_finite()),
        ("theta", theta, theta > 0.0 && theta.is_finite()),
    ] {
        if !ok {
            return Err(Error::InvalidParameter {
                name,
                value,
                reason: "integrability bound needs S ≥ ν, η > 0, ε > 0, q ≥ 0, θ > 0",
            });
        }
    }
    let base = 2.0 * (1.0 + q / theta) * (s_cap - nu) / (eta * eps);
    let exponent = (1.0 / theta).max(q / theta);
    Ok(base.powf(exponent))
}

/// A uniform 1D quadrature grid. `points` must be odd and at least 5 so the
/// grid can be halved for the refinement check.
#[derive(Debug, Clone, Copy)]
pub struct GridSpec {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

impl GridSpec {
    pub fn new(lo: f64, hi: f64, points: usize) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidParameter {
                name: "grid range",
                value: hi - lo,
                reason: "bounds must be finite with lo < hi",
            });
        }
        if points < 5 || points % 2 == 0 {
            return Err(Error::InvalidParameter {
                name: "grid points",
                value: points as f64,
                reason: "need an odd count of at least 5",
            });
        }
        Ok(GridSpec { lo, hi, points })
    }
}

/// Outcome of [`zero_mean_check`]: the full-grid estimate of E_P[T g] and
/// how much it moved when the grid was halved.
#[derive(Debug, Clone, Copy)]
pub struct ZeroMeanReport {
    pub value: f64,
    pub refinement_gap: f64,
}

/// Quadrature estimate of E_P[T g] for a 1D target, where
/// T g = 2·b·g + a·g′ and the expectation runs over the unnormalized density.
///
/// The integral is evaluated by the trapezoid rule on the full grid and again
/// on the half grid (every other node); a gap above `gap_tol` means the grid
/// does not resolve the integrand and the check errors rather than report a
/// number that merely looks converged.
pub fn zero_mean_check(
    target: &Target,
    g: impl Fn(f64) -> f64,
    g_prime: impl Fn(f64) -> f64,
    grid: GridSpec,
    gap_tol: f64,
) -> Result<ZeroMeanReport> {
    if target.dim() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: target.dim(),
        });
    }
    let estimate = |points: usize| -> Result<f64> {
        let step = (grid.hi - grid.lo) / (points - 1) as f64;
        let mut num = 0.0;
        let mut den = 0.0;
        for i in 0..points {
            let x = grid.lo + step * i as f64;
            let (b, a) = target.diffusion(&[x])?;
            let density = target.log_density_unnormalized(&[x])?.exp();
            let t_g = 2.0 * b[0] * g(x) + a * g_prime(x);
            let edge = if i == 0 || i == points - 1 { 0.5 } else { 1.0 };
            num += edge * t_g * density;
            den += edge * density;
        }
        if den <= 0.0 || !num.is_finite() || !den.is_finite() {
            return Err(Error::NonFinite {
                what: "quadrature sum",
                index: 0,
            });
        }
        Ok(num / den)
    };
    let fine = estimate(grid.points)?;
    let coarse = estimate(grid.points / 2 + 1)?;
    let gap = (fine - coarse).abs();
    if gap > gap_tol {
        return Err(Error::QuadratureUnsettled { gap });
    }
    Ok(ZeroMeanReport {
        value: fine,
        refinement_gap: gap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    fn unit_weight() -> WeightFunction {
        WeightFunction::new(1.0, 0.0).unwrap()
    }

    #[test]
    fn linear_diag_gaussian_origin() {
        for d in [1, 3, 7] {
            let target = Target::standard_gaussian(d).unwrap();
            let v = coercive_linear_diag(&target, &unit_weight(), &vec![0.0; d]).unwrap();
            assert_close(v, -(d as f64), 1e-12);
        }
    }

    #[test]
    fn linear_diag_student_t_closed_form() {
        // ν=4, D=5, w ≡ 1: drift/coefficient algebra collapses to 0.5‖x‖² − 5.
        let target = Target::student_t(4.0, 5).unwrap();
        let mut rng = SplitMix64::new(5);
        let mut x = vec![0.0; 5];
        for scale in [0.1, 1.0, 10.0, 1e3] {
            rng.fill_normal(&mut x);
            for xi in x.iter_mut() {
                *xi *= scale;
            }
            let sq: f64 = x.iter().map(|v| v * v).sum();
            let expected = 0.5 * sq - 5.0;
            let got = coercive_linear_diag(&target, &unit_weight(), &x).unwrap();
            assert_close(got, expected, 1e-10 * expected.abs().max(1.0));
        }
    }

    #[test]
    fn linear_diag_gaussian_growth() {
        // Standard Gaussian, w ≡ 1: exactly ‖x‖² − D.
        let target = Target::standard_gaussian(2).unwrap();
        let x = [30.0, -40.0];
        let v = coercive_linear_diag(&target, &unit_weight(), &x).unwrap();
        assert_close(v, 2500.0 - 2.0, 1e-9);
    }

    #[test]
    fn linear_diag_student_t_plateau() {
        // With tilt exponent p, the ratio to ‖x‖^{2(p+1)} settles at
        // (ν − 2 − 2p)/ν far from the origin.
        let (nu, p) = (4.0f64, 0.2f64);
        let target = Target::student_t(nu, 2).unwrap();
        let weight = WeightFunction::linear_growth(1.0, 2.0 * p, 1.0).unwrap();
        let x = [1e4 / 2f64.sqrt(), 1e4 / 2f64.sqrt()];
        let norm = 1e4f64;
        let ratio =
            coercive_linear_diag(&target, &weight, &x).unwrap() / norm.powf(2.0 * (p + 1.0));
        let plateau = (nu - 2.0 - 2.0 * p) / nu;
        assert_close(ratio, plateau, 0.01 * plateau);
    }

    // Independent oracle: assemble T g = 2⟨b,g⟩ + a·div g with the witness
    // divergence taken by central differences.
    #[test]
    fn linear_diag_matches_finite_differences() {
        let target = Target::student_t(6.0, 3).unwrap();
        let weight = WeightFunction::new(1.5, 0.3).unwrap();
        let g = |x: &[f64], out: &mut [f64]| {
            let w = weight.eval(x);
            for (o, xi) in out.iter_mut().zip(x) {
                *o = -w * xi;
            }
        };
        let mut rng = SplitMix64::new(11);
        let mut x = vec![0.0; 3];
        for _ in 0..20 {
            rng.fill_normal(&mut x);
            let reference = witness_operator_fd(&target, g, &x);
            let got = coercive_linear_diag(&target, &weight, &x).unwrap();
            assert_close(got, reference, 1e-6 * reference.abs().max(1.0));
        }
    }

    #[test]
    fn imq_diag_origin_values() {
        // b(0) = 0 leaves −2α·D·a(0)/w_off^{2(1−s)}.
        let target = Target::standard_gaussian(1).unwrap();
        let v = coercive_imq_diag(&target, 0.5, 1.0, 0.5, &[0.0]).unwrap();
        assert_close(v, -1.0, 1e-12);

        let target3 = Target::student_t(5.0, 3).unwrap();
        let (alpha, w_off, s) = (0.7, 2.0, 0.3);
        let v3 = coercive_imq_diag(&target3, alpha, w_off, s, &[0.0; 3]).unwrap();
        let expected = -2.0 * alpha * 3.0 / w_off.powf(2.0 * (1.0 - s));
        assert_close(v3, expected, 1e-12 * expected.abs());
    }

    #[test]
    fn imq_diag_matches_finite_differences() {
        let target = Target::student_t(5.0, 3).unwrap();
        let (alpha, w_off, s) = (0.7, 2.0, 0.3);
        let g = move |x: &[f64], out: &mut [f64]| {
            let sq: f64 = x.iter().map(|v| v * v).sum();
            let scale = -2.0 * alpha * (w_off * w_off + sq).powf(s - 1.0);
            for (o, xi) in out.iter_mut().zip(x) {
                *o = scale * xi;
            }
        };
        let mut rng = SplitMix64::new(17);
        let mut x = vec![0.0; 3];
        for _ in 0..20 {
            rng.fill_normal(&mut x);
            let reference = witness_operator_fd(&target, g, &x);
            let got = coercive_imq_diag(&target, alpha, w_off, s, &x).unwrap();
            assert_close(got, reference, 1e-6 * reference.abs().max(1.0));
        }
    }

    #[test]
    fn imq_diag_rejects_out_of_range() {
        let target = Target::standard_gaussian(1).unwrap();
        assert!(coercive_imq_diag(&target, 0.5, 1.0, 0.0, &[0.0]).is_err());
        assert!(coercive_imq_diag(&target, 0.5, 1.0, 1.0, &[0.0]).is_err());
        assert!(coercive_imq_diag(&target, 0.5, 0.0, 0.5, &[0.0]).is_err());
        assert!(coercive_imq_diag(&target, f64::NAN, 1.0, 0.5, &[0.0]).is_err());
        assert!(coercive_imq_diag(&target, 0.5, 1.0, 0.5, &[0.0, 0.0]).is_err());
    }

    /// 2⟨b, g⟩ + a·div g with div g by central differences, step 1e−6.
    fn witness_operator_fd(
        target: &Target,
        g: impl Fn(&[f64], &mut [f64]),
        x: &[f64],
    ) -> f64 {
        let d = x.len();
        let (b, a) = target.diffusion(x).unwrap();
        let mut gx = vec![0.0; d];
        g(x, &mut gx);
        let dot: f64 = b.iter().zip(&gx).map(|(bi, gi)| bi * gi).sum();
        let mut div = 0.0;
        let step = 1e-6;
        let mut shifted = x.to_vec();
        let mut buf = vec![0.0; d];
        for i in 0..d {
            shifted[i] = x[i] + step;
            g(&shifted, &mut buf);
            let plus = buf[i];
            shifted[i] = x[i] - step;
            g(&shifted, &mut buf);
            div += (plus - buf[i]) / (2.0 * step);
            shifted[i] = x[i];
        }
        2.0 * dot + a * div
    }

    #[test]
    fn rate_bound_examples() {
        assert_close(
            integrability_rate_bound(2.0, 1.0, 1.0, 1.0, 1.0, 1.0).unwrap(),
            4.0,
            1e-14,
        );
        assert_close(
            integrability_rate_bound(2.0, 1.0, 1.0, 2.0, 0.0, 1.0).unwrap(),
            1.0,
            1e-14,
        );
        assert_close(
            integrability_rate_bound(1.0, 1.0, 1.0, 1.0, 1.0, 1.0).unwrap(),
            0.0,
            0.0,
        );
    }

    #[test]
    fn rate_bound_rejects_bad_inputs() {
        assert!(integrability_rate_bound(0.5, 1.0, 1.0, 1.0, 1.0, 1.0).is_err());
        assert!(integrability_rate_bound(2.0, 1.0, 0.0, 1.0, 1.0, 1.0).is_err());
        assert!(integrability_rate_bound(2.0, 1.0, 1.0, 0.0, 1.0, 1.0).is_err());
        assert!(integrability_rate_bound(2.0, 1.0, 1.0, 1.0, -1.0, 1.0).is_err());
        assert!(integrability_rate_bound(2.0, 1.0, 1.0, 1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn rate_bound_grows_with_moment_budget() {
        let lo = integrability_rate_bound(2.0, 1.0, 1.0, 1.0, 2.0, 0.5).unwrap();
        let hi = integrability_rate_bound(4.0, 1.0, 1.0, 1.0, 2.0, 0.5).unwrap();
        assert!(hi > lo);
    }

    #[test]
    fn zero_mean_gaussian_fixture() {
        let target = Target::standard_gaussian(1).unwrap();
        let grid = GridSpec::new(-10.0, 10.0, 2001).unwrap();
        let report = zero_mean_check(
            &target,
            |x| x * (-x * x).exp(),
            |x| (1.0 - 2.0 * x * x) * (-x * x).exp(),
            grid,
            1e-8,
        )
        .unwrap();
        assert!(report.value.abs() < 1e-8, "value {}", report.value);
    }

    #[test]
    fn zero_mean_zero_function() {
        let target = Target::standard_gaussian(1).unwrap();
        let grid = GridSpec::new(-10.0, 10.0, 201).unwrap();
        let report = zero_mean_check(&target, |_| 0.0, |_| 0.0, grid, 1e-12).unwrap();
        assert_eq!(report.value, 0.0);
    }

    #[test]
    fn zero_mean_student_t_fixture() {
        // Heavy tails need the wide grid; the integrand decays like x⁻⁶ so
        // the [−200, 200] truncation error sits near 1e−9.
        let target = Target::student_t(4.0, 1).unwrap();
        let grid = GridSpec::new(-200.0, 200.0, 8001).unwrap();
        let report = zero_mean_check(
            &target,
            |x| x / (1.0 + x * x),
            |x| (1.0 - x * x) / (1.0 + x * x).powi(2),
            grid,
            1e-6,
        )
        .unwrap();
        assert!(report.value.abs() < 1e-6, "value {}", report.value);
    }

    #[test]
    fn zero_mean_detects_coarse_grid() {
        let target = Target::standard_gaussian(1).unwrap();
        let grid = GridSpec::new(-10.0, 10.0, 5).unwrap();
        let err = zero_mean_check(
            &target,
            |x| x * (-x * x).exp(),
            |x| (1.0 - 2.0 * x * x) * (-x * x).exp(),
            grid,
            1e-8,
        );
        assert!(matches!(err, Err(crate::Error::QuadratureUnsettled { .. })));
    }

    #[test]
    fn zero_mean_requires_dimension_one() {
        let target = Target::standard_gaussian(2).unwrap();
        let grid = GridSpec::new(-10.0, 10.0, 201).unwrap();
        assert!(zero_mean_check(&target, |_| 0.0, |_| 0.0, grid, 1e-8).is_err());
    }

    #[test]
    fn grid_spec_validation() {
        assert!(GridSpec::new(1.0, -1.0, 101).is_err());
        assert!(GridSpec::new(-1.0, 1.0, 100).is_err());
        assert!(GridSpec::new(-1.0, 1.0, 3).is_err());
        assert!(GridSpec::new(f64::NEG_INFINITY, 1.0, 101).is_err());
    }
}
