//! Seeded generators for the synthetic benchmark protocols, the bandwidth
//! grid search, and the experiment runner that turns a JSON config into
//! canonical CSV rows.
//!
//! Every sampler is a pure function of its parameters and a 64-bit seed.
//! The runner derives one seed per (kernel, sequence index, repetition) cell
//! with [`derive_seed`], so a cell's rows do not depend on which other cells
//! run, in what order, or on how many threads.
//!
//! The shifted-sequence samplers are stratified: N points from the base
//! component and N points from the contaminating component, with the mixture
//! proportions carried by the point weights rather than by random component
//! counts. A sequence index n means contamination weight 1/(n+1).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::Path;

use crate::discrepancy::{OperatorMode, SteinKernel, WeightedEmpirical};
use crate::kernels::KernelSpec;
use crate::rng::{derive_seed, SplitMix64};
use crate::targets::{SteinTarget, Target};
use crate::{Error, Result};

// ===== samplers =====

/// Mean-shift sequence: N weighted points from P = N(−1̄, Id) plus N from
/// N((n+1)·1̄, Id), where 1̄ = 𝟏/√D. Weights are (1 − 1/(n+1))/N on the
/// first stratum and (1/(n+1))/N on the second, so the far component keeps
/// total mass 1/(n+1) while its mean escapes linearly in n.
pub fn mean_shift_sample(n: u64, points: usize, dim: usize, seed: u64) -> Result<WeightedEmpirical> {
    check_stratified(n, points, dim)?;
    let unit = unit_diagonal(dim);
    let near_mean: Vec<f64> = unit.iter().map(|u| -u).collect();
    let far_mean: Vec<f64> = unit.iter().map(|u| (n + 1) as f64 * u).collect();
    stratified_gaussian(n, points, &near_mean, 1.0, &far_mean, 1.0, seed)
}

/// Variance-shift sequence: P = N(0, Id) contaminated by N(0, 2(n+1)·Id).
pub fn var_shift_sample(n: u64, points: usize, dim: usize, seed: u64) -> Result<WeightedEmpirical> {
    check_stratified(n, points, dim)?;
    let zero = vec![0.0; dim];
    let far_sd = (2.0 * (n + 1) as f64).sqrt();
    stratified_gaussian(n, points, &zero, 1.0, &zero, far_sd, seed)
}

/// Heavy-tailed mean-shift: the base stratum is multivariate t(ν) (one χ²
/// scale per point), the contaminating stratum Gaussian at (n+1)·1̄ as in
/// [`mean_shift_sample`].
pub fn t_mean_shift_sample(
    n: u64,
    points: usize,
    dim: usize,
    nu: f64,
    seed: u64,
) -> Result<WeightedEmpirical> {
    check_stratified(n, points, dim)?;
    if !(nu > 2.0) {
        return Err(Error::InvalidParameter {
            name: "nu",
            value: nu,
            reason: "t stratum needs nu > 2 for finite variance",
        });
    }
    let mut rng = SplitMix64::new(seed);
    let mut pts = vec![0.0; 2 * points * dim];
    for row in 0..points {
        rng.fill_student_t(nu, &mut pts[row * dim..(row + 1) * dim])?;
    }
    let unit = unit_diagonal(dim);
    for row in points..2 * points {
        let slot = &mut pts[row * dim..(row + 1) * dim];
        rng.fill_normal(slot);
        for (s, u) in slot.iter_mut().zip(&unit) {
            *s += (n + 1) as f64 * u;
        }
    }
    WeightedEmpirical::new(pts, stratified_weights(n, points), dim)
}

/// N iid draws from the two-component Gaussian mixture
/// π·N(μ₁, Id) + (1−π)·N(μ₂, Id), component chosen per draw, equal weights.
/// π = 0 yields component 2 only.
pub fn mixture_sweep_sample(
    pi: f64,
    points: usize,
    mu1: &[f64],
    mu2: &[f64],
    seed: u64,
) -> Result<WeightedEmpirical> {
    if !(0.0..=0.5).contains(&pi) {
        return Err(Error::InvalidParameter {
            name: "pi",
            value: pi,
            reason: "mixture sweep covers pi in [0, 1/2]",
        });
    }
    let dim = mu1.len();
    if dim == 0 || mu2.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim.max(1),
            got: mu2.len(),
        });
    }
    if points == 0 {
        return Err(Error::EmptySample);
    }
    let mut rng = SplitMix64::new(seed);
    let mut pts = vec![0.0; points * dim];
    for row in 0..points {
        let mean = if rng.uniform() <= pi { mu1 } else { mu2 };
        let slot = &mut pts[row * dim..(row + 1) * dim];
        rng.fill_normal(slot);
        for (s, m) in slot.iter_mut().zip(mean) {
            *s += m;
        }
    }
    WeightedEmpirical::from_points(pts, dim)
}

/// N iid draws from the target itself, equal weights. The ground-truth
/// sequence every discrepancy should vanish on.
pub fn on_target_sample(target: &Target, points: usize, seed: u64) -> Result<WeightedEmpirical> {
    if points == 0 {
        return Err(Error::EmptySample);
    }
    let dim = target.dim();
    let mut rng = SplitMix64::new(seed);
    let mut pts = vec![0.0; points * dim];
    match target {
        Target::Gaussian { mean, variance } => {
            let sd = variance.sqrt();
            for row in 0..points {
                let slot = &mut pts[row * dim..(row + 1) * dim];
                rng.fill_normal(slot);
                for (s, m) in slot.iter_mut().zip(mean) {
                    *s = m + sd * *s;
                }
            }
        }
        Target::Mixture2 { mean1, mean2, weight } => {
            for row in 0..points {
                let mean = if rng.uniform() <= *weight { mean1 } else { mean2 };
                let slot = &mut pts[row * dim..(row + 1) * dim];
                rng.fill_normal(slot);
                for (s, m) in slot.iter_mut().zip(mean) {
                    *s += m;
                }
            }
        }
        Target::StudentT { dof, .. } => {
            for row in 0..points {
                rng.fill_student_t(*dof, &mut pts[row * dim..(row + 1) * dim])?;
            }
        }
    }
    WeightedEmpirical::from_points(pts, dim)
}

fn check_stratified(n: u64, points: usize, dim: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidParameter {
            name: "n",
            value: 0.0,
            reason: "sequence index starts at 1",
        });
    }
    if points == 0 {
        return Err(Error::EmptySample);
    }
    if dim == 0 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: 0,
        });
    }
    Ok(())
}

/// 𝟏/√D, the unit vector along the diagonal.
fn unit_diagonal(dim: usize) -> Vec<f64> {
    vec![1.0 / (dim as f64).sqrt(); dim]
}

fn stratified_weights(n: u64, points: usize) -> Vec<f64> {
    let contamination = 1.0 / (n + 1) as f64;
    let w_near = (1.0 - contamination) / points as f64;
    let w_far = contamination / points as f64;
    let mut w = vec![w_near; 2 * points];
    w[points..].fill(w_far);
    w
}

fn stratified_gaussian(
    n: u64,
    points: usize,
    near_mean: &[f64],
    near_sd: f64,
    far_mean: &[f64],
    far_sd: f64,
    seed: u64,
) -> Result<WeightedEmpirical> {
    let dim = near_mean.len();
    let mut rng = SplitMix64::new(seed);
    let mut pts = vec![0.0; 2 * points * dim];
    for row in 0..2 * points {
        let (mean, sd) = if row < points {
            (near_mean, near_sd)
        } else {
            (far_mean, far_sd)
        };
        let slot = &mut pts[row * dim..(row + 1) * dim];
        rng.fill_normal(slot);
        for (s, m) in slot.iter_mut().zip(mean) {
            *s = m + sd * *s;
        }
    }
    WeightedEmpirical::new(pts, stratified_weights(n, points), dim)
}

// ===== bandwidth search =====

/// Log₁₀-regular bandwidth grid. The default covers [10⁻³, 10³] with 20
/// points.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct BandwidthGrid {
    pub lo_log10: f64,
    pub hi_log10: f64,
    pub points: usize,
}

impl Default for BandwidthGrid {
    fn default() -> Self {
        BandwidthGrid {
            lo_log10: -3.0,
            hi_log10: 3.0,
            points: 20,
        }
    }
}

impl BandwidthGrid {
    pub fn values(&self) -> Result<Vec<f64>> {
        if self.points == 0 || !(self.lo_log10 <= self.hi_log10) {
            return Err(Error::InvalidParameter {
                name: "bandwidth grid",
                value: self.points as f64,
                reason: "need at least one point and lo <= hi",
            });
        }
        if self.points == 1 {
            return Ok(vec![10f64.powf(self.lo_log10)]);
        }
        let step = (self.hi_log10 - self.lo_log10) / (self.points - 1) as f64;
        Ok((0..self.points)
            .map(|i| 10f64.powf(self.lo_log10 + step * i as f64))
            .collect())
    }
}

/// Maximizes the power proxy over `grid`, substituting each bandwidth into
/// every radial node of `template`. Ties break toward the smaller bandwidth;
/// degenerate or non-finite objectives are skipped, and a grid with no usable
/// objective at all is an error.
pub fn bandwidth_search(
    target: &Target,
    template: &KernelSpec,
    sample: &WeightedEmpirical,
    mode: OperatorMode,
    grid: &[f64],
) -> Result<(f64, f64)> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter {
            name: "bandwidth grid",
            value: 0.0,
            reason: "grid must be nonempty",
        });
    }
    let mut best: Option<(f64, f64)> = None;
    for &sigma in grid {
        let kernel = template.with_bandwidth(sigma);
        let proxy = SteinKernel::new(target, &kernel, mode)?.power_proxy(sample)?;
        if proxy.degenerate || !proxy.value.is_finite() {
            continue;
        }
        let better = match best {
            None => true,
            Some((bw, val)) => proxy.value > val || (proxy.value == val && sigma < bw),
        };
        if better {
            best = Some((sigma, proxy.value));
        }
    }
    best.ok_or(Error::DegenerateSearch)
}

// ===== experiment configs =====

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    MeanShift,
    VarShift,
    StudentTMeanShift,
    MixtureSweep,
    OnTarget,
}

impl ExperimentKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ExperimentKind::MeanShift => "mean_shift",
            ExperimentKind::VarShift => "var_shift",
            ExperimentKind::StudentTMeanShift => "student_t_mean_shift",
            ExperimentKind::MixtureSweep => "mixture_sweep",
            ExperimentKind::OnTarget => "on_target",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NamedKernel {
    pub name: String,
    pub spec: KernelSpec,
}

/// One experiment: a target family, a list of named kernels, a sequence of
/// contamination indices (or mixture proportions), and a repetition count.
///
/// `seq_indices` holds the n values for the shifted sequences (positive
/// integers), the π grid for `mixture_sweep` (in [0, 1/2]), and is a single
/// ignored placeholder for `on_target`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(rename = "D")]
    pub dim: usize,
    #[serde(rename = "N")]
    pub points: usize,
    pub seq_indices: Vec<f64>,
    pub kernels: Vec<NamedKernel>,
    pub seed: u64,
    pub repetitions: usize,
    /// Degrees of freedom for the t experiments; also switches `on_target`
    /// to the t target when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu: Option<f64>,
    /// Mixture component means; default −30·𝟏 and −10·𝟏.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu1: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu2: Option<Vec<f64>>,
    /// Operator mode for every cell; defaults to Langevin.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<OperatorMode>,
    /// When present, each cell maximizes the power proxy over this grid and
    /// reports the winning bandwidth; otherwise kernels run as specified.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bandwidth_grid: Option<BandwidthGrid>,
    /// Free-form provenance notes carried through to serialization.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub notes: Option<String>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 || self.points == 0 || self.repetitions == 0 {
            return Err(Error::Config(
                "D, N, and repetitions must all be positive".into(),
            ));
        }
        if self.seq_indices.is_empty() {
            return Err(Error::Config("seq_indices must be nonempty".into()));
        }
        if self.kernels.is_empty() {
            return Err(Error::Config("at least one kernel is required".into()));
        }
        for kernel in &self.kernels {
            kernel.spec.validate()?;
        }
        for (i, a) in self.kernels.iter().enumerate() {
            for b in &self.kernels[i + 1..] {
                if a.name == b.name {
                    return Err(Error::Config(format!("duplicate kernel name '{}'", a.name)));
                }
            }
        }
        match self.experiment {
            ExperimentKind::MixtureSweep => {
                for &pi in &self.seq_indices {
                    if !(0.0..=0.5).contains(&pi) {
                        return Err(Error::Config(format!(
                            "mixture proportion {pi} outside [0, 1/2]"
                        )));
                    }
                }
                for mu in [&self.mu1, &self.mu2].into_iter().flatten() {
                    if mu.len() != self.dim {
                        return Err(Error::Config(format!(
                            "component mean has length {}, expected D={}",
                            mu.len(),
                            self.dim
                        )));
                    }
                }
            }
            _ => {
                for &n in &self.seq_indices {
                    if n < 1.0 || n.fract() != 0.0 || n > 2f64.powi(53) {
                        return Err(Error::Config(format!(
                            "sequence index {n} must be a positive integer"
                        )));
                    }
                }
            }
        }
        if let Some(nu) = self.nu {
            if !(nu > 2.0) {
                return Err(Error::Config(format!("nu = {nu} must exceed 2")));
            }
        }
        Ok(())
    }

    /// The target distribution the discrepancies are computed against.
    pub fn target(&self) -> Result<Target> {
        let unit = unit_diagonal(self.dim);
        match self.experiment {
            ExperimentKind::MeanShift => {
                Target::gaussian(unit.iter().map(|u| -u).collect(), 1.0)
            }
            ExperimentKind::VarShift => Target::standard_gaussian(self.dim),
            ExperimentKind::StudentTMeanShift => {
                Target::student_t(self.nu.unwrap_or(4.0), self.dim)
            }
            ExperimentKind::MixtureSweep => {
                let (mu1, mu2) = self.mixture_means();
                Target::mixture2(mu1, mu2, 0.5)
            }
            ExperimentKind::OnTarget => match self.nu {
                Some(nu) => Target::student_t(nu, self.dim),
                None => Target::gaussian(unit.iter().map(|u| -u).collect(), 1.0),
            },
        }
    }

    fn mixture_means(&self) -> (Vec<f64>, Vec<f64>) {
        let mu1 = self
            .mu1
            .clone()
            .unwrap_or_else(|| vec![-30.0; self.dim]);
        let mu2 = self
            .mu2
            .clone()
            .unwrap_or_else(|| vec![-10.0; self.dim]);
        (mu1, mu2)
    }

    fn sample_for(&self, seq: f64, seed: u64) -> Result<WeightedEmpirical> {
        match self.experiment {
            ExperimentKind::MeanShift => {
                mean_shift_sample(seq as u64, self.points, self.dim, seed)
            }
            ExperimentKind::VarShift => var_shift_sample(seq as u64, self.points, self.dim, seed),
            ExperimentKind::StudentTMeanShift => t_mean_shift_sample(
                seq as u64,
                self.points,
                self.dim,
                self.nu.unwrap_or(4.0),
                seed,
            ),
            ExperimentKind::MixtureSweep => {
                let (mu1, mu2) = self.mixture_means();
                mixture_sweep_sample(seq, self.points, &mu1, &mu2, seed)
            }
            ExperimentKind::OnTarget => on_target_sample(&self.target()?, self.points, seed),
        }
    }
}

// ===== result rows =====

/// One (kernel, sequence index, repetition) cell. A failed cell keeps its
/// coordinates and reports NaN values rather than aborting the run.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub experiment: &'static str,
    pub kernel: String,
    pub seq_index: f64,
    pub points: usize,
    pub rep: usize,
    pub seed: u64,
    pub ksd: f64,
    pub ksd_squared_raw: f64,
    pub bandwidth: f64,
}

/// Runs every cell of the config and returns rows in canonical order
/// (kernel name, sequence index, repetition).
///
/// Cells execute in parallel; each derives its own seed from
/// (config seed, kernel index, seq bits, repetition), so the row set is
/// identical no matter the schedule.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    cfg.validate()?;
    let target = cfg.target()?;
    let mode = cfg.mode.unwrap_or(OperatorMode::Langevin);
    let grid = match &cfg.bandwidth_grid {
        Some(g) => Some(g.values()?),
        None => None,
    };

    let mut cells = Vec::new();
    for (ki, kernel) in cfg.kernels.iter().enumerate() {
        for &seq in &cfg.seq_indices {
            for rep in 0..cfg.repetitions {
                cells.push((ki, kernel, seq, rep));
            }
        }
    }

    let mut rows: Vec<ResultRow> = cells
        .into_par_iter()
        .map(|(ki, kernel, seq, rep)| {
            let seed = derive_seed(cfg.seed, &[ki as u64, seq.to_bits(), rep as u64]);
            let mut row = ResultRow {
                experiment: cfg.experiment.as_str(),
                kernel: kernel.name.clone(),
                seq_index: seq,
                points: cfg.points,
                rep,
                seed,
                ksd: f64::NAN,
                ksd_squared_raw: f64::NAN,
                bandwidth: f64::NAN,
            };
            let outcome = run_cell(cfg, &target, mode, grid.as_deref(), &kernel.spec, seq, seed);
            if let Ok((ksd_sq, bandwidth)) = outcome {
                row.ksd_squared_raw = ksd_sq;
                row.ksd = ksd_sq.max(0.0).sqrt();
                row.bandwidth = bandwidth;
            }
            row
        })
        .collect();

    rows.sort_by(|a, b| {
        (a.kernel.as_str(), a.seq_index, a.rep)
            .partial_cmp(&(b.kernel.as_str(), b.seq_index, b.rep))
            .expect("no NaN in sort keys")
    });
    Ok(rows)
}

fn run_cell(
    cfg: &ExperimentConfig,
    target: &Target,
    mode: OperatorMode,
    grid: Option<&[f64]>,
    spec: &KernelSpec,
    seq: f64,
    seed: u64,
) -> Result<(f64, f64)> {
    let sample = cfg.sample_for(seq, seed)?;
    let (kernel, bandwidth) = match grid {
        Some(grid) => {
            let (bw, _) = bandwidth_search(target, spec, &sample, mode, grid)?;
            (spec.with_bandwidth(bw), bw)
        }
        None => (spec.clone(), spec.bandwidth().unwrap_or(f64::NAN)),
    };
    let ksd_sq = SteinKernel::new(target, &kernel, mode)?.ksd_squared(&sample)?;
    Ok((ksd_sq, bandwidth))
}

// ===== CSV emission =====

pub const CSV_HEADER: &str = "experiment,kernel,seq_index,N,rep,seed,ksd,ksd_squared_raw,bandwidth";

fn push_float(out: &mut String, v: f64) {
    if v.is_nan() {
        out.push_str("NaN");
    } else {
        // 17 significant digits round-trip f64 exactly.
        let _ = write!(out, "{v:.16e}");
    }
}

pub fn rows_to_csv(rows: &[ResultRow]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = write!(out, "{},{},", r.experiment, r.kernel);
        push_float(&mut out, r.seq_index);
        let _ = write!(out, ",{},{},{},", r.points, r.rep, r.seed);
        push_float(&mut out, r.ksd);
        out.push(',');
        push_float(&mut out, r.ksd_squared_raw);
        out.push(',');
        push_float(&mut out, r.bandwidth);
        out.push('\n');
    }
    out
}

pub fn write_csv(path: &Path, rows: &[ResultRow]) -> Result<()> {
    std::fs::write(path, rows_to_csv(rows))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    #[test]
    fn stratified_weights_two_values_summing_to_one() {
        let s = mean_shift_sample(3, 7, 2, 99).unwrap();
        assert_eq!(s.len(), 14);
        let w = s.weights();
        let sum: f64 = w.iter().sum();
        assert_close(sum, 1.0, 1e-12);
        let mut distinct: Vec<f64> = w.to_vec();
        distinct.sort_by(f64::total_cmp);
        distinct.dedup();
        assert_eq!(distinct.len(), 2);
        assert_close(distinct[0], 0.25 / 7.0, 1e-15);
        assert_close(distinct[1], 0.75 / 7.0, 1e-15);
    }

    #[test]
    fn n_equal_one_gives_uniform_weights() {
        let s = var_shift_sample(1, 5, 1, 7).unwrap();
        for &w in s.weights() {
            assert_close(w, 0.1, 1e-15);
        }
    }

    #[test]
    fn mean_shift_far_stratum_contributes_unit_diagonal() {
        // Weighted sum over the far stratum ≈ (1/(n+1))·(n+1)·1̄ = 1̄.
        let (n, points, dim) = (10_000, 10_000, 2);
        let s = mean_shift_sample(n, points, dim, 4).unwrap();
        for coord in 0..dim {
            let mut acc = 0.0;
            for row in points..2 * points {
                acc += s.weights()[row] * s.point(row)[coord];
            }
            assert_close(acc, 1.0 / (dim as f64).sqrt(), 0.1);
        }
    }

    #[test]
    fn var_shift_far_stratum_variance() {
        let (n, points) = (9, 100_000);
        let s = var_shift_sample(n, points, 1, 11).unwrap();
        let rows: Vec<f64> = (points..2 * points).map(|r| s.point(r)[0]).collect();
        let mean = rows.iter().sum::<f64>() / rows.len() as f64;
        let var = rows.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (rows.len() - 1) as f64;
        let expected = 2.0 * (n + 1) as f64;
        assert_close(var, expected, 0.05 * expected);
    }

    #[test]
    fn t_stratum_second_moment() {
        // E‖X‖² = D·ν/(ν−2) = 10 for ν = 4, D = 5.
        let (points, dim, nu) = (100_000, 5, 4.0);
        let s = t_mean_shift_sample(1, points, dim, nu, 23).unwrap();
        let mean_sq: f64 = (0..points)
            .map(|r| s.point(r).iter().map(|x| x * x).sum::<f64>())
            .sum::<f64>()
            / points as f64;
        assert_close(mean_sq, 10.0, 0.5);
    }

    #[test]
    fn t_sampler_rejects_small_nu() {
        assert!(t_mean_shift_sample(1, 10, 2, 2.0, 1).is_err());
    }

    #[test]
    fn mixture_pi_zero_uses_component_two_only() {
        let mu1 = vec![-30.0, -30.0];
        let mu2 = vec![-10.0, -10.0];
        let s = mixture_sweep_sample(0.0, 500, &mu1, &mu2, 3).unwrap();
        for row in 0..s.len() {
            assert!(s.point(row)[0] > -20.0, "point leaked from component 1");
        }
    }

    #[test]
    fn mixture_pi_half_component_counts() {
        let mu1 = vec![-30.0];
        let mu2 = vec![-10.0];
        let n = 2000;
        let s = mixture_sweep_sample(0.5, n, &mu1, &mu2, 5).unwrap();
        let count1 = (0..n).filter(|&r| s.point(r)[0] < -20.0).count() as f64;
        let sigma = (n as f64 * 0.25).sqrt();
        assert!((count1 - n as f64 / 2.0).abs() <= 3.0 * sigma);
    }

    #[test]
    fn mixture_rejects_pi_out_of_range() {
        let mu = vec![0.0];
        assert!(mixture_sweep_sample(0.6, 10, &mu, &mu, 1).is_err());
        assert!(mixture_sweep_sample(-0.1, 10, &mu, &mu, 1).is_err());
    }

    #[test]
    fn on_target_gaussian_mean() {
        let target = Target::gaussian(vec![-0.5, -0.5], 1.0).unwrap();
        let s = on_target_sample(&target, 20_000, 9).unwrap();
        for coord in 0..2 {
            let mean: f64 =
                (0..s.len()).map(|r| s.point(r)[coord]).sum::<f64>() / s.len() as f64;
            assert_close(mean, -0.5, 0.05);
        }
    }

    #[test]
    fn samplers_are_seed_deterministic() {
        let a = t_mean_shift_sample(5, 50, 3, 4.0, 1234).unwrap();
        let b = t_mean_shift_sample(5, 50, 3, 4.0, 1234).unwrap();
        let c = t_mean_shift_sample(5, 50, 3, 4.0, 1235).unwrap();
        for row in 0..a.len() {
            assert_eq!(a.point(row), b.point(row));
        }
        assert!((0..c.len()).any(|row| a.point(row) != c.point(row)));
    }

    #[test]
    fn default_grid_shape() {
        let grid = BandwidthGrid::default().values().unwrap();
        assert_eq!(grid.len(), 20);
        assert_close(grid[0], 1e-3, 1e-15);
        assert_close(grid[19], 1e3, 1e-9);
        // Log-regular spacing: constant successive ratio.
        let ratio = grid[1] / grid[0];
        for w in grid.windows(2) {
            assert_close(w[1] / w[0], ratio, 1e-9 * ratio);
        }
    }

    #[test]
    fn bandwidth_search_single_point_grid() {
        let target = Target::standard_gaussian(1).unwrap();
        let sample = on_target_sample(&target, 32, 2).unwrap();
        let (bw, _) = bandwidth_search(
            &target,
            &KernelSpec::imq_default(),
            &sample,
            OperatorMode::Langevin,
            &[0.7],
        )
        .unwrap();
        assert_eq!(bw, 0.7);
    }

    #[test]
    fn bandwidth_search_is_argmax_with_small_ties() {
        let target = Target::standard_gaussian(2).unwrap();
        let sample = mean_shift_sample(10, 40, 2, 31).unwrap();
        let template = KernelSpec::imq_default();
        let grid = BandwidthGrid {
            lo_log10: -1.0,
            hi_log10: 1.0,
            points: 7,
        }
        .values()
        .unwrap();
        let (bw, obj) =
            bandwidth_search(&target, &template, &sample, OperatorMode::Langevin, &grid).unwrap();
        for &sigma in &grid {
            let kernel = template.with_bandwidth(sigma);
            let proxy = SteinKernel::new(&target, &kernel, OperatorMode::Langevin)
                .unwrap()
                .power_proxy(&sample)
                .unwrap();
            assert!(obj >= proxy.value, "objective not maximal at {sigma}");
            if proxy.value == obj {
                assert!(bw <= sigma);
            }
        }
    }

    #[test]
    fn bandwidth_search_degenerate_everywhere() {
        let target = Target::standard_gaussian(1).unwrap();
        let sample = WeightedEmpirical::from_points(vec![0.3, 0.3, 0.3], 1).unwrap();
        let err = bandwidth_search(
            &target,
            &KernelSpec::imq_default(),
            &sample,
            OperatorMode::Langevin,
            &[0.5, 1.0],
        );
        assert!(matches!(err, Err(Error::DegenerateSearch)));
    }

    fn tiny_config() -> ExperimentConfig {
        ExperimentConfig {
            experiment: ExperimentKind::MeanShift,
            dim: 2,
            points: 16,
            seq_indices: vec![1.0, 100.0],
            kernels: vec![
                NamedKernel {
                    name: "imq".into(),
                    spec: KernelSpec::imq_default(),
                },
                NamedKernel {
                    name: "tilted".into(),
                    spec: KernelSpec::linear_growth_kernel(
                        KernelSpec::imq_default(),
                        1.0,
                        0.1,
                        1.0,
                    )
                    .unwrap(),
                },
            ],
            seed: 7,
            repetitions: 3,
            nu: None,
            mu1: None,
            mu2: None,
            mode: None,
            bandwidth_grid: None,
            notes: None,
        }
    }

    #[test]
    fn run_experiment_cardinality_and_order() {
        let rows = run_experiment(&tiny_config()).unwrap();
        assert_eq!(rows.len(), 2 * 2 * 3);
        for w in rows.windows(2) {
            let a = (w[0].kernel.as_str(), w[0].seq_index, w[0].rep);
            let b = (w[1].kernel.as_str(), w[1].seq_index, w[1].rep);
            assert!(a < b, "rows out of canonical order");
        }
        for r in &rows {
            assert!(r.ksd.is_finite());
            assert!(r.ksd >= 0.0);
            assert_close(r.ksd * r.ksd, r.ksd_squared_raw.max(0.0), 1e-15);
        }
    }

    #[test]
    fn run_experiment_deterministic() {
        let a = rows_to_csv(&run_experiment(&tiny_config()).unwrap());
        let b = rows_to_csv(&run_experiment(&tiny_config()).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn failed_cells_emit_nan_rows() {
        // A single-point sample defeats the power proxy, so every search
        // cell fails but the run still reports full cardinality.
        let mut cfg = tiny_config();
        cfg.experiment = ExperimentKind::MixtureSweep;
        cfg.seq_indices = vec![0.0, 0.5];
        cfg.points = 1;
        cfg.bandwidth_grid = Some(BandwidthGrid::default());
        let rows = run_experiment(&cfg).unwrap();
        assert_eq!(rows.len(), 12);
        for r in &rows {
            assert!(r.ksd.is_nan());
            assert!(r.bandwidth.is_nan());
        }
    }

    #[test]
    fn csv_shape() {
        let rows = run_experiment(&tiny_config()).unwrap();
        let csv = rows_to_csv(&rows);
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), CSV_HEADER);
        let first = lines.next().unwrap();
        let fields: Vec<&str> = first.split(',').collect();
        assert_eq!(fields.len(), 9);
        assert_eq!(fields[0], "mean_shift");
        assert!(fields[6].contains('e'), "ksd not in scientific notation");
    }

    #[test]
    fn config_validation_rejects_bad_inputs() {
        let mut cfg = tiny_config();
        cfg.seq_indices = vec![0.5];
        assert!(cfg.validate().is_err());

        let mut cfg = tiny_config();
        cfg.kernels[1].name = "imq".into();
        assert!(cfg.validate().is_err());

        let mut cfg = tiny_config();
        cfg.repetitions = 0;
        assert!(cfg.validate().is_err());

        let mut cfg = tiny_config();
        cfg.experiment = ExperimentKind::MixtureSweep;
        cfg.seq_indices = vec![0.75];
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn config_json_round_trip() {
        let cfg = tiny_config();
        let text = serde_json::to_string_pretty(&cfg).unwrap();
        let back = ExperimentConfig::from_json(&text).unwrap();
        assert_eq!(back.kernels.len(), 2);
        assert_eq!(back.seq_indices, cfg.seq_indices);
        assert_eq!(rows_to_csv(&run_experiment(&back).unwrap()),
                   rows_to_csv(&run_experiment(&cfg).unwrap()));
    }
}
