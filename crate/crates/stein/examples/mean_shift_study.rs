//! A complete seeded study through the experiment runner: the mean-shift
//! protocol with three kernels, summarized as medians per (kernel, n).
//!
//! This is the in-code equivalent of
//!
//! ```bash
//! stein experiment --config configs/mean_shift.json --out rows.csv
//! ```
//!
//! scaled down for a quick run. The shipped config carries the full setting.
//!
//! ```bash
//! cargo run --example mean_shift_study
//! ```

use stein::experiments::{run_experiment, rows_to_csv, ExperimentConfig, ExperimentKind, NamedKernel};
use stein::kernels::KernelSpec;

fn main() -> stein::Result<()> {
    let cfg = ExperimentConfig {
        experiment: ExperimentKind::MeanShift,
        dim: 5,
        points: 100,
        seq_indices: vec![1.0, 10.0, 100.0, 1000.0, 10000.0],
        kernels: vec![
            NamedKernel {
                name: "imq".into(),
                spec: KernelSpec::imq_default(),
            },
            NamedKernel {
                name: "imq_normlin_theta0".into(),
                spec: KernelSpec::linear_growth_kernel(KernelSpec::imq_default(), 1.0, 0.0, 1.0)?,
            },
            NamedKernel {
                name: "imq_normlin_theta0.1".into(),
                spec: KernelSpec::linear_growth_kernel(KernelSpec::imq_default(), 1.0, 0.1, 1.0)?,
            },
        ],
        seed: 20240901,
        repetitions: 5,
        nu: None,
        mu1: None,
        mu2: None,
        mode: None,
        bandwidth_grid: None,
        notes: None,
    };

    let rows = run_experiment(&cfg)?;
    println!("{} result rows; first lines of the CSV form:", rows.len());
    for line in rows_to_csv(&rows).lines().take(3) {
        println!("  {line}");
    }

    // Median ksd per cell group. Rows arrive sorted by (kernel, n, rep), so
    // each group is a contiguous run of `repetitions` rows.
    println!("\nmedian ksd over {} repetitions:", cfg.repetitions);
    println!("{:>8}  {:>12}  {:>22}  {:>22}", "n", "imq", "imq+normlin θ=0", "imq+normlin θ=0.1");
    let reps = cfg.repetitions;
    let per_kernel = cfg.seq_indices.len() * reps;
    for (si, n) in cfg.seq_indices.iter().enumerate() {
        let mut medians = Vec::new();
        for ki in 0..cfg.kernels.len() {
            let start = ki * per_kernel + si * reps;
            let mut vals: Vec<f64> = rows[start..start + reps].iter().map(|r| r.ksd).collect();
            vals.sort_by(f64::total_cmp);
            medians.push(vals[reps / 2]);
        }
        println!(
            "{n:>8}  {:>12.5}  {:>22.5}  {:>22.5}",
            medians[0], medians[1], medians[2]
        );
    }
    println!("\nOnly the θ = 0.1 column grows with n: bounded kernels and the");
    println!("exactly-critical θ = 0 tilt both flatten out.");
    Ok(())
}
