//! First contact: score one sample against one target.
//!
//! The kernel Stein discrepancy needs three ingredients: a target (only its
//! unnormalized density matters), a positive-definite kernel, and a weighted
//! sample. Run with:
//!
//! ```bash
//! cargo run --example ksd_basics
//! ```

use stein::discrepancy::{ksd_squared, ksd_squared_u, OperatorMode, WeightedEmpirical};
use stein::kernels::KernelSpec;
use stein::rng::SplitMix64;
use stein::targets::Target;

fn main() -> stein::Result<()> {
    let target = Target::standard_gaussian(1)?;
    let kernel = KernelSpec::imq_default();
    let mut rng = SplitMix64::new(7);

    // Three candidate samples: drawn from the target, shifted by one unit,
    // and inflated to twice the standard deviation.
    let mut z = vec![0.0; 400];
    rng.fill_normal(&mut z);
    let on_target = z.clone();
    let shifted: Vec<f64> = z.iter().map(|v| v + 1.0).collect();
    let inflated: Vec<f64> = z.iter().map(|v| v * 2.0).collect();

    println!("N(0,1) target, IMQ kernel, 400 points each:");
    for (name, points) in [
        ("iid from target", on_target),
        ("mean shifted +1", shifted),
        ("stddev doubled", inflated),
    ] {
        let sample = WeightedEmpirical::from_points(points, 1)?;
        let v = ksd_squared(&target, &kernel, &sample, OperatorMode::Langevin)?;
        println!("  {name:<17} ksd = {:.5}", v.max(0.0).sqrt());
    }

    // Weights let a sample speak for a non-uniform measure. Put 90% of the
    // mass on the left half and the discrepancy sees a skewed distribution
    // even though the points themselves are symmetric.
    let points: Vec<f64> = (0..100).map(|i| -2.0 + 4.0 * i as f64 / 99.0).collect();
    let weights: Vec<f64> = points
        .iter()
        .map(|x| if *x < 0.0 { 0.9 / 50.0 } else { 0.1 / 50.0 })
        .collect();
    let skewed = WeightedEmpirical::new(points.clone(), weights, 1)?;
    let grid = WeightedEmpirical::from_points(points, 1)?;
    let v_skew = ksd_squared(&target, &kernel, &skewed, OperatorMode::Langevin)?;
    let v_grid = ksd_squared(&target, &kernel, &grid, OperatorMode::Langevin)?;
    println!("\nuniform grid on [-2,2]: ksd = {:.5}", v_grid.max(0.0).sqrt());
    println!("same grid, 90% mass left: ksd = {:.5}", v_skew.max(0.0).sqrt());

    // The V-statistic (diagonal included) is the canonical estimator; the
    // U-statistic removes the diagonal and can dip negative near zero.
    let mut small = vec![0.0; 50];
    rng.fill_normal(&mut small);
    let sample = WeightedEmpirical::from_points(small, 1)?;
    let v = ksd_squared(&target, &kernel, &sample, OperatorMode::Langevin)?;
    let u = ksd_squared_u(&target, &kernel, &sample, OperatorMode::Langevin)?;
    println!("\n50 on-target points: V-statistic {v:.6}, U-statistic {u:.6}");
    Ok(())
}
