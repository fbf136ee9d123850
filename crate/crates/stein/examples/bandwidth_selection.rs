// Bandwidth selection by the power proxy.
//
// KSD²/√v, with v the weighted spread of the Stein-kernel row means, stands
// in for the power of a goodness-of-fit test at that bandwidth. Sweeping it
// over the standard log grid exposes two regimes worth knowing about before
// trusting the argmax.
//
//   cargo run --example bandwidth_selection

use stein::discrepancy::{ksd_squared, power_proxy, OperatorMode};
use stein::experiments::{bandwidth_search, mixture_sweep_sample, BandwidthGrid};
use stein::kernels::KernelSpec;
use stein::targets::Target;

fn main() -> stein::Result<()> {
    // Target: equal mixture at −30·𝟏 and −10·𝟏 in D = 5. One sample drawn
    // with mixing weight 0.3 instead of 0.5, one drawn on target.
    let dim = 5;
    let mu1 = vec![-30.0; dim];
    let mu2 = vec![-10.0; dim];
    let target = Target::mixture2(mu1.clone(), mu2.clone(), 0.5)?;
    let off = mixture_sweep_sample(0.3, 500, &mu1, &mu2, 99)?;
    let on = mixture_sweep_sample(0.5, 500, &mu1, &mu2, 100)?;

    let template = KernelSpec::sum(KernelSpec::imq_default(), KernelSpec::normalized_linear(1.0)?);
    let mode = OperatorMode::Langevin;

    let grid = BandwidthGrid::default();
    println!("objective across the default 20-point grid (10^-3 .. 10^3):");
    for sigma in grid.values()? {
        let proxy = power_proxy(&target, &template.with_bandwidth(sigma), &off, mode)?;
        println!("  sigma = {sigma:>9.4}   proxy = {:>12.4}", proxy.value);
    }

    // The climb toward small σ is not a property of the data. Every diagonal
    // entry of the Stein kernel carries a D/σ² curvature term, so the
    // numerator grows like D/(Nσ²) while the spread of the row means stays
    // put, and the lower edge of the grid wins for any sample of distinct
    // points. The argmax is honest; what it maximizes is resolution of the
    // sample into isolated atoms, not evidence against the target.
    let (best, objective) = bandwidth_search(&target, &template, &off, mode, &grid.values()?)?;
    println!("\nselected bandwidth: {best:.4} (objective {objective:.1})");

    // At that bandwidth the statistic is all diagonal: √(D/(Nσ²)) = 100 for
    // both samples, and the mixing-weight discrepancy is invisible.
    for (name, sample) in [("pi = 0.3", &off), ("pi = 0.5", &on)] {
        let v = ksd_squared(&target, &template.with_bandwidth(best), sample, mode)?;
        println!("  {name}: ksd at selected sigma = {:.6}", v.max(0.0).sqrt());
    }

    // A moderate fixed bandwidth keeps what contrast there is. The gap is
    // thin at N = 500 because the V-statistic's own diagonal floor sits near
    // 0.15 on target; sweeping π and N in the experiment harness maps out
    // where each kernel separates the two.
    println!();
    for (name, sample) in [("pi = 0.3", &off), ("pi = 0.5", &on)] {
        let v = ksd_squared(&target, &template, sample, mode)?;
        println!("  {name}: ksd at sigma = 1 is {:.6}", v.max(0.0).sqrt());
    }
    Ok(())
}
