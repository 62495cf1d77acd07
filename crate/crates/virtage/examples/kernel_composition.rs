//! Check that composing one-step kernels reproduces the model's joint law.
//!
//! A virtual-age model with a deterministic repair policy induces, for
//! each history length, a kernel giving the law of the next interarrival.
//! Sampling the composed two-step kernel must match simulating the model
//! directly; three Kolmogorov-Smirnov subtests (both marginals and the
//! sum) decide. A deliberately wrong second kernel shows the test firing.

use std::sync::Arc;

use virtage::kernels::{compose, verify_composition, HistoryKernel, TestReport};
use virtage::models::{RepairPolicy, VirtualAgeModel, VirtualAgeRule};
use virtage::survival::{ArcLifetime, Shifted, UniformZeroTo};
use virtage::Result;

fn show(label: &str, report: &TestReport) {
    println!("{label}: {}", if report.pass { "PASS" } else { "FAIL" });
    for sub in &report.subtests {
        println!(
            "  {:<8} KS = {:.4}  critical = {:.4}  {}",
            sub.label,
            sub.statistic,
            sub.critical,
            if sub.pass { "ok" } else { "exceeded" }
        );
    }
    if report.zero_extensions > 0 {
        println!("  {} zero-extension draws", report.zero_extensions);
    }
}

fn main() -> Result<()> {
    // Minimal repair on a bounded lifetime: the next interarrival lives
    // on what is left of the support, so kernel domains shrink with
    // every failure.
    let model = VirtualAgeModel::new(
        Arc::new(UniformZeroTo::new(1.0)?),
        VirtualAgeRule::KijimaI,
        RepairPolicy::constant(1.0)?,
    );
    let composed = compose(model.induced_kernel(0)?, model.induced_kernel(1)?)?;
    let direct = |rng: &mut dyn rand_core::RngCore| {
        let xs = model.sample_continuation(&[], 2, rng).expect("empty history is valid");
        (xs[0], xs[1])
    };
    let report = verify_composition(&composed, &[], direct, 100_000, 0.01, 5)?;
    show("model-induced composition", &report);

    // Same first step, but the second step delayed by 0.5: the sum and
    // the second marginal both move, and the test must notice.
    let wrong_second = HistoryKernel::new(
        1,
        |x: &[f64]| (0.0..1.0).contains(&x[0]),
        |x: &[f64]| {
            let residual = UniformZeroTo::new(1.0 - x[0]).expect("positive remaining support");
            Arc::new(Shifted::new(Arc::new(residual), 0.5).expect("fixed shift")) as ArcLifetime
        },
    );
    let broken = compose(model.induced_kernel(0)?, wrong_second)?;
    let direct = |rng: &mut dyn rand_core::RngCore| {
        let xs = model.sample_continuation(&[], 2, rng).expect("empty history is valid");
        (xs[0], xs[1])
    };
    let report = verify_composition(&broken, &[], direct, 100_000, 0.01, 5)?;
    show("second step shifted by 0.5", &report);
    Ok(())
}
