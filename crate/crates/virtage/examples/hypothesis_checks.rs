//! Audit the sufficient conditions under which N(T) inherits DFR.
//!
//! Two checkers, two styles of input. Random repair degrees under the
//! additive rule need: T DFR, the first lifetime IFR without an atom at
//! zero. Deterministic policies instead need the chain of conditional
//! interarrival laws to decrease stochastically; that check separates
//! the additive from the proportional rule on the same repair sequence.

use std::sync::Arc;

use virtage::estimate::RandomTime;
use virtage::hypotheses::{check_chain_decrease, check_kijima1_conditions, HypothesisReport};
use virtage::models::{RepairPolicy, VirtualAgeModel, VirtualAgeRule};
use virtage::survival::{Gamma, Grid, UniformZeroTo, Weibull};
use virtage::Result;

fn show(label: &str, report: &HypothesisReport) {
    println!("{label}: {}", report.overall);
    for c in &report.conditions {
        println!("  [{}] {}: {}", if c.passed { "pass" } else { "FAIL" }, c.label, c.detail);
    }
    for note in &report.notes {
        println!("  note: {note}");
    }
}

fn main() -> Result<()> {
    let t_grid = Grid::uniform(0.05, 5.0, 30)?;

    // Additive rule, repair degrees drawn uniformly at random.
    let random_degrees = VirtualAgeModel::new(
        Arc::new(Weibull::new(2.0, 1.0)?),
        VirtualAgeRule::KijimaI,
        RepairPolicy::iid_random(Arc::new(UniformZeroTo::new(1.0)?)),
    );
    let horizon = RandomTime::new(Arc::new(Gamma::new(0.5, 1.0)?));
    let report = check_kijima1_conditions(&random_degrees, &horizon, &t_grid)?;
    show("additive rule with random degrees", &report);

    // Deterministic chain check: first repair minimal, second perfect.
    let coord = Grid::uniform(0.05, 0.9, 6)?;
    let chain_t = Grid::uniform(0.0, 1.0, 12)?;
    for (label, rule) in [
        ("additive rule, degrees (1, 0)", VirtualAgeRule::KijimaI),
        ("proportional rule, degrees (1, 0)", VirtualAgeRule::KijimaII),
    ] {
        let model = VirtualAgeModel::new(
            Arc::new(UniformZeroTo::new(1.0)?),
            rule,
            RepairPolicy::sequence(vec![1.0, 0.0])?,
        );
        let report = check_chain_decrease(&model, 2, &coord, &chain_t)?;
        show(label, &report);
    }
    Ok(())
}
