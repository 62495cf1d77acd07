//! Estimate p_n = P(N(T) >= n) three ways and compare.
//!
//! N(T) counts failures of a repairable system up to an independent
//! random time T. For perfect repair with exponential lifetimes the
//! sequence is geometric, so all three estimators can be checked against
//! pencil and paper: lambda = mu = 1 gives p_n = 2^-n.

use std::sync::Arc;

use virtage::estimate::{
    closed_form_poisson_exp, estimate_sequence_mc, estimate_sequence_quadrature, RandomTime,
};
use virtage::models::{RepairPolicy, VirtualAgeModel, VirtualAgeRule};
use virtage::survival::Exponential;
use virtage::Result;

fn main() -> Result<()> {
    let model = VirtualAgeModel::new(
        Arc::new(Exponential::new(1.0)?),
        VirtualAgeRule::KijimaI,
        RepairPolicy::constant(0.0)?,
    );
    let horizon = RandomTime::new(Arc::new(Exponential::new(1.0)?));
    let n_max = 4;

    let closed = closed_form_poisson_exp(1.0, 1.0, n_max)?;
    let quad = estimate_sequence_quadrature(&model, &horizon, n_max, 1e-9)?;
    let mc = estimate_sequence_mc(&model, &horizon, n_max, 200_000, 42)?;

    println!(
        "{:>2} {:>12} {:>18} {:>12} {:>10}",
        "n", "closed form", "quadrature", "monte carlo", "mc se"
    );
    for n in 0..=n_max {
        println!(
            "{n:>2} {:>12.8} {:>18.12} {:>12.6} {:>10.2e}",
            closed.p[n], quad.p[n], mc.p[n], mc.se[n]
        );
    }

    // Shared uniform draws make the estimate monotone in n path by path,
    // so p_hat never increases even at small sample sizes.
    let small = estimate_sequence_mc(&model, &horizon, n_max, 500, 1)?;
    let monotone = small.p.windows(2).all(|w| w[1] <= w[0]);
    println!("\nsmall-sample estimate is monotone: {monotone}");
    Ok(())
}
