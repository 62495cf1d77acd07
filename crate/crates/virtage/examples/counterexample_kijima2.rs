//! The restart construction: DFR inputs, non-DFR failure count.
//!
//! Uniform lifetimes under the proportional repair rule with degrees
//! (1, 0): the first repair is minimal, the second resets the unit. At
//! an independent exponential observation time every ingredient looks
//! harmless, yet p_1 p_3 - p_2^2 < 0, so the sequence is not log-convex
//! and N(T) is not DFR. All three constants are computed twice (series
//! and quadrature) and then cross-checked against Monte Carlo.

use virtage::counterexamples::kijima2_counterexample;
use virtage::Result;

fn main() -> Result<()> {
    let report = kijima2_counterexample(1e-9)?;
    print!("{}", report.to_text_table());
    println!();
    for note in &report.notes {
        println!("note: {note}");
    }
    Ok(())
}
