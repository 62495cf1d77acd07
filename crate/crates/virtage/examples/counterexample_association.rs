//! Interarrivals that share a random scale need not be associated.
//!
//! Draw a level Y in {1, 2}, then X1 = Y, X2 = W1, X3 = W2 / Y with
//! fresh W's. Each pair of coordinates is fine in isolation, but X1 and
//! X3 move in opposite directions: Cov(X1, X3) = -E[W] p(1 - p) / 2 < 0,
//! so the vector cannot be associated. The empirical covariance confirms
//! the closed form, and an exact two-point enumeration confirms it again
//! without sampling error.

use std::sync::Arc;

use virtage::counterexamples::association_counterexample;
use virtage::survival::Exponential;
use virtage::Result;

fn main() -> Result<()> {
    let w = Arc::new(Exponential::new(1.0)?);
    for p in [0.5, 0.1] {
        let report = association_counterexample(p, w.clone(), 400_000, 9)?;
        print!("{}", report.to_text_table());
        println!();
    }
    Ok(())
}
