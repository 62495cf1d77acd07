//! Sample repair trajectories under the two classical virtual-age rules.
//!
//! Each row shows the interarrival X_n, the repair degree A_n, the
//! virtual age V_n after the repair, and the calendar time S_n of the
//! failure. Identical seeds make the draws comparable across rules.

use std::sync::Arc;

use virtage::models::{RepairPolicy, VirtualAgeModel, VirtualAgeRule};
use virtage::rngs::stream_rng;
use virtage::survival::Weibull;
use virtage::Result;

fn show(label: &str, model: &VirtualAgeModel) -> Result<()> {
    let mut rng = stream_rng(7, 0);
    let t = model.sample_trajectory(6, &mut rng)?;
    println!("{label}");
    println!("  {:>2} {:>9} {:>6} {:>9} {:>9}", "n", "x", "a", "v", "s");
    for n in 1..=t.len() {
        println!(
            "  {n:>2} {:>9.4} {:>6.2} {:>9.4} {:>9.4}",
            t.x[n - 1],
            t.a[n - 1],
            t.v[n],
            t.s[n]
        );
    }
    Ok(())
}

fn main() -> Result<()> {
    let base = Arc::new(Weibull::new(2.0, 1.0)?);
    for (label, rule) in [
        ("additive rule, degree 0.5 (age accumulates)", VirtualAgeRule::KijimaI),
        ("proportional rule, degree 0.5 (each repair rescales)", VirtualAgeRule::KijimaII),
    ] {
        let model = VirtualAgeModel::new(base.clone(), rule, RepairPolicy::constant(0.5)?);
        show(label, &model)?;
    }

    // Degree 0 is perfect repair: virtual age resets, interarrivals are iid.
    let renewal =
        VirtualAgeModel::new(base.clone(), VirtualAgeRule::KijimaI, RepairPolicy::constant(0.0)?);
    show("perfect repair (renewal process)", &renewal)?;
    Ok(())
}
