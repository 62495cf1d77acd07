//! Classify textbook lifetimes as DFR, IFR or NWU on a grid.
//!
//! The exponential sits on the boundary and passes both monotone classes;
//! Gamma with shape < 1 is DFR but not IFR, Weibull with shape > 1 the
//! reverse. Violations come with a witness pair of grid points.

use virtage::survival::{check_aging_class, AgingClass, Exponential, Gamma, Grid, Weibull};
use virtage::{Lifetime, Result};

fn classify(name: &str, law: &dyn Lifetime, grid: &Grid) -> Result<()> {
    println!("{name}");
    for class in [AgingClass::Dfr, AgingClass::Ifr, AgingClass::Nwu] {
        let verdict = check_aging_class(law, class, grid)?;
        print!("  {class}: {:?}", verdict.status);
        if let Some(w) = verdict.witness {
            print!(
                "  (witness z = {:.3}, t1 = {:.3}, t2 = {:.3}, margin = {:+.3e})",
                w.z, w.t1, w.t2, w.margin
            );
        }
        println!();
    }
    Ok(())
}

fn main() -> Result<()> {
    let grid = Grid::uniform(0.0, 5.0, 50)?;
    classify("Gamma(shape 0.5, rate 1)", &Gamma::new(0.5, 1.0)?, &grid)?;
    classify("Weibull(shape 2, scale 1)", &Weibull::new(2.0, 1.0)?, &grid)?;
    classify("Exponential(rate 1)", &Exponential::new(1.0)?, &grid)?;
    Ok(())
}
