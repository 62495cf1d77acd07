//! Lifetimes, conditional survival, aging classes, and stochastic order.
//!
//! A [`Lifetime`] is a nonnegative random variable described by its
//! survival function `S(t) = P(X > t)` together with the generalized
//! inverse of `S` used for inverse-transform sampling. The conditional
//! survival at age `v`,
//!
//! `S(z | v) = S(v + z) / S(v)`  when `S(v) > 0`, else `0`,
//!
//! is the law of the residual life of a unit already aged to `v`; it is
//! the single building block behind every virtual-age computation in the
//! crate.
//!
//! Aging classes are decided on finite evaluation grids:
//!
//! - DFR: `S(z + t)/S(t)` nondecreasing in `t` for every `z >= 0`;
//! - IFR: the same ratio nonincreasing;
//! - NWU: `S(z) S(t) <= S(z + t)` for all `z, t >= 0`.
//!
//! Grid verdicts can refute a class exactly (a witness is produced) and
//! can confirm it only up to grid resolution, which is the honest best an
//! evaluation on finitely many points can do.

mod catalogue;
mod grid;

pub use catalogue::{Empirical, Exponential, Gamma, PointMass, Residual, Shifted, UniformZeroTo, Weibull};
pub use grid::Grid;

use std::sync::Arc;

use rand_core::RngCore;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rngs::unit_open_closed;
use crate::tol::{BISECT_MAX_ITERS, BISECT_TOL, RATIO_REL_TOL, ST_POINT_TOL, SURVIVAL_FLOOR};

/// A nonnegative lifetime distribution.
///
/// Implementations must keep `survival` nonincreasing with `S(t) = 1` for
/// `t < 0`, and `quantile` must be the generalized inverse of `survival`
/// on `(0, 1]`: `quantile(u) = inf { t >= 0 : S(t) <= u }`. With that
/// contract the default `sample` (inverse transform applied to a uniform
/// draw in `(0, 1]`) has exactly the distribution described by
/// `survival`, atoms included.
pub trait Lifetime: Send + Sync + std::fmt::Debug {
    /// `P(X > t)`.
    fn survival(&self, t: f64) -> f64;

    /// Generalized inverse of the survival function on `(0, 1]`.
    fn quantile(&self, u: f64) -> f64;

    /// Draw one value by inverse transform.
    fn sample(&self, rng: &mut dyn RngCore) -> f64 {
        self.quantile(unit_open_closed(rng))
    }

    /// Right endpoint of the support, if bounded.
    fn support_upper(&self) -> Option<f64> {
        None
    }

    /// `P(X = 0)`.
    fn atom_at_zero(&self) -> f64 {
        0.0
    }

    /// Hazard rate at `t`, where a density exists and the survival is
    /// positive.
    fn hazard(&self, _t: f64) -> Option<f64> {
        None
    }
}

/// Conditional survival of `base` at age `v`: `P(X > v + z | X > v)`.
///
/// Returns `0` whenever `S(v) = 0`; a unit that cannot have reached age
/// `v` is treated as already failed, matching the absorbing-state
/// convention used by the trajectory samplers.
pub fn conditional_survival(base: &dyn Lifetime, v: f64, z: f64) -> Result<f64> {
    if v < 0.0 || !v.is_finite() {
        return Err(Error::domain(format!("age must be finite and >= 0, got {v}")));
    }
    if z < 0.0 || !z.is_finite() {
        return Err(Error::domain(format!("horizon must be finite and >= 0, got {z}")));
    }
    let sv = base.survival(v);
    if sv <= 0.0 {
        return Ok(0.0);
    }
    Ok((base.survival(v + z) / sv).clamp(0.0, 1.0))
}

/// Validated generalized inverse: smallest `t` with `S(t) <= u`.
pub fn quantile_invert(x: &dyn Lifetime, u: f64) -> Result<f64> {
    if !(u > 0.0 && u <= 1.0) {
        return Err(Error::domain(format!(
            "quantile level must lie in (0, 1], got {u}"
        )));
    }
    Ok(x.quantile(u))
}

/// Bisection fallback for lifetimes without a closed-form quantile.
///
/// Expands a bracket until `S(hi) <= u`, then halves it down to
/// [`BISECT_TOL`] or [`BISECT_MAX_ITERS`] iterations and returns the
/// upper end, the smallest bracketed `t` with `S(t) <= u`.
pub(crate) fn invert_survival_bisect(x: &dyn Lifetime, u: f64) -> f64 {
    if x.survival(0.0) <= u {
        return 0.0;
    }
    let mut lo = 0.0f64;
    let mut hi = match x.support_upper() {
        Some(b) => b,
        None => {
            let mut hi = 1.0f64;
            let mut iters = 0;
            while x.survival(hi) > u && iters < BISECT_MAX_ITERS {
                lo = hi;
                hi *= 2.0;
                iters += 1;
            }
            hi
        }
    };
    let mut iters = 0;
    while hi - lo > BISECT_TOL && iters < BISECT_MAX_ITERS {
        let mid = 0.5 * (lo + hi);
        if x.survival(mid) <= u {
            hi = mid;
        } else {
            lo = mid;
        }
        iters += 1;
    }
    hi
}

/// Aging classes decided by [`check_aging_class`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum AgingClass {
    Dfr,
    Ifr,
    Nwu,
}

impl std::fmt::Display for AgingClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AgingClass::Dfr => write!(f, "DFR"),
            AgingClass::Ifr => write!(f, "IFR"),
            AgingClass::Nwu => write!(f, "NWU"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum ClassStatus {
    Holds,
    Violated,
}

/// Grid point pair at which a monotonicity or product inequality failed,
/// with the signed amount by which it failed.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct RatioWitness {
    pub z: f64,
    pub t1: f64,
    pub t2: f64,
    pub margin: f64,
}

/// Outcome of an aging-class check on a grid.
#[derive(Clone, Debug, Serialize)]
pub struct ClassVerdict {
    pub class: AgingClass,
    pub status: ClassStatus,
    pub witness: Option<RatioWitness>,
    pub note: String,
}

impl ClassVerdict {
    pub fn holds(&self) -> bool {
        self.status == ClassStatus::Holds
    }
}

/// Check an aging class on a grid.
///
/// DFR and IFR compare the conditional survival ratio `S(z + t)/S(t)`
/// across every grid pair `t1 < t2` for every grid `z`; NWU compares
/// `S(z) S(t)` against `S(z + t)` over the grid square. Comparisons use
/// the relative tolerance [`RATIO_REL_TOL`]; denominators at or below
/// [`SURVIVAL_FLOOR`] are treated as zero and the pair is skipped, so the
/// far tail of a bounded support cannot manufacture 0/0 verdicts. The
/// first violation is returned as a witness.
pub fn check_aging_class(x: &dyn Lifetime, class: AgingClass, grid: &Grid) -> Result<ClassVerdict> {
    let pts = grid.points();
    if pts.len() < 2 {
        return Err(Error::GridTooSmall(
            "aging-class check needs at least two grid points".into(),
        ));
    }

    let mut compared = 0usize;
    let mut skipped = 0usize;

    match class {
        AgingClass::Dfr | AgingClass::Ifr => {
            for &z in pts {
                for (i, &t1) in pts.iter().enumerate() {
                    let s1 = x.survival(t1);
                    if s1 <= SURVIVAL_FLOOR {
                        skipped += pts.len() - i - 1;
                        continue;
                    }
                    let r1 = x.survival(z + t1) / s1;
                    for &t2 in &pts[i + 1..] {
                        let s2 = x.survival(t2);
                        if s2 <= SURVIVAL_FLOOR {
                            skipped += 1;
                            continue;
                        }
                        let r2 = x.survival(z + t2) / s2;
                        compared += 1;
                        let gap = match class {
                            AgingClass::Dfr => r1 - r2,
                            AgingClass::Ifr => r2 - r1,
                            AgingClass::Nwu => unreachable!(),
                        };
                        if gap > RATIO_REL_TOL * r1.abs().max(r2.abs()) {
                            return Ok(ClassVerdict {
                                class,
                                status: ClassStatus::Violated,
                                witness: Some(RatioWitness { z, t1, t2, margin: gap }),
                                note: format!(
                                    "conditional survival ratio not {} in t at z={z}",
                                    match class {
                                        AgingClass::Dfr => "nondecreasing",
                                        _ => "nonincreasing",
                                    }
                                ),
                            });
                        }
                    }
                }
            }
        }
        AgingClass::Nwu => {
            for &z in pts {
                let sz = x.survival(z);
                for &t in pts {
                    let st = x.survival(t);
                    let szt = x.survival(z + t);
                    compared += 1;
                    let lhs = sz * st;
                    let gap = lhs - szt;
                    if gap > RATIO_REL_TOL * lhs.abs().max(szt.abs()) {
                        return Ok(ClassVerdict {
                            class,
                            status: ClassStatus::Violated,
                            witness: Some(RatioWitness { z, t1: t, t2: z + t, margin: gap }),
                            note: format!("S(z)S(t) > S(z+t) at z={z}, t={t}"),
                        });
                    }
                }
            }
        }
    }

    Ok(ClassVerdict {
        class,
        status: ClassStatus::Holds,
        witness: None,
        note: format!(
            "no violation on {} grid points ({compared} comparisons, {skipped} skipped past support)",
            pts.len()
        ),
    })
}

/// Grid point at which one survival curve sits above another.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct PointWitness {
    pub t: f64,
    pub left: f64,
    pub right: f64,
}

/// Usual stochastic order verdict from pointwise survival comparison.
#[derive(Clone, Debug, Serialize)]
#[serde(tag = "order", rename_all = "UPPERCASE")]
pub enum StOrder {
    /// Left survival never exceeds the right one on the grid.
    Le,
    /// Left survival is never below the right one on the grid.
    Ge,
    /// Curves agree within tolerance everywhere on the grid.
    Eq,
    /// Each curve is strictly above the other somewhere.
    Incomparable {
        left_above: PointWitness,
        right_above: PointWitness,
    },
}

/// Compare two lifetimes in the usual stochastic order on a grid with the
/// default tolerance [`ST_POINT_TOL`].
pub fn st_compare(x: &dyn Lifetime, y: &dyn Lifetime, grid: &Grid) -> Result<StOrder> {
    st_compare_with_tol(x, y, grid, ST_POINT_TOL)
}

/// [`st_compare`] with an explicit pointwise tolerance, for comparisons
/// between Monte Carlo estimates where grid noise exceeds the default.
pub fn st_compare_with_tol(
    x: &dyn Lifetime,
    y: &dyn Lifetime,
    grid: &Grid,
    tol: f64,
) -> Result<StOrder> {
    let pts = grid.points();
    if pts.len() < 2 {
        return Err(Error::GridTooSmall(
            "stochastic order comparison needs at least two grid points".into(),
        ));
    }
    let mut left_above: Option<PointWitness> = None;
    let mut right_above: Option<PointWitness> = None;
    for &t in pts {
        let sx = x.survival(t);
        let sy = y.survival(t);
        if sx - sy > tol && left_above.map(|w| sx - sy > w.left - w.right).unwrap_or(true) {
            left_above = Some(PointWitness { t, left: sx, right: sy });
        }
        if sy - sx > tol && right_above.map(|w| sy - sx > w.right - w.left).unwrap_or(true) {
            right_above = Some(PointWitness { t, left: sx, right: sy });
        }
    }
    Ok(match (left_above, right_above) {
        (None, None) => StOrder::Eq,
        (None, Some(_)) => StOrder::Le,
        (Some(_), None) => StOrder::Ge,
        (Some(l), Some(r)) => StOrder::Incomparable { left_above: l, right_above: r },
    })
}

/// Largest grid gap where `S_x > S_y + tol`, if any: the witness that `x`
/// is not stochastically dominated by `y`. Used by the hypothesis
/// checkers, which require `Le` or `Eq` outcomes.
pub(crate) fn st_le_violation(
    x: &dyn Lifetime,
    y: &dyn Lifetime,
    grid: &Grid,
    tol: f64,
) -> Option<PointWitness> {
    let mut worst: Option<PointWitness> = None;
    for &t in grid.points() {
        let sx = x.survival(t);
        let sy = y.survival(t);
        if sx - sy > tol && worst.map(|w| sx - sy > w.left - w.right).unwrap_or(true) {
            worst = Some(PointWitness { t, left: sx, right: sy });
        }
    }
    worst
}

/// Convenience alias used throughout: a shareable lifetime object.
pub type ArcLifetime = Arc<dyn Lifetime>;
