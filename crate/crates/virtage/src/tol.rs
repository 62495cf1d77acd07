//! Central registry of numerical tolerances and cutoffs.
//!
//! Every tolerance used by the library is pinned here so a reader can
//! audit the numeric policy in one place. Tests assert against these
//! same constants.

/// Relative tolerance for comparing conditional-survival ratios in the
/// aging-class checks. Ratios live in [0, 1], so this is effectively an
/// absolute tolerance as well.
pub const RATIO_REL_TOL: f64 = 1e-9;

/// Survival values at or below this are treated as exact zeros when they
/// appear in a denominator, avoiding 0/0 in far-tail ratio comparisons.
pub const SURVIVAL_FLOOR: f64 = 1e-12;

/// Absolute tolerance for pointwise survival comparison in the usual
/// stochastic order check.
pub const ST_POINT_TOL: f64 = 1e-9;

/// Absolute bracket width at which quantile bisection stops.
pub const BISECT_TOL: f64 = 1e-10;

/// Hard cap on bisection iterations (also caps bracket expansion).
pub const BISECT_MAX_ITERS: u32 = 200;

/// Margin tolerance for log-convexity verdicts on exact (quadrature or
/// closed-form) survival sequences: a margin above `-EXACT_MARGIN_TOL`
/// counts as holding, so exact equality cases pass.
pub const EXACT_MARGIN_TOL: f64 = 1e-12;

/// Default absolute tolerance for adaptive quadrature.
pub const QUAD_ABS_TOL: f64 = 1e-9;

/// Below this distance from a support endpoint the removable-singularity
/// factor (1 - e^{-s})/s is evaluated by its Taylor series instead of the
/// direct quotient.
pub const ENDPOINT_SERIES_CUTOFF: f64 = 1e-4;

/// Minimum sample count accepted by Monte Carlo estimators and
/// statistical tests.
pub const MIN_SAMPLES: usize = 1_000;

/// Default significance level for Monte Carlo verdicts and two-sample
/// tests.
pub const DEFAULT_ALPHA: f64 = 0.01;

/// Trajectories per work chunk in the parallel Monte Carlo estimator.
/// Each chunk owns an RNG stream keyed by its index and chunk results
/// are merged in index order, so estimates are bit-identical for any
/// worker count.
pub const DEFAULT_CHUNK: usize = 8_192;
