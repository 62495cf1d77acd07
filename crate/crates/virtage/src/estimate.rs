//! Estimation of the survival sequence `p_n = P(N(T) >= n)` for a
//! counting process observed up to an independent random time `T`.
//!
//! Everything rests on one identity: when `T` and `X_1` have no common
//! atom at `0`, `p_n = E[ S_T(S_n) ]` where `S_T` is the survival
//! function of `T` and `S_n` the n-th arrival time. The Monte Carlo
//! estimator averages `S_T(S_n)` over simulated trajectories, reusing
//! each trajectory for every `n` at once (common random numbers) and
//! recording the cross-`n` covariance so margin inference can account
//! for the induced correlation. The quadrature estimator integrates the
//! same expectation exactly over the conditional chain, one unit cube
//! coordinate per interarrival, and the closed form covers the
//! renewal-exponential case.
//!
//! The process `N(T)` is discrete DFR exactly when the sequence `p_n`
//! is log-convex, so verdicts are reported through the margins
//! `m_n = p_n * p_{n+2} - p_{n+1}^2`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::models::{step_virtual_age, VirtualAgeModel};
use crate::quad::integrate;
use crate::rngs::stream_rng;
use crate::stats::normal_upper_quantile;
use crate::survival::{check_aging_class, AgingClass, ArcLifetime, ClassVerdict, Grid};
use crate::tol::{DEFAULT_CHUNK, EXACT_MARGIN_TOL, MIN_SAMPLES};
use crate::Lifetime;

/// Observation horizon: an independent random time with survival `S_T`.
#[derive(Clone)]
pub struct RandomTime {
    law: ArcLifetime,
    dfr_claim: Option<ClassVerdict>,
}

impl std::fmt::Debug for RandomTime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RandomTime")
            .field("law", &"..")
            .field("dfr_claim", &self.dfr_claim)
            .finish()
    }
}

impl RandomTime {
    pub fn new(law: ArcLifetime) -> Self {
        Self { law, dfr_claim: None }
    }

    /// Construct and record a DFR verdict for the law on the given grid,
    /// for later inspection by hypothesis checkers.
    pub fn with_dfr_checked(law: ArcLifetime, grid: &Grid) -> Result<Self> {
        let verdict = check_aging_class(law.as_ref(), AgingClass::Dfr, grid)?;
        Ok(Self { law, dfr_claim: Some(verdict) })
    }

    pub fn law(&self) -> &ArcLifetime {
        &self.law
    }

    pub fn survival(&self, t: f64) -> f64 {
        self.law.survival(t)
    }

    pub fn dfr_claim(&self) -> Option<&ClassVerdict> {
        self.dfr_claim.as_ref()
    }
}

/// How an estimate was produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum EstimateKind {
    #[serde(rename = "MC")]
    MonteCarlo,
    #[serde(rename = "QUADRATURE")]
    Quadrature,
    #[serde(rename = "CLOSED_FORM")]
    ClosedForm,
}

impl EstimateKind {
    pub fn is_exact(self) -> bool {
        !matches!(self, EstimateKind::MonteCarlo)
    }
}

impl std::fmt::Display for EstimateKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            EstimateKind::MonteCarlo => "MC",
            EstimateKind::Quadrature => "QUADRATURE",
            EstimateKind::ClosedForm => "CLOSED_FORM",
        };
        f.write_str(s)
    }
}

/// Provenance of an estimate.
#[derive(Clone, Debug, Default, Serialize)]
pub struct EstimateMeta {
    pub seed: Option<u64>,
    pub n_samples: Option<usize>,
    pub tol: Option<f64>,
    pub chunk: Option<usize>,
    /// Caveats, e.g. a shared atom at 0 between `T` and `X_1`.
    pub note: Option<String>,
}

/// The sequence `p_0..p_n_max` with uncertainty information.
#[derive(Clone, Debug, Serialize)]
pub struct SurvivalSequenceEstimate {
    /// `p[n]` estimates `P(N(T) >= n)`; `p[0] = 1` exactly.
    pub p: Vec<f64>,
    /// Standard errors, all `0` for exact kinds.
    pub se: Vec<f64>,
    /// Sample covariance of the per-trajectory scores `S_T(S_n)`,
    /// Monte Carlo only. `cov[i][j] / n_samples` estimates
    /// `Cov(p_hat_i, p_hat_j)`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cov: Option<Vec<Vec<f64>>>,
    pub kind: EstimateKind,
    pub meta: EstimateMeta,
}

impl SurvivalSequenceEstimate {
    pub fn n_max(&self) -> usize {
        self.p.len() - 1
    }

    /// Append CSV rows with header `n,p_hat,se,kind`.
    pub fn append_csv(&self, out: &mut String) {
        use std::fmt::Write as _;
        out.push_str("n,p_hat,se,kind\n");
        for n in 0..self.p.len() {
            writeln!(out, "{n},{},{},{}", self.p[n], self.se[n], self.kind)
                .expect("string writes cannot fail");
        }
    }
}

/// Per-chunk sums of scores and their pairwise products.
struct ChunkAcc {
    sum: Vec<f64>,
    cross: Vec<f64>,
}

impl ChunkAcc {
    fn zero(dim: usize) -> Self {
        Self { sum: vec![0.0; dim], cross: vec![0.0; dim * dim] }
    }

    fn merged(mut self, other: ChunkAcc) -> ChunkAcc {
        for (a, b) in self.sum.iter_mut().zip(&other.sum) {
            *a += b;
        }
        for (a, b) in self.cross.iter_mut().zip(&other.cross) {
            *a += b;
        }
        self
    }
}

/// Reduce chunk accumulators by pairwise summation in index order, so
/// the result does not depend on how chunks were scheduled.
fn merge_pairwise(mut accs: Vec<ChunkAcc>) -> ChunkAcc {
    while accs.len() > 1 {
        let mut next = Vec::with_capacity(accs.len().div_ceil(2));
        let mut it = accs.into_iter();
        while let Some(a) = it.next() {
            match it.next() {
                Some(b) => next.push(a.merged(b)),
                None => next.push(a),
            }
        }
        accs = next;
    }
    accs.pop().expect("at least one chunk")
}

/// Monte Carlo estimate of `p_0..p_n_max` from `n_samples` simulated
/// trajectories.
///
/// Work is split into fixed-size chunks; chunk `k` draws from the RNG
/// stream `(seed, k)` and chunk results are merged pairwise in index
/// order, so the estimate is bit-identical for any worker count.
pub fn estimate_sequence_mc(
    model: &VirtualAgeModel,
    horizon: &RandomTime,
    n_max: usize,
    n_samples: usize,
    seed: u64,
) -> Result<SurvivalSequenceEstimate> {
    if n_max < 1 {
        return Err(Error::domain("estimation needs n_max >= 1".to_string()));
    }
    if n_samples < MIN_SAMPLES {
        return Err(Error::domain(format!(
            "Monte Carlo estimation needs at least {MIN_SAMPLES} samples, got {n_samples}"
        )));
    }
    let dim = n_max + 1;
    let n_chunks = n_samples.div_ceil(DEFAULT_CHUNK);
    let chunk_accs: Vec<ChunkAcc> = (0..n_chunks)
        .into_par_iter()
        .map(|chunk_idx| -> Result<ChunkAcc> {
            let mut rng = stream_rng(seed, chunk_idx as u64);
            let lo = chunk_idx * DEFAULT_CHUNK;
            let size = DEFAULT_CHUNK.min(n_samples - lo);
            let mut acc = ChunkAcc::zero(dim);
            let mut y = vec![0.0; dim];
            for _ in 0..size {
                let traj = model.sample_trajectory(n_max, &mut rng)?;
                y[0] = 1.0;
                for (yn, &sn) in y.iter_mut().zip(&traj.s).skip(1) {
                    *yn = horizon.survival(sn);
                }
                for i in 0..dim {
                    acc.sum[i] += y[i];
                    for j in i..dim {
                        acc.cross[i * dim + j] += y[i] * y[j];
                    }
                }
            }
            Ok(acc)
        })
        .collect::<Result<Vec<_>>>()?;
    let total = merge_pairwise(chunk_accs);

    let n = n_samples as f64;
    let mut p: Vec<f64> = total.sum.iter().map(|s| s / n).collect();
    let mut cov = vec![vec![0.0; dim]; dim];
    for i in 0..dim {
        for j in i..dim {
            let c = (total.cross[i * dim + j] - n * p[i] * p[j]) / (n - 1.0);
            cov[i][j] = c;
            cov[j][i] = c;
        }
    }
    // The n = 0 score is the constant 1; pin its entries to the exact
    // values rather than leaving rounding residue.
    p[0] = 1.0;
    cov[0].fill(0.0);
    for row in cov.iter_mut() {
        row[0] = 0.0;
    }
    let se: Vec<f64> = (0..dim).map(|i| (cov[i][i].max(0.0) / n).sqrt()).collect();

    let note = if model.base().atom_at_zero() > 0.0 && horizon.law().atom_at_zero() > 0.0 {
        Some(
            "T and X_1 share an atom at 0, so P(N(T) >= n) and the estimated expectation \
             can differ by the mass of exact ties"
                .to_string(),
        )
    } else {
        None
    };
    Ok(SurvivalSequenceEstimate {
        p,
        se,
        cov: Some(cov),
        kind: EstimateKind::MonteCarlo,
        meta: EstimateMeta {
            seed: Some(seed),
            n_samples: Some(n_samples),
            tol: None,
            chunk: Some(DEFAULT_CHUNK),
            note,
        },
    })
}

/// Absolute tolerance handed to the integrator at recursion level
/// `level` (1-based). Inner levels get tighter budgets so their noise
/// does not destabilize outer refinement; the levels sum below `tol`.
fn level_tol(tol: f64, level: usize) -> f64 {
    tol / (2.0 * 4f64.powi(level as i32 - 1))
}

fn nested_expectation(
    model: &VirtualAgeModel,
    horizon: &RandomTime,
    n: usize,
    level: usize,
    v: f64,
    s: f64,
    tol: f64,
) -> f64 {
    if level > n {
        return horizon.survival(s);
    }
    let a = model.policy().degree_at(level).expect("deterministic policy");
    let residual = match model.next_interarrival_survival(v) {
        Ok(r) => r,
        Err(_) => return f64::NAN,
    };
    if residual.is_exhausted() {
        // No life left at age v: the next interarrival is exactly 0.
        return match step_virtual_age(model.rule(), v, 0.0, a) {
            Ok(v2) => nested_expectation(model, horizon, n, level + 1, v2, s, tol),
            Err(_) => f64::NAN,
        };
    }
    let outcome = integrate(
        |u| {
            let x = residual.quantile(u);
            match step_virtual_age(model.rule(), v, x, a) {
                Ok(v2) => nested_expectation(model, horizon, n, level + 1, v2, s + x, tol),
                Err(_) => f64::NAN,
            }
        },
        0.0,
        1.0,
        level_tol(tol, level),
    );
    outcome.value
}

/// Deterministic estimate of `p_0..p_n_max` by iterated adaptive
/// quadrature over the conditional chain, one unit interval per
/// interarrival.
///
/// Limited to `n_max <= 3`: beyond three nested integrals the cost
/// explodes and Monte Carlo wins.
pub fn estimate_sequence_quadrature(
    model: &VirtualAgeModel,
    horizon: &RandomTime,
    n_max: usize,
    tol: f64,
) -> Result<SurvivalSequenceEstimate> {
    if n_max < 1 {
        return Err(Error::domain("estimation needs n_max >= 1".to_string()));
    }
    if n_max > 3 {
        return Err(Error::Unsupported(format!(
            "nested quadrature supports n_max <= 3, got {n_max}; use the Monte Carlo estimator"
        )));
    }
    if !tol.is_finite() || tol <= 0.0 {
        return Err(Error::domain(format!("tolerance must be finite and > 0, got {tol}")));
    }
    if !model.policy().is_deterministic() {
        return Err(Error::UnsupportedPolicy(
            "quadrature estimation needs a deterministic repair policy".to_string(),
        ));
    }
    let mut p = vec![1.0];
    for n in 1..=n_max {
        let value = nested_expectation(model, horizon, n, 1, 0.0, 0.0, tol);
        if !value.is_finite() || !(-tol..=1.0 + tol).contains(&value) {
            return Err(Error::Inconsistency(format!(
                "quadrature produced p_{n} = {value}, outside [0, 1]"
            )));
        }
        p.push(value.clamp(0.0, 1.0));
    }
    let se = vec![0.0; n_max + 1];
    Ok(SurvivalSequenceEstimate {
        p,
        se,
        cov: None,
        kind: EstimateKind::Quadrature,
        meta: EstimateMeta { tol: Some(tol), ..EstimateMeta::default() },
    })
}

/// Exact sequence for exponential interarrivals under perfect repair
/// observed up to an independent exponential time:
/// `p_n = (lambda / (lambda + mu))^n`.
pub fn closed_form_poisson_exp(
    lambda: f64,
    mu: f64,
    n_max: usize,
) -> Result<SurvivalSequenceEstimate> {
    for (name, rate) in [("lambda", lambda), ("mu", mu)] {
        if !rate.is_finite() || rate <= 0.0 {
            return Err(Error::domain(format!("{name} must be finite and > 0, got {rate}")));
        }
    }
    let r = lambda / (lambda + mu);
    let p: Vec<f64> = (0..=n_max as i32).map(|n| r.powi(n)).collect();
    let se = vec![0.0; n_max + 1];
    Ok(SurvivalSequenceEstimate {
        p,
        se,
        cov: None,
        kind: EstimateKind::ClosedForm,
        meta: EstimateMeta::default(),
    })
}

/// Verdict for one log-convexity margin.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum MarginVerdict {
    Holds,
    Violated,
    Inconclusive,
}

impl std::fmt::Display for MarginVerdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            MarginVerdict::Holds => "HOLDS",
            MarginVerdict::Violated => "VIOLATED",
            MarginVerdict::Inconclusive => "INCONCLUSIVE",
        };
        f.write_str(s)
    }
}

/// One margin `m_n = p_n * p_{n+2} - p_{n+1}^2`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct MarginEntry {
    pub n: usize,
    pub margin: f64,
    /// Delta-method standard error; `0` for exact kinds.
    pub margin_se: f64,
    pub verdict: MarginVerdict,
}

/// Log-convexity report over all margins of a sequence. The process
/// `N(T)` is discrete DFR exactly when every margin is nonnegative.
#[derive(Clone, Debug, Serialize)]
pub struct LogConvexityReport {
    pub entries: Vec<MarginEntry>,
    /// Confidence level used for Monte Carlo verdicts; `None` for exact
    /// kinds, which compare against a fixed numerical tolerance.
    pub alpha: Option<f64>,
    pub kind: EstimateKind,
    pub overall: MarginVerdict,
}

impl LogConvexityReport {
    pub fn holds(&self) -> bool {
        self.overall == MarginVerdict::Holds
    }

    pub fn any_violated(&self) -> bool {
        self.entries.iter().any(|e| e.verdict == MarginVerdict::Violated)
    }

    /// Append CSV rows with header `n,margin,margin_se,verdict`.
    pub fn append_csv(&self, out: &mut String) {
        use std::fmt::Write as _;
        out.push_str("n,margin,margin_se,verdict\n");
        for e in &self.entries {
            writeln!(out, "{},{},{},{}", e.n, e.margin, e.margin_se, e.verdict)
                .expect("string writes cannot fail");
        }
    }
}

/// Check the discrete-DFR (log-convexity) condition on an estimated
/// sequence. Margin `n` compares levels `n`, `n+1`, `n+2`, so the first
/// margin is `n = 0` and uses `p_0 = 1`.
///
/// Exact kinds compare each margin against a fixed tolerance (widened
/// to a few multiples of the integration tolerance for quadrature
/// estimates) and emit only HOLDS or VIOLATED. Monte Carlo verdicts are
/// three-valued at
/// level `alpha`: VIOLATED needs `m_n < -z_alpha * se`, HOLDS needs
/// `m_n > +z_alpha * se`, anything else is INCONCLUSIVE.
pub fn check_discrete_dfr(
    est: &SurvivalSequenceEstimate,
    alpha: f64,
) -> Result<LogConvexityReport> {
    if est.p.len() < 3 {
        return Err(Error::domain(
            "log-convexity needs n_max >= 2 (three sequence values)".to_string(),
        ));
    }
    let exact = est.kind.is_exact();
    let (z, report_alpha) = if exact {
        (0.0, None)
    } else {
        (normal_upper_quantile(alpha)?, Some(alpha))
    };
    // Quadrature values carry the integration tolerance; a margin mixes
    // three of them, so its numerical slack is a few multiples of that.
    let exact_tol = match est.kind {
        EstimateKind::Quadrature => {
            EXACT_MARGIN_TOL.max(4.0 * est.meta.tol.unwrap_or(crate::tol::QUAD_ABS_TOL))
        }
        _ => EXACT_MARGIN_TOL,
    };
    let mut entries = Vec::with_capacity(est.p.len() - 2);
    for n in 0..est.p.len() - 2 {
        let margin = est.p[n] * est.p[n + 2] - est.p[n + 1] * est.p[n + 1];
        let (margin_se, verdict) = if exact {
            let verdict = if margin >= -exact_tol {
                MarginVerdict::Holds
            } else {
                MarginVerdict::Violated
            };
            (0.0, verdict)
        } else {
            let cov = est
                .cov
                .as_ref()
                .ok_or_else(|| Error::Inconsistency("Monte Carlo estimate lacks covariance".to_string()))?;
            let n_samples = est.meta.n_samples.ok_or_else(|| {
                Error::Inconsistency("Monte Carlo estimate lacks a sample count".to_string())
            })? as f64;
            // First-order delta method: gradient of m_n in (p_n, p_{n+1}, p_{n+2}).
            let g = [est.p[n + 2], -2.0 * est.p[n + 1], est.p[n]];
            let idx = [n, n + 1, n + 2];
            let mut var = 0.0;
            for i in 0..3 {
                for j in 0..3 {
                    var += g[i] * g[j] * cov[idx[i]][idx[j]];
                }
            }
            let se = (var.max(0.0) / n_samples).sqrt();
            let verdict = if margin < -z * se {
                MarginVerdict::Violated
            } else if margin > z * se {
                MarginVerdict::Holds
            } else {
                MarginVerdict::Inconclusive
            };
            (se, verdict)
        };
        entries.push(MarginEntry { n, margin, margin_se, verdict });
    }
    let overall = if entries.iter().any(|e| e.verdict == MarginVerdict::Violated) {
        MarginVerdict::Violated
    } else if entries.iter().any(|e| e.verdict == MarginVerdict::Inconclusive) {
        MarginVerdict::Inconclusive
    } else {
        MarginVerdict::Holds
    };
    Ok(LogConvexityReport { entries, alpha: report_alpha, kind: est.kind, overall })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{RepairPolicy, VirtualAgeRule};
    use crate::survival::{Empirical, Exponential, UniformZeroTo};
    use proptest::prelude::*;
    use std::sync::Arc;

    /// Kijima II, uniform base, degrees (1, 0): the third interarrival
    /// restarts as new. Observed up to an independent Exponential(1)
    /// time, the sequence has closed-'ish' forms used as oracles below.
    fn restart_model() -> VirtualAgeModel {
        VirtualAgeModel::new(
            Arc::new(UniformZeroTo::new(1.0).unwrap()),
            VirtualAgeRule::KijimaII,
            RepairPolicy::sequence(vec![1.0, 0.0]).unwrap(),
        )
    }

    fn exp_horizon() -> RandomTime {
        RandomTime::new(Arc::new(Exponential::new(1.0).unwrap()))
    }

    /// p_1 = E[e^{-X_1}] = 1 - e^{-1} for a uniform interarrival.
    fn oracle_p1() -> f64 {
        1.0 - (-1.0f64).exp()
    }

    /// p_2 = E[e^{-(X_1+X_2)}] = e^{-1} * sum_{k>=1} 1/(k * k!), the
    /// exponential-integral series, summed to machine precision.
    fn oracle_p2() -> f64 {
        let mut sum = 0.0;
        let mut factorial = 1.0;
        for k in 1..=30u32 {
            factorial *= k as f64;
            sum += 1.0 / (k as f64 * factorial);
        }
        (-1.0f64).exp() * sum
    }

    /// p_3 factorizes because the third interarrival is independent of
    /// the first two under degrees (1, 0).
    fn oracle_p3() -> f64 {
        oracle_p1() * oracle_p2()
    }

    #[test]
    fn frozen_oracle_digits() {
        assert!((oracle_p1() - 0.632_120_558_828_557_7).abs() < 1e-15);
        assert!((oracle_p2() - 0.484_829_106_995_687_7).abs() < 1e-15);
        assert!((oracle_p3() - 0.306_470_446_050_464_7).abs() < 1e-15);
    }

    #[test]
    fn closed_form_is_geometric() {
        let est = closed_form_poisson_exp(1.0, 1.0, 4).unwrap();
        assert_eq!(est.p, vec![1.0, 0.5, 0.25, 0.125, 0.0625]);
        assert_eq!(est.kind, EstimateKind::ClosedForm);
        let est = closed_form_poisson_exp(2.0, 1.0, 2).unwrap();
        assert!((est.p[2] - 4.0 / 9.0).abs() < 1e-15);
        assert!(closed_form_poisson_exp(0.0, 1.0, 2).is_err());
        assert!(closed_form_poisson_exp(1.0, -1.0, 2).is_err());
    }

    #[test]
    fn geometric_margins_are_exactly_zero_and_hold() {
        let est = closed_form_poisson_exp(1.0, 1.0, 6).unwrap();
        let report = check_discrete_dfr(&est, 0.01).unwrap();
        assert_eq!(report.entries.len(), 5);
        for e in &report.entries {
            assert!(e.margin.abs() < 1e-15);
            assert_eq!(e.verdict, MarginVerdict::Holds);
        }
        assert!(report.holds());
        assert_eq!(report.alpha, None, "exact kinds ignore alpha");
    }

    #[test]
    fn quadrature_matches_series_oracles() {
        let est =
            estimate_sequence_quadrature(&restart_model(), &exp_horizon(), 3, 1e-9).unwrap();
        assert_eq!(est.p[0], 1.0);
        assert!((est.p[1] - oracle_p1()).abs() < 1e-8, "p1 = {}", est.p[1]);
        assert!((est.p[2] - oracle_p2()).abs() < 1e-8, "p2 = {}", est.p[2]);
        assert!((est.p[3] - oracle_p3()).abs() < 1e-8, "p3 = {}", est.p[3]);
        for w in est.p.windows(2) {
            assert!(w[1] <= w[0], "exact sequences are nonincreasing");
        }
    }

    #[test]
    fn quadrature_geometric_margins_hold_within_integration_slack() {
        // Perfect repair on an exponential base gives exactly geometric
        // p_n; the quadrature values are only tol-accurate, so the
        // margin check must absorb that slack instead of reporting
        // hairline violations.
        let model = VirtualAgeModel::new(
            Arc::new(Exponential::new(1.0).unwrap()),
            VirtualAgeRule::KijimaI,
            RepairPolicy::constant(0.0).unwrap(),
        );
        let est = estimate_sequence_quadrature(&model, &exp_horizon(), 3, 1e-9).unwrap();
        for (n, p) in est.p.iter().enumerate() {
            assert!((p - 0.5f64.powi(n as i32)).abs() < 1e-8, "p{n} = {p}");
        }
        let report = check_discrete_dfr(&est, 0.01).unwrap();
        assert!(report.holds(), "{report:?}");
        assert_eq!(report.alpha, None);
    }

    #[test]
    fn restart_model_margins_flip_sign() {
        // The first margin holds, the second is violated: restarting as
        // new breaks log-convexity at n = 1. Frozen from the oracles.
        let est =
            estimate_sequence_quadrature(&restart_model(), &exp_horizon(), 3, 1e-9).unwrap();
        let report = check_discrete_dfr(&est, 0.01).unwrap();
        let m0 = oracle_p2() - oracle_p1() * oracle_p1();
        let m1 = oracle_p1() * oracle_p3() - oracle_p2() * oracle_p2();
        assert!((m0 - 0.085_252_706_101_959_6).abs() < 1e-14);
        assert!((m1 + 0.041_332_993_368_378_9).abs() < 1e-14);
        assert!((report.entries[0].margin - m0).abs() < 2e-8);
        assert!((report.entries[1].margin - m1).abs() < 2e-8);
        assert_eq!(report.entries[0].verdict, MarginVerdict::Holds);
        assert_eq!(report.entries[1].verdict, MarginVerdict::Violated);
        assert_eq!(report.overall, MarginVerdict::Violated);
    }

    #[test]
    fn mc_agrees_with_quadrature_on_the_restart_model() {
        let est = estimate_sequence_mc(&restart_model(), &exp_horizon(), 3, 200_000, 7).unwrap();
        assert_eq!(est.p[0], 1.0);
        assert_eq!(est.se[0], 0.0);
        for (n, oracle) in [(1, oracle_p1()), (2, oracle_p2()), (3, oracle_p3())] {
            let gap = (est.p[n] - oracle).abs();
            assert!(gap < 4.0 * est.se[n], "p_{n}: gap {gap} vs se {}", est.se[n]);
            assert!(est.se[n] > 0.0 && est.se[n] < 0.01);
        }
        let report = check_discrete_dfr(&est, 0.01).unwrap();
        assert_eq!(
            report.entries[1].verdict,
            MarginVerdict::Violated,
            "the violated margin is far beyond noise at this sample size"
        );
        assert_eq!(report.alpha, Some(0.01));
    }

    #[test]
    fn mc_tracks_the_renewal_closed_form() {
        let model = VirtualAgeModel::new(
            Arc::new(Exponential::new(1.0).unwrap()),
            VirtualAgeRule::KijimaI,
            RepairPolicy::constant(0.0).unwrap(),
        );
        let est = estimate_sequence_mc(&model, &exp_horizon(), 6, 50_000, 42).unwrap();
        for n in 0..=6 {
            let truth = 0.5f64.powi(n as i32);
            let slack = 4.0 * est.se[n] + 1e-12;
            assert!((est.p[n] - truth).abs() < slack, "n={n}: {} vs {truth}", est.p[n]);
        }
        // Common random numbers give pathwise-monotone estimates.
        for w in est.p.windows(2) {
            assert!(w[1] <= w[0] + 1e-12);
        }
        let report = check_discrete_dfr(&est, 0.001).unwrap();
        assert!(!report.any_violated(), "true margins are zero");
        // Score variance oracle at n = 1: Var(e^{-X}) for X ~ Exp(1)
        // observed through T ~ Exp(1) ... here the score is e^{-S_1}
        // with S_1 ~ Exp(1): Var = 1/3 - 1/4 = 1/12.
        let cov = est.cov.as_ref().unwrap();
        assert!((cov[1][1] - 1.0 / 12.0).abs() < 0.005, "cov11 = {}", cov[1][1]);
    }

    #[test]
    fn estimates_are_identical_across_thread_counts() {
        let model = restart_model();
        let horizon = exp_horizon();
        let run = |threads: usize| {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
            pool.install(|| estimate_sequence_mc(&model, &horizon, 3, 30_000, 99).unwrap())
        };
        let a = run(1);
        let b = run(4);
        assert_eq!(a.p, b.p);
        assert_eq!(a.se, b.se);
        assert_eq!(a.cov.unwrap(), b.cov.unwrap());
    }

    #[test]
    fn shared_atom_at_zero_is_flagged() {
        let base = Arc::new(Empirical::from_samples(vec![0.0, 1.0]).unwrap());
        let model = VirtualAgeModel::new(
            base,
            VirtualAgeRule::KijimaI,
            RepairPolicy::constant(0.0).unwrap(),
        );
        let horizon = RandomTime::new(Arc::new(Empirical::from_samples(vec![0.0, 2.0]).unwrap()));
        let est = estimate_sequence_mc(&model, &horizon, 2, 1_000, 1).unwrap();
        assert!(est.meta.note.is_some(), "shared atom at 0 must be flagged");
        let clean = estimate_sequence_mc(&model, &exp_horizon(), 2, 1_000, 1).unwrap();
        assert!(clean.meta.note.is_none());
    }

    #[test]
    fn preconditions_are_enforced() {
        let m = restart_model();
        let t = exp_horizon();
        assert!(estimate_sequence_mc(&m, &t, 0, 10_000, 1).is_err());
        assert!(estimate_sequence_mc(&m, &t, 2, 10, 1).is_err());
        assert!(matches!(
            estimate_sequence_quadrature(&m, &t, 4, 1e-9),
            Err(Error::Unsupported(_))
        ));
        assert!(estimate_sequence_quadrature(&m, &t, 2, 0.0).is_err());
        let random = VirtualAgeModel::new(
            Arc::new(Exponential::new(1.0).unwrap()),
            VirtualAgeRule::KijimaI,
            RepairPolicy::iid_random(Arc::new(UniformZeroTo::new(1.0).unwrap())),
        );
        assert!(matches!(
            estimate_sequence_quadrature(&random, &t, 2, 1e-9),
            Err(Error::UnsupportedPolicy(_))
        ));
        let short = closed_form_poisson_exp(1.0, 1.0, 1).unwrap();
        assert!(check_discrete_dfr(&short, 0.01).is_err());
    }

    #[test]
    fn csv_layouts_are_pinned() {
        let est = closed_form_poisson_exp(1.0, 1.0, 2).unwrap();
        let mut out = String::new();
        est.append_csv(&mut out);
        assert_eq!(out, "n,p_hat,se,kind\n0,1,0,CLOSED_FORM\n1,0.5,0,CLOSED_FORM\n2,0.25,0,CLOSED_FORM\n");
        let report = check_discrete_dfr(&closed_form_poisson_exp(1.0, 1.0, 3).unwrap(), 0.01).unwrap();
        let mut out = String::new();
        report.append_csv(&mut out);
        assert_eq!(out, "n,margin,margin_se,verdict\n0,0,0,HOLDS\n1,0,0,HOLDS\n");
    }

    #[test]
    fn dfr_horizon_claim_is_recorded() {
        let grid = Grid::uniform(0.0, 5.0, 20).unwrap();
        let t = RandomTime::with_dfr_checked(Arc::new(Exponential::new(1.0).unwrap()), &grid)
            .unwrap();
        assert!(t.dfr_claim().unwrap().holds());
    }

    proptest! {
        #[test]
        fn geometric_sequences_always_hold(
            lambda in 0.1f64..10.0,
            mu in 0.1f64..10.0,
            n_max in 2usize..8,
        ) {
            let est = closed_form_poisson_exp(lambda, mu, n_max).unwrap();
            for w in est.p.windows(2) {
                prop_assert!(w[1] <= w[0]);
            }
            let report = check_discrete_dfr(&est, 0.01).unwrap();
            prop_assert!(report.holds());
        }
    }
}
