//! Checkers for the hypotheses behind the DFR-preservation results.
//!
//! Each checker evaluates one set of sufficient conditions on grids and
//! samples and returns a [`HypothesisReport`]: labeled conditions, a
//! witness for every failure, and an overall verdict. The conditions
//! come in three families:
//!
//! - initial decrease: the second interarrival, conditioned on the
//!   first, is stochastically below the first (`Z_2^{x1} <=_ST X_1`),
//! - chain decrease: the same comparison one level at a time along the
//!   history (`Z_{n+2}^{(x, x_{n+1})} <=_ST Z_{n+1}^{x}`),
//! - association: positive covariance of increasing function pairs,
//!   which is only ever refutable empirically, never provable.
//!
//! Grid checks are sufficient-condition audits, not proofs: a PASS says
//! no violation was found at the inspected points.

use std::sync::Arc;

use rand_core::RngCore;
use serde::Serialize;
use serde_json::json;

use crate::error::{Error, Result};
use crate::kernels::HistoryKernel;
use crate::models::{VirtualAgeModel, VirtualAgeRule};
use crate::rngs::stream_rng;
use crate::stats::{normal_upper_quantile, sample_cov_with_se};
use crate::survival::{check_aging_class, st_le_violation, AgingClass, ClassVerdict, Grid};
use crate::tol::{MIN_SAMPLES, ST_POINT_TOL};
use crate::{estimate::RandomTime, Lifetime};

/// Overall outcome of a hypothesis check. PARTIAL marks refutation-only
/// batteries that found nothing: the conditions were not violated, but
/// passing them proves nothing.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Overall {
    Pass,
    Partial,
    Fail,
}

impl std::fmt::Display for Overall {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Overall::Pass => "PASS",
            Overall::Partial => "PARTIAL",
            Overall::Fail => "FAIL",
        };
        f.write_str(s)
    }
}

/// One labeled condition with its outcome and, on failure, a witness.
#[derive(Clone, Debug, Serialize)]
pub struct Condition {
    pub label: String,
    pub passed: bool,
    pub detail: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<serde_json::Value>,
}

/// Report of one hypothesis checker run.
#[derive(Clone, Debug, Serialize)]
pub struct HypothesisReport {
    pub conditions: Vec<Condition>,
    pub notes: Vec<String>,
    pub overall: Overall,
}

impl HypothesisReport {
    fn from_conditions(conditions: Vec<Condition>, notes: Vec<String>, refutation_only: bool) -> Self {
        let any_failed = conditions.iter().any(|c| !c.passed);
        let overall = if any_failed {
            Overall::Fail
        } else if refutation_only {
            Overall::Partial
        } else {
            Overall::Pass
        };
        Self { conditions, notes, overall }
    }

    pub fn passed(&self) -> bool {
        self.overall != Overall::Fail
    }

    pub fn condition(&self, label: &str) -> Option<&Condition> {
        self.conditions.iter().find(|c| c.label == label)
    }

    pub fn to_json_pretty(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

fn verdict_condition(label: &str, verdict: &ClassVerdict, requirement: &str) -> Condition {
    let passed = verdict.holds();
    let detail = if passed {
        format!("{requirement}: holds ({})", verdict.note)
    } else {
        match &verdict.witness {
            Some(w) => format!(
                "{requirement}: violated at z = {}, t1 = {}, t2 = {} (margin {:.3e})",
                w.z, w.t1, w.t2, w.margin
            ),
            None => format!("{requirement}: violated"),
        }
    };
    Condition {
        label: label.to_string(),
        passed,
        detail,
        witness: verdict.witness.as_ref().and_then(|w| serde_json::to_value(w).ok()),
    }
}

/// Core of the initial-decrease check, shared by the public checkers.
fn initial_decrease_condition(
    label: &str,
    x1: &dyn Lifetime,
    kernel: &HistoryKernel,
    x1_grid: &Grid,
    t_grid: &Grid,
) -> Result<Condition> {
    if kernel.arity() != 1 {
        return Err(Error::ArityMismatch(format!(
            "initial-decrease check needs an arity-1 kernel, got arity {}",
            kernel.arity()
        )));
    }
    let mut checked = 0usize;
    let mut skipped = 0usize;
    // Worst violation over the grid: largest survival excess.
    let mut worst: Option<(f64, f64, crate::survival::PointWitness)> = None;
    for &x in x1_grid.points() {
        if !kernel.domain_contains(&[x]) {
            skipped += 1;
            continue;
        }
        let conditional = kernel.at(&[x])?;
        checked += 1;
        if let Some(w) = st_le_violation(conditional.as_ref(), x1, t_grid, ST_POINT_TOL) {
            let gap = w.left - w.right;
            if worst.as_ref().is_none_or(|(g, _, _)| gap > *g) {
                worst = Some((gap, x, w));
            }
        }
    }
    Ok(match worst {
        None => Condition {
            label: label.to_string(),
            passed: true,
            detail: format!(
                "conditional next-interarrival law is stochastically below the first \
                 interarrival at all {checked} inspected histories ({skipped} outside the \
                 kernel domain)"
            ),
            witness: None,
        },
        Some((gap, x, w)) => Condition {
            label: label.to_string(),
            passed: false,
            detail: format!(
                "at x1 = {x}, the conditional survival exceeds the unconditional one at \
                 t = {} by {gap:.3e} ({} > {})",
                w.t, w.left, w.right
            ),
            witness: Some(json!({
                "x1": x,
                "t": w.t,
                "conditional_survival": w.left,
                "unconditional_survival": w.right,
            })),
        },
    })
}

/// Check that the law of the second interarrival given the first is
/// stochastically below the first interarrival's law at every grid
/// history: the one-step sufficient condition for the initial
/// log-convexity margin.
pub fn check_initial_decrease(
    x1: &dyn Lifetime,
    kernel: &HistoryKernel,
    x1_grid: &Grid,
    t_grid: &Grid,
) -> Result<HypothesisReport> {
    let condition = initial_decrease_condition("ST(Z2<=X1)", x1, kernel, x1_grid, t_grid)?;
    Ok(HypothesisReport::from_conditions(vec![condition], Vec::new(), false))
}

fn cartesian_histories(points: &[f64], n: usize) -> Vec<Vec<f64>> {
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        let mut next = Vec::with_capacity(out.len() * points.len());
        for h in &out {
            for &p in points {
                let mut h2 = h.clone();
                h2.push(p);
                next.push(h2);
            }
        }
        out = next;
    }
    out
}

/// Outcome of one chain level: the ordering condition plus how many grid
/// extensions fell outside the longer domain (where the next
/// interarrival is taken to be exactly 0, trivially satisfying the
/// ordering) and any domain-inclusion breach.
fn chain_level_condition(
    model: &VirtualAgeModel,
    n: usize,
    label: &str,
    coord_grid: &Grid,
    t_grid: &Grid,
) -> Result<(Condition, usize, Option<Condition>)> {
    let k_n = model.induced_kernel(n)?;
    let k_next = model.induced_kernel(n + 1)?;
    let mut checked = 0usize;
    let mut zero_extended = 0usize;
    let mut inclusion_breach: Option<Vec<f64>> = None;
    let mut worst: Option<(f64, Vec<f64>, crate::survival::PointWitness)> = None;
    for history in cartesian_histories(coord_grid.points(), n) {
        let parent_in_domain = k_n.domain_contains(&history);
        for &y in coord_grid.points() {
            let mut ext = history.clone();
            ext.push(y);
            if !k_next.domain_contains(&ext) {
                zero_extended += 1;
                continue;
            }
            if !parent_in_domain {
                // The longer history is admissible but its prefix is
                // not, so the two domains are not nested.
                inclusion_breach.get_or_insert(ext.clone());
                continue;
            }
            let child = k_next.at(&ext)?;
            let parent = k_n.at(&history)?;
            checked += 1;
            if let Some(w) = st_le_violation(child.as_ref(), parent.as_ref(), t_grid, ST_POINT_TOL)
            {
                let gap = w.left - w.right;
                if worst.as_ref().is_none_or(|(g, _, _)| gap > *g) {
                    worst = Some((gap, ext.clone(), w));
                }
            }
        }
    }
    let condition = match worst {
        None => Condition {
            label: label.to_string(),
            passed: true,
            detail: format!(
                "law after {} observed interarrivals is stochastically below the law after \
                 {n} at all {checked} inspected extensions ({zero_extended} treated as an \
                 exact zero next interarrival)",
                n + 1
            ),
            witness: None,
        },
        Some((gap, ext, w)) => {
            let (history, y) = ext.split_at(n);
            Condition {
                label: label.to_string(),
                passed: false,
                detail: format!(
                    "at history {history:?} extended by {}, the longer-history survival \
                     exceeds the shorter one at t = {} by {gap:.3e} ({} > {})",
                    y[0], w.t, w.left, w.right
                ),
                witness: Some(json!({
                    "history": history,
                    "extension": y[0],
                    "t": w.t,
                    "longer_history_survival": w.left,
                    "shorter_history_survival": w.right,
                })),
            }
        }
    };
    let breach = inclusion_breach.map(|ext| Condition {
        label: format!("{label}-domain-inclusion"),
        passed: false,
        detail: format!(
            "history {ext:?} is admissible at length {} but its prefix is not at length {n}",
            n + 1
        ),
        witness: Some(json!({ "history": ext })),
    });
    Ok((condition, zero_extended, breach))
}

/// Check the full chain of stochastic-decrease conditions for a
/// deterministic-policy model: c.1 compares the one-step conditional law
/// against the base, and c.2 compares each extension of a grid history
/// against its parent, for history lengths `1..depth`.
pub fn check_chain_decrease(
    model: &VirtualAgeModel,
    depth: usize,
    coord_grid: &Grid,
    t_grid: &Grid,
) -> Result<HypothesisReport> {
    if depth < 1 {
        return Err(Error::domain("chain check needs depth >= 1".to_string()));
    }
    if !model.policy().is_deterministic() {
        return Err(Error::UnsupportedPolicy(
            "chain ordering checks need a deterministic repair policy".to_string(),
        ));
    }
    let mut conditions = Vec::new();
    let mut notes = Vec::new();
    let k1 = model.induced_kernel(1)?;
    conditions.push(initial_decrease_condition("c.1", model.base().as_ref(), &k1, coord_grid, t_grid)?);
    let mut total_zero_extended = 0usize;
    for n in 1..depth {
        let label = format!("c.2(n={n})");
        let (condition, zero_extended, breach) =
            chain_level_condition(model, n, &label, coord_grid, t_grid)?;
        total_zero_extended += zero_extended;
        conditions.push(condition);
        if let Some(b) = breach {
            conditions.push(b);
        }
    }
    if depth == 1 {
        notes.push("depth 1 exercises only the one-step condition c.1".to_string());
    }
    if total_zero_extended > 0 {
        notes.push(format!(
            "{total_zero_extended} grid extensions fell outside the longer-history domain; \
             the next interarrival is an exact 0 there, which satisfies the ordering trivially"
        ));
    }
    if model.policy().may_exceed_one() {
        notes.push(
            "some repair degrees exceed 1 (repairs leaving the unit worse than before the \
             failure); the ordering conditions do not forbid this"
                .to_string(),
        );
    }
    Ok(HypothesisReport::from_conditions(conditions, notes, false))
}

/// Check the sufficient conditions under which an additive-rule model
/// yields a discrete-DFR count at an independent random time: the
/// horizon is DFR, the base is IFR, and the base has no mass at 0.
pub fn check_kijima1_conditions(
    model: &VirtualAgeModel,
    horizon: &RandomTime,
    grid: &Grid,
) -> Result<HypothesisReport> {
    if !matches!(model.rule(), VirtualAgeRule::KijimaI) {
        return Err(Error::WrongModel(
            "this checker applies to the additive (Kijima I) virtual-age rule".to_string(),
        ));
    }
    let t_verdict = check_aging_class(horizon.law().as_ref(), AgingClass::Dfr, grid)?;
    let x_verdict = check_aging_class(model.base().as_ref(), AgingClass::Ifr, grid)?;
    let atom = model.base().atom_at_zero();
    let conditions = vec![
        verdict_condition("a:T-DFR", &t_verdict, "the observation horizon must be DFR"),
        verdict_condition("b:X1-IFR", &x_verdict, "the base lifetime must be IFR"),
        Condition {
            label: "b:no-atom-at-0".to_string(),
            passed: atom == 0.0,
            detail: if atom == 0.0 {
                "the base lifetime has no mass at 0".to_string()
            } else {
                format!("the base lifetime has mass {atom} at 0")
            },
            witness: (atom > 0.0).then(|| json!({ "atom_at_zero": atom })),
        },
    ];
    let notes = vec![
        "repair degrees are drawn independently of all past interarrivals by construction, \
         for deterministic and random policies alike"
            .to_string(),
    ];
    Ok(HypothesisReport::from_conditions(conditions, notes, false))
}

/// Sample covariance of `f` and `g` over `n` joint draws, with its
/// standard error.
///
/// This is a refutation tool: association requires nonnegative
/// covariance for every pair of increasing functions, so a
/// significantly negative estimate refutes it, while a nonnegative one
/// proves nothing.
pub fn empirical_association<S, F, G>(
    mut sampler: S,
    f: F,
    g: G,
    n: usize,
    seed: u64,
) -> Result<(f64, f64)>
where
    S: FnMut(&mut dyn RngCore) -> Vec<f64>,
    F: Fn(&[f64]) -> f64,
    G: Fn(&[f64]) -> f64,
{
    if n < MIN_SAMPLES {
        return Err(Error::domain(format!(
            "association estimation needs at least {MIN_SAMPLES} samples, got {n}"
        )));
    }
    let mut rng = stream_rng(seed, 0);
    let mut fs = Vec::with_capacity(n);
    let mut gs = Vec::with_capacity(n);
    for _ in 0..n {
        let x = sampler(&mut rng);
        fs.push(f(&x));
        gs.push(g(&x));
    }
    sample_cov_with_se(&fs, &gs)
}

type ScoreFn = dyn Fn(&[f64]) -> f64 + Send + Sync;

/// A labeled pair of increasing functions for association checks.
#[derive(Clone)]
pub struct FunctionPair {
    label: String,
    f: Arc<ScoreFn>,
    g: Arc<ScoreFn>,
}

impl std::fmt::Debug for FunctionPair {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "FunctionPair({})", self.label)
    }
}

impl FunctionPair {
    /// The caller asserts both functions are coordinatewise increasing;
    /// that cannot be verified here and false claims void the verdict.
    pub fn new(
        label: impl Into<String>,
        f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        g: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self { label: label.into(), f: Arc::new(f), g: Arc::new(g) }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn f(&self, x: &[f64]) -> f64 {
        (self.f)(x)
    }

    pub fn g(&self, x: &[f64]) -> f64 {
        (self.g)(x)
    }
}

/// Default battery for vectors of the given dimension: coordinate
/// pairs, sums against coordinates, and a shifted product against the
/// sum (increasing on the nonnegative orthant).
pub fn default_battery(dim: usize) -> Vec<FunctionPair> {
    let mut out = Vec::new();
    for i in 0..dim {
        for j in (i + 1)..dim {
            out.push(FunctionPair::new(
                format!("x{}~x{}", i + 1, j + 1),
                move |x: &[f64]| x[i],
                move |x: &[f64]| x[j],
            ));
        }
    }
    for i in 0..dim {
        out.push(FunctionPair::new(
            format!("sum~x{}", i + 1),
            |x: &[f64]| x.iter().sum::<f64>(),
            move |x: &[f64]| x[i],
        ));
    }
    out.push(FunctionPair::new(
        "shifted-product~sum",
        |x: &[f64]| x.iter().map(|v| 1.0 + v).product::<f64>(),
        |x: &[f64]| x.iter().sum::<f64>(),
    ));
    out
}

/// Settings for the association battery.
#[derive(Clone, Copy, Debug)]
pub struct AssociationSettings {
    pub n_samples: usize,
    pub alpha: f64,
    pub seed: u64,
}

impl Default for AssociationSettings {
    fn default() -> Self {
        Self { n_samples: 100_000, alpha: crate::tol::DEFAULT_ALPHA, seed: 0 }
    }
}

/// Audit the association-route sufficient conditions: a DFR horizon, no
/// shared atom at 0, the stochastic orderings of the first two and of
/// chained interarrivals, and covariance refutation over a battery of
/// increasing function pairs applied to joint draws from `sampler`
/// (and, when a deterministic model is supplied, to conditional pairs
/// drawn past fixed grid histories).
///
/// The battery can only refute: the report is PARTIAL at best and says
/// so. `model` and `horizon` are optional so the battery can run on
/// processes that are not virtual-age models; skipped conditions are
/// noted.
pub fn check_association_conditions(
    model: Option<&VirtualAgeModel>,
    horizon: Option<&RandomTime>,
    sampler: &mut dyn FnMut(&mut dyn RngCore) -> Vec<f64>,
    battery: &[FunctionPair],
    coord_grid: &Grid,
    t_grid: &Grid,
    settings: &AssociationSettings,
) -> Result<HypothesisReport> {
    let z = normal_upper_quantile(settings.alpha)?;
    let mut conditions = Vec::new();
    let mut notes =
        vec!["association is refutation-only: passing the battery proves nothing".to_string()];

    if let Some(h) = horizon {
        let verdict = check_aging_class(h.law().as_ref(), AgingClass::Dfr, t_grid)?;
        conditions.push(verdict_condition("a:T-DFR", &verdict, "the observation horizon must be DFR"));
        match model {
            Some(m) => {
                let shared = m.base().atom_at_zero() > 0.0 && h.law().atom_at_zero() > 0.0;
                conditions.push(Condition {
                    label: "b:no-common-atom-at-0".to_string(),
                    passed: !shared,
                    detail: if shared {
                        "the horizon and the first interarrival both have mass at 0".to_string()
                    } else {
                        "the horizon and the first interarrival share no atom at 0".to_string()
                    },
                    witness: None,
                });
            }
            None => notes.push(
                "first-interarrival law unknown (no model): shared-atom condition not checked"
                    .to_string(),
            ),
        }
    } else {
        notes.push("no horizon supplied: DFR and shared-atom conditions not checked".to_string());
    }

    let deterministic_model = model.filter(|m| m.policy().is_deterministic());
    if model.is_some() && deterministic_model.is_none() {
        notes.push(
            "random repair policy: kernel-level ordering conditions not checked".to_string(),
        );
    }
    if let Some(m) = deterministic_model {
        let k1 = m.induced_kernel(1)?;
        conditions.push(initial_decrease_condition(
            "c:ST(X2<=X1)",
            m.base().as_ref(),
            &k1,
            coord_grid,
            t_grid,
        )?);
        let (condition, _, breach) =
            chain_level_condition(m, 1, "d:ST(Z3<=Z2)", coord_grid, t_grid)?;
        conditions.push(condition);
        if let Some(b) = breach {
            conditions.push(b);
        }
    }

    for (idx, pair) in battery.iter().enumerate() {
        let (cov, se) = empirical_association(
            &mut *sampler,
            |x| pair.f(x),
            |x| pair.g(x),
            settings.n_samples,
            settings.seed.wrapping_add(idx as u64),
        )?;
        let refuted = cov < -z * se;
        conditions.push(Condition {
            label: format!("assoc({})", pair.label()),
            passed: !refuted,
            detail: if refuted {
                format!("covariance {cov:.6} is significantly negative (se {se:.2e}): association refuted")
            } else {
                format!("not refuted: covariance {cov:.6} (se {se:.2e})")
            },
            witness: refuted.then(|| json!({ "cov": cov, "se": se, "z": z })),
        });
    }

    if let Some(m) = deterministic_model {
        // Conditional pairs: draws of the next two interarrivals past a
        // fixed one-step history, checked with the coordinate pair only.
        let points = coord_grid.points();
        let picks = [0, points.len() / 2, points.len() - 1];
        let mut seen = std::collections::BTreeSet::new();
        for (offset, &i) in picks.iter().enumerate() {
            if !seen.insert(i) {
                continue;
            }
            let x1 = points[i];
            if !m.induced_kernel(1)?.domain_contains(&[x1]) {
                continue;
            }
            let mut cond_sampler = |rng: &mut dyn RngCore| {
                m.sample_continuation(&[x1], 2, rng).expect("grid history is admissible")
            };
            let (cov, se) = empirical_association(
                &mut cond_sampler,
                |x| x[0],
                |x| x[1],
                settings.n_samples,
                settings.seed.wrapping_add(1_000 + offset as u64),
            )?;
            let refuted = cov < -z * se;
            conditions.push(Condition {
                label: format!("assoc(Z2~Z3|x1={x1})"),
                passed: !refuted,
                detail: if refuted {
                    format!("conditional covariance {cov:.6} is significantly negative (se {se:.2e})")
                } else {
                    format!("not refuted: conditional covariance {cov:.6} (se {se:.2e})")
                },
                witness: refuted.then(|| json!({ "x1": x1, "cov": cov, "se": se, "z": z })),
            });
        }
    }

    Ok(HypothesisReport::from_conditions(conditions, notes, true))
}
