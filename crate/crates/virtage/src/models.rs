//! Virtual-age repair models and trajectory simulation.
//!
//! A [`VirtualAgeModel`] couples a base lifetime (the law of a new unit)
//! with a virtual-age update rule and a repair-degree policy. After the
//! n-th failure the system is restored to virtual age
//! `V_n = Psi(V_{n-1}, X_n, A_n)`, and the next interarrival time has
//! the residual law of the base at age `V_n`. The two classical updates
//! are
//!
//! - Kijima I:  `V_n = V_{n-1} + A_n * X_n`,
//! - Kijima II: `V_n = A_n * (V_{n-1} + X_n)`,
//!
//! with degree `A_n = 0` the best repair the model allows and `A_n = 1`
//! minimal repair; degrees above 1 (repairs that leave the unit worse
//! than before) are accepted and surfaced by the hypothesis checkers
//! rather than rejected here.
//!
//! When the policy is deterministic the model induces, for each history
//! length, a [`HistoryKernel`] giving the law of the next interarrival
//! as a function of the observed history. Those kernels are what the
//! chain-monotonicity checkers compare.

use std::sync::Arc;

use rand_core::RngCore;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernels::HistoryKernel;
use crate::survival::{ArcLifetime, Residual};
use crate::Lifetime;

/// How repair degrees `A_n` are produced.
#[derive(Clone)]
pub enum RepairPolicy {
    /// `A_n = q` for every `n`.
    DeterministicConstant(f64),
    /// Explicit degrees for `n = 1, 2, ...`; the final entry repeats for
    /// all later repairs.
    DeterministicSequence(Vec<f64>),
    /// `A_n` drawn i.i.d. from the given law, independent of all earlier
    /// interarrivals and degrees.
    IidRandom(ArcLifetime),
}

impl std::fmt::Debug for RepairPolicy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RepairPolicy::DeterministicConstant(q) => write!(f, "DeterministicConstant({q})"),
            RepairPolicy::DeterministicSequence(a) => write!(f, "DeterministicSequence({a:?})"),
            RepairPolicy::IidRandom(_) => write!(f, "IidRandom(..)"),
        }
    }
}

impl RepairPolicy {
    pub fn constant(q: f64) -> Result<Self> {
        if !q.is_finite() || q < 0.0 {
            return Err(Error::domain(format!("repair degree must be finite and >= 0, got {q}")));
        }
        Ok(RepairPolicy::DeterministicConstant(q))
    }

    pub fn sequence(degrees: Vec<f64>) -> Result<Self> {
        if degrees.is_empty() {
            return Err(Error::domain("degree sequence must be nonempty".to_string()));
        }
        if degrees.iter().any(|a| !a.is_finite() || *a < 0.0) {
            return Err(Error::domain("repair degrees must be finite and >= 0".to_string()));
        }
        Ok(RepairPolicy::DeterministicSequence(degrees))
    }

    pub fn iid_random(law: ArcLifetime) -> Self {
        RepairPolicy::IidRandom(law)
    }

    pub fn is_deterministic(&self) -> bool {
        !matches!(self, RepairPolicy::IidRandom(_))
    }

    /// Degree used at repair `n` (1-based) under a deterministic policy.
    pub fn degree_at(&self, n: usize) -> Option<f64> {
        debug_assert!(n >= 1);
        match self {
            RepairPolicy::DeterministicConstant(q) => Some(*q),
            RepairPolicy::DeterministicSequence(a) => Some(a[(n - 1).min(a.len() - 1)]),
            RepairPolicy::IidRandom(_) => None,
        }
    }

    /// Realize the degree for repair `n`, consuming randomness only for
    /// random policies.
    pub fn draw_degree(&self, n: usize, rng: &mut dyn RngCore) -> f64 {
        match self {
            RepairPolicy::IidRandom(law) => law.sample(rng),
            det => det.degree_at(n).expect("deterministic policy always has a degree"),
        }
    }

    /// True if any degree can exceed 1 (worse-than-minimal repair);
    /// random policies answer via the law's support when known.
    pub fn may_exceed_one(&self) -> bool {
        match self {
            RepairPolicy::DeterministicConstant(q) => *q > 1.0,
            RepairPolicy::DeterministicSequence(a) => a.iter().any(|x| *x > 1.0),
            RepairPolicy::IidRandom(law) => law.support_upper().is_none_or(|b| b > 1.0),
        }
    }
}

type PsiFn = dyn Fn(f64, f64, f64) -> f64 + Send + Sync;

/// Virtual-age update `V_n = Psi(V_{n-1}, X_n, A_n)`.
#[derive(Clone)]
pub enum VirtualAgeRule {
    KijimaI,
    KijimaII,
    Custom(Arc<PsiFn>),
}

impl std::fmt::Debug for VirtualAgeRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            VirtualAgeRule::KijimaI => write!(f, "KijimaI"),
            VirtualAgeRule::KijimaII => write!(f, "KijimaII"),
            VirtualAgeRule::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

/// Apply one virtual-age update.
pub fn step_virtual_age(rule: &VirtualAgeRule, v: f64, x: f64, a: f64) -> Result<f64> {
    for (name, val) in [("virtual age", v), ("interarrival", x), ("degree", a)] {
        if !val.is_finite() || val < 0.0 {
            return Err(Error::domain(format!("{name} must be finite and >= 0, got {val}")));
        }
    }
    let next = match rule {
        VirtualAgeRule::KijimaI => v + a * x,
        VirtualAgeRule::KijimaII => a * (v + x),
        VirtualAgeRule::Custom(psi) => psi(v, x, a),
    };
    if !next.is_finite() || next < 0.0 {
        return Err(Error::Inconsistency(format!(
            "virtual-age rule produced {next} from (v={v}, x={x}, a={a}); rules must return finite nonnegative ages"
        )));
    }
    Ok(next)
}

/// One simulated repair history.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Trajectory {
    /// Interarrival times `X_1..X_n`.
    pub x: Vec<f64>,
    /// Realized repair degrees `A_1..A_n`.
    pub a: Vec<f64>,
    /// Virtual ages `V_0..V_n`.
    pub v: Vec<f64>,
    /// Arrival times `S_0..S_n`.
    pub s: Vec<f64>,
    /// True when some virtual age exhausted the base support, making
    /// every later interarrival `0`.
    pub absorbed: bool,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Append rows `trajectory_id,n,x,a,v,s` for `n = 1..len`.
    pub fn append_csv_rows(&self, trajectory_id: usize, out: &mut String) {
        use std::fmt::Write as _;
        for n in 1..=self.len() {
            writeln!(
                out,
                "{trajectory_id},{n},{},{},{},{}",
                self.x[n - 1],
                self.a[n - 1],
                self.v[n],
                self.s[n]
            )
            .expect("string writes cannot fail");
        }
    }
}

/// Base lifetime plus update rule plus degree policy.
#[derive(Clone, Debug)]
pub struct VirtualAgeModel {
    base: ArcLifetime,
    rule: VirtualAgeRule,
    policy: RepairPolicy,
}

impl VirtualAgeModel {
    pub fn new(base: ArcLifetime, rule: VirtualAgeRule, policy: RepairPolicy) -> Self {
        Self { base, rule, policy }
    }

    pub fn base(&self) -> &ArcLifetime {
        &self.base
    }

    pub fn rule(&self) -> &VirtualAgeRule {
        &self.rule
    }

    pub fn policy(&self) -> &RepairPolicy {
        &self.policy
    }

    /// Law of the next interarrival for a unit at virtual age `v`; a
    /// point mass at `0` once the base survival at `v` is zero.
    pub fn next_interarrival_survival(&self, v: f64) -> Result<Residual> {
        Residual::new(self.base.clone(), v)
    }

    /// Virtual age after a deterministic-policy history.
    pub fn virtual_age_of_history(&self, x: &[f64]) -> Result<f64> {
        if !self.policy.is_deterministic() {
            return Err(Error::UnsupportedPolicy(
                "history virtual age needs a deterministic repair policy".to_string(),
            ));
        }
        let mut v = 0.0;
        for (k, &xk) in x.iter().enumerate() {
            let a = self.policy.degree_at(k + 1).expect("deterministic policy");
            v = step_virtual_age(&self.rule, v, xk, a)?;
        }
        Ok(v)
    }

    /// Simulate `n_max` repairs.
    ///
    /// Per step, the degree is realized first and one uniform is then
    /// inverted through the conditional survival, so a fixed RNG stream
    /// yields a fixed trajectory regardless of the base family.
    pub fn sample_trajectory(&self, n_max: usize, rng: &mut dyn RngCore) -> Result<Trajectory> {
        if n_max < 1 {
            return Err(Error::domain("trajectory needs n_max >= 1".to_string()));
        }
        let mut x = Vec::with_capacity(n_max);
        let mut a = Vec::with_capacity(n_max);
        let mut v = Vec::with_capacity(n_max + 1);
        let mut s = Vec::with_capacity(n_max + 1);
        v.push(0.0);
        s.push(0.0);
        let mut absorbed = false;
        for n in 1..=n_max {
            let degree = self.policy.draw_degree(n, rng);
            let residual = self.next_interarrival_survival(v[n - 1])?;
            if residual.is_exhausted() {
                absorbed = true;
            }
            let xn = residual.sample(rng);
            let vn = step_virtual_age(&self.rule, v[n - 1], xn, degree)?;
            x.push(xn);
            a.push(degree);
            v.push(vn);
            s.push(s[n - 1] + xn);
        }
        Ok(Trajectory { x, a, v, s, absorbed })
    }

    /// Continue a deterministic-policy model past an observed history:
    /// draws the next `n_more` interarrivals given `history`.
    pub fn sample_continuation(
        &self,
        history: &[f64],
        n_more: usize,
        rng: &mut dyn RngCore,
    ) -> Result<Vec<f64>> {
        let mut v = self.virtual_age_of_history(history)?;
        let mut out = Vec::with_capacity(n_more);
        for j in 0..n_more {
            let n = history.len() + j + 1;
            let degree = self.policy.degree_at(n).expect("deterministic policy");
            let residual = self.next_interarrival_survival(v)?;
            let xn = residual.sample(rng);
            v = step_virtual_age(&self.rule, v, xn, degree)?;
            out.push(xn);
        }
        Ok(out)
    }

    /// History kernel of arity `n` induced by a deterministic policy:
    /// maps a history to the residual law at its virtual age.
    ///
    /// The domain is every history whose coordinates lie in the base
    /// support. Histories whose virtual age exhausts the base survival
    /// stay in the domain and map to the point mass at `0`, matching the
    /// convention for a unit with no life left.
    pub fn induced_kernel(&self, n: usize) -> Result<HistoryKernel> {
        if !self.policy.is_deterministic() {
            return Err(Error::UnsupportedPolicy(
                "induced kernels need a deterministic repair policy; random degrees make the \
                 next law a mixture over degrees, not a function of the history"
                    .to_string(),
            ));
        }
        let support = self.base.support_upper();
        let domain = move |x: &[f64]| match support {
            Some(b) => x.iter().all(|&c| c <= b),
            None => true,
        };
        let base = self.base.clone();
        let rule = self.rule.clone();
        let policy = self.policy.clone();
        let law = move |x: &[f64]| -> ArcLifetime {
            let mut v = 0.0;
            for (k, &xk) in x.iter().enumerate() {
                let a = policy.degree_at(k + 1).expect("deterministic policy");
                v = step_virtual_age(&rule, v, xk, a)
                    .expect("virtual-age rule must return finite nonnegative ages");
            }
            Arc::new(Residual::new(base.clone(), v).expect("ages from valid rules are valid"))
        };
        Ok(HistoryKernel::new(n, domain, law))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rngs::stream_rng;
    use crate::stats::{ks_critical, ks_statistic};
    use crate::survival::{
        Exponential, Gamma, Grid, PointMass, StOrder, UniformZeroTo, Weibull, st_compare,
    };
    use proptest::prelude::*;

    fn uniform_minimal() -> VirtualAgeModel {
        VirtualAgeModel::new(
            Arc::new(UniformZeroTo::new(1.0).unwrap()),
            VirtualAgeRule::KijimaI,
            RepairPolicy::constant(1.0).unwrap(),
        )
    }

    #[test]
    fn step_rules_match_their_formulas() {
        assert_eq!(step_virtual_age(&VirtualAgeRule::KijimaI, 2.0, 1.0, 0.5).unwrap(), 2.5);
        assert_eq!(step_virtual_age(&VirtualAgeRule::KijimaII, 2.0, 1.0, 0.0).unwrap(), 0.0);
        assert_eq!(step_virtual_age(&VirtualAgeRule::KijimaI, 2.0, 1.0, 1.0).unwrap(), 3.0);
        assert_eq!(step_virtual_age(&VirtualAgeRule::KijimaII, 2.0, 1.0, 1.0).unwrap(), 3.0);
        let halve = VirtualAgeRule::Custom(Arc::new(|v, x, _a| 0.5 * (v + x)));
        assert_eq!(step_virtual_age(&halve, 2.0, 2.0, 9.0).unwrap(), 2.0);
    }

    #[test]
    fn step_rejects_bad_inputs_and_bad_rules() {
        assert!(step_virtual_age(&VirtualAgeRule::KijimaI, -1.0, 1.0, 1.0).is_err());
        assert!(step_virtual_age(&VirtualAgeRule::KijimaI, 1.0, f64::NAN, 1.0).is_err());
        assert!(step_virtual_age(&VirtualAgeRule::KijimaI, 1.0, 1.0, -0.5).is_err());
        let bad = VirtualAgeRule::Custom(Arc::new(|_, _, _| f64::NEG_INFINITY));
        assert!(matches!(
            step_virtual_age(&bad, 1.0, 1.0, 1.0),
            Err(Error::Inconsistency(_))
        ));
    }

    #[test]
    fn policy_constructors_validate() {
        assert!(RepairPolicy::constant(-0.1).is_err());
        assert!(RepairPolicy::constant(f64::INFINITY).is_err());
        assert!(RepairPolicy::sequence(vec![]).is_err());
        assert!(RepairPolicy::sequence(vec![0.5, -1.0]).is_err());
        let p = RepairPolicy::sequence(vec![1.0, 0.0]).unwrap();
        assert_eq!(p.degree_at(1), Some(1.0));
        assert_eq!(p.degree_at(2), Some(0.0));
        assert_eq!(p.degree_at(7), Some(0.0), "final degree repeats");
        assert!(!p.may_exceed_one());
        assert!(RepairPolicy::constant(1.5).unwrap().may_exceed_one());
    }

    #[test]
    fn next_interarrival_survival_matches_hand_conditionals() {
        let m = uniform_minimal();
        let fresh = m.next_interarrival_survival(0.0).unwrap();
        for z in [0.0, 0.3, 0.9] {
            assert!((fresh.survival(z) - (1.0 - z)).abs() < 1e-15);
        }
        let aged = m.next_interarrival_survival(0.4).unwrap();
        let target = UniformZeroTo::new(0.6).unwrap();
        for z in [0.0, 0.2, 0.5, 0.7] {
            assert!((aged.survival(z) - target.survival(z)).abs() < 1e-12, "z={z}");
        }
    }

    #[test]
    fn perfect_repair_renews_the_base_law() {
        let m = VirtualAgeModel::new(
            Arc::new(Exponential::new(1.0).unwrap()),
            VirtualAgeRule::KijimaI,
            RepairPolicy::constant(0.0).unwrap(),
        );
        let n = 20_000;
        let mut rng = stream_rng(51, 0);
        let mut second_draws = Vec::with_capacity(n);
        for _ in 0..n {
            let t = m.sample_trajectory(2, &mut rng).unwrap();
            assert_eq!(t.v, vec![0.0, 0.0, 0.0], "q=0 keeps the unit fresh");
            second_draws.push(t.x[1]);
        }
        let base = Exponential::new(1.0).unwrap();
        let mut rng_b = stream_rng(52, 0);
        let fresh: Vec<f64> = (0..n).map(|_| base.sample(&mut rng_b)).collect();
        let d = ks_statistic(&second_draws, &fresh);
        let crit = ks_critical(n, n, 0.01).unwrap();
        assert!(d <= crit, "X_2 under q=0 must match the base law: D={d}, crit={crit}");
    }

    #[test]
    fn minimal_repair_on_uniform_base_keeps_arrivals_inside_support() {
        let m = uniform_minimal();
        let mut rng = stream_rng(53, 0);
        for _ in 0..2_000 {
            let t = m.sample_trajectory(6, &mut rng).unwrap();
            assert!(!t.absorbed);
            for n in 0..=6 {
                assert!(t.s[n] < 1.0, "S_n must stay below the support end");
                assert!((t.v[n] - t.s[n]).abs() < 1e-12, "minimal repair: V_n = S_n");
            }
        }
    }

    #[test]
    fn fresh_uniform_mean_is_half() {
        let m = VirtualAgeModel::new(
            Arc::new(UniformZeroTo::new(1.0).unwrap()),
            VirtualAgeRule::KijimaI,
            RepairPolicy::constant(0.0).unwrap(),
        );
        let n = 100_000;
        let mut rng = stream_rng(54, 0);
        let mut sum = 0.0;
        for _ in 0..n {
            sum += m.sample_trajectory(1, &mut rng).unwrap().x[0];
        }
        let mean = sum / n as f64;
        // SE of a U(0,1) mean at n=1e5 is about 0.0009.
        assert!((mean - 0.5).abs() < 0.004, "mean={mean}");
    }

    #[test]
    fn point_mass_base_absorbs_after_first_failure() {
        let m = VirtualAgeModel::new(
            Arc::new(PointMass::at(0.5).unwrap()),
            VirtualAgeRule::KijimaI,
            RepairPolicy::constant(1.0).unwrap(),
        );
        let mut rng = stream_rng(55, 0);
        let t = m.sample_trajectory(4, &mut rng).unwrap();
        assert_eq!(t.x, vec![0.5, 0.0, 0.0, 0.0]);
        assert!(t.absorbed);
        assert_eq!(t.s, vec![0.0, 0.5, 0.5, 0.5, 0.5]);
        assert_eq!(t.v, vec![0.0, 0.5, 0.5, 0.5, 0.5]);
    }

    #[test]
    fn kijima_two_perfect_second_repair_restarts_as_new() {
        let m = VirtualAgeModel::new(
            Arc::new(UniformZeroTo::new(1.0).unwrap()),
            VirtualAgeRule::KijimaII,
            RepairPolicy::sequence(vec![1.0, 0.0]).unwrap(),
        );
        let n = 20_000;
        let mut rng = stream_rng(56, 0);
        let mut third = Vec::with_capacity(n);
        for _ in 0..n {
            let t = m.sample_trajectory(3, &mut rng).unwrap();
            assert_eq!(t.a, vec![1.0, 0.0, 0.0]);
            assert!((t.v[1] - t.x[0]).abs() < 1e-15);
            assert_eq!(t.v[2], 0.0, "perfect second repair resets the age");
            third.push(t.x[2]);
        }
        let base = UniformZeroTo::new(1.0).unwrap();
        let mut rng_b = stream_rng(57, 0);
        let fresh: Vec<f64> = (0..n).map(|_| base.sample(&mut rng_b)).collect();
        let d = ks_statistic(&third, &fresh);
        assert!(d <= ks_critical(n, n, 0.01).unwrap(), "X_3 must be distributed as X_1");
    }

    #[test]
    fn iid_random_degrees_stay_in_the_law_support() {
        let m = VirtualAgeModel::new(
            Arc::new(Weibull::new(2.0, 1.0).unwrap()),
            VirtualAgeRule::KijimaI,
            RepairPolicy::iid_random(Arc::new(UniformZeroTo::new(1.0).unwrap())),
        );
        let mut rng = stream_rng(58, 0);
        let t = m.sample_trajectory(50, &mut rng).unwrap();
        assert!(t.a.iter().all(|a| (0.0..1.0).contains(a)));
        assert!(!m.policy().may_exceed_one());
        assert!(m.virtual_age_of_history(&[0.1]).is_err());
        assert!(m.induced_kernel(1).is_err());
    }

    #[test]
    fn trajectories_are_reproducible_per_stream() {
        let m = uniform_minimal();
        let mut r1 = stream_rng(59, 3);
        let mut r2 = stream_rng(59, 3);
        let mut r3 = stream_rng(59, 4);
        let t1 = m.sample_trajectory(5, &mut r1).unwrap();
        let t2 = m.sample_trajectory(5, &mut r2).unwrap();
        let t3 = m.sample_trajectory(5, &mut r3).unwrap();
        assert_eq!(t1, t2);
        assert_ne!(t1, t3);
    }

    #[test]
    fn induced_kernel_formulas_on_uniform_base() {
        // Minimal repair: history (0.3, 0.2) leaves virtual age 0.5 and
        // residual survival (0.5 - z) / 0.5.
        let k2 = uniform_minimal().induced_kernel(2).unwrap();
        let law = k2.at(&[0.3, 0.2]).unwrap();
        for (z, want) in [(0.0, 1.0), (0.1, 0.8), (0.25, 0.5), (0.5, 0.0)] {
            assert!((law.survival(z) - want).abs() < 1e-12, "z={z}");
        }
        // Degrees (1, 0): the second interarrival leaves no trace.
        let m = VirtualAgeModel::new(
            Arc::new(UniformZeroTo::new(1.0).unwrap()),
            VirtualAgeRule::KijimaI,
            RepairPolicy::sequence(vec![1.0, 0.0]).unwrap(),
        );
        let law = m.induced_kernel(2).unwrap().at(&[0.3, 0.2]).unwrap();
        for (z, want) in [(0.0, 1.0), (0.35, 0.5), (0.7, 0.0)] {
            assert!((law.survival(z) - want).abs() < 1e-12, "z={z}");
        }
    }

    #[test]
    fn induced_kernel_with_perfect_repair_is_the_base_everywhere() {
        let m = VirtualAgeModel::new(
            Arc::new(Gamma::new(0.5, 1.0).unwrap()),
            VirtualAgeRule::KijimaI,
            RepairPolicy::constant(0.0).unwrap(),
        );
        let k = m.induced_kernel(3).unwrap();
        let law = k.at(&[0.4, 1.2, 0.1]).unwrap();
        let base = Gamma::new(0.5, 1.0).unwrap();
        for t in [0.0, 0.2, 1.0, 3.0] {
            assert!((law.survival(t) - base.survival(t)).abs() < 1e-12);
        }
    }

    #[test]
    fn induced_kernel_domain_follows_base_support() {
        let k = uniform_minimal().induced_kernel(2).unwrap();
        assert!(k.domain_contains(&[0.9, 0.9]));
        assert!(!k.domain_contains(&[1.5, 0.2]));
        assert!(k.at(&[1.5, 0.2]).is_err());
        // Exhausted age inside the domain: the law is a point mass at 0.
        let law = k.at(&[0.9, 0.9]).unwrap();
        assert_eq!(law.survival(0.0), 0.0);
        assert_eq!(law.atom_at_zero(), 1.0);
    }

    #[test]
    fn continuation_matches_the_conditional_chain() {
        let m = uniform_minimal();
        let n = 20_000;
        let mut rng = stream_rng(60, 0);
        let mut sum1 = 0.0;
        for _ in 0..n {
            let z = m.sample_continuation(&[0.5], 2, &mut rng).unwrap();
            assert!(z[0] < 0.5 && z[0] + z[1] < 0.5);
            sum1 += z[0];
        }
        let mean1 = sum1 / n as f64;
        assert!((mean1 - 0.25).abs() < 0.005, "E[Z_2 | X_1 = 0.5] = 0.25, got {mean1}");
    }

    #[test]
    fn ifr_base_makes_longer_histories_stochastically_smaller() {
        let m = VirtualAgeModel::new(
            Arc::new(Weibull::new(2.0, 1.0).unwrap()),
            VirtualAgeRule::KijimaI,
            RepairPolicy::constant(0.7).unwrap(),
        );
        let grid = Grid::uniform(0.0, 4.0, 25).unwrap();
        let k1 = m.induced_kernel(1).unwrap();
        let k2 = m.induced_kernel(2).unwrap();
        for (x, ext) in [([0.5], 0.3), ([1.0], 0.8)] {
            let shorter = k1.at(&x).unwrap();
            let longer = k2.at(&[x[0], ext]).unwrap();
            let verdict = st_compare(longer.as_ref(), shorter.as_ref(), &grid).unwrap();
            assert!(
                matches!(verdict, StOrder::Le | StOrder::Eq),
                "expected LE, got {verdict:?}"
            );
        }
    }

    #[test]
    fn csv_rows_are_one_per_repair() {
        let t = Trajectory {
            x: vec![0.5, 0.25],
            a: vec![1.0, 0.0],
            v: vec![0.0, 0.5, 0.0],
            s: vec![0.0, 0.5, 0.75],
            absorbed: false,
        };
        let mut out = String::new();
        t.append_csv_rows(7, &mut out);
        assert_eq!(out, "7,1,0.5,1,0.5,0.5\n7,2,0.25,0,0,0.75\n");
    }

    proptest! {
        #[test]
        fn kijima_one_minimal_repair_age_equals_arrival_time(seed in 0u64..500) {
            let m = uniform_minimal();
            let mut rng = stream_rng(seed, 0);
            let t = m.sample_trajectory(5, &mut rng).unwrap();
            for n in 0..=5 {
                prop_assert!((t.v[n] - t.s[n]).abs() < 1e-12);
            }
        }

        #[test]
        fn kijima_one_age_is_nondecreasing(seed in 0u64..500, q in 0.0f64..2.0) {
            let m = VirtualAgeModel::new(
                Arc::new(Weibull::new(2.0, 1.0).unwrap()),
                VirtualAgeRule::KijimaI,
                RepairPolicy::constant(q).unwrap(),
            );
            let mut rng = stream_rng(seed, 1);
            let t = m.sample_trajectory(6, &mut rng).unwrap();
            for w in t.v.windows(2) {
                prop_assert!(w[1] >= w[0]);
            }
            for n in 1..=6 {
                prop_assert!(t.s[n] >= t.s[n - 1]);
                prop_assert!(t.x[n - 1] >= 0.0 && t.a[n - 1] >= 0.0);
            }
        }

        #[test]
        fn trajectory_arrays_satisfy_their_recursions(seed in 0u64..200) {
            let m = VirtualAgeModel::new(
                Arc::new(Exponential::new(2.0).unwrap()),
                VirtualAgeRule::KijimaII,
                RepairPolicy::iid_random(Arc::new(UniformZeroTo::new(1.5).unwrap())),
            );
            let mut rng = stream_rng(seed, 2);
            let t = m.sample_trajectory(4, &mut rng).unwrap();
            prop_assert_eq!(t.v[0], 0.0);
            prop_assert_eq!(t.s[0], 0.0);
            for n in 1..=4 {
                prop_assert!((t.s[n] - (t.s[n - 1] + t.x[n - 1])).abs() < 1e-12);
                let expect = step_virtual_age(
                    &VirtualAgeRule::KijimaII,
                    t.v[n - 1],
                    t.x[n - 1],
                    t.a[n - 1],
                ).unwrap();
                prop_assert!((t.v[n] - expect).abs() < 1e-12);
            }
        }
    }
}
