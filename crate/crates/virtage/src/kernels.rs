//! Conditional-distribution kernels over interarrival histories.
//!
//! A [`HistoryKernel`] of arity `n` assigns to each admissible history
//! `x = (x_1, ..., x_n)` the law of the next interarrival time. Two
//! kernels of consecutive arity compose into a [`ComposedKernel`], whose
//! joint law at `x` is produced sequentially: draw `z_1` from the first
//! kernel at `x`, then `z_2` from the second kernel at the extended
//! history `(x, z_1)`.
//!
//! If the extended history falls outside the second kernel's domain the
//! second draw is defined to be `0`. That zero extension keeps the joint
//! law total; every sampler here counts how often it fires so callers
//! can tell when the convention, rather than the model, produced the
//! numbers.
//!
//! [`verify_composition`] checks a composed sampler against any other
//! sampler of the same pair law with two-sample Kolmogorov-Smirnov tests
//! on both marginals and on the sum, Bonferroni-corrected.

use std::sync::Arc;

use rand_core::RngCore;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rngs::stream_rng;
use crate::stats::{ks_critical, ks_statistic, mean_with_se};
use crate::survival::ArcLifetime;
use crate::tol::MIN_SAMPLES;

type DomainFn = dyn Fn(&[f64]) -> bool + Send + Sync;
type LawFn = dyn Fn(&[f64]) -> ArcLifetime + Send + Sync;

/// Law of the next interarrival given a history of fixed length.
#[derive(Clone)]
pub struct HistoryKernel {
    arity: usize,
    domain: Arc<DomainFn>,
    law: Arc<LawFn>,
}

impl std::fmt::Debug for HistoryKernel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("HistoryKernel").field("arity", &self.arity).finish()
    }
}

impl HistoryKernel {
    /// Kernel from an explicit domain predicate and history-to-law map.
    /// The predicate is consulted only on histories of the right arity
    /// with finite nonnegative coordinates.
    pub fn new(
        arity: usize,
        domain: impl Fn(&[f64]) -> bool + Send + Sync + 'static,
        law: impl Fn(&[f64]) -> ArcLifetime + Send + Sync + 'static,
    ) -> Self {
        Self { arity, domain: Arc::new(domain), law: Arc::new(law) }
    }

    /// History-independent kernel: every admissible history maps to the
    /// same law. This is the kernel of an independent next step.
    pub fn constant(arity: usize, law: ArcLifetime) -> Self {
        Self::new(arity, |_| true, move |_| law.clone())
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn domain_contains(&self, x: &[f64]) -> bool {
        x.len() == self.arity
            && x.iter().all(|c| c.is_finite() && *c >= 0.0)
            && (self.domain)(x)
    }

    /// Law of the next interarrival at history `x`.
    pub fn at(&self, x: &[f64]) -> Result<ArcLifetime> {
        if x.len() != self.arity {
            return Err(Error::ArityMismatch(format!(
                "kernel has arity {}, history has length {}",
                self.arity,
                x.len()
            )));
        }
        if !self.domain_contains(x) {
            return Err(Error::OutsideDomain(format!("history {x:?} not in kernel domain")));
        }
        Ok((self.law)(x))
    }
}

/// One draw from a composed kernel, with the zero-extension flag.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct JointDraw {
    pub z1: f64,
    pub z2: f64,
    /// True when `(x, z1)` fell outside the second kernel's domain and
    /// `z2` was set to `0` by convention.
    pub zero_extended: bool,
}

/// Two-step kernel built from kernels of consecutive arity.
#[derive(Clone, Debug)]
pub struct ComposedKernel {
    first: HistoryKernel,
    second: HistoryKernel,
}

/// Compose a kernel of arity `n` with one of arity `n + 1`.
pub fn compose(first: HistoryKernel, second: HistoryKernel) -> Result<ComposedKernel> {
    if second.arity() != first.arity() + 1 {
        return Err(Error::ArityMismatch(format!(
            "cannot compose arity {} with arity {}; second must be first + 1",
            first.arity(),
            second.arity()
        )));
    }
    Ok(ComposedKernel { first, second })
}

impl ComposedKernel {
    pub fn arity(&self) -> usize {
        self.first.arity()
    }

    pub fn first(&self) -> &HistoryKernel {
        &self.first
    }

    pub fn second(&self) -> &HistoryKernel {
        &self.second
    }

    /// Sequential draw of the pair at history `x`, reporting whether the
    /// zero extension fired.
    pub fn sample_joint_flagged(&self, x: &[f64], rng: &mut dyn RngCore) -> Result<JointDraw> {
        let z1 = self.first.at(x)?.sample(rng);
        let mut ext = Vec::with_capacity(x.len() + 1);
        ext.extend_from_slice(x);
        ext.push(z1);
        if self.second.domain_contains(&ext) {
            let z2 = self.second.at(&ext)?.sample(rng);
            Ok(JointDraw { z1, z2, zero_extended: false })
        } else {
            Ok(JointDraw { z1, z2: 0.0, zero_extended: true })
        }
    }

    /// Sequential draw of the pair at history `x`.
    pub fn sample_joint(&self, x: &[f64], rng: &mut dyn RngCore) -> Result<(f64, f64)> {
        self.sample_joint_flagged(x, rng).map(|d| (d.z1, d.z2))
    }

    /// Monte Carlo `E[h(Z_1)]` at history `x`, with standard error.
    pub fn expect_first(
        &self,
        x: &[f64],
        h: impl Fn(f64) -> f64,
        n_samples: usize,
        seed: u64,
    ) -> Result<(f64, f64)> {
        let law = self.first.at(x)?;
        let mut rng = stream_rng(seed, 0);
        let vals: Vec<f64> = (0..n_samples).map(|_| h(law.sample(&mut rng))).collect();
        Ok(mean_with_se(&vals))
    }

    /// Monte Carlo `E[h(Z_1 + Z_2)]` at history `x`, with standard error.
    pub fn expect_sum(
        &self,
        x: &[f64],
        h: impl Fn(f64) -> f64,
        n_samples: usize,
        seed: u64,
    ) -> Result<(f64, f64)> {
        let mut rng = stream_rng(seed, 0);
        let vals = (0..n_samples)
            .map(|_| self.sample_joint(x, &mut rng).map(|(a, b)| h(a + b)))
            .collect::<Result<Vec<f64>>>()?;
        Ok(mean_with_se(&vals))
    }
}

/// One Kolmogorov-Smirnov subtest inside a [`TestReport`].
#[derive(Clone, Debug, Serialize)]
pub struct SubTest {
    pub label: String,
    pub statistic: f64,
    pub critical: f64,
    pub pass: bool,
}

/// Outcome of an equality-of-laws check between two pair samplers.
#[derive(Clone, Debug, Serialize)]
pub struct TestReport {
    pub subtests: Vec<SubTest>,
    pub n_samples: usize,
    pub alpha: f64,
    /// Zero-extension events among the composed-kernel draws.
    pub zero_extensions: usize,
    pub pass: bool,
}

/// Test that the composed kernel at `x` and `direct` sample the same
/// pair law.
///
/// Runs two-sample KS tests on the first marginal, the second marginal,
/// and the sum, each at level `alpha / 3` so the overall false-failure
/// rate stays below `alpha`. Both samplers get independent deterministic
/// streams derived from `seed`.
pub fn verify_composition(
    ck: &ComposedKernel,
    x: &[f64],
    mut direct: impl FnMut(&mut dyn RngCore) -> (f64, f64),
    n_samples: usize,
    alpha: f64,
    seed: u64,
) -> Result<TestReport> {
    if n_samples < MIN_SAMPLES {
        return Err(Error::domain(format!(
            "need at least {MIN_SAMPLES} samples for the law-equality test, got {n_samples}"
        )));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::domain(format!("alpha must lie in (0, 1), got {alpha}")));
    }

    let mut rng_c = stream_rng(seed, 0);
    let mut zero_extensions = 0usize;
    let mut c1 = Vec::with_capacity(n_samples);
    let mut c2 = Vec::with_capacity(n_samples);
    for _ in 0..n_samples {
        let d = ck.sample_joint_flagged(x, &mut rng_c)?;
        if d.zero_extended {
            zero_extensions += 1;
        }
        c1.push(d.z1);
        c2.push(d.z2);
    }

    let mut rng_d = stream_rng(seed, 1);
    let mut d1 = Vec::with_capacity(n_samples);
    let mut d2 = Vec::with_capacity(n_samples);
    for _ in 0..n_samples {
        let (a, b) = direct(&mut rng_d);
        d1.push(a);
        d2.push(b);
    }

    let sums_c: Vec<f64> = c1.iter().zip(&c2).map(|(a, b)| a + b).collect();
    let sums_d: Vec<f64> = d1.iter().zip(&d2).map(|(a, b)| a + b).collect();

    let sub_alpha = alpha / 3.0;
    let critical = ks_critical(n_samples, n_samples, sub_alpha)?;
    let mut subtests = Vec::with_capacity(3);
    for (label, a, b) in [
        ("first marginal", &c1, &d1),
        ("second marginal", &c2, &d2),
        ("sum", &sums_c, &sums_d),
    ] {
        let statistic = ks_statistic(a, b);
        subtests.push(SubTest {
            label: label.to_string(),
            statistic,
            critical,
            pass: statistic <= critical,
        });
    }

    let pass = subtests.iter().all(|s| s.pass);
    Ok(TestReport { subtests, n_samples, alpha, zero_extensions, pass })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::survival::{Exponential, Lifetime, PointMass, UniformZeroTo};
    use crate::tol::DEFAULT_ALPHA;

    fn uniform_chain_kernels() -> (HistoryKernel, HistoryKernel) {
        // Minimal repair on a uniform base: after history x the next
        // interarrival is uniform on (0, 1 - sum(x)), empty past sum(x) >= 1.
        let first = HistoryKernel::new(
            1,
            |x: &[f64]| x[0] < 1.0,
            |x: &[f64]| Arc::new(UniformZeroTo::new(1.0 - x[0]).unwrap()) as ArcLifetime,
        );
        let second = HistoryKernel::new(
            2,
            |x: &[f64]| x[0] + x[1] < 1.0,
            |x: &[f64]| Arc::new(UniformZeroTo::new(1.0 - x[0] - x[1]).unwrap()) as ArcLifetime,
        );
        (first, second)
    }

    #[test]
    fn compose_rejects_arity_mismatch() {
        let a = HistoryKernel::constant(1, Arc::new(Exponential::new(1.0).unwrap()));
        let b = HistoryKernel::constant(3, Arc::new(Exponential::new(1.0).unwrap()));
        assert!(matches!(compose(a, b), Err(Error::ArityMismatch(_))));
    }

    #[test]
    fn at_enforces_arity_and_domain() {
        let (first, _) = uniform_chain_kernels();
        assert!(first.at(&[0.5]).is_ok());
        assert!(matches!(first.at(&[0.5, 0.5]), Err(Error::ArityMismatch(_))));
        assert!(matches!(first.at(&[1.5]), Err(Error::OutsideDomain(_))));
        assert!(!first.domain_contains(&[f64::NAN]));
        assert!(!first.domain_contains(&[-0.1]));
    }

    #[test]
    fn product_kernel_draws_are_uncorrelated() {
        let first = HistoryKernel::constant(0, Arc::new(Exponential::new(1.0).unwrap()));
        let second = HistoryKernel::constant(1, Arc::new(Exponential::new(2.0).unwrap()));
        let ck = compose(first, second).unwrap();
        let n = 20_000;
        let mut rng = stream_rng(42, 0);
        let mut xs = Vec::with_capacity(n);
        let mut ys = Vec::with_capacity(n);
        for _ in 0..n {
            let (a, b) = ck.sample_joint(&[], &mut rng).unwrap();
            xs.push(a);
            ys.push(b);
        }
        let (cov, se) = crate::stats::sample_cov_with_se(&xs, &ys).unwrap();
        assert!(cov.abs() < 4.0 * se, "cov={cov} se={se}");
        let mean_y: f64 = ys.iter().sum::<f64>() / n as f64;
        assert!((mean_y - 0.5).abs() < 0.02);
    }

    #[test]
    fn degenerate_first_coordinate_pins_the_second_law() {
        let first = HistoryKernel::constant(0, Arc::new(PointMass::at(0.5).unwrap()));
        let second = HistoryKernel::new(
            1,
            |x: &[f64]| x[0] < 1.0,
            |x: &[f64]| Arc::new(UniformZeroTo::new(1.0 - x[0]).unwrap()) as ArcLifetime,
        );
        let ck = compose(first, second).unwrap();
        let n = 20_000;
        let mut rng = stream_rng(7, 0);
        let mut sum2 = 0.0;
        for _ in 0..n {
            let (a, b) = ck.sample_joint(&[], &mut rng).unwrap();
            assert_eq!(a, 0.5);
            assert!((0.0..0.5).contains(&b));
            sum2 += b;
        }
        let mean2 = sum2 / n as f64;
        assert!((mean2 - 0.25).abs() < 0.005, "mean={mean2}");
    }

    #[test]
    fn uniform_chain_means_match_nested_integrals() {
        // At x = (0.5): E[Z2] = 0.25 and E[Z3] = E[(0.5 - Z2)/2] = 0.125.
        let (first, second) = uniform_chain_kernels();
        let ck = compose(first, second).unwrap();
        let n = 200_000;
        let mut rng = stream_rng(3, 0);
        let (mut s1, mut s2) = (0.0, 0.0);
        for _ in 0..n {
            let (a, b) = ck.sample_joint(&[0.5], &mut rng).unwrap();
            assert!(a + b <= 0.5 + 1e-12, "support bound violated: {a} + {b}");
            s1 += a;
            s2 += b;
        }
        let (m1, m2) = (s1 / n as f64, s2 / n as f64);
        assert!((m1 - 0.25).abs() < 0.002, "E[Z2]={m1}");
        assert!((m2 - 0.125).abs() < 0.002, "E[Z3]={m2}");
    }

    #[test]
    fn expectation_helpers_agree_with_closed_forms() {
        let (first, second) = uniform_chain_kernels();
        let ck = compose(first, second).unwrap();
        let (e1, se1) = ck.expect_first(&[0.5], |z| z, 100_000, 11).unwrap();
        assert!((e1 - 0.25).abs() < 4.0 * se1);
        let (es, ses) = ck.expect_sum(&[0.5], |z| z, 100_000, 12).unwrap();
        assert!((es - 0.375).abs() < 4.0 * ses, "E[Z2+Z3]={es}");
    }

    #[test]
    fn sampling_is_deterministic_per_stream() {
        let (first, second) = uniform_chain_kernels();
        let ck = compose(first, second).unwrap();
        let draw = |seed| {
            let mut rng = stream_rng(seed, 5);
            ck.sample_joint(&[0.2], &mut rng).unwrap()
        };
        assert_eq!(draw(9), draw(9));
        assert_ne!(draw(9), draw(10));
    }

    #[test]
    fn zero_extension_fires_outside_second_domain_and_is_counted() {
        // Second kernel only accepts extended histories with sum < 0.3,
        // while the first draws uniformly on (0, 1): frequent exits.
        let first = HistoryKernel::constant(1, Arc::new(UniformZeroTo::new(1.0).unwrap()));
        let second = HistoryKernel::new(
            2,
            |x: &[f64]| x[0] + x[1] < 0.3,
            |_: &[f64]| Arc::new(Exponential::new(1.0).unwrap()) as ArcLifetime,
        );
        let ck = compose(first, second).unwrap();
        let mut rng = stream_rng(21, 0);
        let mut fired = 0;
        for _ in 0..500 {
            let d = ck.sample_joint_flagged(&[0.1], &mut rng).unwrap();
            if d.zero_extended {
                assert_eq!(d.z2, 0.0);
                fired += 1;
            }
        }
        // P(exit) = P(0.1 + Z1 >= 0.3) = 0.8; seeing none would be absurd.
        assert!(fired > 300, "fired={fired}");

        let report = verify_composition(
            &ck,
            &[0.1],
            |rng| {
                let z1 = UniformZeroTo::new(1.0).unwrap().sample(rng);
                let z2 = if 0.1 + z1 < 0.3 {
                    Exponential::new(1.0).unwrap().sample(rng)
                } else {
                    0.0
                };
                (z1, z2)
            },
            2_000,
            DEFAULT_ALPHA,
            22,
        )
        .unwrap();
        assert!(report.zero_extensions > 1_000);
    }

    #[test]
    fn verify_composition_accepts_equal_laws() {
        let (first, second) = uniform_chain_kernels();
        let ck = compose(first, second).unwrap();
        let report = verify_composition(
            &ck,
            &[0.5],
            |rng| {
                // Independent re-implementation of the same chain.
                let z1 = UniformZeroTo::new(0.5).unwrap().sample(rng);
                let z2 = UniformZeroTo::new(0.5 - z1).unwrap().sample(rng);
                (z1, z2)
            },
            20_000,
            DEFAULT_ALPHA,
            33,
        )
        .unwrap();
        assert!(report.pass, "{report:?}");
        assert_eq!(report.subtests.len(), 3);
        assert_eq!(report.zero_extensions, 0);
    }

    #[test]
    fn verify_composition_rejects_shifted_second_kernel() {
        let (first, second) = uniform_chain_kernels();
        let ck = compose(first, second).unwrap();
        let report = verify_composition(
            &ck,
            &[0.5],
            |rng| {
                let z1 = UniformZeroTo::new(0.5).unwrap().sample(rng);
                let z2 = UniformZeroTo::new(0.5 - z1).unwrap().sample(rng) + 0.5;
                (z1, z2)
            },
            20_000,
            DEFAULT_ALPHA,
            34,
        )
        .unwrap();
        assert!(!report.pass);
        assert!(report.subtests.iter().any(|s| !s.pass && s.label == "second marginal"));
        assert!(report.subtests.iter().any(|s| s.pass && s.label == "first marginal"));
    }

    #[test]
    fn verify_composition_validates_inputs() {
        let (first, second) = uniform_chain_kernels();
        let ck = compose(first, second).unwrap();
        assert!(verify_composition(&ck, &[0.5], |_| (0.0, 0.0), 10, 0.01, 1).is_err());
        assert!(verify_composition(&ck, &[0.5], |_| (0.0, 0.0), 2_000, 1.5, 1).is_err());
    }
}
