use std::sync::Arc;

use statrs::function::gamma::{gamma_ur, ln_gamma};

use crate::error::{Error, Result};
use crate::survival::{invert_survival_bisect, Lifetime};
use crate::tol::SURVIVAL_FLOOR;

/// Exponential lifetime with a given rate.
///
/// The memoryless law: its residual life at any age is the law itself,
/// which makes it the boundary case of every aging class handled here.
#[derive(Clone, Debug)]
pub struct Exponential {
    rate: f64,
}

impl Exponential {
    pub fn new(rate: f64) -> Result<Self> {
        if !rate.is_finite() || rate <= 0.0 {
            return Err(Error::domain(format!("rate must be finite and > 0, got {rate}")));
        }
        Ok(Self { rate })
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }
}

impl Lifetime for Exponential {
    fn survival(&self, t: f64) -> f64 {
        if t <= 0.0 {
            1.0
        } else {
            (-self.rate * t).exp()
        }
    }

    fn quantile(&self, u: f64) -> f64 {
        -u.ln() / self.rate
    }

    fn hazard(&self, _t: f64) -> Option<f64> {
        Some(self.rate)
    }
}

/// Weibull lifetime with shape `k` and scale `s`: `S(t) = exp(-(t/s)^k)`.
///
/// DFR for `k <= 1`, IFR for `k >= 1`, exponential at `k = 1`.
#[derive(Clone, Debug)]
pub struct Weibull {
    shape: f64,
    scale: f64,
}

impl Weibull {
    pub fn new(shape: f64, scale: f64) -> Result<Self> {
        if !shape.is_finite() || shape <= 0.0 {
            return Err(Error::domain(format!("shape must be finite and > 0, got {shape}")));
        }
        if !scale.is_finite() || scale <= 0.0 {
            return Err(Error::domain(format!("scale must be finite and > 0, got {scale}")));
        }
        Ok(Self { shape, scale })
    }
}

impl Lifetime for Weibull {
    fn survival(&self, t: f64) -> f64 {
        if t <= 0.0 {
            1.0
        } else {
            (-(t / self.scale).powf(self.shape)).exp()
        }
    }

    fn quantile(&self, u: f64) -> f64 {
        self.scale * (-u.ln()).powf(1.0 / self.shape)
    }

    fn hazard(&self, t: f64) -> Option<f64> {
        if t > 0.0 {
            Some(self.shape / self.scale * (t / self.scale).powf(self.shape - 1.0))
        } else {
            None
        }
    }
}

/// Gamma lifetime with shape `a` and rate `r`: `S(t) = Q(a, r t)`, the
/// regularized upper incomplete gamma function.
///
/// DFR for `a <= 1`, IFR for `a >= 1`. The quantile falls back to
/// bisection on the survival function.
#[derive(Clone, Debug)]
pub struct Gamma {
    shape: f64,
    rate: f64,
}

impl Gamma {
    pub fn new(shape: f64, rate: f64) -> Result<Self> {
        if !shape.is_finite() || shape <= 0.0 {
            return Err(Error::domain(format!("shape must be finite and > 0, got {shape}")));
        }
        if !rate.is_finite() || rate <= 0.0 {
            return Err(Error::domain(format!("rate must be finite and > 0, got {rate}")));
        }
        Ok(Self { shape, rate })
    }
}

impl Lifetime for Gamma {
    fn survival(&self, t: f64) -> f64 {
        // gamma_ur requires a strictly positive argument.
        if t <= 0.0 {
            1.0
        } else {
            gamma_ur(self.shape, self.rate * t).clamp(0.0, 1.0)
        }
    }

    fn quantile(&self, u: f64) -> f64 {
        invert_survival_bisect(self, u)
    }

    fn hazard(&self, t: f64) -> Option<f64> {
        if t <= 0.0 {
            return None;
        }
        let s = self.survival(t);
        if s <= SURVIVAL_FLOOR {
            return None;
        }
        let ln_pdf = self.shape * self.rate.ln() + (self.shape - 1.0) * t.ln()
            - self.rate * t
            - ln_gamma(self.shape);
        Some(ln_pdf.exp() / s)
    }
}

/// Uniform lifetime on `[0, b]`. Strictly IFR; its hazard `1/(b - t)`
/// blows up at the right endpoint.
#[derive(Clone, Debug)]
pub struct UniformZeroTo {
    upper: f64,
}

impl UniformZeroTo {
    pub fn new(upper: f64) -> Result<Self> {
        if !upper.is_finite() || upper <= 0.0 {
            return Err(Error::domain(format!("upper must be finite and > 0, got {upper}")));
        }
        Ok(Self { upper })
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }
}

impl Lifetime for UniformZeroTo {
    fn survival(&self, t: f64) -> f64 {
        if t <= 0.0 {
            1.0
        } else if t >= self.upper {
            0.0
        } else {
            1.0 - t / self.upper
        }
    }

    fn quantile(&self, u: f64) -> f64 {
        self.upper * (1.0 - u)
    }

    fn support_upper(&self) -> Option<f64> {
        Some(self.upper)
    }

    fn hazard(&self, t: f64) -> Option<f64> {
        if (0.0..self.upper).contains(&t) {
            Some(1.0 / (self.upper - t))
        } else {
            None
        }
    }
}

/// Deterministic lifetime: all mass at a single point `c >= 0`.
#[derive(Clone, Debug)]
pub struct PointMass {
    value: f64,
}

impl PointMass {
    pub fn at(value: f64) -> Result<Self> {
        if !value.is_finite() || value < 0.0 {
            return Err(Error::domain(format!("point mass must be finite and >= 0, got {value}")));
        }
        Ok(Self { value })
    }

    pub fn value(&self) -> f64 {
        self.value
    }
}

impl Lifetime for PointMass {
    fn survival(&self, t: f64) -> f64 {
        if t < self.value {
            1.0
        } else {
            0.0
        }
    }

    fn quantile(&self, u: f64) -> f64 {
        if u >= 1.0 {
            0.0
        } else {
            self.value
        }
    }

    fn support_upper(&self) -> Option<f64> {
        Some(self.value)
    }

    fn atom_at_zero(&self) -> f64 {
        if self.value == 0.0 {
            1.0
        } else {
            0.0
        }
    }
}

/// Empirical lifetime: the distribution putting mass `1/n` on each of
/// `n` observed values. Survival and quantile are exact step functions
/// of the sample, so resampling from it reproduces the sample law.
#[derive(Clone, Debug)]
pub struct Empirical {
    sorted: Vec<f64>,
}

impl Empirical {
    pub fn from_samples(mut xs: Vec<f64>) -> Result<Self> {
        if xs.is_empty() {
            return Err(Error::domain("empirical law needs at least one sample".to_string()));
        }
        if xs.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(Error::domain("empirical samples must be finite and >= 0".to_string()));
        }
        xs.sort_by(|a, b| a.partial_cmp(b).expect("samples are finite"));
        Ok(Self { sorted: xs })
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.sorted
    }
}

impl Lifetime for Empirical {
    fn survival(&self, t: f64) -> f64 {
        let le = self.sorted.partition_point(|&x| x <= t);
        (self.sorted.len() - le) as f64 / self.sorted.len() as f64
    }

    fn quantile(&self, u: f64) -> f64 {
        if self.survival(0.0) <= u {
            return 0.0;
        }
        let n = self.sorted.len();
        let mut k = ((n as f64) * (1.0 - u)).ceil() as usize;
        k = k.clamp(1, n);
        // Repair float rounding at exact jump levels by the defining
        // inequality: return the smallest value with survival <= u.
        while k > 1 && self.survival(self.sorted[k - 2]) <= u {
            k -= 1;
        }
        while k < n && self.survival(self.sorted[k - 1]) > u {
            k += 1;
        }
        self.sorted[k - 1]
    }

    fn support_upper(&self) -> Option<f64> {
        self.sorted.last().copied()
    }

    fn atom_at_zero(&self) -> f64 {
        let zeros = self.sorted.partition_point(|&x| x <= 0.0);
        zeros as f64 / self.sorted.len() as f64
    }
}

/// Residual life of `base` at a given age: the law of `X - age` given
/// `X > age`.
///
/// When the base survival at the age is already zero there is nothing
/// left to live; the residual degenerates to a point mass at `0` and
/// [`Residual::is_exhausted`] reports it. Trajectory samplers treat that
/// state as absorbing.
#[derive(Clone)]
pub struct Residual {
    base: Arc<dyn Lifetime>,
    age: f64,
    s_age: f64,
}

impl Residual {
    pub fn new(base: Arc<dyn Lifetime>, age: f64) -> Result<Self> {
        if !age.is_finite() || age < 0.0 {
            return Err(Error::domain(format!("age must be finite and >= 0, got {age}")));
        }
        let s_age = base.survival(age);
        Ok(Self { base, age, s_age })
    }

    pub fn age(&self) -> f64 {
        self.age
    }

    /// True when the base law has no mass beyond the age.
    pub fn is_exhausted(&self) -> bool {
        self.s_age <= 0.0
    }
}

impl std::fmt::Debug for Residual {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Residual")
            .field("age", &self.age)
            .field("s_age", &self.s_age)
            .finish()
    }
}

impl Lifetime for Residual {
    fn survival(&self, z: f64) -> f64 {
        if z < 0.0 {
            return 1.0;
        }
        if self.s_age <= 0.0 {
            return 0.0;
        }
        (self.base.survival(self.age + z) / self.s_age).clamp(0.0, 1.0)
    }

    fn quantile(&self, u: f64) -> f64 {
        if self.s_age <= 0.0 {
            return 0.0;
        }
        let level = (u * self.s_age).max(f64::MIN_POSITIVE);
        (self.base.quantile(level) - self.age).max(0.0)
    }

    fn support_upper(&self) -> Option<f64> {
        if self.s_age <= 0.0 {
            return Some(0.0);
        }
        self.base.support_upper().map(|b| (b - self.age).max(0.0))
    }

    fn atom_at_zero(&self) -> f64 {
        if self.s_age <= 0.0 {
            1.0
        } else {
            1.0 - self.survival(0.0)
        }
    }

    fn hazard(&self, z: f64) -> Option<f64> {
        if self.s_age <= 0.0 {
            None
        } else {
            self.base.hazard(self.age + z)
        }
    }
}

/// The law of `base + shift`: delays every outcome by a fixed amount.
#[derive(Clone)]
pub struct Shifted {
    base: Arc<dyn Lifetime>,
    shift: f64,
}

impl Shifted {
    pub fn new(base: Arc<dyn Lifetime>, shift: f64) -> Result<Self> {
        if !shift.is_finite() || shift < 0.0 {
            return Err(Error::domain(format!("shift must be finite and >= 0, got {shift}")));
        }
        Ok(Self { base, shift })
    }
}

impl std::fmt::Debug for Shifted {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Shifted").field("shift", &self.shift).finish()
    }
}

impl Lifetime for Shifted {
    fn survival(&self, t: f64) -> f64 {
        if t < self.shift {
            1.0
        } else {
            self.base.survival(t - self.shift)
        }
    }

    fn quantile(&self, u: f64) -> f64 {
        if u >= 1.0 {
            // inf { t >= 0 : S(t) <= 1 } is 0 regardless of the shift.
            0.0
        } else {
            self.shift + self.base.quantile(u)
        }
    }

    fn support_upper(&self) -> Option<f64> {
        self.base.support_upper().map(|b| b + self.shift)
    }

    fn atom_at_zero(&self) -> f64 {
        if self.shift > 0.0 {
            0.0
        } else {
            self.base.atom_at_zero()
        }
    }

    fn hazard(&self, t: f64) -> Option<f64> {
        if t < self.shift {
            Some(0.0)
        } else {
            self.base.hazard(t - self.shift)
        }
    }
}
