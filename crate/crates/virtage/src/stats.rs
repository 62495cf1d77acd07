//! Small statistical helpers shared by the estimators and checkers:
//! normal quantiles, the two-sample Kolmogorov-Smirnov statistic, and
//! moment estimates with plug-in standard errors.

use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// Upper quantile of the standard normal: the `z` with `P(Z > z) = alpha`.
pub fn normal_upper_quantile(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::domain(format!(
            "significance level must lie in (0, 1), got {alpha}"
        )));
    }
    let n = Normal::new(0.0, 1.0).expect("unit normal");
    Ok(n.inverse_cdf(1.0 - alpha))
}

/// Two-sample Kolmogorov-Smirnov statistic: the largest absolute gap
/// between the two empirical distribution functions. Ties are handled by
/// advancing both samples past each distinct value before comparing.
pub fn ks_statistic(xs: &[f64], ys: &[f64]) -> f64 {
    let mut a = xs.to_vec();
    let mut b = ys.to_vec();
    a.sort_unstable_by(|p, q| p.partial_cmp(q).expect("non-finite sample"));
    b.sort_unstable_by(|p, q| p.partial_cmp(q).expect("non-finite sample"));
    let (n1, n2) = (a.len() as f64, b.len() as f64);

    let (mut i, mut j) = (0usize, 0usize);
    let mut d = 0.0f64;
    while i < a.len() || j < b.len() {
        let t = match (a.get(i), b.get(j)) {
            (Some(x), Some(y)) => x.min(*y),
            (Some(x), None) => *x,
            (None, Some(y)) => *y,
            (None, None) => break,
        };
        while i < a.len() && a[i] <= t {
            i += 1;
        }
        while j < b.len() && b[j] <= t {
            j += 1;
        }
        d = d.max((i as f64 / n1 - j as f64 / n2).abs());
    }
    d
}

/// Asymptotic two-sample KS critical value at level `alpha`.
pub fn ks_critical(n1: usize, n2: usize, alpha: f64) -> Result<f64> {
    if n1 == 0 || n2 == 0 {
        return Err(Error::domain("KS test needs nonempty samples"));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::domain(format!(
            "significance level must lie in (0, 1), got {alpha}"
        )));
    }
    let c = (-(alpha / 2.0).ln() / 2.0).sqrt();
    Ok(c * (((n1 + n2) as f64) / (n1 as f64 * n2 as f64)).sqrt())
}

/// Sample mean and its standard error.
pub fn mean_with_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Sample covariance of paired observations with the plug-in standard
/// error of the covariance estimator (standard deviation of the centred
/// products over sqrt(n)).
pub fn sample_cov_with_se(fs: &[f64], gs: &[f64]) -> Result<(f64, f64)> {
    if fs.len() != gs.len() || fs.len() < 2 {
        return Err(Error::domain(
            "covariance needs two paired samples of equal length >= 2",
        ));
    }
    let n = fs.len() as f64;
    let fbar = fs.iter().sum::<f64>() / n;
    let gbar = gs.iter().sum::<f64>() / n;
    let products: Vec<f64> = fs
        .iter()
        .zip(gs)
        .map(|(f, g)| (f - fbar) * (g - gbar))
        .collect();
    let cov = products.iter().sum::<f64>() / (n - 1.0);
    let pm = products.iter().sum::<f64>() / n;
    let pvar = products.iter().map(|w| (w - pm) * (w - pm)).sum::<f64>() / (n - 1.0);
    Ok((cov, (pvar / n).sqrt()))
}
