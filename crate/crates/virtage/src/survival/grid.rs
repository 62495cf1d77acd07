use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::survival::Lifetime;

/// Finite evaluation grid for class checks and curve comparisons.
///
/// Points are sorted ascending and deduplicated on construction.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Grid {
    points: Vec<f64>,
}

impl Grid {
    /// Grid from explicit points; must yield at least two distinct
    /// finite nonnegative values.
    pub fn from_points(mut points: Vec<f64>) -> Result<Self> {
        if points.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::domain("grid points must be finite and >= 0".to_string()));
        }
        points.sort_by(|a, b| a.partial_cmp(b).expect("grid points are finite"));
        points.dedup();
        if points.len() < 2 {
            return Err(Error::GridTooSmall(format!(
                "need at least 2 distinct points, got {}",
                points.len()
            )));
        }
        Ok(Self { points })
    }

    /// `n` equally spaced points on `[lo, hi]`.
    pub fn uniform(lo: f64, hi: f64, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::GridTooSmall(format!("need at least 2 points, got {n}")));
        }
        if !(lo.is_finite() && hi.is_finite()) || lo < 0.0 || hi <= lo {
            return Err(Error::domain(format!(
                "need 0 <= lo < hi with both finite, got [{lo}, {hi}]"
            )));
        }
        let step = (hi - lo) / (n - 1) as f64;
        Self::from_points((0..n).map(|i| lo + step * i as f64).collect())
    }

    /// `n` log-spaced points on `[lo, hi]`, `lo > 0`; resolves the origin
    /// region more finely than a uniform grid of the same size.
    pub fn log_spaced(lo: f64, hi: f64, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::GridTooSmall(format!("need at least 2 points, got {n}")));
        }
        if !(lo.is_finite() && hi.is_finite()) || lo <= 0.0 || hi <= lo {
            return Err(Error::domain(format!(
                "need 0 < lo < hi with both finite, got [{lo}, {hi}]"
            )));
        }
        let (llo, lhi) = (lo.ln(), hi.ln());
        let step = (lhi - llo) / (n - 1) as f64;
        Self::from_points((0..n).map(|i| (llo + step * i as f64).exp()).collect())
    }

    /// Grid at the quantiles of a lifetime: `n` points at survival levels
    /// equally spaced strictly inside `(0, 1)`. Places resolution where
    /// the distribution has mass, independent of its scale.
    pub fn from_quantiles(x: &dyn Lifetime, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::GridTooSmall(format!("need at least 2 points, got {n}")));
        }
        let pts = (1..=n)
            .map(|i| x.quantile(i as f64 / (n + 1) as f64))
            .collect();
        Self::from_points(pts)
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::survival::Exponential;

    #[test]
    fn uniform_endpoints_and_spacing() {
        let g = Grid::uniform(0.0, 2.0, 5).unwrap();
        assert_eq!(g.points(), &[0.0, 0.5, 1.0, 1.5, 2.0]);
    }

    #[test]
    fn log_spacing_is_geometric() {
        let g = Grid::log_spaced(0.01, 100.0, 5).unwrap();
        let p = g.points();
        assert_eq!(p.len(), 5);
        for w in p.windows(2) {
            assert!((w[1] / w[0] - 10.0).abs() < 1e-9);
        }
    }

    #[test]
    fn quantile_grid_tracks_distribution_scale() {
        let fast = Exponential::new(10.0).unwrap();
        let slow = Exponential::new(0.1).unwrap();
        let gf = Grid::from_quantiles(&fast, 9).unwrap();
        let gs = Grid::from_quantiles(&slow, 9).unwrap();
        let max_f = *gf.points().last().unwrap();
        let max_s = *gs.points().last().unwrap();
        assert!((max_s / max_f - 100.0).abs() < 1e-6, "{max_s} vs {max_f}");
    }

    #[test]
    fn rejects_degenerate_inputs() {
        assert!(Grid::uniform(0.0, 1.0, 1).is_err());
        assert!(Grid::uniform(1.0, 1.0, 5).is_err());
        assert!(Grid::uniform(-1.0, 1.0, 5).is_err());
        assert!(Grid::log_spaced(0.0, 1.0, 5).is_err());
        assert!(Grid::from_points(vec![1.0, 1.0]).is_err());
        assert!(Grid::from_points(vec![f64::NAN, 1.0]).is_err());
    }

    #[test]
    fn from_points_sorts_and_dedups() {
        let g = Grid::from_points(vec![3.0, 1.0, 2.0, 1.0]).unwrap();
        assert_eq!(g.points(), &[1.0, 2.0, 3.0]);
    }
}
