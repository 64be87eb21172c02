//! Geometric grids on `(0, ∞)` and quadrature for `L^p_*(0,∞) = L^p(dt/t)`.
//!
//! A grid of `count` geometrically spaced nodes is read as a midpoint rule in
//! `u = ln t`: node `t_i` owns the cell `[t_i e^{-h/2}, t_i e^{h/2}]`, so the
//! cells tile `[lower_edge, upper_edge]`. Everything outside is supplied as
//! tail contributions by the caller.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogGrid {
    pub t_min: f64,
    pub t_max: f64,
    pub count: usize,
}

impl Default for LogGrid {
    /// `[1e-3, 1e3]` with 200 points.
    fn default() -> Self {
        Self {
            t_min: 1e-3,
            t_max: 1e3,
            count: 200,
        }
    }
}

impl LogGrid {
    pub fn new(t_min: f64, t_max: f64, count: usize) -> Result<Self> {
        if !(t_min > 0.0 && t_min.is_finite() && t_max.is_finite() && t_min < t_max) {
            return Err(Error::precondition(format!(
                "log grid needs 0 < t_min < t_max, got [{t_min}, {t_max}]"
            )));
        }
        if count < 2 {
            return Err(Error::precondition(format!(
                "log grid needs at least 2 points, got {count}"
            )));
        }
        Ok(Self { t_min, t_max, count })
    }

    /// Grid whose cells tile `[lo, hi]` exactly.
    pub fn tiling(lo: f64, hi: f64, count: usize) -> Result<Self> {
        if !(lo > 0.0 && lo < hi) || count < 2 {
            return Err(Error::precondition(format!(
                "cannot tile [{lo}, {hi}] with {count} cells"
            )));
        }
        let h = (hi / lo).ln() / count as f64;
        Self::new(lo * (h / 2.0).exp(), hi * (-h / 2.0).exp(), count)
    }

    /// Spacing `h` in `ln t`.
    pub fn log_step(&self) -> f64 {
        (self.t_max / self.t_min).ln() / (self.count - 1) as f64
    }

    pub fn points(&self) -> Vec<f64> {
        let h = self.log_step();
        let l0 = self.t_min.ln();
        (0..self.count)
            .map(|i| {
                if i == 0 {
                    self.t_min
                } else if i + 1 == self.count {
                    self.t_max
                } else {
                    (l0 + h * i as f64).exp()
                }
            })
            .collect()
    }

    pub fn lower_edge(&self) -> f64 {
        self.t_min * (-self.log_step() / 2.0).exp()
    }

    pub fn upper_edge(&self) -> f64 {
        self.t_max * (self.log_step() / 2.0).exp()
    }

    /// The image grid under `t ↦ t^α` (`α ≠ 0`), in ascending order.
    pub fn powered(&self, alpha: f64) -> Result<Self> {
        let (a, b) = (self.t_min.powf(alpha), self.t_max.powf(alpha));
        Self::new(a.min(b), a.max(b), self.count)
    }
}

/// An exponent `p ∈ [1, ∞]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LpExponent {
    Finite(f64),
    Infinity,
}

impl LpExponent {
    pub fn new(p: f64) -> Result<Self> {
        if p == f64::INFINITY {
            Ok(Self::Infinity)
        } else if p >= 1.0 && p.is_finite() {
            Ok(Self::Finite(p))
        } else {
            Err(Error::precondition(format!("exponent p must lie in [1, ∞], got {p}")))
        }
    }

    /// `1/p`, with `1/∞ = 0`.
    pub fn reciprocal(self) -> f64 {
        match self {
            Self::Finite(p) => 1.0 / p,
            Self::Infinity => 0.0,
        }
    }

    /// `x^{1/p}`, using the convention `x^{1/∞} = 1`.
    pub fn root(self, x: f64) -> f64 {
        match self {
            Self::Finite(p) => x.powf(1.0 / p),
            Self::Infinity => 1.0,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Self::Infinity)
    }

    pub fn to_json(self) -> serde_json::Value {
        match self {
            Self::Finite(p) => serde_json::json!(p),
            Self::Infinity => serde_json::json!("inf"),
        }
    }
}

impl fmt::Display for LpExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Finite(p) => write!(f, "{p}"),
            Self::Infinity => f.write_str("inf"),
        }
    }
}

impl FromStr for LpExponent {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "∞" => Ok(Self::Infinity),
            other => {
                let p: f64 = other
                    .parse()
                    .map_err(|_| Error::precondition(format!("cannot parse exponent {s:?}")))?;
                Self::new(p)
            }
        }
    }
}

/// Contributions from outside the grid cells.
///
/// For finite `p` these are the integrals `∫ f(t)^p dt/t` over
/// `(0, lower_edge)` and `(upper_edge, ∞)`; for `p = ∞` they are the suprema
/// of `f` over those ranges.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Tails {
    pub below: f64,
    pub above: f64,
}

impl Tails {
    pub const NONE: Tails = Tails { below: 0.0, above: 0.0 };

    /// Tails of `f(t) = c·t^γ` below `edge` (`γ > 0`).
    pub fn power_below(c: f64, gamma: f64, edge: f64, p: LpExponent) -> f64 {
        match p {
            LpExponent::Finite(p) => c.powf(p) * edge.powf(gamma * p) / (gamma * p),
            LpExponent::Infinity => c * edge.powf(gamma),
        }
    }

    /// Tails of `f(t) = c·t^{-γ}` above `edge` (`γ > 0`).
    pub fn power_above(c: f64, gamma: f64, edge: f64, p: LpExponent) -> f64 {
        match p {
            LpExponent::Finite(p) => c.powf(p) * edge.powf(-gamma * p) / (gamma * p),
            LpExponent::Infinity => c * edge.powf(-gamma),
        }
    }
}

/// `‖f‖_{L^p_*}` from samples of a nonnegative `f` on `grid`.
pub fn lp_star_norm(samples: &[f64], grid: &LogGrid, p: LpExponent, tails: Tails) -> Result<f64> {
    check_samples(samples, grid)?;
    Ok(match p {
        LpExponent::Finite(p) => {
            let h = grid.log_step();
            let body: f64 = samples.iter().map(|f| f.powf(p)).sum::<f64>() * h;
            (body + tails.below + tails.above).powf(1.0 / p)
        }
        LpExponent::Infinity => samples
            .iter()
            .copied()
            .chain([tails.below, tails.above])
            .fold(0.0, f64::max),
    })
}

/// Rough size of the quadrature error of [`lp_star_norm`] on the grid cells.
///
/// For finite `p` the midpoint error on a cell is `h³ g''/24` with
/// `g(u) = f(e^u)^p`; the curvature is taken from absolute second
/// differences so kinks are not cancelled out. For `p = ∞` it is the
/// largest jump next to the sampled maximum.
pub fn lp_star_quadrature_error(samples: &[f64], grid: &LogGrid, p: LpExponent, norm: f64) -> f64 {
    let n = samples.len();
    if n < 3 || norm == 0.0 {
        return 0.0;
    }
    match p {
        LpExponent::Finite(p) => {
            let g: Vec<f64> = samples.iter().map(|f| f.powf(p)).collect();
            let h = grid.log_step();
            let curvature: f64 = g.windows(3).map(|w| (w[2] - 2.0 * w[1] + w[0]).abs()).sum();
            let integral_err = curvature * h / 24.0;
            // d(I^{1/p}) = I^{1/p - 1} dI / p
            norm * integral_err / (p * norm.powf(p))
        }
        LpExponent::Infinity => {
            let (i, _) = samples.iter().enumerate().fold(
                (0, f64::NEG_INFINITY),
                |acc, (i, &f)| if f > acc.1 { (i, f) } else { acc },
            );
            let left = if i > 0 {
                (samples[i] - samples[i - 1]).abs()
            } else {
                0.0
            };
            let right = if i + 1 < n {
                (samples[i] - samples[i + 1]).abs()
            } else {
                0.0
            };
            left.max(right)
        }
    }
}

fn check_samples(samples: &[f64], grid: &LogGrid) -> Result<()> {
    if samples.len() != grid.count {
        return Err(Error::DimensionMismatch {
            expected: grid.count,
            found: samples.len(),
        });
    }
    if samples.iter().any(|f| f.is_nan() || *f < 0.0) {
        return Err(Error::precondition("L^p_* integrand must be nonnegative"));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    fn indicator(grid: &LogGrid, lo: f64, hi: f64) -> Vec<f64> {
        grid.points()
            .iter()
            .map(|&t| if (lo..=hi).contains(&t) { 1.0 } else { 0.0 })
            .collect()
    }

    #[test]
    fn indicator_of_one_to_e_has_unit_norm() {
        let g = LogGrid::tiling(1.0, E, 64).unwrap();
        let v = lp_star_norm(&indicator(&g, 1.0, E), &g, LpExponent::Finite(1.0), Tails::NONE).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_function_has_zero_norm() {
        let g = LogGrid::default();
        for p in [LpExponent::Finite(1.0), LpExponent::Finite(2.5), LpExponent::Infinity] {
            assert_eq!(lp_star_norm(&vec![0.0; g.count], &g, p, Tails::NONE).unwrap(), 0.0);
        }
    }

    #[test]
    fn scaling_law_on_indicator() {
        // ‖1_[1,e]‖ = 1 and f(t²) = 1_[1,√e], whose norm is 1/2: 1 = 2¹·(1/2).
        let g = LogGrid::tiling(1.0, E.sqrt(), 64).unwrap();
        let v = lp_star_norm(&indicator(&g, 1.0, E.sqrt()), &g, LpExponent::Finite(1.0), Tails::NONE).unwrap();
        assert!((2.0 * v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(LogGrid::new(1.0, 1.0, 10).is_err());
        assert!(LogGrid::new(0.0, 1.0, 10).is_err());
        assert!(LogGrid::new(1.0, 2.0, 1).is_err());
        assert!(LpExponent::new(0.5).is_err());
        let g = LogGrid::new(1.0, 2.0, 3).unwrap();
        assert!(lp_star_norm(&[1.0, 2.0], &g, LpExponent::Infinity, Tails::NONE).is_err());
        assert!(lp_star_norm(&[1.0, -2.0, 0.0], &g, LpExponent::Infinity, Tails::NONE).is_err());
    }

    #[test]
    fn parses_exponents() {
        assert_eq!("inf".parse::<LpExponent>().unwrap(), LpExponent::Infinity);
        assert_eq!("2".parse::<LpExponent>().unwrap(), LpExponent::Finite(2.0));
        assert!("0.3".parse::<LpExponent>().is_err());
        assert_eq!(LpExponent::Infinity.root(7.0), 1.0);
    }

    #[test]
    fn grid_points_are_geometric() {
        let g = LogGrid::default();
        let pts = g.points();
        assert_eq!(pts.len(), 200);
        assert_eq!(pts[0], 1e-3);
        assert_eq!(pts[199], 1e3);
        let r = pts[1] / pts[0];
        for w in pts.windows(2) {
            assert!((w[1] / w[0] - r).abs() < 1e-12);
        }
        let p = g.powered(-2.0).unwrap();
        assert!((p.t_min - 1e-6).abs() < 1e-18 && (p.t_max - 1e6).abs() < 1e-6);
    }

    #[test]
    fn power_tails_match_closed_forms() {
        // ∫_0^1 (t^{1/2})² dt/t = 1, sup_{t>4} 3 t^{-1/2} = 1.5
        let below = Tails::power_below(1.0, 0.5, 1.0, LpExponent::Finite(2.0));
        assert!((below - 1.0).abs() < 1e-15);
        assert_eq!(Tails::power_above(3.0, 0.5, 4.0, LpExponent::Infinity), 1.5);
    }
}
