//! The resolvent functional `ψ_x` on a ray, the norm `‖x‖*_{θ,p}` built from
//! it, and the explicit splitting `x = a + b` obtained by expanding
//! `Q_s(T)^n Q_s(T)^{-n}` term by term.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::qlinalg::QVector;
use crate::spectral::{OperatorModel, ResolventFactors};

use super::lpstar::{lp_star_norm, lp_star_quadrature_error, LogGrid, LpExponent, Tails};
use super::norms::check_theta;

/// `‖x‖*_{θ,p}` with the quadrature error of its integral part.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StarNorm {
    pub value: f64,
    pub quad_err: f64,
}

/// Pseudo-resolvents `Q_{te^{iω}}(T)^{-1}` along a grid of the ray.
pub struct RayResolvents {
    omega: f64,
    grid: LogGrid,
    ts: Vec<f64>,
    factors: Vec<ResolventFactors>,
}

impl RayResolvents {
    pub fn new(model: &OperatorModel, omega: f64, grid: &LogGrid) -> Result<Self> {
        let ts = grid.points();
        let factors = ts
            .par_iter()
            .map(|&t| model.resolvent_factors_on_ray(t, omega))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            omega,
            grid: *grid,
            ts,
            factors,
        })
    }

    pub fn grid(&self) -> &LogGrid {
        &self.grid
    }

    pub fn ts(&self) -> &[f64] {
        &self.ts
    }

    /// `ψ_x(t_i)`.
    pub fn psi_at(&self, i: usize, n: u32, x: &QVector) -> f64 {
        psi_from(&self.factors[i], n, self.ts[i], x)
    }

    pub fn psi_profile(&self, n: u32, x: &QVector) -> Vec<f64> {
        (0..self.ts.len()).map(|i| self.psi_at(i, n, x)).collect()
    }

    /// `‖x‖ + ‖t^{nθ} ψ_x(t)‖_{L^p_*}`.
    ///
    /// Outside the grid `ψ_x` is continued by its asymptotic shape: constant
    /// towards `t → 0` and decaying like `t^{−n}` towards `t → ∞`, anchored at
    /// the end points of the grid.
    pub fn star_norm(&self, n: u32, theta: f64, p: LpExponent, x: &QVector) -> Result<StarNorm> {
        check_theta(theta)?;
        if n == 0 {
            return Err(Error::precondition("ψ needs n ≥ 1"));
        }
        if x.is_zero() {
            return Ok(StarNorm {
                value: 0.0,
                quad_err: 0.0,
            });
        }
        let nt = n as f64 * theta;
        let psi = self.psi_profile(n, x);
        let samples: Vec<f64> = self.ts.iter().zip(&psi).map(|(&t, &v)| t.powf(nt) * v).collect();
        let t1 = self.ts[self.ts.len() - 1];
        let tails = Tails {
            below: Tails::power_below(psi[0], nt, self.grid.lower_edge(), p),
            above: Tails::power_above(
                psi[psi.len() - 1] * t1.powi(n as i32),
                n as f64 * (1.0 - theta),
                self.grid.upper_edge(),
                p,
            ),
        };
        let integral = lp_star_norm(&samples, &self.grid, p, tails)?;
        Ok(StarNorm {
            value: x.norm() + integral,
            quad_err: lp_star_quadrature_error(&samples, &self.grid, p, integral),
        })
    }

    /// The splitting of [`proof_decomposition`] at `t_i`.
    pub fn decomposition_at(&self, i: usize, n: u32, x: &QVector) -> (QVector, QVector) {
        split_from(&self.factors[i], self.omega, n, n + 1, self.ts[i], x)
    }

    /// The general splitting of [`trinomial_split`] at `t_i`.
    pub fn trinomial_split_at(&self, i: usize, power: u32, threshold: u32, x: &QVector) -> (QVector, QVector) {
        split_from(&self.factors[i], self.omega, power, threshold, self.ts[i], x)
    }
}

fn psi_from(f: &ResolventFactors, n: u32, t: f64, x: &QVector) -> f64 {
    if n.is_multiple_of(2) {
        f.apply(n, n / 2, x).norm()
    } else {
        let m = n.div_ceil(2);
        f.apply(n + 1, m, x).norm() + t * f.apply(n, m, x).norm()
    }
}

fn factorial(k: u32) -> f64 {
    (1..=k).map(f64::from).product()
}

/// Expands `x = Q^m Q^{-m} x` with `Q = T² − 2t cos ω T + t²` into terms
/// `m!/(α!β!γ!)·(−2cos ω)^β t^{β+2γ} T^{2α+β} Q^{-m} x` and collects those
/// with `2α+β ≥ threshold` into `a`; `b = x − a`.
fn split_from(f: &ResolventFactors, omega: f64, power: u32, threshold: u32, t: f64, x: &QVector) -> (QVector, QVector) {
    let powers: Vec<QVector> = (0..=2 * power).map(|d| f.apply(d, power, x)).collect();
    let c = -2.0 * omega.cos();
    let mut a = QVector::zeros(x.len());
    for alpha in 0..=power {
        for beta in 0..=(power - alpha) {
            let gamma = power - alpha - beta;
            let degree = 2 * alpha + beta;
            if degree < threshold {
                continue;
            }
            let coeff = factorial(power) / (factorial(alpha) * factorial(beta) * factorial(gamma))
                * c.powi(beta as i32)
                * t.powi((beta + 2 * gamma) as i32);
            a.axpy(coeff, &powers[degree as usize]);
        }
    }
    let b = x - &a;
    (a, b)
}

/// `ψ_x(t)`: `‖T^n Q^{−n/2} x‖` for even `n`, and
/// `‖T^{n+1} Q^{−(n+1)/2} x‖ + t‖T^n Q^{−(n+1)/2} x‖` for odd `n`, with
/// `Q = Q_{te^{iω}}(T)`.
pub fn psi(model: &OperatorModel, omega: f64, n: u32, t: f64, x: &QVector) -> Result<f64> {
    if n == 0 {
        return Err(Error::precondition("ψ needs n ≥ 1"));
    }
    Ok(psi_from(&model.resolvent_factors_on_ray(t, omega)?, n, t, x))
}

/// `‖x‖*_{θ,p}` on the default ray grid.
pub fn interp_norm_star(
    model: &OperatorModel,
    omega: f64,
    n: u32,
    theta: f64,
    p: LpExponent,
    x: &QVector,
) -> Result<StarNorm> {
    RayResolvents::new(model, omega, &LogGrid::default())?.star_norm(n, theta, p, x)
}

/// The splitting `x = a + b` at the ray point `te^{iω}`: terms of the
/// expansion of `Q^n Q^{-n} x` with `2α+β ≥ n+1` go to `a`, the rest to `b`.
pub fn proof_decomposition(
    model: &OperatorModel,
    omega: f64,
    n: u32,
    t: f64,
    x: &QVector,
) -> Result<(QVector, QVector)> {
    trinomial_split(model, omega, n, n + 1, t, x)
}

/// Like [`proof_decomposition`] for the expansion of `Q^power` with an
/// arbitrary degree threshold.
pub fn trinomial_split(
    model: &OperatorModel,
    omega: f64,
    power: u32,
    threshold: u32,
    t: f64,
    x: &QVector,
) -> Result<(QVector, QVector)> {
    if power == 0 {
        return Err(Error::precondition("the expansion needs a positive power"));
    }
    Ok(split_from(
        &model.resolvent_factors_on_ray(t, omega)?,
        omega,
        power,
        threshold,
        t,
        x,
    ))
}
