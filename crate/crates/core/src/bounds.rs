//! Closed-form constants of the inequalities checked by this crate.
//!
//! `m_const` is always the sectoriality constant `M` of the ray in use.

use crate::interpolation::LpExponent;

fn ceil_half(n: u32) -> i32 {
    n.div_ceil(2) as i32
}

/// `(1+3M)^m / |s|^{2m−n}`, the bound on `‖T^n Q_s^{-m}(T)‖` for `0 ≤ n ≤ 2m`.
pub fn power_resolvent_bound(m_const: f64, n: u32, m: u32, s_abs: f64) -> f64 {
    (1.0 + 3.0 * m_const).powi(m as i32) / s_abs.powi(2 * m as i32 - n as i32)
}

/// `max{1 + (4+12M)^m |s|^n, (4+12M)^m / |s|^{m−n}}`, the constant of
/// `‖x‖_{D(T^n)} ≤ C ‖x‖_{D(T^m)}` for `n ≤ m` obtained from a resolvent point `s`.
pub fn embedding_constant(m_const: f64, n: u32, m: u32, s_abs: f64) -> f64 {
    let c = (4.0 + 12.0 * m_const).powi(m as i32);
    (1.0 + c * s_abs.powi(n as i32)).max(c / s_abs.powi(m as i32 - n as i32))
}

/// Constant of `‖T^k x‖ ≤ C ‖T^n x‖^{(m−k)/(m−n)} ‖T^m x‖^{(k−n)/(m−n)}`.
///
/// For `m = k+1` with `j = k−n` it is `(j+1)·4^{j/(j+1)}·(1+3M)^{j(j+2)/(j+1)}`;
/// larger `m` chain `C_{n,k,m+1} = C_{n,k,m}·C_{n,m,m+1}^{(k−n)/(m−n)}`.
pub fn moment_constant(m_const: f64, n: u32, k: u32, m: u32) -> f64 {
    assert!(n < k && k < m, "moment constant needs n < k < m");
    let adjacent = |k: u32| {
        let j = (k - n) as f64;
        (j + 1.0) * 4f64.powf(j / (j + 1.0)) * (1.0 + 3.0 * m_const).powf(j * (j + 2.0) / (j + 1.0))
    };
    let mut c = adjacent(k);
    for top in (k + 1)..m {
        c *= adjacent(top).powf((k - n) as f64 / (top - n) as f64);
    }
    c
}

/// `‖t^{−θ} min(1,t)‖_{L^p_*} = (1/(θp) + 1/((1−θ)p))^{1/p}`, and `1` for `p = ∞`.
pub fn min_profile_norm(theta: f64, p: LpExponent) -> f64 {
    match p {
        LpExponent::Finite(p) => (1.0 / (theta * p) + 1.0 / ((1.0 - theta) * p)).powf(1.0 / p),
        LpExponent::Infinity => 1.0,
    }
}

/// `2(1+3M)^{⌈n/2⌉}`, the factor in `ψ_x(t) ≤ c·K(t^{−n}, x)`.
pub fn psi_k_factor(m_const: f64, n: u32) -> f64 {
    2.0 * (1.0 + 3.0 * m_const).powi(ceil_half(n))
}

/// Constant of `‖x‖*_{θ,p} ≤ C ‖x‖_{θ,p}` for the couple `(X, D(T^n))`:
/// `1/N_{θ,p} + 2(1+3M)^{⌈n/2⌉} n^{−1/p}` with `N_{θ,p}` from [`min_profile_norm`].
pub fn star_forward_constant(m_const: f64, n: u32, theta: f64, p: LpExponent) -> f64 {
    1.0 / min_profile_norm(theta, p) + psi_k_factor(m_const, n) / p.root(n as f64)
}

/// `(M₁, M₂) = (4ⁿ(1+3M)^{⌊n/2⌋}, 4ⁿ(1+3M)ⁿ)`, the growth factors of the two
/// halves of the trinomial decomposition.
pub fn decomposition_factors(m_const: f64, n: u32) -> (f64, f64) {
    let four_n = 4f64.powi(n as i32);
    let base = 1.0 + 3.0 * m_const;
    (four_n * base.powi((n / 2) as i32), four_n * base.powi(n as i32))
}

/// Constant of `‖x‖_{θ,p} ≤ C ‖x‖*_{θ,p}`:
/// `max{p^{−1/p}(θ^{−1/p} + M₂(1−θ)^{−1/p}), M₁ n^{1/p}}`.
pub fn star_backward_constant(m_const: f64, n: u32, theta: f64, p: LpExponent) -> f64 {
    let (m1, m2) = decomposition_factors(m_const, n);
    let tails = match p {
        LpExponent::Finite(p) => p.powf(-1.0 / p) * (theta.powf(-1.0 / p) + m2 * (1.0 - theta).powf(-1.0 / p)),
        LpExponent::Infinity => 1.0 + m2,
    };
    tails.max(m1 * p.root(n as f64))
}

/// Constant of `K(t,x) ≤ C t^{(k−n)/(m−n)} ‖x‖_{D(T^k)}` on `(D(T^n), D(T^m))`
/// for `t ≥ 1`: [`embedding_constant`] at `|s| = 1`.
pub fn k_large_t_constant(m_const: f64, n: u32, m: u32) -> f64 {
    embedding_constant(m_const, n, m, 1.0)
}

/// Same inequality for `0 < t ≤ 1`: `3(4+12M)^m`.
pub fn k_small_t_constant(m_const: f64, m: u32) -> f64 {
    3.0 * (4.0 + 12.0 * m_const).powi(m as i32)
}

/// `‖x‖_{θ,q} ≤ C ‖x‖_{θ,p}` for `p ≤ q`: `C = (θ(1−θ)p)^{1/p − 1/q}`.
pub fn exponent_chain_constant(theta: f64, p: LpExponent, q: LpExponent) -> f64 {
    match p {
        LpExponent::Finite(pv) => (theta * (1.0 - theta) * pv).powf(p.reciprocal() - q.reciprocal()),
        LpExponent::Infinity => 1.0,
    }
}

/// `K(1,x) ≤ C ‖x‖_{θ,q}` with `C = (θ(1−θ)q)^{1/q}` (`1` for `q = ∞`).
pub fn sum_embedding_constant(theta: f64, q: LpExponent) -> f64 {
    match q {
        LpExponent::Finite(qv) => (theta * (1.0 - theta) * qv).powf(1.0 / qv),
        LpExponent::Infinity => 1.0,
    }
}
