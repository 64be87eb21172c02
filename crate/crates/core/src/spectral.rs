//! `Q_s(T)`, the S-spectrum, ray sectoriality and the resolvent estimates
//! built on them.

use std::collections::BTreeMap;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::bounds;
use crate::error::{Error, Result};
use crate::interpolation::LogGrid;
use crate::qlinalg::{dedup_spheres, QMatrix, QVector, SINGULAR_RCOND};
use crate::quaternion::{ray_point, ImaginaryUnit, Quaternion, Sphere};
use crate::report::{Tally, VerificationReport};

/// Safety factor applied to a grid-measured sectoriality constant.
pub const M_SAFETY: f64 = 0.01;

/// Angular tolerance used to decide that an eigen-sphere sits on a ray.
const RAY_ANGLE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum OperatorModel {
    Dense(QMatrix),
    Diagonal(Vec<Quaternion>),
}

/// On-disk form of an [`OperatorModel`].
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum OperatorSpec {
    Dense { n: usize, entries: Vec<Quaternion> },
    Diagonal { entries: Vec<Quaternion> },
}

impl OperatorModel {
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: OperatorSpec = serde_json::from_str(text).map_err(|e| Error::InvalidOperator(e.to_string()))?;
        let model = match spec {
            OperatorSpec::Dense { n, entries } => {
                if entries.len() != n * n {
                    return Err(Error::InvalidOperator(format!(
                        "dense operator with n = {n} needs {} entries, found {}",
                        n * n,
                        entries.len()
                    )));
                }
                OperatorModel::Dense(QMatrix::from_row_major(n, entries)?)
            }
            OperatorSpec::Diagonal { entries } => OperatorModel::Diagonal(entries),
        };
        if model.dim() == 0 {
            return Err(Error::InvalidOperator("operator has dimension 0".into()));
        }
        let finite = match &model {
            OperatorModel::Dense(t) => t.entries().iter().all(|q| q.norm().is_finite()),
            OperatorModel::Diagonal(d) => d.iter().all(|q| q.norm().is_finite()),
        };
        if !finite {
            return Err(Error::InvalidOperator("non-finite entry".into()));
        }
        Ok(model)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        let spec = match self {
            OperatorModel::Dense(t) => OperatorSpec::Dense {
                n: t.dim(),
                entries: t.entries().to_vec(),
            },
            OperatorModel::Diagonal(d) => OperatorSpec::Diagonal { entries: d.clone() },
        };
        serde_json::to_string(&spec).expect("operator specs always serialize")
    }

    pub fn dim(&self) -> usize {
        match self {
            OperatorModel::Dense(t) => t.dim(),
            OperatorModel::Diagonal(d) => d.len(),
        }
    }

    pub fn identity(n: usize) -> Self {
        OperatorModel::Diagonal(vec![Quaternion::ONE; n])
    }

    pub fn to_dense(&self) -> QMatrix {
        match self {
            OperatorModel::Dense(t) => t.clone(),
            OperatorModel::Diagonal(d) => QMatrix::diagonal(d),
        }
    }

    pub fn apply(&self, v: &QVector) -> Result<QVector> {
        if v.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: v.len(),
            });
        }
        Ok(self.act(v))
    }

    pub(crate) fn act(&self, v: &QVector) -> QVector {
        match self {
            OperatorModel::Dense(t) => t.apply(v),
            OperatorModel::Diagonal(d) => QVector(d.iter().zip(v.iter()).map(|(&q, &x)| q * x).collect()),
        }
    }

    /// `T^k v` without forming the power.
    pub(crate) fn act_pow(&self, k: u32, v: &QVector) -> QVector {
        (0..k).fold(v.clone(), |acc, _| self.act(&acc))
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &OperatorModel) -> OperatorModel {
        match (self, other) {
            (OperatorModel::Diagonal(a), OperatorModel::Diagonal(b)) => {
                OperatorModel::Diagonal(a.iter().zip(b).map(|(&x, &y)| x * y).collect())
            }
            _ => OperatorModel::Dense(&self.to_dense() * &other.to_dense()),
        }
    }

    pub fn pow(&self, k: u32) -> OperatorModel {
        match self {
            OperatorModel::Dense(t) => OperatorModel::Dense(t.pow(k)),
            OperatorModel::Diagonal(d) => OperatorModel::Diagonal(d.iter().map(|q| q.powi(k)).collect()),
        }
    }

    pub fn op_norm(&self) -> f64 {
        match self {
            OperatorModel::Dense(t) => t.op_norm(),
            OperatorModel::Diagonal(d) => d.iter().map(|q| q.norm()).fold(0.0, f64::max),
        }
    }

    /// `T² − 2 Re(s) T + |s|²`.
    pub fn q_op(&self, s: Quaternion) -> OperatorModel {
        self.q_op_parts(s.re(), s.norm_sqr())
    }

    /// `Q_s(T)` for `s = t e^{iω}`; only `t` and `ω` enter, so no unit is needed.
    pub fn q_op_on_ray(&self, t: f64, omega: f64) -> OperatorModel {
        self.q_op_parts(t * omega.cos(), t * t)
    }

    fn q_op_parts(&self, s0: f64, s2: f64) -> OperatorModel {
        match self {
            OperatorModel::Dense(t) => {
                let q = &(t * t) - &t.scale(2.0 * s0);
                OperatorModel::Dense(q.add_identity(Quaternion::real(s2)))
            }
            OperatorModel::Diagonal(d) => OperatorModel::Diagonal(
                d.iter()
                    .map(|&q| q * q - q.scale(2.0 * s0) + Quaternion::real(s2))
                    .collect(),
            ),
        }
    }

    pub fn in_resolvent_set(&self, s: Quaternion) -> bool {
        match self {
            OperatorModel::Diagonal(d) => !d.iter().any(|q| q.same_sphere(s)),
            OperatorModel::Dense(_) => match self.q_op(s) {
                OperatorModel::Dense(q) => q.complex_adjoint().rcond() > SINGULAR_RCOND,
                OperatorModel::Diagonal(_) => unreachable!("dense models stay dense"),
            },
        }
    }

    /// The pseudo S-resolvent `Q_s(T)^{-1}`.
    pub fn pseudo_resolvent(&self, s: Quaternion) -> Result<OperatorModel> {
        self.invert_q(self.q_op(s), s, s.norm())
    }

    /// `Q_{te^{iω}}(T)^{-1}`, built from `t` and `ω` alone.
    pub fn pseudo_resolvent_on_ray(&self, t: f64, omega: f64) -> Result<OperatorModel> {
        let s = ray_point(t, omega, ImaginaryUnit::E1)?;
        self.invert_q(self.q_op_on_ray(t, omega), s, t)
    }

    fn invert_q(&self, q: OperatorModel, s: Quaternion, t: f64) -> Result<OperatorModel> {
        let spectral = || Error::Spectral { t, s };
        match q {
            // `inverse` applies the same conditioning test as `in_resolvent_set`.
            OperatorModel::Dense(q) => q.inverse().map(OperatorModel::Dense).map_err(|_| spectral()),
            OperatorModel::Diagonal(_) if !self.in_resolvent_set(s) => Err(spectral()),
            OperatorModel::Diagonal(d) => d
                .iter()
                .map(|q| q.inverse().map_err(|_| spectral()))
                .collect::<Result<Vec<_>>>()
                .map(OperatorModel::Diagonal),
        }
    }

    /// `[Q^{-1}, Q^{-1}T, Q^{-1}T²]` for `Q = Q_s(T)`, each obtained by a
    /// linear solve rather than by multiplying an explicit inverse.
    pub fn resolvent_factors(&self, s: Quaternion) -> Result<ResolventFactors> {
        self.factors_of(self.q_op(s), s, s.norm())
    }

    /// [`OperatorModel::resolvent_factors`] at `s = te^{iω}`.
    pub fn resolvent_factors_on_ray(&self, t: f64, omega: f64) -> Result<ResolventFactors> {
        let s = ray_point(t, omega, ImaginaryUnit::E1)?;
        self.factors_of(self.q_op_on_ray(t, omega), s, t)
    }

    fn factors_of(&self, q: OperatorModel, s: Quaternion, t: f64) -> Result<ResolventFactors> {
        match (self, q) {
            (OperatorModel::Dense(a), OperatorModel::Dense(q)) => {
                let rhs = [QMatrix::identity(a.dim()), a.clone(), a * a];
                let mut solved = rhs.iter().map(|r| q.solve_matrix(r).map(OperatorModel::Dense));
                let mut next = || {
                    solved
                        .next()
                        .expect("three factors")
                        .map_err(|_| Error::Spectral { t, s })
                };
                Ok(ResolventFactors([next()?, next()?, next()?]))
            }
            (OperatorModel::Diagonal(d), q) => {
                let OperatorModel::Diagonal(qinv) = self.invert_q(q, s, t)? else {
                    unreachable!("diagonal models stay diagonal")
                };
                let factor =
                    |j: u32| OperatorModel::Diagonal(qinv.iter().zip(d).map(|(&r, &l)| r * l.powi(j)).collect());
                Ok(ResolventFactors([factor(0), factor(1), factor(2)]))
            }
            (OperatorModel::Dense(_), OperatorModel::Diagonal(_)) => unreachable!("dense models stay dense"),
        }
    }

    /// Canonical representatives of `σ_S(T)`, sorted by `(Re, |Im|)`.
    pub fn s_spectrum(&self) -> Vec<Sphere> {
        match self {
            OperatorModel::Dense(t) => t.eigen_spheres(),
            OperatorModel::Diagonal(d) => {
                let scale = d.iter().map(|q| q.norm()).fold(1.0, f64::max);
                dedup_spheres(d.iter().map(|q| q.sphere()).collect(), 1e-12 * scale)
            }
        }
    }

    /// The first `t > 0` with `t·e^{iω} ∈ σ_S(T)`, if the ray meets the spectrum.
    pub fn ray_spectral_hit(&self, omega: f64) -> Option<f64> {
        self.s_spectrum()
            .into_iter()
            .filter(|sp| sp.modulus() > 0.0 && (sp.argument() - omega).abs() <= RAY_ANGLE_TOL)
            .map(|sp| sp.modulus())
            .min_by(f64::total_cmp)
    }
}

/// `Q^{-1}T^j` for `j = 0, 1, 2` at one resolvent point.
///
/// Products `T^n Q^{-m}` with `n ≤ 2m` are assembled from these factors, so
/// no large intermediate power of `T` or of `Q^{-1}` is ever formed.
#[derive(Debug, Clone)]
pub struct ResolventFactors(pub [OperatorModel; 3]);

impl ResolventFactors {
    /// Exponents `(a, b, c)` of `F₂^a F₁^b F₀^c = T^n Q^{-m}`.
    fn split(n: u32, m: u32) -> (u32, u32, u32) {
        assert!(n <= 2 * m, "T^n Q^-m needs n ≤ 2m");
        let a = n.saturating_sub(m);
        let b = n - 2 * a;
        (a, b, m - a - b)
    }

    /// `T^n Q^{-m}` as an operator.
    pub fn power(&self, n: u32, m: u32) -> OperatorModel {
        let (a, b, c) = Self::split(n, m);
        let dim = self.0[0].dim();
        [(2, a), (1, b), (0, c)]
            .into_iter()
            .flat_map(|(j, k)| std::iter::repeat_n(j, k as usize))
            .fold(OperatorModel::identity(dim), |acc, j| self.0[j].compose(&acc))
    }

    /// `T^n Q^{-m} x`.
    pub fn apply(&self, n: u32, m: u32, x: &QVector) -> QVector {
        let (a, b, c) = Self::split(n, m);
        [(2, a), (1, b), (0, c)]
            .into_iter()
            .flat_map(|(j, k)| std::iter::repeat_n(j, k as usize))
            .fold(x.clone(), |acc, j| self.0[j].act(&acc))
    }
}

/// `‖x‖ + ‖T^n x‖`, so `n = 0` gives `2‖x‖`.
pub fn graph_norm(model: &OperatorModel, n: u32, x: &QVector) -> f64 {
    x.norm() + model.act_pow(n, x).norm()
}

/// The sectoriality constant `M` at a single resolvent point:
/// `max(|s|²‖Q_s^{-1}‖, |s|‖T Q_s^{-1}‖)`.
pub fn local_sectorial_constant(model: &OperatorModel, s: Quaternion) -> Result<f64> {
    let f = model.resolvent_factors(s)?;
    let r = s.norm();
    Ok((r * r * f.0[0].op_norm()).max(r * f.0[1].op_norm()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectorialProfile {
    pub omega: f64,
    pub grid: Vec<f64>,
    /// `t²‖Q_{te^{iω}}^{-1}(T)‖` per grid point.
    pub q_values: Vec<f64>,
    /// `t‖T Q_{te^{iω}}^{-1}(T)‖` per grid point.
    pub tq_values: Vec<f64>,
    pub measured_m: f64,
}

impl SectorialProfile {
    /// `measured_M·(1 + M_SAFETY)`, the constant handed to every bound.
    pub fn m_used(&self) -> f64 {
        self.measured_m * (1.0 + M_SAFETY)
    }
}

/// Samples both sectorial estimates along the ray `S_ω`.
///
/// The ray is rejected as a whole if it passes through an eigen-sphere, not
/// only when a grid point happens to land on one.
pub fn sectorial_scan(model: &OperatorModel, omega: f64, grid: &LogGrid) -> Result<SectorialProfile> {
    if let Some(t) = model.ray_spectral_hit(omega) {
        return Err(Error::Spectral {
            t,
            s: ray_point(t, omega, ImaginaryUnit::E1)?,
        });
    }
    let ts = grid.points();
    let values = ts
        .par_iter()
        .map(|&t| {
            let f = model.resolvent_factors_on_ray(t, omega)?;
            Ok((t * t * f.0[0].op_norm(), t * f.0[1].op_norm()))
        })
        .collect::<Result<Vec<(f64, f64)>>>()?;
    let (q_values, tq_values): (Vec<f64>, Vec<f64>) = values.into_iter().unzip();
    let measured_m = q_values.iter().chain(&tq_values).copied().fold(0.0, f64::max);
    Ok(SectorialProfile {
        omega,
        grid: ts,
        q_values,
        tq_values,
        measured_m,
    })
}

fn base_params(omega: f64, grid: &LogGrid, m_const: f64) -> BTreeMap<String, serde_json::Value> {
    let mut params = BTreeMap::new();
    params.insert("omega".into(), json!(omega));
    params.insert("grid".into(), json!([grid.t_min, grid.t_max, grid.count]));
    params.insert("M".into(), json!(m_const));
    params
}

/// Checks `‖T^n Q_s^{-m}(T)‖ ≤ (1+3M)^m/|s|^{2m−n}` at every grid point of the ray.
pub fn power_resolvent_bound_check(
    model: &OperatorModel,
    omega: f64,
    grid: &LogGrid,
    n: u32,
    m: u32,
    m_const: f64,
    tol: f64,
) -> Result<VerificationReport> {
    Ok(power_resolvent_sweep(model, omega, grid, &[(n, m)], m_const, tol)?.remove(0))
}

/// [`power_resolvent_bound_check`] for several `(n, m)` pairs, sharing the
/// resolvents computed at each grid point.
pub fn power_resolvent_sweep(
    model: &OperatorModel,
    omega: f64,
    grid: &LogGrid,
    pairs: &[(u32, u32)],
    m_const: f64,
    tol: f64,
) -> Result<Vec<VerificationReport>> {
    if let Some(&(n, m)) = pairs.iter().find(|(n, m)| n > &(2 * m)) {
        return Err(Error::precondition(format!(
            "power bound needs n ≤ 2m, got n = {n}, m = {m}"
        )));
    }
    let per_point = grid
        .points()
        .par_iter()
        .map(|&t| {
            let f = model.resolvent_factors_on_ray(t, omega)?;
            let mut tallies = vec![Tally::default(); pairs.len()];
            for (tally, &(n, m)) in tallies.iter_mut().zip(pairs) {
                tally.observe(f.power(n, m).op_norm(), bounds::power_resolvent_bound(m_const, n, m, t));
            }
            Ok(tallies)
        })
        .collect::<Result<Vec<Vec<Tally>>>>()?;

    Ok(pairs
        .iter()
        .enumerate()
        .map(|(i, &(n, m))| {
            let mut tally = Tally::default();
            for point in &per_point {
                tally.merge(&point[i]);
            }
            let mut params = base_params(omega, grid, m_const);
            params.insert("n".into(), json!(n));
            params.insert("m".into(), json!(m));
            params.insert("bound_formula".into(), json!("(1+3M)^m/|s|^(2m-n)"));
            tally.finish("lemma-power-bound", params, tol)
        })
        .collect())
}

/// Checks `‖x‖_{D(T^n)} ≤ max{1+(4+12M)^m|s|^n, (4+12M)^m/|s|^{m−n}}·‖x‖_{D(T^m)}`.
///
/// The constant is evaluated with `max(m_const, M_s)`, where `M_s` is the
/// sectoriality constant measured at `s` itself, so an off-grid `s` cannot
/// undercut the estimate.
#[allow(clippy::too_many_arguments)]
pub fn embedding_constant_check(
    model: &OperatorModel,
    omega: f64,
    m_const: f64,
    n: u32,
    m: u32,
    s: Quaternion,
    samples: &[QVector],
    tol: f64,
) -> Result<VerificationReport> {
    if n > m {
        return Err(Error::precondition(format!(
            "embedding needs n ≤ m, got n = {n}, m = {m}"
        )));
    }
    let r = s.norm();
    if r == 0.0 || (s.sphere().argument() - omega).abs() > RAY_ANGLE_TOL {
        return Err(Error::precondition(format!(
            "s = {s} is not on the ray of angle {omega}"
        )));
    }
    let m_used = m_const.max(local_sectorial_constant(model, s)?);
    let c = bounds::embedding_constant(m_used, n, m, r);
    let mut tally = Tally::default();
    for x in samples {
        tally.observe(graph_norm(model, n, x), c * graph_norm(model, m, x));
    }
    let mut params = BTreeMap::new();
    params.insert("omega".into(), json!(omega));
    params.insert("M".into(), json!(m_used));
    params.insert("n".into(), json!(n));
    params.insert("m".into(), json!(m));
    params.insert("s_abs".into(), json!(r));
    params.insert("constant".into(), json!(c));
    params.insert(
        "bound_formula".into(),
        json!("max{1+(4+12M)^m|s|^n,(4+12M)^m/|s|^(m-n)}"),
    );
    Ok(tally.finish("embedding", params, tol))
}

/// Compares `Σ_{k=0}^{N} T^k s^{−k−1}` with `Q_s^{-1}(T)(s̄ − T)`.
///
/// The bound is the geometric tail `‖T‖^{N+1}|s|^{−N−2}/(1−‖T‖/|s|)` plus an
/// explicit round-off allowance, reported separately as `roundoff`.
pub fn resolvent_series_check(t: &QMatrix, s: Quaternion, n_terms: u32, tol: f64) -> Result<VerificationReport> {
    let norm_t = t.op_norm();
    let r = s.norm();
    if r <= norm_t {
        return Err(Error::precondition(format!(
            "series needs |s| > ‖T‖, got |s| = {r}, ‖T‖ = {norm_t}"
        )));
    }
    let n = t.dim();
    let s_inv = s.inverse()?;
    let mut series = QMatrix::zeros(n);
    let mut power = QMatrix::identity(n);
    let mut coeff = s_inv;
    for _ in 0..=n_terms {
        series = &series + &power.right_scalar(coeff);
        power = &power * t;
        coeff *= s_inv;
    }
    let model = OperatorModel::Dense(t.clone());
    let qinv = model.pseudo_resolvent(s)?.to_dense();
    let closed = &qinv * &(&QMatrix::identity(n).right_scalar(s.conj()) - t);
    let residual = (&series - &closed).op_norm();

    let ratio = norm_t / r;
    let tail = norm_t.powi(n_terms as i32 + 1) * r.powi(-(n_terms as i32) - 2) / (1.0 - ratio);
    let roundoff = 16.0 * (n_terms as f64 + 1.0) * (n.max(1) as f64) * f64::EPSILON / (r * (1.0 - ratio));
    let mut tally = Tally::default();
    tally.observe(residual, tail + roundoff);
    let mut params = BTreeMap::new();
    params.insert("N".into(), json!(n_terms));
    params.insert("s".into(), json!(s.to_array()));
    params.insert("op_norm".into(), json!(norm_t));
    params.insert("tail".into(), json!(tail));
    params.insert("roundoff".into(), json!(roundoff));
    params.insert(
        "bound_formula".into(),
        json!("|T|^(N+1)|s|^(-N-2)/(1-|T|/|s|) + roundoff"),
    );
    Ok(tally.finish("series", params, tol))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn q(w: f64, x: f64, y: f64, z: f64) -> Quaternion {
        Quaternion::new(w, x, y, z)
    }

    fn diag(entries: &[Quaternion]) -> OperatorModel {
        OperatorModel::Diagonal(entries.to_vec())
    }

    #[test]
    fn q_op_examples() {
        let t = diag(&[Quaternion::E1]);
        assert_eq!(t.q_op(Quaternion::real(-1.0)), diag(&[q(0.0, 2.0, 0.0, 0.0)]));
        assert_eq!(
            diag(&[Quaternion::real(2.0)]).q_op(Quaternion::real(3.0)),
            diag(&[Quaternion::ONE])
        );
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let dense = QMatrix::random_gaussian(&mut rng, 3);
        let m = OperatorModel::Dense(dense.clone());
        assert_eq!(m.q_op(Quaternion::ZERO), OperatorModel::Dense(&dense * &dense));
    }

    #[test]
    fn q_op_ignores_the_imaginary_unit() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let m = OperatorModel::Dense(QMatrix::random_gaussian(&mut rng, 4));
        let a = ray_point(1.3, 2.0, ImaginaryUnit::E1).unwrap();
        let b = ray_point(1.3, 2.0, ImaginaryUnit::random(&mut rng)).unwrap();
        let (qa, qb) = (m.q_op(a).to_dense(), m.q_op(b).to_dense());
        assert!((&qa - &qb).op_norm() < 1e-12 * qa.op_norm());
        assert_eq!(m.q_op_on_ray(1.3, 2.0), m.q_op_parts(a.re(), 1.3 * 1.3));
    }

    #[test]
    fn resolvent_set_examples() {
        let t = diag(&[Quaternion::E1]);
        assert!(!t.in_resolvent_set(Quaternion::E2));
        assert!(t.in_resolvent_set(Quaternion::real(-1.0)));
        assert!(!OperatorModel::identity(3).in_resolvent_set(Quaternion::ONE));
        let dense = OperatorModel::Dense(QMatrix::diagonal(&[Quaternion::E1, Quaternion::real(2.0)]));
        assert!(!dense.in_resolvent_set(Quaternion::E3));
        assert!(dense.in_resolvent_set(Quaternion::real(-1.0)));
    }

    #[test]
    fn spectrum_examples() {
        let t = diag(&[Quaternion::E1, Quaternion::E2.scale(2.0)]);
        assert_eq!(t.s_spectrum(), vec![Sphere::new(0.0, 1.0), Sphere::new(0.0, 2.0)]);
        let zero = OperatorModel::Dense(QMatrix::zeros(3));
        let spec = zero.s_spectrum();
        assert_eq!(spec.len(), 1);
        assert!(spec[0].approx_eq(Sphere::new(0.0, 0.0), 1e-12));
        assert_eq!(
            diag(&[Quaternion::real(-5.0)]).s_spectrum(),
            vec![Sphere::new(-5.0, 0.0)]
        );
    }

    #[test]
    fn diagonal_and_dense_agree() {
        let entries = [q(0.5, 1.0, -0.3, 0.2), q(-1.0, 0.0, 2.0, 0.0), Quaternion::real(3.0)];
        let d = diag(&entries);
        let m = OperatorModel::Dense(QMatrix::diagonal(&entries));
        let s = q(-0.7, 0.4, 0.1, 0.0);
        let (rd, rm) = (d.pseudo_resolvent(s).unwrap(), m.pseudo_resolvent(s).unwrap());
        assert!((rd.op_norm() - rm.op_norm()).abs() < 1e-9);
        assert!((d.compose(&rd).op_norm() - m.compose(&rm).op_norm()).abs() < 1e-9);
        let sd = d.s_spectrum();
        let sm = m.s_spectrum();
        assert_eq!(sd.len(), sm.len());
        for (a, b) in sd.iter().zip(&sm) {
            assert!(a.approx_eq(*b, 1e-9));
        }
    }

    #[test]
    fn resolvent_factors_survive_wide_spectra() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let entries: Vec<Quaternion> = (0..4)
            .map(|j| {
                ImaginaryUnit::random(&mut rng)
                    .get()
                    .scale(10f64.powf(-2.0 + 4.0 * j as f64 / 3.0))
            })
            .collect();
        let u = QMatrix::random_unitary(&mut rng, 4);
        let d = diag(&entries);
        let m = OperatorModel::Dense(&(&u * &QMatrix::diagonal(&entries)) * &u.conj_transpose());
        for t in [1e-3, 8e-3, 1.0, 1e3] {
            let (fd, fm) = (
                d.resolvent_factors_on_ray(t, PI).unwrap(),
                m.resolvent_factors_on_ray(t, PI).unwrap(),
            );
            for (n, k) in [(0, 1), (2, 1), (3, 2), (4, 2), (1, 3)] {
                let (a, b) = (fd.power(n, k).op_norm(), fm.power(n, k).op_norm());
                assert!((a - b).abs() <= 1e-6 * a, "t={t} n={n} m={k}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn sectorial_scan_of_imaginary_unit() {
        let t = diag(&[Quaternion::E1]);
        let prof = sectorial_scan(&t, PI, &LogGrid::default()).unwrap();
        for (i, &s) in prof.grid.iter().enumerate() {
            let d = 1.0 + s * s;
            assert!((prof.q_values[i] - s * s / d).abs() < 1e-12);
            assert!((prof.tq_values[i] - s / d).abs() < 1e-12);
        }
        assert!((prof.measured_m - 1.0).abs() < 1e-5 && prof.measured_m < 1.0);
    }

    #[test]
    fn sectorial_scan_of_positive_real() {
        let prof = sectorial_scan(&OperatorModel::identity(1), PI, &LogGrid::default()).unwrap();
        let want = 1e6 / (1.0 + 1e3f64).powi(2);
        assert!((prof.measured_m - want).abs() < 1e-12);
        let prof = sectorial_scan(&diag(&[Quaternion::real(-1.0)]), 0.0, &LogGrid::default()).unwrap();
        assert!(prof.measured_m < 1.0);
    }

    #[test]
    fn sectorial_scan_rejects_spectral_rays() {
        let err = sectorial_scan(&diag(&[Quaternion::E1]), PI / 2.0, &LogGrid::default()).unwrap_err();
        match err {
            Error::Spectral { t, .. } => assert!((t - 1.0).abs() < 1e-12),
            other => panic!("unexpected {other:?}"),
        }
        // The hit lies between grid points here.
        let grid = LogGrid::new(0.5, 2.5, 2).unwrap();
        assert!(sectorial_scan(&diag(&[Quaternion::E2]), PI / 2.0, &grid).is_err());
    }

    #[test]
    fn power_bound_examples() {
        let t = diag(&[Quaternion::E1]);
        let grid = LogGrid::default();
        for (n, m) in [(0, 1), (0, 0), (2, 1)] {
            let r = power_resolvent_bound_check(&t, PI, &grid, n, m, 1.0, 1e-9).unwrap();
            assert!(r.pass, "{n} {m}: {r:?}");
        }
        assert!(power_resolvent_bound_check(&t, PI, &grid, 3, 1, 1.0, 1e-9).is_err());
    }

    #[test]
    fn graph_norm_examples() {
        let x = QVector(vec![q(1.0, 2.0, 0.0, 0.0)]);
        assert!((graph_norm(&diag(&[Quaternion::E1]), 0, &x) - 2.0 * x.norm()).abs() < 1e-15);
        let one = QVector(vec![Quaternion::ONE]);
        assert_eq!(graph_norm(&diag(&[Quaternion::E1]), 2, &one), 2.0);
        let zero = OperatorModel::Dense(QMatrix::zeros(1));
        assert_eq!(graph_norm(&zero, 3, &x), x.norm());
    }

    #[test]
    fn embedding_examples() {
        let t = diag(&[Quaternion::E1, Quaternion::E2.scale(3.0)]);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let xs: Vec<QVector> = (0..16).map(|_| QVector::random_unit(&mut rng, 2)).collect();
        let s = Quaternion::real(-1.0);
        for (n, m) in [(0, 1), (1, 2), (2, 2)] {
            let r = embedding_constant_check(&t, PI, 1.0, n, m, s, &xs, 1e-9).unwrap();
            assert!(r.pass && r.margin > 0.0 || n == m, "{r:?}");
        }
        assert!(embedding_constant_check(&t, PI, 1.0, 2, 1, s, &xs, 1e-9).is_err());
    }

    #[test]
    fn series_examples() {
        let r = resolvent_series_check(&QMatrix::zeros(2), Quaternion::ONE, 5, 1e-9).unwrap();
        assert!(r.pass && r.measured == 0.0);
        let r = resolvent_series_check(&QMatrix::diagonal(&[Quaternion::E1]), Quaternion::real(2.0), 30, 1e-9).unwrap();
        assert!(r.pass, "{r:?}");
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let t = QMatrix::random_gaussian(&mut rng, 5);
        let s = q(0.3, -1.0, 0.5, 0.2);
        let s = s.scale(2.0 * t.op_norm() / s.norm());
        let r = resolvent_series_check(&t, s, 40, 1e-9).unwrap();
        assert!(r.pass, "{r:?}");
        assert!(resolvent_series_check(&t, s.scale(0.4), 40, 1e-9).is_err());
    }

    #[test]
    fn operator_json_round_trip() {
        let text = r#"{"kind":"diagonal","entries":[[0,1,0,0],[0,0,2,0]]}"#;
        let m = OperatorModel::from_json(text).unwrap();
        assert_eq!(m, diag(&[Quaternion::E1, Quaternion::E2.scale(2.0)]));
        assert_eq!(OperatorModel::from_json(&m.to_json()).unwrap(), m);
        let bad = r#"{"kind":"dense","n":2,"entries":[[1,0,0,0]]}"#;
        assert!(matches!(OperatorModel::from_json(bad), Err(Error::InvalidOperator(_))));
    }
}
