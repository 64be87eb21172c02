//! Norms on `ℍ^N` built as sums of Euclidean norms of linear images, and
//! couples of two such norms.

use crate::error::{Error, Result};
use crate::qlinalg::{QMatrix, QVector};
use crate::spectral::OperatorModel;

/// One summand `‖L v‖₂` of a [`CoupleNorm`].
#[derive(Debug, Clone, PartialEq)]
pub enum NormTerm {
    /// `L = diag(w)` with real weights.
    Weighted(Vec<f64>),
    Operator(OperatorModel),
}

/// `LᴴL`, the Gram operator of a term.
#[derive(Debug, Clone)]
pub(crate) enum Gram {
    Diagonal(Vec<f64>),
    Dense(QMatrix),
}

impl NormTerm {
    pub fn dim(&self) -> usize {
        match self {
            NormTerm::Weighted(w) => w.len(),
            NormTerm::Operator(op) => op.dim(),
        }
    }

    pub fn apply(&self, v: &QVector) -> QVector {
        match self {
            NormTerm::Weighted(w) => QVector(w.iter().zip(v.iter()).map(|(&c, &q)| q.scale(c)).collect()),
            NormTerm::Operator(op) => op.act(v),
        }
    }

    /// `Lᴴ v`, the adjoint for the real inner product `Re Σ conj(u_j) v_j`.
    pub fn apply_adjoint(&self, v: &QVector) -> QVector {
        match self {
            NormTerm::Weighted(_) => self.apply(v),
            NormTerm::Operator(OperatorModel::Diagonal(d)) => {
                QVector(d.iter().zip(v.iter()).map(|(&q, &x)| q.conj() * x).collect())
            }
            NormTerm::Operator(OperatorModel::Dense(t)) => t.conj_transpose().apply(v),
        }
    }

    pub fn eval(&self, v: &QVector) -> f64 {
        self.apply(v).norm()
    }

    /// `L^{-ᴴ} v` when `L` is a weighting with strictly positive weights.
    pub(crate) fn inverse_adjoint(&self, v: &QVector) -> Option<QVector> {
        match self {
            NormTerm::Weighted(w) if w.iter().all(|&c| c > 0.0) => Some(QVector(
                w.iter().zip(v.iter()).map(|(&c, &q)| q.scale(1.0 / c)).collect(),
            )),
            _ => None,
        }
    }

    pub(crate) fn gram(&self) -> Gram {
        match self {
            NormTerm::Weighted(w) => Gram::Diagonal(w.iter().map(|c| c * c).collect()),
            NormTerm::Operator(OperatorModel::Diagonal(d)) => Gram::Diagonal(d.iter().map(|q| q.norm_sqr()).collect()),
            NormTerm::Operator(OperatorModel::Dense(t)) => Gram::Dense(&t.conj_transpose() * t),
        }
    }
}

/// A norm `v ↦ Σ_j ‖L_j v‖₂`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoupleNorm {
    dim: usize,
    terms: Vec<NormTerm>,
}

impl CoupleNorm {
    pub fn from_terms(dim: usize, terms: Vec<NormTerm>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::precondition("a norm needs at least one term"));
        }
        if let Some(bad) = terms.iter().find(|t| t.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: bad.dim(),
            });
        }
        let definite = terms
            .iter()
            .any(|t| matches!(t, NormTerm::Weighted(w) if w.iter().all(|&c| c > 0.0)));
        if !definite {
            return Err(Error::precondition(
                "a norm needs one weighting term with positive weights",
            ));
        }
        Ok(Self { dim, terms })
    }

    /// The quaternionic ℓ² norm.
    pub fn l2(dim: usize) -> Self {
        Self::scaled(dim, 1.0)
    }

    /// `c·‖·‖₂` for `c > 0`.
    pub fn scaled(dim: usize, c: f64) -> Self {
        assert!(c > 0.0, "scale must be positive");
        Self {
            dim,
            terms: vec![NormTerm::Weighted(vec![c; dim])],
        }
    }

    /// `‖diag(w) ·‖₂` for positive weights.
    pub fn weighted(weights: Vec<f64>) -> Result<Self> {
        if weights.iter().any(|&c| !(c > 0.0 && c.is_finite())) {
            return Err(Error::precondition("weights must be positive and finite"));
        }
        Self::from_terms(weights.len(), vec![NormTerm::Weighted(weights)])
    }

    /// The graph norm `‖v‖ + ‖T^n v‖` of `D(T^n)`; `n = 0` gives `2‖v‖`.
    pub fn graph(model: &OperatorModel, n: u32) -> Self {
        let dim = model.dim();
        let power = if n == 0 {
            NormTerm::Weighted(vec![1.0; dim])
        } else {
            NormTerm::Operator(model.pow(n))
        };
        Self {
            dim,
            terms: vec![NormTerm::Weighted(vec![1.0; dim]), power],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &[NormTerm] {
        &self.terms
    }

    pub fn eval(&self, v: &QVector) -> f64 {
        self.terms.iter().map(|t| t.eval(v)).sum()
    }

    /// The weights when the norm is a single weighting term.
    pub fn single_weights(&self) -> Option<&[f64]> {
        match self.terms.as_slice() {
            [NormTerm::Weighted(w)] => Some(w),
            _ => None,
        }
    }
}

/// Two norms on the same `ℍ^N`.
#[derive(Debug, Clone, PartialEq)]
pub struct Couple {
    pub x: CoupleNorm,
    pub y: CoupleNorm,
}

impl Couple {
    pub fn new(x: CoupleNorm, y: CoupleNorm) -> Result<Self> {
        if x.dim() != y.dim() {
            return Err(Error::DimensionMismatch {
                expected: x.dim(),
                found: y.dim(),
            });
        }
        Ok(Self { x, y })
    }

    /// `(X, D(T^n))` with `X = ℓ²`.
    pub fn domain(model: &OperatorModel, n: u32) -> Self {
        Self {
            x: CoupleNorm::l2(model.dim()),
            y: CoupleNorm::graph(model, n),
        }
    }

    /// `(D(T^n), D(T^m))`.
    pub fn domains(model: &OperatorModel, n: u32, m: u32) -> Self {
        Self {
            x: CoupleNorm::graph(model, n),
            y: CoupleNorm::graph(model, m),
        }
    }

    pub fn dim(&self) -> usize {
        self.x.dim()
    }

    /// `(Y, X)`.
    pub fn swapped(&self) -> Self {
        Self {
            x: self.y.clone(),
            y: self.x.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quaternion::Quaternion;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sample_norms(rng: &mut ChaCha8Rng) -> Vec<CoupleNorm> {
        let n = 5;
        let t = OperatorModel::Dense(QMatrix::random_gaussian(rng, n));
        let d = OperatorModel::Diagonal((0..n).map(|_| Quaternion::random_gaussian(rng)).collect());
        vec![
            CoupleNorm::l2(n),
            CoupleNorm::weighted(vec![0.5, 1.0, 2.0, 3.0, 0.1]).unwrap(),
            CoupleNorm::graph(&t, 2),
            CoupleNorm::graph(&d, 1),
            CoupleNorm::graph(&d, 0),
        ]
    }

    #[test]
    fn norms_satisfy_right_norm_axioms() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for norm in sample_norms(&mut rng) {
            for _ in 0..20 {
                let u = QVector::random_unit(&mut rng, 5).scale(3.0);
                let v = QVector::random_unit(&mut rng, 5);
                let s = Quaternion::random_gaussian(&mut rng);
                let lhs = norm.eval(&u.right_mul(s));
                assert!((lhs - norm.eval(&u) * s.norm()).abs() <= 1e-12 * lhs.max(1.0));
                assert!(norm.eval(&(&u + &v)) <= norm.eval(&u) + norm.eval(&v) + 1e-12);
                assert!(norm.eval(&u) > 0.0);
            }
            assert_eq!(norm.eval(&QVector::zeros(5)), 0.0);
        }
    }

    #[test]
    fn adjoint_matches_real_inner_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let n = 4;
        let terms = [
            NormTerm::Operator(OperatorModel::Dense(QMatrix::random_gaussian(&mut rng, n))),
            NormTerm::Operator(OperatorModel::Diagonal(
                (0..n).map(|_| Quaternion::random_gaussian(&mut rng)).collect(),
            )),
            NormTerm::Weighted(vec![1.0, 2.0, 3.0, 4.0]),
        ];
        for term in &terms {
            let u = QVector::random_unit(&mut rng, n);
            let v = QVector::random_unit(&mut rng, n);
            let lhs = term.apply(&u).real_dot(&v);
            let rhs = u.real_dot(&term.apply_adjoint(&v));
            assert!((lhs - rhs).abs() < 1e-12);
        }
    }

    #[test]
    fn graph_norm_of_power_zero_doubles() {
        let d = OperatorModel::Diagonal(vec![Quaternion::E1; 3]);
        let v = QVector::ones(3);
        assert!((CoupleNorm::graph(&d, 0).eval(&v) - 2.0 * 3f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn rejects_degenerate_norms() {
        assert!(CoupleNorm::weighted(vec![1.0, 0.0]).is_err());
        assert!(CoupleNorm::from_terms(2, vec![]).is_err());
        assert!(Couple::new(CoupleNorm::l2(2), CoupleNorm::l2(3)).is_err());
    }
}
