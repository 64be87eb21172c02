//! Inequality checks that only involve couples and their K-functionals.

use std::collections::BTreeMap;

use serde_json::json;

use crate::error::{Error, Result};
use crate::qlinalg::QVector;
use crate::quaternion::Quaternion;
use crate::report::{Tally, VerificationReport};
use crate::spectral::OperatorModel;

use super::couple::{Couple, CoupleNorm};
use super::kfunctional::KSolver;
use super::lpstar::{LogGrid, LpExponent};
use super::norms::{check_theta, KProfile};

/// Floating-point allowance for two evaluations of the same sum of norms.
fn rounding(value: f64) -> f64 {
    8.0 * f64::EPSILON * value
}

/// Checks `K_{X,Y}(t,x) = t·K_{Y,X}(1/t,x)`.
///
/// Each solve is warm-started with the other's split (with the roles of
/// `a` and `b` exchanged), so both sides see the same decompositions. The
/// difference must stay within twice the combined certified gap.
pub fn k_swap_identity_check(couple: &Couple, t: f64, x: &QVector, tol: f64) -> Result<VerificationReport> {
    let swapped = couple.swapped();
    let (direct, reverse) = (KSolver::new(couple), KSolver::new(&swapped));
    let first = direct.solve(t, x, &[])?;
    let other = reverse.solve(1.0 / t, x, std::slice::from_ref(&first.a))?;
    let first = direct.solve(t, x, std::slice::from_ref(&other.a))?;

    let lhs = first.value;
    let rhs = t * other.value;
    let gap = first.gap() + t * other.gap();
    let mut tally = Tally::default();
    tally.observe((lhs - rhs).abs(), 2.0 * gap + rounding(lhs + rhs));
    tally.note_gap(gap);
    let mut params = BTreeMap::new();
    params.insert("t".into(), json!(t));
    params.insert("bound_formula".into(), json!("2(gap_XY + t gap_YX)"));
    Ok(tally.finish("couple-props/swap", params, tol))
}

fn restriction_norm(op: &OperatorModel, from: &CoupleNorm, to: &CoupleNorm) -> Result<f64> {
    let (Some(wf), Some(wt)) = (from.single_weights(), to.single_weights()) else {
        return Err(Error::precondition("restriction norms need weighted ℓ² couples"));
    };
    let left = OperatorModel::Diagonal(wt.iter().map(|&c| Quaternion::real(c)).collect());
    let right = OperatorModel::Diagonal(wf.iter().map(|&c| Quaternion::real(1.0 / c)).collect());
    Ok(left.compose(op).compose(&right).op_norm())
}

/// Checks `‖Tx‖_{(V,W)_{θ,p}} ≤ ‖T‖_{X→V}^{1−θ} ‖T‖_{Y→W}^θ ‖x‖_{(X,Y)_{θ,p}}`.
///
/// The left side uses the certified lower K bounds and the right side the
/// upper estimates, so a failure exhibits a violation beyond solver error.
#[allow(clippy::too_many_arguments)]
pub fn operator_interpolation_check(
    from: &Couple,
    to: &Couple,
    op: &OperatorModel,
    theta: f64,
    p: LpExponent,
    samples: &[QVector],
    grid: &LogGrid,
    tol: f64,
) -> Result<VerificationReport> {
    check_theta(theta)?;
    if op.dim() != from.dim() || op.dim() != to.dim() {
        return Err(Error::DimensionMismatch {
            expected: from.dim(),
            found: op.dim(),
        });
    }
    let n_xv = restriction_norm(op, &from.x, &to.x)?;
    let n_yw = restriction_norm(op, &from.y, &to.y)?;
    let c = n_xv.powf(1.0 - theta) * n_yw.powf(theta);
    let (src, dst) = (KSolver::new(from), KSolver::new(to));
    let mut tally = Tally::default();
    for x in samples {
        let tx = op.apply(x)?;
        let lhs = KProfile::compute(&dst, grid, &tx, |_| Vec::new())?.interp_norm(theta, p)?;
        let rhs = KProfile::compute(&src, grid, x, |_| Vec::new())?.interp_norm(theta, p)?;
        tally.observe(lhs.lower, c * rhs.value);
        tally.note_gap(lhs.solver_gap.max(rhs.solver_gap));
        tally.note_quad_err(lhs.quad_err.max(rhs.quad_err));
    }
    let mut params = BTreeMap::new();
    params.insert("theta".into(), json!(theta));
    params.insert("p".into(), p.to_json());
    params.insert("norm_XV".into(), json!(n_xv));
    params.insert("norm_YW".into(), json!(n_yw));
    params.insert("samples".into(), json!(samples.len()));
    params.insert("bound_formula".into(), json!("|T|_(X->V)^(1-theta) |T|_(Y->W)^theta"));
    Ok(tally.finish("op-interp", params, tol))
}

/// Empirical constants of the J and K intermediate classes for a space `E`:
/// `C_J = max ‖x‖_E / (‖x‖_X^{1−θ} ‖x‖_Y^θ)` and
/// `C_K = max K(t,x) / (t^θ ‖x‖_E)` over the samples and grid.
///
/// Zero samples are skipped; with none left both constants are 0.
pub fn intermediate_constants(
    couple: &Couple,
    e_norm: &CoupleNorm,
    theta: f64,
    samples: &[QVector],
    grid: &LogGrid,
) -> Result<(f64, f64)> {
    check_theta(theta)?;
    let solver = KSolver::new(couple);
    let ts = grid.points();
    let (mut cj, mut ck) = (0.0f64, 0.0f64);
    for x in samples.iter().filter(|x| !x.is_zero()) {
        let e = e_norm.eval(x);
        cj = cj.max(e / (couple.x.eval(x).powf(1.0 - theta) * couple.y.eval(x).powf(theta)));
        for &t in &ts {
            ck = ck.max(solver.solve(t, x, &[])?.value / (t.powf(theta) * e));
        }
    }
    Ok((cj, ck))
}
