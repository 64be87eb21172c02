//! Check suites: builtin operator families, sample vectors, and the
//! drivers that turn a [`CheckConfig`] into reports.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::bounds;
use crate::error::{Error, Result};
use crate::interpolation::{
    k_swap_identity_check, operator_interpolation_check, Couple, CoupleNorm, KProfile, KSolver, LogGrid, LpExponent,
    RayResolvents,
};
use crate::qlinalg::{QMatrix, QVector};
use crate::quaternion::{ray_point, ImaginaryUnit, Quaternion};
use crate::report::{Tally, VerificationReport, DEFAULT_TOL};
use crate::spectral::{
    embedding_constant_check, graph_norm, local_sectorial_constant, power_resolvent_sweep, resolvent_series_check,
    sectorial_scan, OperatorModel,
};

/// Builtin operator families.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Builtin {
    /// `diag(r_j i_j)`: radii log-spaced in `[1e-2, 1e2]`, random units.
    DiagImag,
    /// `U·D·Uᴴ` for `D` from [`Builtin::DiagImag`] and a random unitary `U`.
    DenseSimilar,
    /// Positive reals log-spaced in `[1e-2, 1e2]`.
    DiagReal,
}

impl Builtin {
    pub const ALL: [Builtin; 3] = [Builtin::DiagImag, Builtin::DenseSimilar, Builtin::DiagReal];

    pub fn name(self) -> &'static str {
        match self {
            Builtin::DiagImag => "diag-imag",
            Builtin::DenseSimilar => "dense-similar",
            Builtin::DiagReal => "diag-real",
        }
    }

    /// Every family is sectorial on the ray of negative reals.
    pub fn omega(self) -> f64 {
        PI
    }

    pub fn build<R: Rng + ?Sized>(self, dim: usize, rng: &mut R) -> OperatorModel {
        let radius = |j: usize| {
            if dim == 1 {
                1.0
            } else {
                10f64.powf(-2.0 + 4.0 * j as f64 / (dim - 1) as f64)
            }
        };
        match self {
            Builtin::DiagImag => OperatorModel::Diagonal(
                (0..dim)
                    .map(|j| ImaginaryUnit::random(rng).get().scale(radius(j)))
                    .collect(),
            ),
            Builtin::DenseSimilar => {
                let OperatorModel::Diagonal(d) = Builtin::DiagImag.build(dim, rng) else {
                    unreachable!()
                };
                let u = QMatrix::random_unitary(rng, dim);
                OperatorModel::Dense(&(&u * &QMatrix::diagonal(&d)) * &u.conj_transpose())
            }
            Builtin::DiagReal => OperatorModel::Diagonal((0..dim).map(|j| Quaternion::real(radius(j))).collect()),
        }
    }
}

impl FromStr for Builtin {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "diag-imag" | "a" => Ok(Builtin::DiagImag),
            "dense-similar" | "b" => Ok(Builtin::DenseSimilar),
            "diag-real" | "c" => Ok(Builtin::DiagReal),
            other => Err(Error::precondition(format!(
                "unknown builtin {other:?}; expected diag-imag, dense-similar or diag-real"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum OperatorSource {
    File(PathBuf),
    Builtin(Builtin),
}

impl OperatorSource {
    fn label(&self) -> String {
        match self {
            OperatorSource::File(p) => p.display().to_string(),
            OperatorSource::Builtin(b) => b.name().to_string(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum CheckKind {
    LemmaPowerBound,
    Embedding,
    Series,
    Thm35,
    Thm36,
    Thm37,
    CoupleProps,
    OpInterp,
}

impl CheckKind {
    pub const ALL: [CheckKind; 8] = [
        CheckKind::LemmaPowerBound,
        CheckKind::Embedding,
        CheckKind::Series,
        CheckKind::Thm35,
        CheckKind::Thm36,
        CheckKind::Thm37,
        CheckKind::CoupleProps,
        CheckKind::OpInterp,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CheckKind::LemmaPowerBound => "lemma-power-bound",
            CheckKind::Embedding => "embedding",
            CheckKind::Series => "series",
            CheckKind::Thm35 => "thm35",
            CheckKind::Thm36 => "thm36",
            CheckKind::Thm37 => "thm37",
            CheckKind::CoupleProps => "couple-props",
            CheckKind::OpInterp => "op-interp",
        }
    }
}

impl fmt::Display for CheckKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CheckKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        CheckKind::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::precondition(format!("unknown check {s:?}")))
    }
}

/// Everything needed to run one check suite. Empty `thetas`/`ps` and absent
/// `n`, `k`, `m` select the suite's standard sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckConfig {
    pub check: CheckKind,
    pub operator: OperatorSource,
    pub omega: Option<f64>,
    pub thetas: Vec<f64>,
    pub ps: Vec<LpExponent>,
    pub n: Option<u32>,
    pub k: Option<u32>,
    pub m: Option<u32>,
    pub grid: LogGrid,
    pub samples: usize,
    pub seed: u64,
    pub tol: f64,
    /// Dimension of builtin operators and random couples.
    pub dim: usize,
    /// Record wall time in the reports; off by default so output is reproducible.
    pub timing: bool,
}

impl CheckConfig {
    pub fn new(check: CheckKind) -> Self {
        Self {
            check,
            operator: OperatorSource::Builtin(Builtin::DiagImag),
            omega: None,
            thetas: Vec::new(),
            ps: Vec::new(),
            n: None,
            k: None,
            m: None,
            grid: LogGrid::default(),
            samples: 32,
            seed: 0,
            tol: DEFAULT_TOL,
            dim: 16,
            timing: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(&theta) = self.thetas.iter().find(|&&t| !(t > 0.0 && t < 1.0)) {
            return Err(Error::precondition(format!("θ must lie in (0,1), got {theta}")));
        }
        if let (Some(n), Some(k), Some(m)) = (self.n, self.k, self.m) {
            if !(n < k && k < m) {
                return Err(Error::precondition(format!("need n < k < m, got ({n}, {k}, {m})")));
            }
        }
        if self.samples == 0 || self.dim == 0 {
            return Err(Error::precondition("samples and dimension must be positive"));
        }
        if self.tol.is_nan() || self.tol < 0.0 {
            return Err(Error::precondition("tolerance must be nonnegative"));
        }
        if let Some(omega) = self.omega {
            if !(0.0..=PI).contains(&omega) {
                return Err(Error::precondition(format!("ω must lie in [0, π], got {omega}")));
            }
        }
        Ok(())
    }

    fn thetas_or(&self, default: &[f64]) -> Vec<f64> {
        if self.thetas.is_empty() {
            default.to_vec()
        } else {
            self.thetas.clone()
        }
    }

    fn ps_or(&self, default: &[LpExponent]) -> Vec<LpExponent> {
        if self.ps.is_empty() {
            default.to_vec()
        } else {
            self.ps.clone()
        }
    }

    fn triples(&self) -> Result<Vec<(u32, u32, u32)>> {
        match (self.n, self.k, self.m) {
            (Some(n), Some(k), Some(m)) => Ok(vec![(n, k, m)]),
            (None, None, None) => Ok(vec![(0, 1, 2), (0, 2, 3), (1, 2, 4)]),
            _ => Err(Error::precondition("give all of n, k, m or none of them")),
        }
    }
}

/// Basis vectors, the all-ones vector, then random unit vectors, `count` in total.
pub fn sample_vectors<R: Rng + ?Sized>(rng: &mut R, dim: usize, count: usize) -> Vec<QVector> {
    (0..dim)
        .map(|j| QVector::basis(dim, j))
        .chain(std::iter::once(QVector::ones(dim)))
        .take(count)
        .collect::<Vec<_>>()
        .into_iter()
        .chain(std::iter::repeat_with(|| QVector::random_unit(rng, dim)))
        .take(count)
        .collect()
}

fn random_weights<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> CoupleNorm {
    CoupleNorm::weighted((0..dim).map(|_| 10f64.powf(rng.random_range(-1.0..1.0))).collect())
        .expect("weights are positive")
}

const STANDARD_THETAS: [f64; 3] = [0.25, 0.5, 0.75];
const STANDARD_PS: [LpExponent; 3] = [LpExponent::Finite(1.0), LpExponent::Finite(2.0), LpExponent::Infinity];

/// Shared state of one run.
struct Run<'a> {
    cfg: &'a CheckConfig,
    model: OperatorModel,
    omega: f64,
    rng: ChaCha8Rng,
}

impl Run<'_> {
    fn params(&self) -> BTreeMap<String, Value> {
        let mut p = BTreeMap::new();
        p.insert("operator".into(), json!(self.cfg.operator.label()));
        p.insert("dim".into(), json!(self.model.dim()));
        p.insert("omega".into(), json!(self.omega));
        p.insert("seed".into(), json!(self.cfg.seed));
        p.insert("samples".into(), json!(self.cfg.samples));
        p.insert(
            "grid".into(),
            json!([self.cfg.grid.t_min, self.cfg.grid.t_max, self.cfg.grid.count]),
        );
        p
    }

    /// The constant `M` used by every bound: grid maximum times `1 + M_SAFETY`.
    fn sectorial_m(&self) -> Result<f64> {
        Ok(sectorial_scan(&self.model, self.omega, &self.cfg.grid)?.m_used())
    }

    fn samples(&mut self) -> Vec<QVector> {
        sample_vectors(&mut self.rng, self.model.dim(), self.cfg.samples)
    }
}

/// Runs the configured suite and returns its reports in a fixed order.
pub fn run_check(cfg: &CheckConfig) -> Result<Vec<VerificationReport>> {
    cfg.validate()?;
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (model, default_omega) = match &cfg.operator {
        OperatorSource::File(path) => (OperatorModel::load(path)?, PI),
        OperatorSource::Builtin(b) => (b.build(cfg.dim, &mut rng), b.omega()),
    };
    let mut run = Run {
        cfg,
        model,
        omega: cfg.omega.unwrap_or(default_omega),
        rng,
    };
    let mut reports = match cfg.check {
        CheckKind::LemmaPowerBound => lemma_power_bound(&mut run),
        CheckKind::Embedding => embedding(&mut run),
        CheckKind::Series => series(&mut run),
        CheckKind::Thm35 => thm35(&mut run),
        CheckKind::Thm36 => thm36(&mut run),
        CheckKind::Thm37 => thm37(&mut run),
        CheckKind::CoupleProps => couple_props(&mut run),
        CheckKind::OpInterp => op_interp(&mut run),
    }?;
    if cfg.timing {
        let ms = start.elapsed().as_secs_f64() * 1e3;
        for r in &mut reports {
            r.ms = ms;
        }
    }
    Ok(reports)
}

fn lemma_power_bound(run: &mut Run<'_>) -> Result<Vec<VerificationReport>> {
    let pairs: Vec<(u32, u32)> = match (run.cfg.n, run.cfg.m) {
        (Some(n), Some(m)) => vec![(n, m)],
        (None, None) => (0..=4u32).flat_map(|m| (0..=2 * m).map(move |n| (n, m))).collect(),
        _ => return Err(Error::precondition("give both n and m or neither")),
    };
    let m_const = run.sectorial_m()?;
    let mut reports = power_resolvent_sweep(&run.model, run.omega, &run.cfg.grid, &pairs, m_const, run.cfg.tol)?;
    let common = run.params();
    for r in &mut reports {
        r.params.extend(common.clone());
    }
    Ok(reports)
}

fn embedding(run: &mut Run<'_>) -> Result<Vec<VerificationReport>> {
    let pairs = match (run.cfg.n, run.cfg.m) {
        (Some(n), Some(m)) => vec![(n, m)],
        (None, None) => vec![(0, 1), (0, 2), (1, 2), (1, 3), (2, 3)],
        _ => return Err(Error::precondition("give both n and m or neither")),
    };
    let m_const = run.sectorial_m()?;
    let xs = run.samples();
    let mut reports = Vec::new();
    for (n, m) in pairs {
        for t in [0.1, 1.0, 10.0] {
            let s = ray_point(t, run.omega, ImaginaryUnit::E1)?;
            let mut r = embedding_constant_check(&run.model, run.omega, m_const, n, m, s, &xs, run.cfg.tol)?;
            r.params.extend(run.params());
            r.params.insert("t".into(), json!(t));
            reports.push(r);
        }
    }
    Ok(reports)
}

/// `cfg.samples` random dense operators with `|s| = 2‖T‖`; `n` is the
/// truncation order (default 40). A file operator is checked alone.
fn series(run: &mut Run<'_>) -> Result<Vec<VerificationReport>> {
    let terms = run.cfg.n.unwrap_or(40);
    let ops: Vec<QMatrix> = match &run.cfg.operator {
        OperatorSource::File(_) => vec![run.model.to_dense()],
        OperatorSource::Builtin(_) => (0..run.cfg.samples)
            .map(|_| QMatrix::random_gaussian(&mut run.rng, run.cfg.dim))
            .collect(),
    };
    let mut worst: Option<VerificationReport> = None;
    for t in &ops {
        let dir = Quaternion::random_gaussian(&mut run.rng);
        let s = dir.scale(2.0 * t.op_norm() / dir.norm());
        let r = resolvent_series_check(t, s, terms, run.cfg.tol)?;
        if worst.as_ref().is_none_or(|w| r.margin < w.margin) {
            worst = Some(r);
        }
    }
    let mut r = worst.expect("at least one operator");
    r.params.extend(run.params());
    r.params.insert("operators".into(), json!(ops.len()));
    Ok(vec![r])
}

fn thm35(run: &mut Run<'_>) -> Result<Vec<VerificationReport>> {
    let ns: Vec<u32> = run.cfg.n.map_or(vec![1, 2, 3], |n| vec![n]);
    if ns.contains(&0) {
        return Err(Error::precondition("thm35 needs n ≥ 1"));
    }
    let thetas = run.cfg.thetas_or(&STANDARD_THETAS);
    let ps = run.cfg.ps_or(&STANDARD_PS);
    let m_const = run.sectorial_m()?;
    let xs = run.samples();
    let rays = RayResolvents::new(&run.model, run.omega, &run.cfg.grid)?;
    let count = run.cfg.grid.count;
    let cases: Vec<(f64, LpExponent)> = thetas.iter().flat_map(|&th| ps.iter().map(move |&p| (th, p))).collect();

    let mut reports = Vec::new();
    for n in ns {
        let couple = Couple::domain(&run.model, n);
        let solver = KSolver::new(&couple);
        // K is sampled at τ = t^{−n} for the ray grid points t.
        let kgrid = run.cfg.grid.powered(-(n as f64))?;
        let per_sample = xs
            .par_iter()
            .map(|x| {
                let profile = KProfile::compute(&solver, &kgrid, x, |i| {
                    vec![rays.decomposition_at(count - 1 - i, n, x).1]
                })?;
                cases
                    .iter()
                    .map(|&(theta, p)| {
                        let norm = profile.interp_norm(theta, p)?;
                        let star = rays.star_norm(n, theta, p, x)?;
                        let mut fwd = Tally::default();
                        fwd.observe(
                            star.value,
                            bounds::star_forward_constant(m_const, n, theta, p) * norm.lower,
                        );
                        let mut bwd = Tally::default();
                        bwd.observe(
                            norm.value,
                            bounds::star_backward_constant(m_const, n, theta, p) * star.value,
                        );
                        for t in [&mut fwd, &mut bwd] {
                            t.note_gap(norm.solver_gap);
                            t.note_quad_err(norm.quad_err.max(star.quad_err));
                        }
                        Ok((fwd, bwd))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;

        for (c, &(theta, p)) in cases.iter().enumerate() {
            let (mut fwd, mut bwd) = (Tally::default(), Tally::default());
            for sample in &per_sample {
                fwd.merge(&sample[c].0);
                bwd.merge(&sample[c].1);
            }
            let mut params = run.params();
            params.insert("M".into(), json!(m_const));
            params.insert("n".into(), json!(n));
            params.insert("theta".into(), json!(theta));
            params.insert("p".into(), p.to_json());
            params.insert("note".into(), json!("intermediate constant taken as 2(1+3M)^ceil(n/2)"));
            let mut f_params = params.clone();
            f_params.insert(
                "constant".into(),
                json!(bounds::star_forward_constant(m_const, n, theta, p)),
            );
            f_params.insert(
                "bound_formula".into(),
                json!("(1/N_theta_p + 2(1+3M)^ceil(n/2) n^(-1/p)) |x|_theta_p"),
            );
            reports.push(fwd.finish("thm35/forward", f_params, run.cfg.tol));
            let (m1, m2) = bounds::decomposition_factors(m_const, n);
            params.insert(
                "constant".into(),
                json!(bounds::star_backward_constant(m_const, n, theta, p)),
            );
            params.insert("M1".into(), json!(m1));
            params.insert("M2".into(), json!(m2));
            params.insert(
                "bound_formula".into(),
                json!("max{p^(-1/p)(theta^(-1/p)+M2(1-theta)^(-1/p)), M1 n^(1/p)} |x|*_theta_p"),
            );
            reports.push(bwd.finish("thm35/backward", params, run.cfg.tol));
        }
    }
    Ok(reports)
}

fn power_norm(model: &OperatorModel, n: u32, x: &QVector) -> f64 {
    (0..n)
        .fold(x.clone(), |acc, _| model.apply(&acc).expect("dimensions agree"))
        .norm()
}

fn thm36(run: &mut Run<'_>) -> Result<Vec<VerificationReport>> {
    let triples = run.cfg.triples()?;
    let m_const = run.sectorial_m()?;
    let xs = run.samples();
    let mut reports = Vec::new();
    for (n, k, m) in triples {
        let c = bounds::moment_constant(m_const, n, k, m);
        let (lo, hi) = ((m - k) as f64 / (m - n) as f64, (k - n) as f64 / (m - n) as f64);
        let mut tally = Tally::default();
        for x in &xs {
            let bound = c * power_norm(&run.model, n, x).powf(lo) * power_norm(&run.model, m, x).powf(hi);
            tally.observe(power_norm(&run.model, k, x), bound);
        }
        let mut params = run.params();
        params.insert("M".into(), json!(m_const));
        params.insert("n".into(), json!(n));
        params.insert("k".into(), json!(k));
        params.insert("m".into(), json!(m));
        params.insert("constant".into(), json!(c));
        params.insert(
            "bound_formula".into(),
            json!("C |T^n x|^((m-k)/(m-n)) |T^m x|^((k-n)/(m-n)), C=(j+1)4^(j/(j+1))(1+3M)^(j(j+2)/(j+1)), j=k-n, chained in m"),
        );
        reports.push(tally.finish("thm36", params, run.cfg.tol));
    }
    Ok(reports)
}

fn thm37(run: &mut Run<'_>) -> Result<Vec<VerificationReport>> {
    let triples = run.cfg.triples()?;
    let m_scan = run.sectorial_m()?;
    // The t ≥ 1 constant evaluates the resolvent at |s| = 1.
    let m_unit = local_sectorial_constant(&run.model, ray_point(1.0, run.omega, ImaginaryUnit::E1)?)?;
    let m_large = m_scan.max(m_unit);
    let xs = run.samples();
    let ts = run.cfg.grid.points();
    let mut reports = Vec::new();
    for (n, k, m) in triples {
        let couple = Couple::domains(&run.model, n, m);
        let solver = KSolver::new(&couple);
        let theta = (k - n) as f64 / (m - n) as f64;
        let c_large = bounds::k_large_t_constant(m_large, n, m);
        let c_small = bounds::k_small_t_constant(m_scan, m);
        let per_sample = xs
            .par_iter()
            .map(|x| {
                let ek = graph_norm(&run.model, k, x);
                let (mut large, mut small) = (Tally::default(), Tally::default());
                for &t in &ts {
                    let est = solver.solve(t, x, &[])?;
                    let rel_gap = if est.value > 0.0 { est.gap() / est.value } else { 0.0 };
                    if t >= 1.0 {
                        large.observe(est.value, c_large * t.powf(theta) * ek);
                        large.note_gap(rel_gap);
                    }
                    if t <= 1.0 {
                        small.observe(est.value, c_small * t.powf(theta) * ek);
                        small.note_gap(rel_gap);
                    }
                }
                Ok((large, small))
            })
            .collect::<Result<Vec<_>>>()?;
        let (mut large, mut small) = (Tally::default(), Tally::default());
        for (l, s) in &per_sample {
            large.merge(l);
            small.merge(s);
        }
        let mut params = run.params();
        params.insert("n".into(), json!(n));
        params.insert("k".into(), json!(k));
        params.insert("m".into(), json!(m));
        params.insert("theta".into(), json!(theta));
        let mut lp = params.clone();
        lp.insert("M".into(), json!(m_large));
        lp.insert("constant".into(), json!(c_large));
        lp.insert(
            "bound_formula".into(),
            json!("(1+(4+12M)^m) t^theta |x|_D(T^k), t >= 1"),
        );
        reports.push(large.finish("thm37/large-t", lp, run.cfg.tol));
        params.insert("M".into(), json!(m_scan));
        params.insert("constant".into(), json!(c_small));
        params.insert("bound_formula".into(), json!("3(4+12M)^m t^theta |x|_D(T^k), t <= 1"));
        reports.push(small.finish("thm37/small-t", params, run.cfg.tol));
    }
    Ok(reports)
}

fn couple_props(run: &mut Run<'_>) -> Result<Vec<VerificationReport>> {
    let dim = run.cfg.dim;
    let tol = run.cfg.tol;
    let mut reports = Vec::new();
    let mut base = run.params();
    base.remove("operator");
    base.remove("omega");

    // K_{X,Y}(t,x) = t K_{Y,X}(1/t,x) on a fresh random couple per sample.
    let mut swap = Tally::default();
    for i in 0..run.cfg.samples {
        let couple = Couple::new(random_weights(&mut run.rng, dim), random_weights(&mut run.rng, dim))?;
        let x = QVector::random_unit(&mut run.rng, dim);
        let t = [1e-2, 0.3, 1.0, 3.0, 1e2][i % 5];
        let r = k_swap_identity_check(&couple, t, &x, tol)?;
        let mut one = Tally::default();
        one.observe(r.measured, r.bound);
        one.note_gap(r.solver_gap);
        swap.merge(&one);
    }
    let mut params = base.clone();
    params.insert("bound_formula".into(), json!("2(gap_XY + t gap_YX)"));
    reports.push(swap.finish("couple-props/swap", params, tol));

    let thetas = run.cfg.thetas_or(&[0.5]);
    let ps = run.cfg.ps_or(&[LpExponent::Finite(2.0)]);
    let xs = run.samples();

    // X = Y gives ‖x‖_{θ,p} = N_{θ,p} ‖x‖_X.
    let norm = random_weights(&mut run.rng, dim);
    let equal = Couple::new(norm.clone(), norm.clone())?;
    let solver = KSolver::new(&equal);
    let profiles = xs
        .par_iter()
        .map(|x| KProfile::compute(&solver, &run.cfg.grid, x, |_| Vec::new()))
        .collect::<Result<Vec<_>>>()?;
    for &theta in &thetas {
        for &p in &ps {
            let exact_factor = bounds::min_profile_norm(theta, p);
            let mut tally = Tally::default();
            for (x, profile) in xs.iter().zip(&profiles) {
                let got = profile.interp_norm(theta, p)?;
                let exact = exact_factor * norm.eval(x);
                tally.observe(
                    (got.value - exact).abs() / exact,
                    (1e-3f64).max(got.quad_err / got.value),
                );
                tally.note_quad_err(got.quad_err);
                tally.note_gap(got.solver_gap);
            }
            let mut params = base.clone();
            params.insert("theta".into(), json!(theta));
            params.insert("p".into(), p.to_json());
            params.insert(
                "bound_formula".into(),
                json!("relative error vs N_theta_p |x|_X within max(1e-3, quad_err)"),
            );
            reports.push(tally.finish("couple-props/reflexive", params, tol));
        }
    }

    // X ∩ Y ↪ (X,Y)_{θ,p} ↪ (X,Y)_{θ,q} ↪ X + Y on a random couple.
    let couple = Couple::new(random_weights(&mut run.rng, dim), random_weights(&mut run.rng, dim))?;
    let solver = KSolver::new(&couple);
    let chain = xs
        .par_iter()
        .map(|x| {
            let profile = KProfile::compute(&solver, &run.cfg.grid, x, |_| Vec::new())?;
            let k1 = solver.solve(1.0, x, &[])?;
            Ok((profile, k1))
        })
        .collect::<Result<Vec<_>>>()?;
    for &theta in &thetas {
        let mut tally = Tally::default();
        for (x, (profile, k1)) in xs.iter().zip(&chain) {
            let inter = couple.x.eval(x).max(couple.y.eval(x));
            for (i, &p) in STANDARD_PS.iter().enumerate() {
                let np = profile.interp_norm(theta, p)?;
                tally.observe(np.lower, bounds::min_profile_norm(theta, p) * inter);
                tally.observe(k1.lower, bounds::sum_embedding_constant(theta, p) * np.value);
                for &q in &STANDARD_PS[i + 1..] {
                    let nq = profile.interp_norm(theta, q)?;
                    tally.observe(nq.lower, bounds::exponent_chain_constant(theta, p, q) * np.value);
                }
                tally.note_gap(np.solver_gap);
            }
        }
        let mut params = base.clone();
        params.insert("theta".into(), json!(theta));
        params.insert(
            "bound_formula".into(),
            json!(
                "|x|_tp <= N_tp max(|x|_X,|x|_Y); |x|_tq <= (t(1-t)p)^(1/p-1/q)|x|_tp; K(1,x) <= (t(1-t)q)^(1/q)|x|_tq"
            ),
        );
        reports.push(tally.finish("couple-props/embedding-chain", params, tol));
    }
    Ok(reports)
}

fn op_interp(run: &mut Run<'_>) -> Result<Vec<VerificationReport>> {
    let dim = run.model.dim();
    let from = Couple::new(random_weights(&mut run.rng, dim), random_weights(&mut run.rng, dim))?;
    let to = Couple::new(random_weights(&mut run.rng, dim), random_weights(&mut run.rng, dim))?;
    let xs = run.samples();
    let mut reports = Vec::new();
    for theta in run.cfg.thetas_or(&[0.5]) {
        for p in run.cfg.ps_or(&[LpExponent::Finite(2.0)]) {
            let mut r =
                operator_interpolation_check(&from, &to, &run.model, theta, p, &xs, &run.cfg.grid, run.cfg.tol)?;
            r.params.extend(run.params());
            reports.push(r);
        }
    }
    Ok(reports)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(check: CheckKind) -> CheckConfig {
        CheckConfig {
            samples: 6,
            dim: 4,
            grid: LogGrid::new(1e-3, 1e3, 40).unwrap(),
            ..CheckConfig::new(check)
        }
    }

    #[test]
    fn names_round_trip() {
        for c in CheckKind::ALL {
            assert_eq!(c.name().parse::<CheckKind>().unwrap(), c);
        }
        for b in Builtin::ALL {
            assert_eq!(b.name().parse::<Builtin>().unwrap(), b);
        }
        assert!("thm99".parse::<CheckKind>().is_err());
    }

    #[test]
    fn sample_vectors_layout() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let xs = sample_vectors(&mut rng, 3, 6);
        assert_eq!(xs[0], QVector::basis(3, 0));
        assert_eq!(xs[3], QVector::ones(3));
        assert!((xs[5].norm() - 1.0).abs() < 1e-12);
        assert_eq!(sample_vectors(&mut rng, 3, 2).len(), 2);
    }

    #[test]
    fn builtin_families_have_expected_spectra() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = Builtin::DiagImag.build(5, &mut rng);
        for sp in a.s_spectrum() {
            assert!(sp.re.abs() < 1e-12);
        }
        let b = Builtin::DenseSimilar.build(5, &mut rng);
        let spec = b.s_spectrum();
        assert_eq!(spec.len(), 5);
        for (j, sp) in spec.iter().enumerate() {
            assert_eq!(sp.re, 0.0);
            assert!((sp.radius / 10f64.powf(-2.0 + j as f64) - 1.0).abs() < 1e-8);
        }
        let c = Builtin::DiagReal.build(5, &mut rng);
        assert!(c.s_spectrum().iter().all(|sp| sp.radius == 0.0 && sp.re > 0.0));
    }

    #[test]
    fn every_small_suite_passes() {
        for check in CheckKind::ALL {
            let reports = run_check(&small(check)).unwrap();
            assert!(!reports.is_empty());
            for r in reports {
                assert!(r.pass, "{check}: {r:?}");
                assert_eq!(r.pass, r.recomputed_pass());
            }
        }
    }

    #[test]
    fn dense_family_suites_pass() {
        for check in [CheckKind::LemmaPowerBound, CheckKind::Thm36, CheckKind::Thm37] {
            let cfg = CheckConfig {
                operator: OperatorSource::Builtin(Builtin::DenseSimilar),
                ..small(check)
            };
            for r in run_check(&cfg).unwrap() {
                assert!(r.pass, "{check}: {r:?}");
            }
        }
    }

    #[test]
    fn zero_vector_thm37_is_vacuous() {
        let model = Builtin::DiagImag.build(3, &mut ChaCha8Rng::seed_from_u64(2));
        let couple = Couple::domains(&model, 0, 2);
        let est = KSolver::new(&couple).solve(0.5, &QVector::zeros(3), &[]).unwrap();
        assert_eq!(est.value, 0.0);
    }

    #[test]
    fn rejects_bad_configs() {
        let mut cfg = small(CheckKind::Thm36);
        cfg.n = Some(2);
        cfg.k = Some(1);
        cfg.m = Some(3);
        assert!(run_check(&cfg).is_err());
        let mut cfg = small(CheckKind::Thm35);
        cfg.thetas = vec![1.5];
        assert!(run_check(&cfg).is_err());
        let mut cfg = small(CheckKind::Thm35);
        cfg.omega = Some(PI / 2.0);
        assert!(matches!(run_check(&cfg), Err(Error::Spectral { .. })));
    }
}
