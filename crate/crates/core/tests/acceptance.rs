//! Acceptance suite: one line per criterion, nonzero exit if any fails.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qinterp::bounds::min_profile_norm;
use qinterp::interpolation::{interp_norm, k_swap_identity_check, Couple, CoupleNorm, LpExponent};
use qinterp::verify::{run_check, Builtin, CheckConfig, CheckKind, OperatorSource};
use qinterp::{OperatorModel, QMatrix, QVector, VerificationReport};

struct Outcome {
    pass: bool,
    detail: String,
}

fn summarize(reports: &[VerificationReport]) -> Outcome {
    let failed: Vec<String> = reports
        .iter()
        .filter(|r| !r.pass)
        .map(|r| format!("{} [{}] margin {:.3e}", r.check, r.params_key(), r.margin))
        .collect();
    let min_margin = reports.iter().map(|r| r.margin).fold(f64::INFINITY, f64::min);
    let mut detail = format!("{} reports, min margin {min_margin:.4}", reports.len());
    if !failed.is_empty() {
        detail.push_str(&format!("; failing: {}", failed.join(", ")));
    }
    Outcome {
        pass: failed.is_empty() && !reports.is_empty(),
        detail,
    }
}

fn suite(check: CheckKind, families: &[Builtin], adjust: impl Fn(&mut CheckConfig)) -> Outcome {
    let mut all = Vec::new();
    for &family in families {
        let mut cfg = CheckConfig::new(check);
        cfg.operator = OperatorSource::Builtin(family);
        adjust(&mut cfg);
        match run_check(&cfg) {
            Ok(reports) => all.extend(reports),
            Err(e) => {
                return Outcome {
                    pass: false,
                    detail: format!("{}: {e}", family.name()),
                }
            }
        }
    }
    summarize(&all)
}

fn power_resolvent_bound() -> Outcome {
    suite(CheckKind::LemmaPowerBound, &Builtin::ALL, |_| {})
}

fn star_norm_equivalence() -> Outcome {
    suite(CheckKind::Thm35, &[Builtin::DiagImag], |cfg| {
        cfg.dim = 16;
        cfg.samples = 32;
    })
}

fn moment_inequality() -> Outcome {
    suite(CheckKind::Thm36, &Builtin::ALL, |_| {})
}

fn k_functional_growth() -> Outcome {
    suite(CheckKind::Thm37, &[Builtin::DiagImag, Builtin::DiagReal], |_| {})
}

fn series_identity() -> Outcome {
    suite(CheckKind::Series, &[Builtin::DiagImag], |cfg| {
        cfg.samples = 20;
        cfg.n = Some(40);
    })
}

fn random_weights(rng: &mut ChaCha8Rng, n: usize) -> CoupleNorm {
    use rand::Rng;
    CoupleNorm::weighted((0..n).map(|_| 10f64.powf(rng.random_range(-1.0..1.0))).collect()).unwrap()
}

fn couple_identities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut swaps = Vec::new();
    for i in 0..20 {
        let couple = Couple::new(random_weights(&mut rng, 8), random_weights(&mut rng, 8)).unwrap();
        let x = QVector::random_unit(&mut rng, 8);
        let t = [1e-2, 0.3, 1.0, 3.0, 1e2][i % 5];
        swaps.push(k_swap_identity_check(&couple, t, &x, 1e-9).unwrap());
    }
    let swap = summarize(&swaps);

    let mut worst = 0.0f64;
    for _ in 0..10 {
        let norm = random_weights(&mut rng, 8);
        let couple = Couple::new(norm.clone(), norm.clone()).unwrap();
        let x = QVector::random_unit(&mut rng, 8);
        let got = interp_norm(&couple, 0.5, LpExponent::Finite(2.0), &x).unwrap().value;
        let want = 2f64.sqrt() * norm.eval(&x);
        assert!((min_profile_norm(0.5, LpExponent::Finite(2.0)) - 2f64.sqrt()).abs() < 1e-15);
        worst = worst.max((got - want).abs() / want);
    }
    Outcome {
        pass: swap.pass && worst <= 1e-3,
        detail: format!(
            "swap: {}; equal-norm θ=1/2 p=2 worst relative error {worst:.2e}",
            swap.detail
        ),
    }
}

/// Largest singular value by power iteration on `AᴴA`, using only
/// quaternionic matrix-vector products.
fn power_iteration_norm(a: &OperatorModel, ah: &OperatorModel, rng: &mut ChaCha8Rng) -> f64 {
    let mut v = QVector::random_unit(rng, a.dim());
    let mut sigma = 0.0;
    for _ in 0..100_000 {
        let w = ah.apply(&a.apply(&v).unwrap()).unwrap();
        let norm = w.norm();
        if norm == 0.0 {
            return 0.0;
        }
        v = w.scale(1.0 / norm);
        let next = a.apply(&v).unwrap().norm();
        if (next - sigma).abs() <= 1e-15 * next {
            return next;
        }
        sigma = next;
    }
    sigma
}

fn norm_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut worst_rel, mut rayleigh_violations) = (0.0f64, 0usize);
    for i in 0..100 {
        let dim = 1 + i % 32;
        let m = QMatrix::random_gaussian(&mut rng, dim);
        let norm = m.op_norm();
        let a = OperatorModel::Dense(m.clone());
        let ah = OperatorModel::Dense(m.conj_transpose());
        for _ in 0..20 {
            let x = QVector::random_unit(&mut rng, dim);
            if a.apply(&x).unwrap().norm() > norm * (1.0 + 1e-12) {
                rayleigh_violations += 1;
            }
        }
        let oracle = power_iteration_norm(&a, &ah, &mut rng);
        worst_rel = worst_rel.max((norm - oracle).abs() / oracle);
    }
    Outcome {
        pass: rayleigh_violations == 0 && worst_rel <= 1e-6,
        detail: format!(
            "100 matrices, {rayleigh_violations} Rayleigh samples above op_norm, worst relative gap to power iteration {worst_rel:.2e}"
        ),
    }
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let runs: [&[&str]; 5] = [
        &["thm35", "--n", "2", "--samples", "6"],
        &["thm37", "--samples", "4", "--builtin", "dense-similar", "--dim", "6"],
        &["couple-props", "--samples", "8", "--theta", "0.3,0.6", "--p", "1,inf"],
        &[
            "op-interp",
            "--builtin",
            "dense-similar",
            "--dim",
            "8",
            "--samples",
            "6",
        ],
        &["lemma-power-bound", "--builtin", "dense-similar", "--dim", "6"],
    ];
    let mut compared = 0;
    for (i, args) in runs.iter().enumerate() {
        let mut outputs = Vec::new();
        for rep in 0..2 {
            let path = dir.path().join(format!("run{i}-{rep}.json"));
            let status = Command::new(env!("CARGO_BIN_EXE_qinterp"))
                .arg("verify")
                .args(*args)
                .args(["--seed", "42", "--json"])
                .arg(&path)
                .output()
                .unwrap();
            if !status.status.success() {
                return Outcome {
                    pass: false,
                    detail: format!("{args:?} exited with {}", status.status),
                };
            }
            outputs.push(std::fs::read(&path).unwrap());
        }
        if outputs[0] != outputs[1] || outputs[0].is_empty() {
            return Outcome {
                pass: false,
                detail: format!("{args:?} produced different output on rerun"),
            };
        }
        compared += 1;
    }
    Outcome {
        pass: true,
        detail: format!("{compared} configurations byte-identical across two runs"),
    }
}

/// Label, runtime budget and runner.
type Criterion = (&'static str, Option<Duration>, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        (
            "power-resolvent bound, families a-c, n <= 2m <= 8",
            Some(Duration::from_secs(10)),
            power_resolvent_bound,
        ),
        (
            "resolvent characterization of (X, D(T^n)), both directions, N = 16, 32 samples",
            Some(Duration::from_secs(120)),
            star_norm_equivalence,
        ),
        (
            "moment inequality for powers of T",
            Some(Duration::from_secs(10)),
            moment_inequality,
        ),
        (
            "K-functional growth on (D(T^n), D(T^m)), both branches",
            Some(Duration::from_secs(60)),
            k_functional_growth,
        ),
        (
            "resolvent series, 20 dense operators, N = 40",
            Some(Duration::from_secs(5)),
            series_identity,
        ),
        (
            "couple swap identity and equal-norm closed form",
            None,
            couple_identities,
        ),
        ("operator norm oracle", None, norm_oracle),
        ("deterministic verify output", None, determinism),
    ];
    let mut failures = 0;
    for (i, (name, budget, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let in_budget = budget.is_none_or(|b| elapsed <= b);
        let pass = outcome.pass && in_budget;
        let budget_note = match budget {
            Some(b) if !in_budget => format!(", over the {}s budget", b.as_secs()),
            Some(b) => format!(" of {}s", b.as_secs()),
            None => String::new(),
        };
        println!(
            "criterion {}: {} - {name}: {} ({:.2}s{budget_note})",
            i + 1,
            if pass { "PASS" } else { "FAIL" },
            outcome.detail,
            elapsed.as_secs_f64()
        );
        if !pass {
            failures += 1;
        }
    }
    println!(
        "acceptance: {} of {} criteria pass",
        criteria.len() - failures,
        criteria.len()
    );
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
