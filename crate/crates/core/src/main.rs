use std::collections::HashMap;
use std::f64::consts::PI;
use std::fs;
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use qinterp::interpolation::{LogGrid, LpExponent};
use qinterp::verify::{run_check, CheckConfig, CheckKind, OperatorSource};
use qinterp::{sectorial_scan, Error, OperatorModel, VerificationReport};

#[derive(Parser)]
#[command(
    name = "qinterp",
    version,
    about = "Checks interpolation inequalities for quaternionic operators"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the S-spectrum as sphere representatives (Re, |Im|).
    Spectrum { file: PathBuf },
    /// Measure the sectoriality constant along a ray.
    Sectorial {
        file: PathBuf,
        #[arg(long, default_value_t = PI)]
        omega: f64,
        #[arg(long, num_args = 3, value_names = ["TMIN", "TMAX", "COUNT"])]
        grid: Option<Vec<f64>>,
    },
    /// Run one check suite and emit JSON-lines reports.
    Verify(VerifyArgs),
    /// Summarize JSON-lines reports as CSV.
    Report {
        /// Report files; `*` and `?` in the file name are expanded.
        inputs: Vec<String>,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

#[derive(Args)]
struct VerifyArgs {
    check: String,
    #[arg(long, conflicts_with = "builtin")]
    operator: Option<PathBuf>,
    /// diag-imag, dense-similar or diag-real (also a, b, c).
    #[arg(long)]
    builtin: Option<String>,
    #[arg(long)]
    omega: Option<f64>,
    /// Comma-separated list.
    #[arg(long)]
    theta: Option<String>,
    /// Comma-separated list; `inf` for ∞.
    #[arg(long)]
    p: Option<String>,
    #[arg(long)]
    n: Option<u32>,
    #[arg(long)]
    k: Option<u32>,
    #[arg(long)]
    m: Option<u32>,
    #[arg(long, num_args = 3, value_names = ["TMIN", "TMAX", "COUNT"])]
    grid: Option<Vec<f64>>,
    #[arg(long, default_value_t = 32)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = qinterp::report::DEFAULT_TOL)]
    tol: f64,
    /// Dimension of builtin operators.
    #[arg(long, default_value_t = 16)]
    dim: usize,
    /// Write the reports here instead of standard output.
    #[arg(long)]
    json: Option<PathBuf>,
    /// Record wall time in `ms` (makes output run-dependent).
    #[arg(long)]
    timing: bool,
}

/// Failure of a subcommand, carrying its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Io(_) | Error::Json(_) | Error::InvalidOperator(_) => 3,
            _ => 2,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure {
            code: 3,
            message: e.to_string(),
        }
    }
}

fn precondition(message: impl Into<String>) -> Failure {
    Failure {
        code: 2,
        message: message.into(),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(f) = configure_workers() {
        eprintln!("qinterp: {}", f.message);
        return ExitCode::from(f.code);
    }
    let outcome = match cli.command {
        Command::Spectrum { file } => spectrum(&file),
        Command::Sectorial { file, omega, grid } => sectorial(&file, omega, grid),
        Command::Verify(args) => verify(args),
        Command::Report { inputs, csv } => report(&inputs, csv.as_deref()),
    };
    match outcome {
        Ok(all_pass) => ExitCode::from(if all_pass { 0 } else { 1 }),
        Err(f) => {
            eprintln!("qinterp: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn configure_workers() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("QINTERP_WORKERS") else {
        return Ok(());
    };
    let workers: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&w| w > 0)
        .ok_or_else(|| precondition(format!("QINTERP_WORKERS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build_global()
        .map_err(|e| precondition(e.to_string()))
}

fn parse_grid(grid: Option<Vec<f64>>) -> Result<LogGrid, Failure> {
    match grid.as_deref() {
        None => Ok(LogGrid::default()),
        Some(&[lo, hi, count]) => {
            if count.fract() != 0.0 || count < 0.0 {
                return Err(precondition(format!("grid count must be an integer, got {count}")));
            }
            Ok(LogGrid::new(lo, hi, count as usize)?)
        }
        Some(_) => Err(precondition("--grid takes TMIN TMAX COUNT")),
    }
}

fn spectrum(file: &Path) -> Result<bool, Failure> {
    let model = OperatorModel::load(file)?;
    let parts: Vec<String> = model
        .s_spectrum()
        .iter()
        .map(|s| format!("({},{})", s.re, s.radius))
        .collect();
    println!("{}", parts.join(", "));
    Ok(true)
}

fn sectorial(file: &Path, omega: f64, grid: Option<Vec<f64>>) -> Result<bool, Failure> {
    let model = OperatorModel::load(file)?;
    let grid = parse_grid(grid)?;
    let profile = match sectorial_scan(&model, omega, &grid) {
        Err(Error::Spectral { t, .. }) => {
            return Err(precondition(format!(
                "the ray of angle {omega} meets the S-spectrum at t = {t}"
            )))
        }
        other => other?,
    };
    let worst = |values: &[f64]| {
        values
            .iter()
            .zip(&profile.grid)
            .max_by(|a, b| a.0.total_cmp(b.0))
            .map(|(&v, &t)| (v, t))
            .unwrap_or((0.0, 0.0))
    };
    let (q, tq) = (worst(&profile.q_values), worst(&profile.tq_values));
    println!("measured_M = {}", profile.measured_m);
    println!("M_used = {}", profile.m_used());
    println!("max |s|^2 |Q_s^-1| = {} at t = {}", q.0, q.1);
    println!("max |s| |T Q_s^-1| = {} at t = {}", tq.0, tq.1);
    let mut json = serde_json::to_value(&profile).map_err(Error::from)?;
    json["m_used"] = profile.m_used().into();
    println!("{json}");
    Ok(true)
}

fn parse_list<T>(raw: &str, parse: impl Fn(&str) -> Result<T, Failure>) -> Result<Vec<T>, Failure> {
    raw.split(',').map(|s| parse(s.trim())).collect()
}

fn verify(args: VerifyArgs) -> Result<bool, Failure> {
    let check: CheckKind = args.check.parse()?;
    let operator = match (args.operator, args.builtin) {
        (Some(path), _) => OperatorSource::File(path),
        (None, Some(name)) => OperatorSource::Builtin(name.parse()?),
        (None, None) => CheckConfig::new(check).operator,
    };
    let thetas = match &args.theta {
        Some(raw) => parse_list(raw, |s| {
            s.parse::<f64>().map_err(|e| precondition(format!("θ {s:?}: {e}")))
        })?,
        None => Vec::new(),
    };
    let ps = match &args.p {
        Some(raw) => parse_list(raw, |s| s.parse::<LpExponent>().map_err(Failure::from))?,
        None => Vec::new(),
    };
    let cfg = CheckConfig {
        check,
        operator,
        omega: args.omega,
        thetas,
        ps,
        n: args.n,
        k: args.k,
        m: args.m,
        grid: parse_grid(args.grid)?,
        samples: args.samples,
        seed: args.seed,
        tol: args.tol,
        dim: args.dim,
        timing: args.timing,
    };
    let reports = run_check(&cfg)?;

    let mut lines = String::new();
    for r in &reports {
        lines.push_str(&serde_json::to_string(r).map_err(Error::from)?);
        lines.push('\n');
    }
    match &args.json {
        Some(path) => fs::write(path, lines)?,
        None => io::stdout().write_all(lines.as_bytes())?,
    }
    for r in &reports {
        eprintln!(
            "{} {} [{}]: measured {:.6e} bound {:.6e} margin {:.3e}",
            if r.pass { "PASS" } else { "FAIL" },
            r.check,
            r.params_key(),
            r.measured,
            r.bound,
            r.margin
        );
    }
    let failed = reports.iter().filter(|r| !r.pass).count();
    eprintln!("{} of {} reports pass", reports.len() - failed, reports.len());
    Ok(failed == 0)
}

/// `*` matches any run of characters, `?` exactly one.
fn wildcard_match(pattern: &[char], name: &[char]) -> bool {
    match pattern.split_first() {
        None => name.is_empty(),
        Some(('*', rest)) => (0..=name.len()).any(|i| wildcard_match(rest, &name[i..])),
        Some(('?', rest)) => !name.is_empty() && wildcard_match(rest, &name[1..]),
        Some((c, rest)) => name.first() == Some(c) && wildcard_match(rest, &name[1..]),
    }
}

fn expand(input: &str) -> Result<Vec<PathBuf>, Failure> {
    let path = Path::new(input);
    let file_name = path.file_name().and_then(|f| f.to_str()).unwrap_or("");
    if !file_name.contains(['*', '?']) {
        return Ok(vec![path.to_path_buf()]);
    }
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let pattern: Vec<char> = file_name.chars().collect();
    let mut matches = Vec::new();
    for entry in fs::read_dir(&dir)? {
        let entry = entry?;
        let name: Vec<char> = entry.file_name().to_string_lossy().chars().collect();
        if wildcard_match(&pattern, &name) {
            matches.push(entry.path());
        }
    }
    matches.sort();
    Ok(matches)
}

fn report(inputs: &[String], csv_out: Option<&Path>) -> Result<bool, Failure> {
    let mut reports: Vec<VerificationReport> = Vec::new();
    let mut bad = Vec::new();
    for input in inputs {
        for path in expand(input)? {
            let file = fs::File::open(&path).map_err(|e| Failure {
                code: 3,
                message: format!("{}: {e}", path.display()),
            })?;
            for (i, line) in BufReader::new(file).lines().enumerate() {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                match serde_json::from_str::<VerificationReport>(&line) {
                    Ok(r) => reports.push(r),
                    Err(e) => bad.push(format!("{}:{}: {e}", path.display(), i + 1)),
                }
            }
        }
    }
    if !bad.is_empty() {
        return Err(Failure {
            code: 3,
            message: format!("unparsable report lines:\n{}", bad.join("\n")),
        });
    }

    let mut rows: Vec<(String, &VerificationReport)> = reports.iter().map(|r| (r.params_key(), r)).collect();
    rows.sort_by(|a, b| a.1.check.cmp(&b.1.check).then_with(|| a.0.cmp(&b.0)));
    let mut seen: HashMap<(&str, &str), usize> = HashMap::new();
    for (key, r) in &rows {
        *seen.entry((r.check.as_str(), key.as_str())).or_default() += 1;
    }

    let sink: Box<dyn Write> = match csv_out {
        Some(path) => Box::new(fs::File::create(path)?),
        None => Box::new(io::stdout()),
    };
    let mut writer = csv::Writer::from_writer(sink);
    let csv_err = |e: csv::Error| Failure {
        code: 3,
        message: e.to_string(),
    };
    writer
        .write_record(["check", "params", "measured", "bound", "margin", "pass", "dedup"])
        .map_err(csv_err)?;
    for (key, r) in &rows {
        let duplicated = seen[&(r.check.as_str(), key.as_str())] > 1;
        writer
            .write_record([
                r.check.clone(),
                key.clone(),
                r.measured.to_string(),
                r.bound.to_string(),
                r.margin.to_string(),
                r.pass.to_string(),
                duplicated.to_string(),
            ])
            .map_err(csv_err)?;
    }
    writer.flush()?;
    Ok(rows.iter().all(|(_, r)| r.pass))
}
