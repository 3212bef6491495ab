//! `eja`: verification sweeps, norm computations, multiplier prospecting
//! and the worked-example reproduction.
//!
//! Exit codes: 0 success, 1 a check failed (a witness file is written),
//! 2 invalid arguments or inputs.

use std::fs::File;
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use eja_core::algebra::Descriptor;
use eja_core::error::{Error, Result};
use eja_core::exec::{sample_rng, Execution};
use eja_core::io::{load_element, load_schur};
use eja_core::majorization::Tolerance;
use eja_core::prospector::{self, Family, FamilySpec, Variant};
use eja_core::spectral::JordanFrame;
use eja_core::suite::{
    check_example_47, example_47_values, norm_closed_form, norm_empirical, sweep, CheckKind, NormTarget,
    VerificationReport,
};

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser, Debug)]
#[command(name = "eja", version, about = "Euclidean Jordan algebra inequality verifier and multiplier prospector")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Debug, Clone)]
struct Common {
    /// Algebra: sym:n, spin:n, or a direct sum such as sum:sym:2+spin:3
    /// [default: sym:3 for verify, sym:2 for prospect, sym:n matching the
    /// matrix for norm --kind schur].
    #[arg(long)]
    alg: Option<String>,
    /// Base seed; sample i uses a seed derived from (seed, i).
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Absolute tolerance.
    #[arg(long, default_value_t = 1e-9)]
    atol: f64,
    /// Relative tolerance (times the largest partial magnitude).
    #[arg(long, default_value_t = 1e-8)]
    rtol: f64,
    /// Output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Run samples on one thread.
    #[arg(long)]
    sequential: bool,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Json,
    Csv,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
enum NormKind {
    /// L_a(x) = a∘x; operand is an element JSON file.
    Lyap,
    /// P_a(x); operand is an element JSON file.
    Quad,
    /// D_A(x) = A•x in the standard frame of --alg; operand is a CSV or JSON matrix.
    Schur,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
enum VariantArg {
    Abs,
    Cone,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sweep every inequality check over seeded samples.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Samples per check.
        #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
        samples: u64,
        /// Comma-separated subset of checks (default: all).
        #[arg(long, value_delimiter = ',')]
        checks: Vec<String>,
    },
    /// Search a multiplier family for violations of λ(|A•b|) ≺w λ(|diag A|)*λ(|b|).
    Prospect {
        #[command(flatten)]
        common: Common,
        /// psd, lyapunov, quadratic, random_sym, zero_diag, rank_one[:sigma].
        #[arg(long, default_value = "psd")]
        family: String,
        /// Matrix file (CSV or JSON) to use instead of a family.
        #[arg(long)]
        matrix: Option<PathBuf>,
        /// Number of matrices A.
        #[arg(long, default_value_t = 100)]
        samples: usize,
        /// Number of elements b per matrix.
        #[arg(long, default_value_t = 100)]
        budget: usize,
        #[arg(long, value_enum, default_value_t = VariantArg::Abs)]
        variant: VariantArg,
        /// Refinement steps applied to each violation.
        #[arg(long, default_value_t = 0)]
        refine: usize,
        /// CSV summary path (the summary goes to stderr when omitted).
        #[arg(long)]
        summary: Option<PathBuf>,
        /// Re-verify every record of an archive instead of searching.
        #[arg(long)]
        replay: Option<PathBuf>,
    },
    /// Closed-form and empirical ‖T‖_{r→s} for L_a, P_a or D_A.
    Norm {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        kind: NormKind,
        /// Operand file.
        #[arg(long)]
        operand: PathBuf,
        /// Source exponent r (number ≥ 1 or "inf").
        #[arg(long, value_parser = parse_exponent)]
        r: f64,
        /// Target exponent s (number ≥ 1 or "inf").
        #[arg(long, value_parser = parse_exponent)]
        s: f64,
        /// Ratio evaluations for the empirical estimate.
        #[arg(long, default_value_t = 2000)]
        budget: usize,
    },
    /// Reproduce the 2×2 worked example where neither weak majorization holds.
    ReproExample {
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_exponent(s: &str) -> std::result::Result<f64, String> {
    let v = match s.to_ascii_lowercase().as_str() {
        "inf" | "infinity" => f64::INFINITY,
        other => other.parse::<f64>().map_err(|e| format!("{e}"))?,
    };
    if v.is_nan() || v < 1.0 {
        return Err(format!("exponent must lie in [1, inf], got {s}"));
    }
    Ok(v)
}

/// JSON number, or the string "inf" for infinite exponents.
fn exponent_json(v: f64) -> serde_json::Value {
    if v.is_infinite() {
        json!("inf")
    } else {
        json!(v)
    }
}

enum Outcome {
    Pass,
    Fail,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Verify { common, samples, checks } => run_verify(&common, samples as usize, &checks),
        Command::Prospect { common, family, matrix, samples, budget, variant, refine, summary, replay } => {
            run_prospect(&common, &family, matrix.as_deref(), samples, budget, variant, refine, summary.as_deref(), replay.as_deref())
        }
        Command::Norm { common, kind, operand, r, s, budget } => run_norm(&common, kind, &operand, r, s, budget),
        Command::ReproExample { out } => run_repro(out.as_deref()),
    };
    match result {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::Fail) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn tolerance(c: &Common) -> Result<Tolerance> {
    if !(c.atol >= 0.0 && c.rtol >= 0.0) {
        return Err(Error::Parse("tolerances must be nonnegative".into()));
    }
    Ok(Tolerance::new(c.atol, c.rtol))
}

fn execution(c: &Common) -> Execution {
    if c.sequential {
        Execution::Sequential
    } else {
        Execution::default()
    }
}

fn descriptor(c: &Common, default: &str) -> Result<Descriptor> {
    c.alg.as_deref().unwrap_or(default).parse()
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text)?,
        None => io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn witness_path(out: Option<&Path>) -> PathBuf {
    match out {
        Some(p) => {
            let mut s = p.as_os_str().to_owned();
            s.push(".witness.json");
            PathBuf::from(s)
        }
        None => PathBuf::from("eja-witness.json"),
    }
}

fn to_json<T: Serialize>(v: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}

fn run_verify(c: &Common, samples: usize, names: &[String]) -> Result<Outcome> {
    let desc = descriptor(c, "sym:3")?;
    let tol = tolerance(c)?;
    let kinds: Vec<CheckKind> = if names.is_empty() {
        CheckKind::ALL.to_vec()
    } else {
        names.iter().map(|n| n.parse()).collect::<Result<_>>()?
    };
    let mut reports: Vec<VerificationReport> = kinds
        .iter()
        .map(|&k| sweep(k, &desc, samples, c.seed, tol, execution(c)))
        .collect::<Result<_>>()?;
    if names.is_empty() {
        reports.push(check_example_47(tol)?);
    }
    let pass = reports.iter().all(|r| r.pass);

    let text = match c.format {
        Format::Json => to_json(&json!({
            "tool": "eja",
            "version": VERSION,
            "command": "verify",
            "config": { "alg": desc.to_string(), "samples": samples, "seed": c.seed, "atol": c.atol, "rtol": c.rtol, "checks": kinds.iter().map(|k| k.name()).collect::<Vec<_>>() },
            "seed": c.seed,
            "pass": pass,
            "reports": reports,
        }))?,
        Format::Csv => {
            let mut s = format!("# eja {VERSION} verify alg={desc} samples={samples} seed={} atol={} rtol={}\n", c.seed, c.atol, c.rtol);
            s.push_str("check,descriptor,samples,pass,worst_slack\n");
            for r in &reports {
                s.push_str(&format!("{},{},{},{},{:e}\n", r.check, r.descriptor, r.samples, r.pass, r.worst_slack));
            }
            s
        }
    };
    emit(c.out.as_deref(), &text)?;

    if !pass {
        let failing: Vec<&VerificationReport> = reports.iter().filter(|r| !r.pass).collect();
        let path = witness_path(c.out.as_deref());
        std::fs::write(&path, to_json(&json!({ "version": VERSION, "seed": c.seed, "failures": failing }))?)?;
        eprintln!("check failure; witness written to {}", path.display());
        return Ok(Outcome::Fail);
    }
    Ok(Outcome::Pass)
}

#[allow(clippy::too_many_arguments)]
fn run_prospect(
    c: &Common,
    family: &str,
    matrix: Option<&Path>,
    samples: usize,
    budget: usize,
    variant: VariantArg,
    refine_steps: usize,
    summary_path: Option<&Path>,
    replay: Option<&Path>,
) -> Result<Outcome> {
    let tol = tolerance(c)?;
    if let Some(path) = replay {
        let records = prospector::read_archive(BufReader::new(File::open(path)?))?;
        let mut confirmed = 0;
        let mut lines = String::new();
        for (i, r) in records.iter().enumerate() {
            let ok = r.replay(tol)?;
            confirmed += ok as usize;
            lines.push_str(&format!("record {i}: {} margin={:e} {}\n", r.family, r.margin, if ok { "confirmed" } else { "MISMATCH" }));
        }
        lines.push_str(&format!("{confirmed}/{} records confirmed\n", records.len()));
        emit(c.out.as_deref(), &lines)?;
        return Ok(if confirmed == records.len() { Outcome::Pass } else { Outcome::Fail });
    }

    let desc = descriptor(c, "sym:2")?;
    let fam = match matrix {
        Some(p) => Family::UserFile { matrix: load_schur(p)? },
        None => family.parse()?,
    };
    let spec = FamilySpec::with_descriptor(fam, desc)?;
    let variant = match variant {
        VariantArg::Abs => Variant::Abs,
        VariantArg::Cone => Variant::Cone,
    };
    let mut out = prospector::sweep(&spec, variant, samples, budget, c.seed, tol, execution(c))?;
    if refine_steps > 0 {
        out.records = out.records.iter().map(|r| prospector::refine(r, refine_steps, tol)).collect::<Result<_>>()?;
        if let Some(m) = out.records.iter().map(|r| r.margin).reduce(f64::min) {
            out.summary.min_margin = out.summary.min_margin.map(|x| x.min(m));
        }
    }

    let mut archive = Vec::new();
    prospector::write_archive(&mut archive, &out.records)?;
    emit(c.out.as_deref(), std::str::from_utf8(&archive).expect("JSON is UTF-8"))?;

    let mut csv_buf = Vec::new();
    prospector::write_summary_csv(&mut csv_buf, std::slice::from_ref(&out.summary))?;
    match summary_path {
        Some(p) => std::fs::write(p, &csv_buf)?,
        None => io::stderr().write_all(&csv_buf)?,
    }
    Ok(Outcome::Pass)
}

fn run_norm(c: &Common, kind: NormKind, operand: &Path, r: f64, s: f64, budget: usize) -> Result<Outcome> {
    let target = match kind {
        NormKind::Lyap => NormTarget::Lyapunov(load_element(operand)?),
        NormKind::Quad => NormTarget::Quadratic(load_element(operand)?),
        NormKind::Schur => {
            let matrix = load_schur(operand)?;
            let desc = descriptor(c, &format!("sym:{}", matrix.n()))?;
            let frame = JordanFrame::standard(&desc);
            if matrix.n() != frame.len() {
                return Err(Error::SizeMismatch(format!("{}x{} matrix for {desc}", matrix.n(), matrix.n())));
            }
            NormTarget::Schur { matrix, frame }
        }
    };
    if budget == 0 {
        return Err(Error::Parse("--budget must be at least 1".into()));
    }
    let closed = norm_closed_form(&target, r, s)?;
    let mut rng = sample_rng(c.seed, 0);
    let est = norm_empirical(&target, r, s, budget, &mut rng)?;
    let scale = 1.0 + closed.abs();
    let bound_holds = est.value <= closed + 1e-9 * scale;
    let attained = (est.documented_ratio - closed).abs() <= 1e-6 * scale;
    let pass = bound_holds && attained;

    let text = match c.format {
        Format::Json => to_json(&json!({
            "tool": "eja",
            "version": VERSION,
            "command": "norm",
            "config": { "alg": target.descriptor().to_string(), "kind": kind, "operand": operand.display().to_string(), "r": exponent_json(r), "s": exponent_json(s), "budget": budget, "seed": c.seed },
            "seed": c.seed,
            "closed_form": closed,
            "empirical": est.value,
            "documented_ratio": est.documented_ratio,
            "gap": closed - est.value,
            "evaluations": est.evaluations,
            "bound_holds": bound_holds,
            "attained": attained,
            "pass": pass,
            "witness": est.witness,
        }))?,
        Format::Csv => format!(
            "# eja {VERSION} norm seed={}\nclosed_form,empirical,documented_ratio,gap,pass\n{:e},{:e},{:e},{:e},{}\n",
            c.seed,
            closed,
            est.value,
            est.documented_ratio,
            closed - est.value,
            pass
        ),
    };
    emit(c.out.as_deref(), &text)?;
    if !pass {
        let path = witness_path(c.out.as_deref());
        std::fs::write(&path, to_json(&json!({ "version": VERSION, "target": target, "r": exponent_json(r), "s": exponent_json(s), "witness": est.witness }))?)?;
        eprintln!("norm check failed; witness written to {}", path.display());
        return Ok(Outcome::Fail);
    }
    Ok(Outcome::Pass)
}

fn run_repro(out: Option<&Path>) -> Result<Outcome> {
    let report = check_example_47(Tolerance::default())?;
    let (lhs, rhs) = example_47_values()?;
    let fmt2 = |v: &[f64]| format!("({:.2}, {:.2})", v[0], v[1]);
    let mut text = String::new();
    text.push_str("A = [[8, 3], [3, 0]], B = [[0, 3], [3, 8]]\n");
    text.push_str(&format!("lambda(|A o B|) = {}  [{:?}]\n", fmt2(&lhs), lhs));
    text.push_str(&format!("lambda(|A| o |B|) = {}  [{:?}]\n", fmt2(&rhs), rhs));
    for name in ["forward_fails", "reverse_fails"] {
        let leg = report.leg(name).expect("leg present");
        let dir = if name == "forward_fails" {
            "lambda(|A o B|) weakly majorized by lambda(|A| o |B|)"
        } else {
            "lambda(|A| o |B|) weakly majorized by lambda(|A o B|)"
        };
        text.push_str(&format!("{dir}: {}\n", if leg.holds { "fails" } else { "HOLDS" }));
    }
    text.push_str(&format!("matches reference values: {}\n", report.pass));
    emit(out, &text)?;
    Ok(if report.pass { Outcome::Pass } else { Outcome::Fail })
}
