//! `elastibez`: λ-residual, projection, elastica fitting and experiments on
//! cubic Bézier curves stored as JSON.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 malformed input or usage,
//! 3 degenerate curve, 4 angle constraints violated (geometric projection).

use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use elastibez::feedback::{feedback_project, FeedbackConfig};
use elastibez::fit::{approximate, first_guess};
use elastibez::geom::CubicBezier;
use elastibez::harness::{
    run_correlation_experiment, run_projection_experiment, run_zone_sweep, sample_curves, thread_pool,
    ConstraintProfile, Experiment, Generator, SampleSpec,
};
use elastibez::residual::lambda_fit;
use elastibez::zone::{geometric_project_with, AngleProfile, ProjectionZone};

#[derive(Debug)]
enum CliError {
    Io(String),
    Input(String),
    Degenerate(String),
    Angle(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Io(_) => 1,
            CliError::Input(_) => 2,
            CliError::Degenerate(_) => 3,
            CliError::Angle(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Io(m) | CliError::Input(m) | CliError::Degenerate(m) | CliError::Angle(m) => m,
        }
    }
}

impl From<elastibez::error::Error> for CliError {
    fn from(e: elastibez::error::Error) -> Self {
        use elastibez::error::Error as E;
        match e {
            E::Degenerate(_) | E::Cusp { .. } => CliError::Degenerate(e.to_string()),
            E::AngleConstraintViolation { .. } => CliError::Angle(e.to_string()),
            E::InvalidInput(_) => CliError::Input(e.to_string()),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

#[derive(Parser)]
#[command(name = "elastibez", version, about = "Cubic Bézier curves close to Euler elastica")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Feedback,
    Geometric,
}

#[derive(Clone, Copy, ValueEnum)]
enum ZoneFormat {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum ExperimentName {
    Correlation,
    Projection,
    ZoneSweep,
}

fn parse_angle_profile(s: &str) -> Result<AngleProfile, String> {
    AngleProfile::parse(s).ok_or_else(|| format!("unknown profile {s:?} (strict, relaxed_quarter, relaxed_sixth)"))
}

fn parse_constraint_profile(s: &str) -> Result<ConstraintProfile, String> {
    ConstraintProfile::parse(s).ok_or_else(|| format!("unknown profile {s:?} (none, strict, relaxed_quarter, relaxed_sixth)"))
}

fn parse_generator(s: &str) -> Result<Generator, String> {
    Generator::parse(s)
        .ok_or_else(|| format!("unknown generator {s:?} (inner_points_unit_box, random_quad_unit_disc, zone_interior)"))
}

#[derive(Subcommand)]
enum Command {
    /// λ-residual and quality class of a curve
    Residual {
        /// curve JSON file, or - for standard input
        input: String,
        #[arg(long)]
        json: bool,
    },
    /// Move the inner control points along their edges towards an elastica-like curve
    Project {
        input: String,
        #[arg(long, value_enum, default_value = "feedback")]
        method: Method,
        /// stop once e_λ is at or below this value (feedback method)
        #[arg(long, default_value_t = 0.0)]
        threshold: f64,
        /// angle profile checked by the geometric method
        #[arg(long, value_parser = parse_angle_profile, default_value = "strict")]
        profile: AngleProfile,
        /// report JSON destination
        #[arg(long, short, default_value = "-")]
        output: String,
        /// also write the projected curve alone
        #[arg(long)]
        curve_out: Option<String>,
        /// also write the first-guess elastica segment of the projected curve
        #[arg(long)]
        overlay: Option<String>,
    },
    /// Fit an elastica segment to a curve
    Approximate {
        input: String,
        #[arg(long, short, default_value = "-")]
        output: String,
        /// number of points of the fitted segment to include
        #[arg(long, default_value_t = 0)]
        polyline: usize,
    },
    /// Boundary of the projection zone in the (φ₁, φ₂) plane
    Zone {
        #[arg(long, value_enum, default_value = "csv")]
        format: ZoneFormat,
        #[arg(long, short, default_value = "-")]
        output: String,
    },
    /// Seeded random curves as a JSON array
    Sample {
        #[arg(long, value_parser = parse_generator, default_value = "random_quad_unit_disc")]
        generator: Generator,
        #[arg(long, default_value_t = 100)]
        count: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, value_parser = parse_constraint_profile, default_value = "none")]
        profile: ConstraintProfile,
        #[arg(long, short, default_value = "-")]
        output: String,
    },
    /// Batch experiment; writes <out>/<name>.csv and <out>/<name>_summary.json
    Experiment {
        #[arg(value_enum)]
        name: ExperimentName,
        /// sample size (defaults: correlation 1000, projection 10000, zone-sweep 100000)
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_parser = parse_generator)]
        generator: Option<Generator>,
        #[arg(long, value_parser = parse_constraint_profile)]
        profile: Option<ConstraintProfile>,
        /// projection threshold E
        #[arg(long, default_value_t = 0.0)]
        threshold: f64,
    },
}

fn read_input(path: &str) -> CliResult<String> {
    if path == "-" {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s).map_err(|e| CliError::Io(format!("stdin: {e}")))?;
        Ok(s)
    } else {
        fs::read_to_string(path).map_err(|e| CliError::Io(format!("{path}: {e}")))
    }
}

fn read_curve(path: &str) -> CliResult<CubicBezier> {
    let text = read_input(path)?;
    let curve: CubicBezier =
        serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{path}: malformed curve JSON: {e}")))?;
    curve.validate()?;
    Ok(curve)
}

/// Writes to standard output for `-`, otherwise through a temporary file in
/// the destination directory that is renamed into place.
fn write_output(path: &str, contents: &str) -> CliResult<()> {
    if path == "-" {
        let mut out = io::stdout().lock();
        return out.write_all(contents.as_bytes()).map_err(|e| CliError::Io(format!("stdout: {e}")));
    }
    write_atomic(Path::new(path), contents)
}

fn write_atomic(path: &Path, contents: &str) -> CliResult<()> {
    let io_err = |e: io::Error| CliError::Io(format!("{}: {e}", path.display()));
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err)?;
    tmp.write_all(contents.as_bytes()).map_err(io_err)?;
    tmp.persist(path).map_err(|e| io_err(e.error))?;
    Ok(())
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable value");
    s.push('\n');
    s
}

fn cmd_residual(input: &str, as_json: bool) -> CliResult<()> {
    let curve = read_curve(input)?;
    let fit = lambda_fit(&curve)?;
    if as_json {
        let v = json!({
            "e_lambda": fit.e_lambda,
            "class": fit.class(),
            "lambda1": fit.lambda1,
            "lambda2": fit.lambda2,
            "alpha": fit.alpha,
            "energy": fit.energy,
            "straight_line": fit.straight_line,
        });
        write_output("-", &to_json(&v))
    } else {
        let mut line = format!("e_lambda={} class={}", fit.e_lambda, fit.class());
        if fit.straight_line {
            line.push_str(" straight_line=true");
        }
        line.push('\n');
        write_output("-", &line)
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_project(
    input: &str,
    method: Method,
    threshold: f64,
    profile: AngleProfile,
    output: &str,
    curve_out: Option<&str>,
    overlay: Option<&str>,
) -> CliResult<()> {
    let curve = read_curve(input)?;
    let (projected, report) = match method {
        Method::Feedback => {
            let r = feedback_project(&curve, &FeedbackConfig::with_threshold(threshold))?;
            let mut v = serde_json::to_value(&r).expect("serializable report");
            v["method"] = json!("feedback");
            eprintln!("e_lambda={} terminated_by={}", r.e_lambda, v["terminated_by"].as_str().unwrap_or(""));
            (r.output, v)
        }
        Method::Geometric => {
            let g = geometric_project_with(&curve, profile)?;
            let e = lambda_fit(&g.curve)?.e_lambda;
            let v = json!({
                "method": "geometric",
                "output": g.curve,
                "e_lambda": e,
                "in_zone": g.in_zone,
                "phase": g.phase,
                "started_inflectional": g.started_inflectional,
            });
            eprintln!("e_lambda={e} in_zone={}", g.in_zone);
            (g.curve, v)
        }
    };
    write_output(output, &to_json(&report))?;
    if let Some(path) = curve_out {
        write_output(path, &to_json(&projected))?;
    }
    if let Some(path) = overlay {
        let seg = first_guess(&projected)?;
        write_output(path, &to_json(&seg))?;
    }
    Ok(())
}

fn cmd_approximate(input: &str, output: &str, polyline: usize) -> CliResult<()> {
    let curve = read_curve(input)?;
    let fit = approximate(&curve)?;
    let mut v: Value = serde_json::to_value(fit).expect("serializable fit");
    if polyline > 0 {
        v["polyline"] = json!(fit.segment.polyline(polyline));
    }
    eprintln!("l2={} h1={} k={}", fit.l2, fit.h1, fit.segment.k);
    write_output(output, &to_json(&v))
}

fn cmd_zone(format: ZoneFormat, output: &str) -> CliResult<()> {
    let zone = ProjectionZone::global();
    let text = match format {
        ZoneFormat::Csv => zone.to_csv(),
        ZoneFormat::Json => to_json(&json!({
            "boundary": zone.boundary(),
            "anchors": zone.anchors(),
        })),
    };
    write_output(output, &text)
}

fn cmd_sample(spec: SampleSpec, output: &str) -> CliResult<()> {
    let pool = thread_pool()?;
    let curves = pool.install(|| sample_curves(&spec));
    write_output(output, &to_json(&curves))
}

fn write_experiment(out: &Path, ex: &Experiment) -> CliResult<()> {
    fs::create_dir_all(out).map_err(|e| CliError::Io(format!("{}: {e}", out.display())))?;
    let name = &ex.summary.experiment;
    write_atomic(&out.join(format!("{name}.csv")), &ex.to_csv())?;
    write_atomic(&out.join(format!("{name}_summary.json")), &to_json(&ex.summary))?;
    let s = &ex.summary.e_lambda;
    let mut line = format!(
        "{name}: n={} failures={} e_lambda mean={} median={} p99={} max={}",
        ex.summary.n, ex.summary.failures, s.mean, s.median, s.p99, s.max
    );
    if let Some(l2) = &ex.summary.l2 {
        line.push_str(&format!(" l2 mean={} max={}", l2.mean, l2.max));
    }
    if let Some(r) = ex.summary.spearman {
        line.push_str(&format!(" spearman={r}"));
    }
    line.push_str(&format!(" runtime_s={:.2}\n", ex.summary.runtime_s));
    write_output("-", &line)
}

fn cmd_experiment(
    name: ExperimentName,
    n: Option<usize>,
    seed: u64,
    out: &Path,
    generator: Option<Generator>,
    profile: Option<ConstraintProfile>,
    threshold: f64,
) -> CliResult<()> {
    let pool = thread_pool()?;
    let ex = match name {
        ExperimentName::Correlation => {
            let spec = SampleSpec::new(
                n.unwrap_or(1000),
                generator.unwrap_or(Generator::InnerPointsUnitBox),
                seed,
                profile.unwrap_or(ConstraintProfile::Strict),
            );
            pool.install(|| run_correlation_experiment(&spec))
        }
        ExperimentName::Projection => {
            let spec = SampleSpec::new(
                n.unwrap_or(10_000),
                generator.unwrap_or(Generator::RandomQuadUnitDisc),
                seed,
                profile.unwrap_or(ConstraintProfile::Strict),
            );
            let config = FeedbackConfig::with_threshold(threshold);
            config.validate()?;
            pool.install(|| run_projection_experiment(&spec, &config))
        }
        ExperimentName::ZoneSweep => {
            if generator.is_some() || profile.is_some() {
                return Err(CliError::Input("zone-sweep takes no --generator or --profile".into()));
            }
            pool.install(|| run_zone_sweep(n.unwrap_or(100_000), seed))
        }
    };
    write_experiment(out, &ex)
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Residual { input, json } => cmd_residual(&input, json),
        Command::Project { input, method, threshold, profile, output, curve_out, overlay } => {
            cmd_project(&input, method, threshold, profile, &output, curve_out.as_deref(), overlay.as_deref())
        }
        Command::Approximate { input, output, polyline } => cmd_approximate(&input, &output, polyline),
        Command::Zone { format, output } => cmd_zone(format, &output),
        Command::Sample { generator, count, seed, profile, output } => {
            cmd_sample(SampleSpec::new(count, generator, seed, profile), &output)
        }
        Command::Experiment { name, n, seed, out, generator, profile, threshold } => {
            cmd_experiment(name, n, seed, &out, generator, profile, threshold)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}
