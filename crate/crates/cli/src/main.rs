//! `tgfield`: analysis reports, verification suites, ODE runs and profile export.
//!
//! Exit codes: 0 success, 1 verification failure, 2 invalid input or domain error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use tgfield_core::classified::{mesh_export, profile_csv, profile_samples};
use tgfield_core::ode::integrate_k;
use tgfield_core::report::build_report;
use tgfield_core::scenario::{builtin, custom, parse_region, CustomSpec, BUILTIN};
use tgfield_core::verify::{run, to_tap};
use tgfield_core::{ClassifiedSurface, Error, OdeOptions, Scenario, Stop, Suite};

/// Environment variable overriding the default classification tolerance.
const TOL_ENV: &str = "TGFIELD_TOL";
/// Largest admissible implicit-solution residual at the end of an ODE run.
const ODE_FINAL_TOL: f64 = 1e-8;

#[derive(Debug, Parser)]
#[command(name = "tgfield", version, about = "Second fundamental form of unit vector fields in the unit tangent bundle")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sample a scenario and write a JSON report.
    Report(ReportArgs),
    /// Run invariant suites and print TAP lines.
    Verify(VerifyArgs),
    /// Integrate k' = k^2(k^2+1)/(k^2-1) and write a u,k,implicit_residual CSV.
    Ode(OdeArgs),
    /// Export the profile curve (CSV) and optionally a mesh (OBJ) with curvature CSV.
    Profile(ProfileArgs),
}

#[derive(Debug, Args)]
struct ReportArgs {
    /// Builtin scenario name, or `custom`.
    scenario: String,
    #[arg(long, default_value_t = 50)]
    points: usize,
    /// Classification tolerance (default: 1e-6 analytic, 1e-4 finite differences, or $TGFIELD_TOL).
    #[arg(long)]
    tol: Option<f64>,
    /// Output file (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Custom scenario: comma-separated coordinate names.
    #[arg(long)]
    coords: Option<String>,
    /// Custom scenario: comma-separated diagonal or row-major metric entries.
    #[arg(long)]
    metric: Option<String>,
    /// Custom scenario: comma-separated field components.
    #[arg(long)]
    field: Option<String>,
    /// Custom scenario: sample box `lo:hi,lo:hi,…`.
    #[arg(long)]
    region: Option<String>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// all, structure, lemma3, oracle, curvature, ode or classified.
    #[arg(long, default_value = "all")]
    suite: String,
    /// Tolerance for the totally-geodesic and minimal checks (default 1e-6 or $TGFIELD_TOL).
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Debug, Args)]
struct OdeArgs {
    #[arg(long, allow_hyphen_values = true)]
    k0: f64,
    /// Integrate until k reaches this value.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "u_span")]
    target_k: Option<f64>,
    /// Integrate over u in [0, S] (default 1 when no target is given).
    #[arg(long, allow_hyphen_values = true)]
    u_span: Option<f64>,
    /// Output CSV (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ProfileArgs {
    #[arg(long, allow_hyphen_values = true)]
    t_min: f64,
    #[arg(long, allow_hyphen_values = true)]
    t_max: f64,
    #[arg(long, default_value_t = 100)]
    samples: usize,
    /// Profile CSV (default: stdout).
    #[arg(long)]
    csv: Option<PathBuf>,
    /// OBJ mesh of the surface of revolution.
    #[arg(long)]
    obj: Option<PathBuf>,
    /// Per-vertex curvature CSV (default: next to the OBJ with suffix `.curvature.csv`).
    #[arg(long)]
    curvature_csv: Option<PathBuf>,
    #[arg(long, default_value_t = 64)]
    v_samples: usize,
}

/// Failure of a command, mapped to an exit code.
enum Failure {
    Verification(String),
    Input(Error),
    Io(PathBuf, std::io::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Input(e)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Report(a) => cmd_report(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Ode(a) => cmd_ode(a),
        Command::Profile(a) => cmd_profile(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(1)
        }
        Err(Failure::Input(e)) => {
            let obj = serde_json::json!({ "error": { "kind": e.kind(), "message": e.to_string() } });
            eprintln!("{obj}");
            ExitCode::from(2)
        }
        Err(Failure::Io(path, e)) => {
            let obj = serde_json::json!({ "error": { "kind": "Io", "message": format!("{}: {e}", path.display()) } });
            eprintln!("{obj}");
            ExitCode::from(2)
        }
    }
}

/// `--tol`, else `$TGFIELD_TOL`, else `None` (scenario default).
fn resolve_tol(flag: Option<f64>) -> Result<Option<f64>, Failure> {
    let tol = match flag {
        Some(t) => Some(t),
        None => match std::env::var(TOL_ENV) {
            Ok(s) => Some(
                s.trim().parse::<f64>().map_err(|_| Error::Scenario(format!("{TOL_ENV}='{s}' is not a number")))?,
            ),
            Err(_) => None,
        },
    };
    match tol {
        Some(t) if !(t > 0.0 && t.is_finite()) => Err(Error::Scenario(format!("tolerance must be positive, got {t}")).into()),
        t => Ok(t),
    }
}

fn write_output(path: Option<&Path>, content: &str) -> Result<(), Failure> {
    match path {
        Some(p) => std::fs::write(p, content).map_err(|e| Failure::Io(p.to_path_buf(), e)),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn split_list(s: &str) -> Vec<String> {
    s.split(',').map(|p| p.trim().to_string()).collect()
}

fn scenario_from(a: &ReportArgs) -> Result<Scenario, Error> {
    if a.scenario != "custom" {
        if a.coords.is_some() || a.metric.is_some() || a.field.is_some() || a.region.is_some() {
            return Err(Error::Scenario(format!(
                "--coords/--metric/--field/--region only apply to the custom scenario (builtin: {})",
                BUILTIN.join(", ")
            )));
        }
        return builtin(&a.scenario);
    }
    let need = |v: &Option<String>, flag: &str| {
        v.clone().ok_or_else(|| Error::Scenario(format!("the custom scenario needs --{flag}")))
    };
    let spec = CustomSpec {
        coords: split_list(&need(&a.coords, "coords")?),
        metric: split_list(&need(&a.metric, "metric")?),
        field: split_list(&need(&a.field, "field")?),
        region: parse_region(&need(&a.region, "region")?)?,
    };
    custom(&spec)
}

fn cmd_report(a: ReportArgs) -> Result<(), Failure> {
    let tol = resolve_tol(a.tol)?;
    if a.points == 0 {
        return Err(Error::Sampling("--points must be at least 1".into()).into());
    }
    let scenario = scenario_from(&a)?;
    let report = build_report(&scenario, a.points, tol)?;
    let mut json = serde_json::to_string_pretty(&report).expect("report serializes");
    json.push('\n');
    write_output(a.out.as_deref(), &json)
}

fn cmd_verify(a: VerifyArgs) -> Result<(), Failure> {
    let suite: Suite = a.suite.parse()?;
    let tol = resolve_tol(a.tol)?;
    let checks = run(suite, tol);
    print!("{}", to_tap(&checks));
    let failed = checks.iter().filter(|c| !c.passed()).count();
    if failed > 0 {
        return Err(Failure::Verification(format!("{failed} of {} checks failed", checks.len())));
    }
    Ok(())
}

fn cmd_ode(a: OdeArgs) -> Result<(), Failure> {
    let stop = match (a.target_k, a.u_span) {
        (Some(k), None) => Stop::TargetK(k),
        (None, s) => Stop::USpan(s.unwrap_or(1.0)),
        (Some(_), Some(_)) => unreachable!("clap rejects --target-k with --u-span"),
    };
    let traj = integrate_k(a.k0, stop, &OdeOptions::default())?;
    write_output(a.out.as_deref(), &traj.to_csv())?;
    let final_residual = traj.implicit_residuals().last().copied().unwrap_or(0.0);
    if !(final_residual.abs() < ODE_FINAL_TOL) {
        return Err(Failure::Verification(format!(
            "final implicit residual {final_residual:e} exceeds {ODE_FINAL_TOL:e}"
        )));
    }
    Ok(())
}

fn cmd_profile(a: ProfileArgs) -> Result<(), Failure> {
    let surface = ClassifiedSurface::new(1.0, a.t_min, a.t_max, 1)?;
    let points = profile_samples(&surface, a.samples)?;
    // build the mesh before writing anything so invalid input leaves no partial output
    let mesh = match &a.obj {
        Some(_) => Some(mesh_export(&surface, a.samples, a.v_samples)?),
        None => None,
    };
    write_output(a.csv.as_deref(), &profile_csv(&points))?;
    if let (Some(obj), Some(mesh)) = (&a.obj, mesh) {
        write_output(Some(obj), &mesh.to_obj())?;
        let curv = a.curvature_csv.clone().unwrap_or_else(|| obj.with_extension("curvature.csv"));
        write_output(Some(&curv), &mesh.curvature_csv())?;
    } else if a.curvature_csv.is_some() {
        return Err(Error::Scenario("--curvature-csv requires --obj".into()).into());
    }
    Ok(())
}
