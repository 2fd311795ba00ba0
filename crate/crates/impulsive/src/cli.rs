//! Argument parsing, subcommand dispatch and the [`run`] entry point.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use impulsive_core::conjugacy::{
    build_h_grid, check_comparability, check_comparability_in_limit, check_strong_comparability,
    targets_from_limit_set, verify_weak_conjugacy, AsymptoticReference, ClauseTolerances, ConjugacyMap,
    ConjugacyOptions, Verdict,
};
use impulsive_core::expr::parse_expression;
use impulsive_core::impulsive::Truncation;
use impulsive_core::recurrence::{almost_period_search, estimate_limit_set, Reparametrization};
use impulsive_core::StatePoint;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{figure2_map_spec, resolve, MapSpec, Resolved};
use crate::error::{CliError, EXIT_NUMERICAL, EXIT_OK, EXIT_USAGE, EXIT_VERIFICATION_FAILED};
use crate::format::{
    coord_header, csv_text, fmt_e, map_table_csv, parse_grid, parse_point, parse_times, read_map_table,
};

pub const TOOL: &str = "impulsive";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Value of `--map` selecting the closed-form gallery conjugacy.
pub const BUILTIN_FIGURE2: &str = "builtin:figure2";

#[derive(Debug, Parser)]
#[command(
    name = "impulsive",
    version,
    about = "Simulate impulsive semidynamical systems and check weak conjugacies"
)]
pub struct Cli {
    /// Seed for every sampled probe (H2 surface sampling).
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate π̃(x0, ·) and write the trajectory CSV.
    Simulate(SimulateArgs),
    /// Print the first hitting time φ(x0) of the impulse surface.
    Phi(PhiArgs),
    /// Estimate the limit set of x0 and write the cloud CSV.
    LimitSet(LimitSetArgs),
    /// Search almost periods of x0.
    AlmostPeriod(AlmostPeriodArgs),
    /// Tabulate h(q) = lim σ̃(y0, s_n) on a grid and write the map CSV.
    BuildH(BuildHArgs),
    /// Check the weak conjugacy clauses for a map.
    VerifyConjugacy(VerifyArgs),
    /// Compare two points by the character of their recurrence.
    Compare(CompareArgs),
    /// Write a built-in system pair and its conjugacy.
    #[command(subcommand)]
    Gallery(GalleryCommand),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Simulate(_) => "simulate",
            Command::Phi(_) => "phi",
            Command::LimitSet(_) => "limit-set",
            Command::AlmostPeriod(_) => "almost-period",
            Command::BuildH(_) => "build-h",
            Command::VerifyConjugacy(_) => "verify-conjugacy",
            Command::Compare(_) => "compare",
            Command::Gallery(_) => "gallery",
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct SimulateArgs {
    /// Gallery name or path to a JSON system spec.
    #[arg(long)]
    pub system: String,
    /// Initial point, comma separated.
    #[arg(long, allow_hyphen_values = true)]
    pub x0: String,
    #[arg(long)]
    pub horizon: f64,
    /// Sampling step of the CSV rows.
    #[arg(long, default_value_t = 0.01)]
    pub dt: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct PhiArgs {
    #[arg(long)]
    pub system: String,
    #[arg(long, allow_hyphen_values = true)]
    pub x0: String,
    #[arg(long, default_value_t = 100.0)]
    pub horizon: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct LimitSetArgs {
    #[arg(long)]
    pub system: String,
    #[arg(long, allow_hyphen_values = true)]
    pub x0: String,
    #[arg(long)]
    pub t0: f64,
    #[arg(long)]
    pub t1: f64,
    #[arg(long, default_value_t = 0.01)]
    pub dt: f64,
    #[arg(long, default_value_t = 0.01)]
    pub cluster_eps: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct AlmostPeriodArgs {
    #[arg(long)]
    pub system: String,
    #[arg(long, allow_hyphen_values = true)]
    pub x0: String,
    #[arg(long)]
    pub eps: f64,
    /// Window length searched past each α.
    #[arg(long = "max-T")]
    pub max_t: f64,
    /// Horizon of the shift defect.
    #[arg(long)]
    pub t_horizon: f64,
    #[arg(long, default_value_t = 0.01)]
    pub dt: f64,
    /// Sampled α values, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "0,2.5,5,7.5,10")]
    pub alphas: Vec<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct PairArgs {
    #[arg(long)]
    pub sysx: String,
    #[arg(long)]
    pub sysy: String,
    #[arg(long, allow_hyphen_values = true)]
    pub x0: String,
    #[arg(long, allow_hyphen_values = true)]
    pub y0: String,
    /// Recurrence times per sequence.
    #[arg(long, default_value_t = 30)]
    pub count: usize,
    /// Simulation horizon of both motions.
    #[arg(long, default_value_t = 60.0)]
    pub horizon: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct BuildHArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub pair: PairArgs,
    /// Grid spec: `a:b:n` or a constant per coordinate, or `@points.csv`.
    #[arg(long, allow_hyphen_values = true)]
    pub grid: String,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct VerifyArgs {
    /// Defaults to figure2-left with the built-in map.
    #[arg(long)]
    pub sysx: Option<String>,
    /// Defaults to figure2-right with the built-in map.
    #[arg(long)]
    pub sysy: Option<String>,
    /// `builtin:figure2`, a closed-form map `.json`, or a map table `.csv`.
    #[arg(long)]
    pub map: String,
    /// Points of A; defaults to the table's points, or `0:1:21,0` for the built-in map.
    #[arg(long, allow_hyphen_values = true)]
    pub domain: Option<String>,
    /// Times t at which the equivariance clauses are sampled.
    #[arg(long, default_value = "0:5:21")]
    pub times: String,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct CompareArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub pair: PairArgs,
    /// Strong comparability (x almost periodic, h(x) = y).
    #[arg(long, conflicts_with = "in_limit")]
    pub strong: bool,
    /// Comparability in limit.
    #[arg(long)]
    pub in_limit: bool,
    /// Number of target families.
    #[arg(long, default_value_t = 10)]
    pub families: usize,
    /// Point q̃ for the asymptotic clause, paired with the identity reparametrization.
    #[arg(long, requires = "in_limit", allow_hyphen_values = true)]
    pub q_tilde: Option<String>,
    /// Almost-period tolerance for `--strong`.
    #[arg(long, default_value_t = 1e-6)]
    pub ap_eps: f64,
    /// Orbit-closure samples for `--strong`.
    #[arg(long, default_value_t = 20)]
    pub h_grid_points: usize,
    /// Distance tolerance for `--strong`.
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    /// Also write the summary JSON here.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum GalleryCommand {
    /// The translation and radial systems and h(x1, x2) = (e^{-x1}, 0).
    Figure2(GalleryArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct GalleryArgs {
    #[arg(long)]
    pub out_dir: PathBuf,
}

/// What one invocation produced.
#[derive(Debug, Clone)]
pub struct CommandResult {
    pub exit_code: i32,
    pub artifacts: Vec<PathBuf>,
    /// `Null` when the arguments could not be parsed.
    pub summary: Value,
    pub stdout: String,
    pub stderr: String,
}

struct Outcome {
    exit_code: i32,
    parameters: Value,
    systems: Vec<Value>,
    result: Value,
    files: Vec<(PathBuf, Vec<u8>)>,
    /// Printed on stdout in place of the summary, which then goes to stderr.
    primary: Option<String>,
    notes: Vec<String>,
    report: Option<PathBuf>,
}

impl Outcome {
    fn new(parameters: impl Serialize, systems: Vec<Value>, result: Value) -> Self {
        Outcome {
            exit_code: EXIT_OK,
            parameters: serde_json::to_value(parameters).expect("arguments serialize"),
            systems,
            result,
            files: Vec::new(),
            primary: None,
            notes: Vec::new(),
            report: None,
        }
    }

    fn failed_if(mut self, failed: bool) -> Self {
        if failed {
            self.exit_code = EXIT_VERIFICATION_FAILED;
        }
        self
    }

    fn file(mut self, path: &Path, bytes: Vec<u8>) -> Self {
        self.files.push((path.to_path_buf(), bytes));
        self
    }
}

fn positive(v: f64, flag: &str) -> Result<(), CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(CliError::usage(format!("{flag} must be positive and finite, got {v}")))
    }
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("JSON values serialize") + "\n"
}

fn status_name(code: i32) -> &'static str {
    match code {
        EXIT_OK => "ok",
        EXIT_VERIFICATION_FAILED => "verification-failed",
        EXIT_USAGE => "usage-error",
        _ => "numerical-error",
    }
}

/// Parses `argv` (including the program name), runs the subcommand, writes
/// its artifacts and returns the exit code with everything to print.
pub fn run<I, T>(argv: I) -> CommandResult
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            let (exit_code, stdout, stderr) = if e.use_stderr() {
                (EXIT_USAGE, String::new(), text)
            } else {
                (EXIT_OK, text, String::new())
            };
            return CommandResult {
                exit_code,
                artifacts: Vec::new(),
                summary: Value::Null,
                stdout,
                stderr,
            };
        }
    };
    let command = cli.command.name();
    let envelope = |code: i32| {
        json!({
            "tool": TOOL,
            "version": VERSION,
            "command": command,
            "seed": cli.seed,
            "status": status_name(code),
            "exit_code": code,
        })
    };
    let outcome = match execute(&cli) {
        Ok(o) => o,
        Err(e) => {
            let code = e.exit_code();
            let mut summary = envelope(code);
            summary["error"] = json!(e.to_string());
            return CommandResult {
                exit_code: code,
                artifacts: Vec::new(),
                stdout: String::new(),
                stderr: format!("error: {e}\n{}", pretty(&summary)),
                summary,
            };
        }
    };

    let mut summary = envelope(outcome.exit_code);
    let mut artifacts: Vec<PathBuf> = outcome.files.iter().map(|(p, _)| p.clone()).collect();
    artifacts.extend(outcome.report.iter().cloned());
    summary["parameters"] = outcome.parameters;
    summary["systems"] = Value::Array(outcome.systems);
    summary["artifacts"] = json!(artifacts.iter().map(|p| p.display().to_string()).collect::<Vec<_>>());
    summary["result"] = outcome.result;

    let mut files = outcome.files;
    if let Some(path) = &outcome.report {
        files.push((path.clone(), pretty(&summary).into_bytes()));
    }
    for (path, bytes) in &files {
        if let Err(e) = write_file(path, bytes) {
            let mut failed = envelope(EXIT_USAGE);
            failed["error"] = json!(e.to_string());
            return CommandResult {
                exit_code: EXIT_USAGE,
                artifacts: Vec::new(),
                stdout: String::new(),
                stderr: format!("error: {e}\n{}", pretty(&failed)),
                summary: failed,
            };
        }
    }

    let mut stderr: String = outcome.notes.iter().map(|n| format!("{n}\n")).collect();
    let stdout = match outcome.primary {
        Some(line) => {
            stderr.push_str(&pretty(&summary));
            line + "\n"
        }
        None => pretty(&summary),
    };
    CommandResult {
        exit_code: outcome.exit_code,
        artifacts,
        summary,
        stdout,
        stderr,
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
    }
    fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

fn execute(cli: &Cli) -> Result<Outcome, CliError> {
    match &cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Phi(a) => phi(a),
        Command::LimitSet(a) => limit_set(a),
        Command::AlmostPeriod(a) => almost_period(a),
        Command::BuildH(a) => build_h(a, cli.seed),
        Command::VerifyConjugacy(a) => verify_conjugacy(a, cli.seed),
        Command::Compare(a) => compare(a, cli.seed),
        Command::Gallery(GalleryCommand::Figure2(a)) => gallery_figure2(a),
    }
}

fn simulate(a: &SimulateArgs) -> Result<Outcome, CliError> {
    positive(a.horizon, "--horizon")?;
    positive(a.dt, "--dt")?;
    let r = resolve(&a.system)?;
    let sys = r.load()?;
    let x0 = parse_point(&a.x0, sys.dimension(), "--x0")?;
    let traj = sys.build_trajectory(&x0, a.horizon)?;
    let rows = traj.sample_rows(a.dt)?;
    let mut header: Vec<String> = ["t", "seg_index", "is_jump"].map(String::from).to_vec();
    header.extend(coord_header("x", sys.dimension()));
    let csv = csv_text(
        &header,
        rows.iter().map(|row| {
            let mut f = vec![
                fmt_e(row.t),
                row.seg_index.to_string(),
                u8::from(row.is_jump).to_string(),
            ];
            f.extend(row.state.iter().map(|v| fmt_e(*v)));
            f
        }),
    );
    let zeno = traj.truncated_by() == Truncation::ZenoGuard;
    let mut out = Outcome::new(
        a,
        vec![r.summary("system", &sys)],
        json!({
            "rows": rows.len(),
            "jumps": traj.jump_count(),
            "jump_times": traj.jump_times(),
            "truncated_by": traj.truncated_by(),
        }),
    )
    .file(&a.out, csv);
    if zeno {
        out.exit_code = EXIT_NUMERICAL;
        out.notes.push("trajectory stopped by the Zeno guard".into());
    }
    Ok(out)
}

fn phi(a: &PhiArgs) -> Result<Outcome, CliError> {
    positive(a.horizon, "--horizon")?;
    let r = resolve(&a.system)?;
    let sys = r.load()?;
    let x0 = parse_point(&a.x0, sys.dimension(), "--x0")?;
    let phi = sys.hitting_time(&x0, a.horizon)?;
    let mut out = Outcome::new(a, vec![r.summary("system", &sys)], json!({ "phi": phi }));
    out.primary = Some(phi.map_or_else(|| "inf".to_string(), |t| t.to_string()));
    Ok(out)
}

fn limit_set(a: &LimitSetArgs) -> Result<Outcome, CliError> {
    let r = resolve(&a.system)?;
    let sys = r.load()?;
    let x0 = parse_point(&a.x0, sys.dimension(), "--x0")?;
    let est = estimate_limit_set(&sys, &x0, a.t0, a.t1, a.dt, a.cluster_eps)?;
    let mut header = coord_header("x", sys.dimension());
    header.push("cluster_size".into());
    let csv = csv_text(
        &header,
        est.points.iter().zip(&est.cluster_sizes).map(|(p, n)| {
            let mut f: Vec<String> = p.coords().iter().map(|v| fmt_e(*v)).collect();
            f.push(n.to_string());
            f
        }),
    );
    let result = json!({
        "representatives": est.points.len(),
        "converged": est.converged,
        "half_window_distance": est.half_window_distance,
        "window": est.window,
        "cluster_eps": est.cluster_eps,
        "dt": est.dt,
    });
    Ok(Outcome::new(a, vec![r.summary("system", &sys)], result).file(&a.out, csv))
}

fn almost_period(a: &AlmostPeriodArgs) -> Result<Outcome, CliError> {
    let r = resolve(&a.system)?;
    let sys = r.load()?;
    let x0 = parse_point(&a.x0, sys.dimension(), "--x0")?;
    let found = almost_period_search(&sys, &x0, a.eps, a.max_t, a.t_horizon, &a.alphas, a.dt)?;
    let failed = found.report().is_none();
    let result = serde_json::to_value(&found).expect("report serializes");
    Ok(Outcome::new(a, vec![r.summary("system", &sys)], result).failed_if(failed))
}

struct LoadedPair {
    rx: Resolved,
    ry: Resolved,
    sys_x: impulsive_core::ImpulsiveSystem,
    sys_y: impulsive_core::ImpulsiveSystem,
    x: StatePoint,
    y: StatePoint,
    opts: ConjugacyOptions,
}

impl LoadedPair {
    fn load(a: &PairArgs, seed: u64) -> Result<Self, CliError> {
        positive(a.horizon, "--horizon")?;
        if a.count < 2 {
            return Err(CliError::usage("--count must be at least 2"));
        }
        let rx = resolve(&a.sysx)?;
        let ry = resolve(&a.sysy)?;
        let sys_x = rx.load_checked(seed)?;
        let sys_y = ry.load_checked(seed)?;
        let x = parse_point(&a.x0, sys_x.dimension(), "--x0")?;
        let y = parse_point(&a.y0, sys_y.dimension(), "--y0")?;
        let opts = ConjugacyOptions {
            count: a.count,
            horizon: a.horizon,
            ..ConjugacyOptions::default()
        };
        Ok(LoadedPair {
            rx,
            ry,
            sys_x,
            sys_y,
            x,
            y,
            opts,
        })
    }

    fn systems(&self) -> Vec<Value> {
        vec![self.rx.summary("x", &self.sys_x), self.ry.summary("y", &self.sys_y)]
    }
}

fn build_h(a: &BuildHArgs, seed: u64) -> Result<Outcome, CliError> {
    let p = LoadedPair::load(&a.pair, seed)?;
    let grid = parse_grid(&a.grid, p.sys_x.dimension(), "--grid")?;
    let hg = build_h_grid(&p.sys_x, &p.x, &p.sys_y, &p.y, &grid, &p.opts)?;
    let csv = map_table_csv(hg.map.entries().expect("grid maps are tables"));
    let max_defect = hg.points.iter().map(|q| q.defect).fold(0.0, f64::max);
    let max_gap = hg.points.iter().map(|q| q.uniqueness_distance).fold(0.0, f64::max);
    let result = json!({
        "grid_points": hg.points.len(),
        "continuity_modulus": hg.continuity_modulus,
        "max_defect": max_defect,
        "max_uniqueness_distance": max_gap,
        "options": { "count": p.opts.count, "horizon": p.opts.horizon, "seq_tol": p.sys_y.seq_tol() },
        "points": hg.points,
    });
    Ok(Outcome::new(a, p.systems(), result).file(&a.out, csv))
}

fn closed_form_map(spec: &MapSpec) -> Result<ConjugacyMap, CliError> {
    let exprs = spec
        .closed_form
        .iter()
        .map(|s| parse_expression(s, spec.dimension))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ConjugacyMap::closed_form(spec.dimension, exprs)?)
}

fn load_map(arg: &str) -> Result<ConjugacyMap, CliError> {
    if arg == BUILTIN_FIGURE2 {
        return closed_form_map(&figure2_map_spec());
    }
    if let Some(other) = arg.strip_prefix("builtin:") {
        return Err(CliError::usage(format!("unknown built-in map `{other}`")));
    }
    let path = Path::new(arg);
    if path.extension().is_some_and(|e| e == "json") {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let spec: MapSpec =
            serde_json::from_str(&text).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
        return closed_form_map(&spec);
    }
    Ok(ConjugacyMap::table_from_grid(read_map_table(path)?)?)
}

fn verify_conjugacy(a: &VerifyArgs, seed: u64) -> Result<Outcome, CliError> {
    positive(a.tol, "--tol")?;
    let builtin = a.map == BUILTIN_FIGURE2;
    let pick = |given: &Option<String>, default: &str, flag: &str| {
        given
            .clone()
            .or_else(|| builtin.then(|| default.to_string()))
            .ok_or_else(|| CliError::usage(format!("{flag} is required unless --map {BUILTIN_FIGURE2}")))
    };
    let rx = resolve(&pick(&a.sysx, "figure2-left", "--sysx")?)?;
    let ry = resolve(&pick(&a.sysy, "figure2-right", "--sysy")?)?;
    let sys_x = rx.load_checked(seed)?;
    let sys_y = ry.load_checked(seed)?;
    let map = load_map(&a.map)?;
    let domain = match (&a.domain, map.is_table(), builtin) {
        (Some(spec), _, _) => parse_grid(spec, sys_x.dimension(), "--domain")?,
        (None, true, _) => map.domain_samples(),
        (None, false, true) => parse_grid("0:1:21,0", 2, "--domain")?,
        (None, false, false) => return Err(CliError::usage("--domain is required for closed-form maps")),
    };
    let times = parse_times(&a.times, "--times")?;
    let verdict = verify_weak_conjugacy(&map, &domain, &sys_x, &sys_y, &times, ClauseTolerances::new(a.tol))?;
    let failed = verdict.failed_clauses();
    let mut result = serde_json::to_value(&verdict).expect("verdict serializes");
    result["failed_clauses"] = json!(failed);
    result["domain_points"] = json!(domain.len());
    let mut out =
        Outcome::new(a, vec![rx.summary("x", &sys_x), ry.summary("y", &sys_y)], result).failed_if(!verdict.pass);
    for (clause, eq) in [("b", &verdict.clause_b), ("c", &verdict.clause_c)] {
        if let Some(w) = eq.witness.as_ref().filter(|_| !eq.pass) {
            out.notes.push(format!(
                "clause ({clause}) fails at q = {}, t = {}: residual {:e}",
                w.q, w.t, w.residual
            ));
        }
    }
    if let Some((p, q)) = verdict.clause_a.collision.as_ref().filter(|_| !verdict.clause_a.pass) {
        out.notes.push(format!("clause (a) fails: h({p}) and h({q}) collide"));
    }
    Ok(out)
}

fn compare(a: &CompareArgs, seed: u64) -> Result<Outcome, CliError> {
    if a.families == 0 {
        return Err(CliError::usage("--families must be positive"));
    }
    let p = LoadedPair::load(&a.pair, seed)?;
    let opts = ConjugacyOptions {
        n_families: a.families,
        ..p.opts.clone()
    };
    let (mode, pass, result) = if a.strong {
        positive(a.ap_eps, "--ap-eps")?;
        positive(a.tol, "--tol")?;
        let r = check_strong_comparability(&p.sys_x, &p.x, &p.sys_y, &p.y, a.ap_eps, a.h_grid_points, a.tol, &opts)?;
        ("strong", r.pass, serde_json::to_value(&r))
    } else if a.in_limit {
        let reference = match &a.q_tilde {
            Some(q) => Some(AsymptoticReference {
                q_tilde: parse_point(q, p.sys_x.dimension(), "--q-tilde")?,
                g: Reparametrization::Identity,
            }),
            None => None,
        };
        let r = check_comparability_in_limit(&p.sys_x, &p.x, &p.sys_y, &p.y, reference.as_ref(), &opts)?;
        ("in-limit", r.pass, serde_json::to_value(&r))
    } else {
        let targets = targets_from_limit_set(&p.sys_x, &p.x, |_| true, a.families, &opts)?;
        let r = check_comparability(&p.sys_x, &p.x, &p.sys_y, &p.y, &targets, &opts)?;
        (
            "comparability",
            r.verdict == Verdict::ComparableEvidence,
            serde_json::to_value(&r),
        )
    };
    let mut result = result.expect("report serializes");
    result["mode"] = json!(mode);
    let mut out = Outcome::new(a, p.systems(), result).failed_if(!pass);
    out.report = a.report.clone();
    Ok(out)
}

fn gallery_figure2(a: &GalleryArgs) -> Result<Outcome, CliError> {
    let mut systems = Vec::new();
    let mut files = Vec::new();
    for name in ["figure2-left", "figure2-right"] {
        let r = resolve(name)?;
        let sys = r.load()?;
        systems.push(r.summary(name, &sys));
        let text = serde_json::to_string_pretty(&r.spec).expect("spec serializes") + "\n";
        files.push((a.out_dir.join(format!("{name}.json")), text.into_bytes()));
    }
    let map = serde_json::to_string_pretty(&figure2_map_spec()).expect("map serializes") + "\n";
    files.push((a.out_dir.join("figure2-h.json"), map.into_bytes()));
    let mut out = Outcome::new(a, systems, json!({ "map": figure2_map_spec() }));
    out.files = files;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clap_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }

    #[test]
    fn phi_prints_bare_value() {
        let r = run(["impulsive", "phi", "--system", "figure2-left", "--x0", "0.25,0.7"]);
        assert_eq!(r.exit_code, 0, "{}", r.stderr);
        assert_eq!(r.stdout, "0.75\n");
        assert_eq!(r.summary["result"]["phi"], json!(0.75));
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(run(["impulsive", "phi", "--system", "figure2-left"]).exit_code, 2);
        let r = run(["impulsive", "phi", "--system", "figure2-left", "--x0", "1,2,3"]);
        assert_eq!(r.exit_code, 2);
        assert_eq!(r.summary["status"], "usage-error");
        let r = run([
            "impulsive",
            "compare",
            "--sysx",
            "a",
            "--sysy",
            "b",
            "--x0",
            "0,0",
            "--y0",
            "1,0",
            "--strong",
            "--in-limit",
        ]);
        assert_eq!(r.exit_code, 2);
    }

    #[test]
    fn help_exits_0() {
        let r = run(["impulsive", "--help"]);
        assert_eq!(r.exit_code, 0);
        assert!(r.stdout.contains("verify-conjugacy"));
    }

    #[test]
    fn map_arguments() {
        assert!(load_map(BUILTIN_FIGURE2).is_ok());
        assert!(matches!(load_map("builtin:nope"), Err(CliError::Usage(_))));
        assert!(matches!(load_map("/no/such/map.csv"), Err(CliError::Io(_))));
    }
}
