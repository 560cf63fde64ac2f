mod manifest;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lcmwalk_core::dist::{check_main2_conditions, ConditionReport, JointLawSpec, LawSpec, Trend};
use lcmwalk_core::lab::{run_experiment, Theorem};
use lcmwalk_core::rng::replica_rng;
use lcmwalk_core::walk::write_trace_csv;
use lcmwalk_core::{run_trajectory, ExperimentConfig, ExperimentReport, Status, StepValue, WalkState};
use serde::Serialize;

use manifest::{sha256_hex, unix_ms, OutputFile, RunManifest};

const REPORT_FILE: &str = "report.json";
const PLOT_FILE: &str = "plot.csv";
const RAW_FILE: &str = "raw.csv";
const DEFAULT_N_GRID: [u64; 5] = [100, 1_000, 10_000, 100_000, 1_000_000];

#[derive(Parser, Debug)]
#[command(
    name = "lcmwalk",
    version,
    about = "Simulate multiplicative perturbed random walks and test their limit theorems"
)]
struct Cli {
    /// master seed; overrides the seed in an experiment config
    #[arg(long, global = true, env = "LCMWALK_SEED")]
    seed: Option<u64>,
    /// worker threads (default: all cores); results do not depend on it
    #[arg(long, global = true, env = "LCMWALK_THREADS")]
    threads: Option<usize>,
    /// directory for output files
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// stdout format
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Draw integers from a step law
    Sample(SampleArgs),
    /// Run one trajectory and print its final state
    Walk(WalkArgs),
    /// Run an experiment from a TOML config and write report, plot data and manifest
    Experiment(ExperimentArgs),
    /// Evaluate the perturbation-negligibility conditions of the log-LCM CLT
    CheckConditions(ConditionArgs),
    /// Re-run the experiment recorded in a manifest and compare outputs byte for byte
    Replay(ReplayArgs),
}

#[derive(Args, Debug)]
struct SampleArgs {
    /// law kind (`zeta`, `geometric`, ...) or a compact spec such as `zeta:alpha=2`
    #[arg(long)]
    law: String,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    value: Option<u64>,
    #[arg(long)]
    prime: Option<u64>,
    #[arg(long, default_value_t = 1)]
    count: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Coupling {
    Independent,
    Identical,
    XiDegenerateOne,
    JointTable,
}

#[derive(Args, Debug)]
struct JointArgs {
    #[arg(long, value_enum, default_value_t = Coupling::Independent)]
    coupling: Coupling,
    /// law of ξ (compact spec); also the common law under `identical`
    #[arg(long)]
    xi: Option<String>,
    /// law of η (compact spec)
    #[arg(long)]
    eta: Option<String>,
    /// CSV of `i,j,w` rows for `joint-table`
    #[arg(long)]
    table: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct WalkArgs {
    #[command(flatten)]
    joint: JointArgs,
    /// number of steps
    #[arg(short = 'n', long)]
    steps: u64,
    /// write a `k,log_pi,log_lcm_theta` CSV row per step to this file
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ExperimentArgs {
    #[arg(long)]
    config: PathBuf,
    /// run this analysis instead of the config's `theorem`
    #[arg(long)]
    theorem: Option<Theorem>,
    /// also write per-replica statistics
    #[arg(long)]
    raw: bool,
}

#[derive(Args, Debug)]
struct ConditionArgs {
    #[command(flatten)]
    joint: JointArgs,
    /// comma-separated step counts
    #[arg(long, value_delimiter = ',')]
    n_grid: Option<Vec<u64>>,
    #[arg(long, default_value_t = 100_000)]
    prime_limit: u64,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
}

#[derive(Args, Debug)]
struct ReplayArgs {
    manifest: PathBuf,
}

/// Exit 2: usage or configuration problem.
struct UsageError(String);

impl<E: std::fmt::Display> From<E> for UsageError {
    fn from(e: E) -> Self {
        UsageError(e.to_string())
    }
}

type CmdResult = Result<ExitCode, UsageError>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: --threads: {e}");
            return ExitCode::from(2);
        }
    }
    let result = match &cli.command {
        Command::Sample(a) => cmd_sample(&cli, a),
        Command::Walk(a) => cmd_walk(&cli, a),
        Command::Experiment(a) => cmd_experiment(&cli, a),
        Command::CheckConditions(a) => cmd_check_conditions(&cli, a),
        Command::Replay(a) => cmd_replay(&cli, a),
    };
    match result {
        Ok(code) => code,
        Err(UsageError(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn stdout() -> BufWriter<io::StdoutLock<'static>> {
    BufWriter::new(io::stdout().lock())
}

fn law_spec(a: &SampleArgs) -> Result<LawSpec, UsageError> {
    let mut params: Vec<String> = Vec::new();
    if let Some(p) = a.prime {
        params.push(format!("prime={p}"));
    }
    if let Some(x) = a.alpha {
        params.push(format!("alpha={x}"));
    }
    if let Some(x) = a.beta {
        params.push(format!("beta={x}"));
    }
    if let Some(x) = a.lambda {
        params.push(format!("lambda={x}"));
    }
    if let Some(v) = a.value {
        params.push(format!("value={v}"));
    }
    let text = match (a.law.contains(':'), params.is_empty()) {
        (_, true) => a.law.clone(),
        (false, false) => format!("{}:{}", a.law, params.join(",")),
        (true, false) => {
            return Err(UsageError(format!(
                "`--law {}` already carries parameters; drop the separate parameter flags",
                a.law
            )))
        }
    };
    Ok(text.parse()?)
}

fn cmd_sample(cli: &Cli, a: &SampleArgs) -> CmdResult {
    let law = law_spec(a)?.build()?;
    let mut rng = replica_rng(cli.seed.unwrap_or(0), 0);
    let values: Vec<StepValue> = (0..a.count).map(|_| law.sample(&mut rng)).collect();
    let mut out = stdout();
    match cli.format.unwrap_or(Format::Text) {
        Format::Text => {
            for v in &values {
                writeln!(out, "{v}")?;
            }
        }
        Format::Csv => {
            writeln!(out, "value")?;
            for v in &values {
                writeln!(out, "{v}")?;
            }
        }
        Format::Json => {
            // integers beyond u64 are emitted as their factored form
            let json: Vec<serde_json::Value> = values
                .iter()
                .map(|v| v.as_u64().map_or_else(|| v.to_string().into(), Into::into))
                .collect();
            writeln!(out, "{}", serde_json::to_string(&json)?)?
        }
    }
    out.flush()?;
    Ok(ExitCode::SUCCESS)
}

fn joint_spec(a: &JointArgs) -> Result<JointLawSpec, UsageError> {
    let law = |name: &str, v: &Option<String>| -> Result<LawSpec, UsageError> {
        let text = v
            .as_deref()
            .ok_or_else(|| UsageError(format!("--{name} is required for this coupling")))?;
        text.parse().map_err(|e| UsageError(format!("--{name}: {e}")))
    };
    Ok(match a.coupling {
        Coupling::Independent => JointLawSpec::Independent {
            xi: law("xi", &a.xi)?,
            eta: law("eta", &a.eta)?,
        },
        Coupling::Identical => JointLawSpec::Identical {
            law: law("xi", &a.xi)?,
        },
        Coupling::XiDegenerateOne => JointLawSpec::XiDegenerateOne {
            eta: law("eta", &a.eta)?,
        },
        Coupling::JointTable => JointLawSpec::JointTable {
            entries: None,
            csv: Some(
                a.table
                    .as_ref()
                    .ok_or_else(|| UsageError("--table is required for joint-table".into()))?
                    .to_string_lossy()
                    .into_owned(),
            ),
        },
    })
}

#[derive(Serialize)]
struct WalkOutput {
    n: u64,
    log_pi: f64,
    log_lcm_theta: f64,
    t_max: BTreeMap<u64, u64>,
}

fn cmd_walk(cli: &Cli, a: &WalkArgs) -> CmdResult {
    let law = joint_spec(&a.joint)?.build(None)?;
    let state = if a.trace.is_some() {
        WalkState::with_trace(usize::try_from(a.steps).unwrap_or(usize::MAX))
    } else {
        WalkState::new()
    };
    let mut rng = replica_rng(cli.seed.unwrap_or(0), 0);
    let tr = run_trajectory(&law, a.steps, &mut rng, &[], &[], state)?;
    if let Some(path) = &a.trace {
        let file = std::fs::File::create(path).map_err(|e| UsageError(format!("{}: {e}", path.display())))?;
        write_trace_csv(tr.state.trace(), BufWriter::new(file))?;
    }
    let s = &tr.state;
    let result = WalkOutput {
        n: s.n(),
        log_pi: s.log_pi(),
        log_lcm_theta: s.log_lcm_theta(),
        t_max: s.t_max().iter().collect(),
    };
    let mut out = stdout();
    match cli.format.unwrap_or(Format::Json) {
        Format::Json => writeln!(out, "{}", serde_json::to_string_pretty(&result)?)?,
        Format::Csv => {
            writeln!(out, "n,log_pi,log_lcm_theta")?;
            writeln!(out, "{},{},{}", result.n, result.log_pi, result.log_lcm_theta)?;
        }
        Format::Text => {
            writeln!(out, "n              {}", result.n)?;
            writeln!(out, "log_pi         {}", result.log_pi)?;
            writeln!(out, "log_lcm_theta  {}", result.log_lcm_theta)?;
            writeln!(out, "t_max          {}", s.t_max())?;
        }
    }
    out.flush()?;
    Ok(ExitCode::SUCCESS)
}

/// Files an experiment writes, keyed by name relative to the output directory.
fn experiment_outputs(
    report: &ExperimentReport,
    raw: bool,
) -> Result<Vec<(&'static str, Vec<u8>)>, UsageError> {
    let mut files = vec![(REPORT_FILE, report.to_json().into_bytes())];
    let mut plot = Vec::new();
    report.write_plot_csv(&mut plot)?;
    files.push((PLOT_FILE, plot));
    if raw {
        let mut bytes = Vec::new();
        report.write_raw_csv(&mut bytes)?;
        files.push((RAW_FILE, bytes));
    }
    Ok(files)
}

fn write_outputs(dir: &Path, files: &[(&str, Vec<u8>)]) -> Result<Vec<OutputFile>, UsageError> {
    std::fs::create_dir_all(dir).map_err(|e| UsageError(format!("{}: {e}", dir.display())))?;
    files
        .iter()
        .map(|(name, bytes)| {
            let path = dir.join(name);
            std::fs::write(&path, bytes).map_err(|e| UsageError(format!("{}: {e}", path.display())))?;
            Ok(OutputFile {
                path: name.to_string(),
                sha256: sha256_hex(bytes),
            })
        })
        .collect()
}

fn exit_for(status: Status) -> ExitCode {
    match status {
        Status::Pass | Status::Advisory => ExitCode::SUCCESS,
        Status::Fail => ExitCode::from(1),
    }
}

fn status_name(status: Status) -> &'static str {
    match status {
        Status::Pass => "pass",
        Status::Fail => "fail",
        Status::Advisory => "advisory",
    }
}

fn resolved_config(
    path: &Path,
    seed: Option<u64>,
    theorem: Option<Theorem>,
) -> Result<ExperimentConfig, UsageError> {
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(t) = theorem {
        cfg.theorem = t;
    }
    Ok(cfg)
}

fn config_hash(cfg: &ExperimentConfig) -> String {
    sha256_hex(cfg.to_toml_string().as_bytes())
}

fn print_report(cli: &Cli, report: &ExperimentReport, out_dir: &Path) -> io::Result<()> {
    let mut out = stdout();
    match cli.format.unwrap_or(Format::Text) {
        Format::Text => write!(out, "{}", report.to_text())?,
        Format::Json => write!(out, "{}", report.to_json())?,
        Format::Csv => out.write_all(&std::fs::read(out_dir.join(PLOT_FILE))?)?,
    }
    out.flush()
}

fn cmd_experiment(cli: &Cli, a: &ExperimentArgs) -> CmdResult {
    let started = unix_ms();
    let clock = Instant::now();
    let cfg = resolved_config(&a.config, cli.seed, a.theorem)?;
    let report = run_experiment(&cfg)?;
    let out_dir = cli
        .out_dir
        .clone()
        .unwrap_or_else(|| PathBuf::from("lcmwalk-out"));
    let outputs = write_outputs(&out_dir, &experiment_outputs(&report, a.raw)?)?;
    let manifest = RunManifest {
        tool: "lcmwalk".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        config_path: std::fs::canonicalize(&a.config).unwrap_or_else(|_| a.config.clone()),
        config_sha256: config_hash(&cfg),
        theorem: cfg.theorem.to_string(),
        seed: cfg.seed,
        raw: a.raw,
        threads: rayon::current_num_threads(),
        started_unix_ms: started,
        finished_unix_ms: unix_ms(),
        runtime_seconds: clock.elapsed().as_secs_f64(),
        status: status_name(report.status).into(),
        out_dir: std::fs::canonicalize(&out_dir).unwrap_or_else(|_| out_dir.clone()),
        outputs,
    };
    let written = manifest.write(&out_dir)?;
    print_report(cli, &report, &out_dir)?;
    eprintln!(
        "wrote {} and {}",
        out_dir.join(REPORT_FILE).display(),
        written.display()
    );
    Ok(exit_for(report.status))
}

fn cmd_replay(cli: &Cli, a: &ReplayArgs) -> CmdResult {
    let recorded = RunManifest::load(&a.manifest)?;
    let theorem: Theorem = recorded.theorem.parse()?;
    let cfg = resolved_config(&recorded.config_path, Some(recorded.seed), Some(theorem))?;
    let hash = config_hash(&cfg);
    if hash != recorded.config_sha256 {
        return Err(UsageError(format!(
            "{} changed since the run (config hash {hash}, recorded {})",
            recorded.config_path.display(),
            recorded.config_sha256
        )));
    }
    let report = run_experiment(&cfg)?;
    let files = experiment_outputs(&report, recorded.raw)?;
    let fresh: Vec<OutputFile> = match &cli.out_dir {
        Some(dir) => write_outputs(dir, &files)?,
        None => files
            .iter()
            .map(|(name, bytes)| OutputFile {
                path: name.to_string(),
                sha256: sha256_hex(bytes),
            })
            .collect(),
    };
    let mut text = String::new();
    let mut identical = fresh.len() == recorded.outputs.len();
    for f in &fresh {
        let old = recorded.outputs.iter().find(|o| o.path == f.path);
        let same = old.is_some_and(|o| o.sha256 == f.sha256);
        identical &= same;
        let _ = writeln!(
            text,
            "{:<12} {}  {}",
            f.path,
            f.sha256,
            if same { "identical" } else { "DIFFERS" }
        );
    }
    let _ = writeln!(text, "replay {}", if identical { "identical" } else { "DIFFERS" });
    let mut out = stdout();
    match cli.format.unwrap_or(Format::Text) {
        Format::Json => writeln!(
            out,
            "{}",
            serde_json::to_string_pretty(&serde_json::json!({ "identical": identical, "outputs": fresh }))?
        )?,
        _ => write!(out, "{text}")?,
    }
    out.flush()?;
    Ok(if identical {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn condition_text(r: &ConditionReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "primes up to {}", r.prime_limit);
    let _ = writeln!(s, "second-moment sum  {:.6e}", r.second_moment_sum);
    let _ = writeln!(
        s,
        "\n{:>10} {:>12} {:>8} {:>14} {:>14}",
        "n", "P1_boundary", "|P1|", "P2_remainder", "ratio"
    );
    for row in &r.rows {
        let _ = writeln!(
            s,
            "{:>10} {:>12} {:>8} {:>14.6e} {:>14.6e}",
            row.n, row.p1_boundary, row.p1_size, row.remainder, row.ratio
        );
    }
    let trend = match r.trend {
        Trend::Decreasing => "decreasing",
        Trend::Increasing => "increasing",
        Trend::Mixed => "mixed",
    };
    let _ = writeln!(
        s,
        "\nratio trend {trend}; verdict {}",
        if r.holds { "holds" } else { "fails" }
    );
    s
}

fn cmd_check_conditions(cli: &Cli, a: &ConditionArgs) -> CmdResult {
    let law = joint_spec(&a.joint)?.build(None)?;
    let grid = a.n_grid.clone().unwrap_or_else(|| DEFAULT_N_GRID.to_vec());
    let report = check_main2_conditions(&law, &grid, a.prime_limit, a.tol)?;
    let mut out = stdout();
    match cli.format.unwrap_or(Format::Text) {
        Format::Text => write!(out, "{}", condition_text(&report))?,
        Format::Json => writeln!(out, "{}", serde_json::to_string_pretty(&report)?)?,
        Format::Csv => {
            writeln!(out, "n,p1_boundary,p1_size,remainder,ratio")?;
            for r in &report.rows {
                writeln!(
                    out,
                    "{},{},{},{},{}",
                    r.n, r.p1_boundary, r.p1_size, r.remainder, r.ratio
                )?;
            }
        }
    }
    out.flush()?;
    Ok(ExitCode::SUCCESS)
}
