//! `binmrf`: generate, solve and certify binary pairwise MRF instances.
//!
//! Exit codes: 0 success, 1 usage or I/O error, 2 malformed input file,
//! 3 failed verification, 4 instance too large for exhaustive search.

mod report;

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use binmrf::bench::{
    generate, sweep, write_csv, GeneratorConfig, Panel, SweepAxes, Topology, TrialOptions,
};
use binmrf::certificate::{
    certify, extend_to_full, fixed_vertices, fixed_vertices_by_threshold, CertifyOptions,
};
use binmrf::oracle::{brute_solve, constrained_min, DEFAULT_ORACLE_LIMIT, PERSISTENCY_TOL};
use binmrf::trw::DEFAULT_STALL_WINDOW;
use binmrf::{
    read_instance, solve, write_instance, DecompositionKind, EnergyModel, Error, SolverConfig,
};
use clap::{Args, Parser, Subcommand, ValueEnum};

use report::SolveReport;

#[derive(Parser, Debug)]
#[command(
    name = "binmrf",
    version,
    about = "TRW-S solver with optimality certificates for binary MRFs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a random instance.
    Generate(GenerateArgs),
    /// Run the solver and print its fixed-point report.
    Solve(SolveArgs),
    /// Run the solver and print a certificate; fails if any check fails.
    Certify(CertifyArgs),
    /// Check a solve report against exhaustive search.
    OracleCheck(OracleCheckArgs),
    /// Run a p_cor sweep and write CSV.
    Experiment(ExperimentArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum TopologyArg {
    Grid,
    Complete,
}

impl From<TopologyArg> for Topology {
    fn from(t: TopologyArg) -> Self {
        match t {
            TopologyArg::Grid => Topology::Grid,
            TopologyArg::Complete => Topology::Complete,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum DecompArg {
    Chain,
    Edge,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum PanelArg {
    A,
    B,
    C,
    D,
}

#[derive(Args, Debug)]
struct GenerateArgs {
    #[arg(long, value_enum)]
    topology: TopologyArg,
    /// Grid side length or complete-graph order.
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
    /// Interaction strength times node degree.
    #[arg(long = "sigma-d", default_value_t = 2.0)]
    sigma_d: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output path; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SolverArgs {
    #[arg(long, value_enum, default_value = "chain")]
    decomp: DecompArg,
    #[arg(long = "stall-window", default_value_t = DEFAULT_STALL_WINDOW)]
    stall_window: usize,
    #[arg(long = "max-passes", default_value_t = binmrf::trw::DEFAULT_MAX_PASSES)]
    max_passes: usize,
    #[arg(long = "fix-threshold", default_value_t = binmrf::certificate::FIX_THRESHOLD)]
    fix_threshold: f64,
}

impl SolverArgs {
    fn config(&self) -> SolverConfig {
        SolverConfig {
            decomposition: match self.decomp {
                DecompArg::Chain => DecompositionKind::Chain,
                DecompArg::Edge => DecompositionKind::Edge,
            },
            stall_window: self.stall_window,
            max_passes: self.max_passes,
            ..SolverConfig::default()
        }
    }
}

#[derive(Args, Debug)]
struct SolveArgs {
    instance: PathBuf,
    #[command(flatten)]
    solver: SolverArgs,
    /// Largest free subproblem solved exhaustively when completing the labeling.
    #[arg(long = "oracle-limit", default_value_t = DEFAULT_ORACLE_LIMIT)]
    oracle_limit: usize,
    /// Also write the report here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CertifyArgs {
    instance: PathBuf,
    #[command(flatten)]
    solver: SolverArgs,
    #[arg(long = "oracle-limit", default_value_t = DEFAULT_ORACLE_LIMIT)]
    oracle_limit: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct OracleCheckArgs {
    instance: PathBuf,
    report: PathBuf,
    #[arg(long = "oracle-limit", default_value_t = DEFAULT_ORACLE_LIMIT)]
    oracle_limit: usize,
}

#[derive(Args, Debug)]
struct ExperimentArgs {
    /// Use the axes of one figure panel instead of the explicit flags.
    #[arg(long, value_enum)]
    panel: Option<PanelArg>,
    /// With `--panel`, use the full sizes instead of desk scale.
    #[arg(long)]
    full: bool,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "grid")]
    topology: Vec<TopologyArg>,
    #[arg(long, value_delimiter = ',', default_value = "4")]
    n: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "0.5")]
    alpha: Vec<f64>,
    #[arg(long = "sigma-d", value_delimiter = ',', default_value = "2")]
    sigma_d: Vec<f64>,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    solver: SolverArgs,
    /// Record wall-clock times (output is then no longer reproducible).
    #[arg(long)]
    timing: bool,
    /// CSV path; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// A failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: 1,
            message: message.into(),
        }
    }

    fn verification(message: impl Into<String>) -> Self {
        Self {
            code: 3,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Parse { .. } => 2,
            Error::LimitExceeded { .. } | Error::FreeSubproblemTooLarge { .. } => 4,
            Error::BoundDecreased { .. } | Error::InfeasibleDual(_) => 3,
            _ => 1,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::usage(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn emit(text: &str, out: Option<&Path>) -> Outcome {
    match out {
        Some(path) => fs::write(path, text)?,
        None => io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn load(path: &Path) -> Result<EnergyModel, Failure> {
    read_instance(path).map_err(|e| {
        let mut f = Failure::from(e);
        f.message = format!("{}: {}", path.display(), f.message);
        f
    })
}

fn cmd_generate(args: &GenerateArgs) -> Outcome {
    let cfg = GeneratorConfig::from_sigma_d(
        args.topology.into(),
        args.n,
        args.alpha,
        args.sigma_d,
        args.seed,
    );
    let model: EnergyModel = generate(&cfg)?;
    match &args.out {
        Some(path) => write_instance(&model, path)?,
        None => emit(&binmrf::format_instance(&model), None)?,
    }
    Ok(())
}

fn cmd_solve(args: &SolveArgs) -> Outcome {
    let model = load(&args.instance)?;
    let run = solve(&model, &args.solver.config())?;
    let (source, partial) = if run.wta.reached {
        ("local-sets", fixed_vertices(&run.wta.sets))
    } else {
        (
            "threshold",
            fixed_vertices_by_threshold(&run.theta_hat(), args.solver.fix_threshold),
        )
    };
    let labeling = if run.wta.reached {
        match extend_to_full(&model, &partial, args.oracle_limit) {
            Ok(x) => {
                let e = model.evaluate(&x)?;
                Some((x.0, e))
            }
            Err(Error::FreeSubproblemTooLarge { .. }) => None,
            Err(e) => return Err(e.into()),
        }
    } else {
        None
    };
    let report = SolveReport {
        vertices: model.vertex_count(),
        bound: run.report.final_bound(),
        passes: run.report.passes_run,
        terminated: run.report.terminated_by.as_str().to_string(),
        wta: run.wta.reached,
        source: source.to_string(),
        fixed: partial.fixed().collect(),
        labeling,
    };
    let text = report.to_text();
    if let Some(path) = &args.out {
        fs::write(path, &text)?;
    }
    emit(&text, None)
}

fn cmd_certify(args: &CertifyArgs) -> Outcome {
    let model = load(&args.instance)?;
    let run = solve(&model, &args.solver.config())?;
    let opts = CertifyOptions {
        oracle_limit: args.oracle_limit,
        fix_threshold: args.solver.fix_threshold,
    };
    let cert = certify(&model, &run, &opts)?;
    emit(&cert.to_text(), args.out.as_deref())?;
    if cert.all_passed() {
        Ok(())
    } else {
        Err(Failure::verification("certificate has failing statements"))
    }
}

fn cmd_oracle_check(args: &OracleCheckArgs) -> Outcome {
    let model = load(&args.instance)?;
    let text = fs::read_to_string(&args.report)?;
    let report = SolveReport::parse(&text).map_err(|(line, message)| Failure {
        code: 2,
        message: format!("{}: line {line}: {message}", args.report.display()),
    })?;
    let n = model.vertex_count();
    if report.vertices != n {
        return Err(Failure::verification(format!(
            "report has {} vertices, instance has {n}",
            report.vertices
        )));
    }
    let oracle = brute_solve(&model, args.oracle_limit)?;
    let mut failures = Vec::new();
    let mut out = String::new();
    let mut line = |ok: bool, name: &str, detail: String| {
        out.push_str(&format!(
            "{} {name} {detail}\n",
            if ok { "PASS" } else { "FAIL" }
        ));
        if !ok {
            failures.push(name.to_string());
        }
    };
    line(
        report.bound <= oracle.min_energy + 1e-9,
        "bound",
        format!("{} minimum {}", report.bound, oracle.min_energy),
    );
    let mut partial = vec![None; n];
    for &(s, l) in &report.fixed {
        partial[s] = Some(l);
    }
    let constrained = constrained_min(&model, &partial, args.oracle_limit)?;
    line(
        constrained - oracle.min_energy <= PERSISTENCY_TOL,
        "persistency",
        format!(
            "{} fixed, constrained minimum {constrained}",
            report.fixed.len()
        ),
    );
    if let Some((bits, energy)) = &report.labeling {
        let x = binmrf::Assignment(bits.clone());
        let actual = model.evaluate(&x)?;
        let agrees = report.fixed.iter().all(|&(s, l)| bits[s] == l);
        line(
            agrees && (actual - energy).abs() <= 1e-9 && (actual - oracle.min_energy).abs() <= 1e-7,
            "labeling",
            format!("energy {actual}"),
        );
    }
    emit(&out, None)?;
    if failures.is_empty() {
        Ok(())
    } else {
        Err(Failure::verification(format!(
            "failed: {}",
            failures.join(", ")
        )))
    }
}

fn cmd_experiment(args: &ExperimentArgs) -> Outcome {
    let axes = match args.panel {
        Some(p) => {
            let panel = match p {
                PanelArg::A => Panel::A,
                PanelArg::B => Panel::B,
                PanelArg::C => Panel::C,
                PanelArg::D => Panel::D,
            };
            panel.axes(args.full, args.trials, args.seed)
        }
        None => SweepAxes {
            topologies: args.topology.iter().map(|&t| t.into()).collect(),
            sizes: args.n.clone(),
            alphas: args.alpha.clone(),
            sigma_ds: args.sigma_d.clone(),
            trials: args.trials,
            seed: args.seed,
        },
    };
    let opts = TrialOptions {
        solver: args.solver.config(),
        fix_threshold: args.solver.fix_threshold,
        timing: args.timing,
    };
    let cells = sweep(&axes, &opts)?;
    let mut buf = Vec::new();
    write_csv(&mut buf, &cells)?;
    match &args.out {
        Some(path) => fs::write(path, buf)?,
        None => io::stdout().write_all(&buf)?,
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match &cli.command {
        Command::Generate(a) => cmd_generate(a),
        Command::Solve(a) => cmd_solve(a),
        Command::Certify(a) => cmd_certify(a),
        Command::OracleCheck(a) => cmd_oracle_check(a),
        Command::Experiment(a) => cmd_experiment(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("binmrf: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
