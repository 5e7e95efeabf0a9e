//! Batch front end: seed intake, pipeline orchestration, verification
//! reports, and plot-data export. Exit codes: 0 success / verification
//! pass, 1 verification failure, 2 input or domain errors (with a
//! machine-readable JSON object on standard error).

mod commands;
mod config;
mod target;

use clap::{Parser, Subcommand, ValueEnum};
use config::{GridSpec, Mode, RunConfig, Tolerances};
use num_complex::Complex64;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Debug)]
pub struct CliError {
    pub kind: String,
    pub message: String,
}

impl CliError {
    pub fn input(kind: &str, message: impl Into<String>) -> CliError {
        CliError {
            kind: kind.into(),
            message: message.into(),
        }
    }

    pub fn domain(err: impl std::fmt::Display) -> CliError {
        CliError {
            kind: "domain".into(),
            message: err.to_string(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::json!({ "error": { "kind": self.kind, "message": self.message } })
            .to_string()
    }
}

fn parse_complex(text: &str) -> Result<Complex64, String> {
    let parse = |t: &str| {
        t.trim()
            .parse::<f64>()
            .map_err(|e| format!("bad number `{t}`: {e}"))
    };
    match text.split_once(',') {
        Some((re, im)) => Ok(Complex64::new(parse(re)?, parse(im)?)),
        None => Ok(Complex64::new(parse(text)?, 0.0)),
    }
}

#[derive(Parser)]
#[command(
    name = "forge",
    version,
    about = "Constructs toric anti-self-dual Einstein metrics from odd holomorphic seeds and verifies every checkable property"
)]
struct Cli {
    /// Output directory for CSV and summary files.
    #[arg(long, global = true, default_value = ".")]
    outdir: PathBuf,
    /// Quadrature node count (a power of two, at least 64).
    #[arg(long, global = true, default_value_t = 4096)]
    nodes: usize,
    /// Inner quadrature circle radius.
    #[arg(long, global = true, default_value_t = 0.8)]
    rho: f64,
    /// Safety margin for branch-cut and convergence-disc distances.
    #[arg(long, global = true, default_value_t = 0.9)]
    safety: f64,
    /// Evaluation mode for pipeline data.
    #[arg(long, global = true, value_enum, default_value_t = Mode::Complexified)]
    mode: Mode,
    /// Grid spec x0:x1:nx,y0:y1:ny (z-plane re/im for ode and twistor).
    #[arg(long, global = true, allow_hyphen_values = true)]
    grid: Option<String>,
    /// Truncation override for the seed recursion.
    #[arg(long, global = true)]
    terms: Option<usize>,
    #[arg(long, global = true, default_value_t = 1e-10)]
    tol_ode: f64,
    #[arg(long, global = true, default_value_t = 1e-8)]
    tol_pde: f64,
    #[arg(long, global = true, default_value_t = 1e-7)]
    tol_cp: f64,
    #[arg(long, global = true, default_value_t = 1e-7)]
    tol_joyce: f64,
    #[arg(long, global = true, default_value_t = 1e-6)]
    tol_asd: f64,
    #[arg(long, global = true, default_value_t = 1e-6)]
    tol_gauge: f64,
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol_twistor: f64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Seed intake: validation and the ODE recursion.
    Seed {
        #[command(subcommand)]
        action: SeedAction,
    },
    /// Contour-transform evaluation.
    G {
        #[command(subcommand)]
        action: GAction,
    },
    /// Grid verification of one residual family.
    Verify {
        check: CheckKind,
        /// Seed file path or builtin:<f1>,<f2>.
        target: String,
    },
    /// Metric and curvature export.
    Metric {
        #[command(subcommand)]
        action: MetricAction,
    },
    /// Coordinate dictionary lookups.
    Transform {
        #[arg(long, allow_hyphen_values = true)]
        x: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        y: Option<f64>,
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        r: Option<Complex64>,
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        s: Option<Complex64>,
    },
    /// Builtin harmonic catalogue.
    Seeds {
        #[command(subcommand)]
        action: SeedsAction,
    },
    /// Export one quantity over the grid as (x, y, value) rows.
    Plotdata {
        target: String,
        #[arg(long)]
        quantity: String,
    },
}

#[derive(Subcommand)]
enum SeedAction {
    /// Check the admissibility of a seed; exit 0 iff nondegenerate.
    Validate { file: String },
    /// Solve the seed ODE and write the second component's coefficients.
    Solve {
        file: String,
        #[arg(long)]
        terms: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum GAction {
    /// Evaluate the potential jet at one (r, s) point as CSV rows.
    Eval {
        file: String,
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        r: Complex64,
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        s: Complex64,
        #[arg(long, default_value_t = 3)]
        order: usize,
    },
}

#[derive(Subcommand)]
enum MetricAction {
    /// Metric entries and curvature diagnostics over the grid.
    Grid { target: String },
}

#[derive(Subcommand)]
enum SeedsAction {
    List,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum CheckKind {
    Ode,
    #[value(name = "g-pde")]
    GPde,
    Cp,
    Joyce,
    Asd,
    Einstein,
    Twistor,
}

impl CheckKind {
    fn name(&self) -> &'static str {
        match self {
            CheckKind::Ode => "ode",
            CheckKind::GPde => "g-pde",
            CheckKind::Cp => "cp",
            CheckKind::Joyce => "joyce",
            CheckKind::Asd => "asd",
            CheckKind::Einstein => "einstein",
            CheckKind::Twistor => "twistor",
        }
    }
}

fn install_thread_pool() {
    if let Ok(text) = std::env::var("FORGE_THREADS") {
        if let Ok(n) = text.parse::<usize>() {
            if n >= 1 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
        }
    }
}

fn main() -> ExitCode {
    install_thread_pool();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("{}", err.to_json());
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    if !cli.nodes.is_power_of_two() || cli.nodes < 64 {
        return Err(CliError::input(
            "nodes",
            "node count must be a power of two and at least 64",
        ));
    }
    let default_grid = match cli.command {
        Command::Verify {
            check: CheckKind::Ode | CheckKind::Twistor,
            ..
        } => "-0.35:0.35:7,-0.35:0.35:7",
        _ => "-0.3:0.3:5,1.5:2.5:5",
    };
    let grid_text = cli.grid.as_deref().unwrap_or(default_grid);
    let grid = GridSpec::parse(grid_text).map_err(|m| CliError::input("grid", m))?;
    let tolerances = Tolerances {
        ode: cli.tol_ode,
        pde: cli.tol_pde,
        cp: cli.tol_cp,
        joyce: cli.tol_joyce,
        asd: cli.tol_asd,
        gauge: cli.tol_gauge,
        twistor: cli.tol_twistor,
    };
    let target_name = match &cli.command {
        Command::Verify { target, .. } | Command::Plotdata { target, .. } => target.clone(),
        Command::Metric {
            action: MetricAction::Grid { target },
        } => target.clone(),
        Command::Seed {
            action: SeedAction::Validate { file } | SeedAction::Solve { file, .. },
        } => file.clone(),
        Command::G {
            action: GAction::Eval { file, .. },
        } => file.clone(),
        _ => String::new(),
    };
    let cfg = RunConfig {
        target: target_name,
        grid,
        nodes: cli.nodes,
        rho: cli.rho,
        safety: cli.safety,
        terms: cli.terms,
        mode: cli.mode,
        tolerances,
    };

    std::fs::create_dir_all(&cli.outdir)
        .map_err(|e| CliError::input("outdir", format!("cannot create output dir: {e}")))?;

    match cli.command {
        Command::Seed { action } => match action {
            SeedAction::Validate { file } => commands::seed_validate(&file, &cfg),
            SeedAction::Solve { file, terms, out } => {
                commands::seed_solve(&file, terms.or(cfg.terms), out.as_deref(), &cfg)
            }
        },
        Command::G {
            action: GAction::Eval { file, r, s, order },
        } => commands::g_eval(&file, r, s, order, &cfg),
        Command::Verify { check, target } => {
            commands::verify(check, &target, &cfg, &cli.outdir)
        }
        Command::Metric {
            action: MetricAction::Grid { target },
        } => commands::metric_grid(&target, &cfg, &cli.outdir),
        Command::Transform { x, y, r, s } => commands::transform(x, y, r, s),
        Command::Seeds {
            action: SeedsAction::List,
        } => commands::seeds_list(),
        Command::Plotdata { target, quantity } => {
            commands::plotdata(&target, &quantity, &cfg, &cli.outdir)
        }
    }
}
