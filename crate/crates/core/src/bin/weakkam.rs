use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use weakkam::commutation::{
    commutation_report, theorem_suite, PairSetup, SuiteSettings, WeakKamData, WeakKamSettings, DEFAULT_MAX_ITERS,
};
use weakkam::config::RunConfig;
use weakkam::hamiltonian::{coercivity_audit, AuditReport};
use weakkam::io::fmt_csv;
use weakkam::legendre::{default_tol_legendre, involution_check, legendre_transform, InvolutionReport, SymmetricGrid};
use weakkam::weak_kam::{aubry_representatives, solutions_to_csv, weak_kam_solution};
use weakkam::{Error, Pipeline, Result};

#[derive(Parser)]
#[command(name = "weakkam", about = "Weak KAM computations on the flat torus", version)]
struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides the config).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Nodes per axis (overrides the config).
    #[arg(long = "grid-n", global = true)]
    grid_n: Option<usize>,
    /// Probe times as "t,s;t,s;...".
    #[arg(long, global = true)]
    probe: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate the Lagrangian and audit the Hamiltonian.
    Legendre {
        name: String,
        /// Also conjugate back and report the round-trip deviation.
        #[arg(long)]
        check_involution: bool,
    },
    /// Critical value, barrier, Aubry set and solutions.
    Weakkam { name: String },
    /// Commutation residuals and the same-solution checks for a pair.
    Commute { first: String, second: String },
    /// `weakkam` for every declared Hamiltonian plus a summary table.
    Report,
}

enum Failure {
    Config(String),
    Numerical(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_config() {
            Failure::Config(e.to_string())
        } else {
            Failure::Numerical(e.to_string())
        }
    }
}

fn write(dir: &Path, file: &str, contents: &str) -> Result<()> {
    std::fs::write(dir.join(file), contents)?;
    Ok(())
}

#[derive(Serialize)]
struct LegendreAudit<'a> {
    hamiltonian: &'a str,
    audit: &'a AuditReport,
    tol_legendre: f64,
    involution: Option<InvolutionReport>,
}

fn cmd_legendre(cfg: &RunConfig, name: &str, check: bool, out: &Path) -> Result<(), Failure> {
    let spec = cfg.hamiltonian(name)?;
    let grid = cfg.grid;
    let p_grid = SymmetricGrid::new(grid.dim(), cfg.resolution.m_p, spec.p_max)?;
    let q_grid = SymmetricGrid::new(grid.dim(), cfg.resolution.m_q, cfg.plan.q_max)?;
    let audit_m = if grid.dim() == 1 { cfg.resolution.m_p } else { 9 };
    let audit = coercivity_audit(spec, &grid, audit_m)?;
    let table = legendre_transform(spec, &grid, &p_grid, &q_grid)?;
    let tol = cfg.tolerances.tol_legendre.unwrap_or_else(|| default_tol_legendre(&p_grid, &q_grid));
    let involution = if check { Some(involution_check(spec, &grid, &p_grid, &q_grid, tol)?) } else { None };
    write(out, "lagrangian.csv", &table.to_csv())?;
    let report = LegendreAudit { hamiltonian: name, audit: &audit, tol_legendre: tol, involution };
    write(out, "audit.json", &(serde_json::to_string_pretty(&report).expect("plain data serializes") + "\n"))?;
    if audit.lower_slack < 0.0 || audit.upper_slack < 0.0 {
        return Err(Failure::Numerical(format!(
            "declared growth bounds violated (lower slack {:e}, upper slack {:e})",
            audit.lower_slack, audit.upper_slack
        )));
    }
    if let Some(r) = involution {
        eprintln!("involution: max deviation {:e} (tolerance {:e})", r.max_deviation, r.tolerance);
        if !r.pass {
            return Err(Failure::Numerical("legendre round trip exceeds tolerance".into()));
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct CriticalOut<'a> {
    hamiltonian: &'a str,
    c_est: f64,
    c_history: &'a [(f64, f64)],
    converged: bool,
    normalization: f64,
    barrier_converged: bool,
    barrier_cauchy_gap: f64,
    barrier_t_final: f64,
    barrier_triangle_defect: f64,
    aubry_epsilon: f64,
    aubry_size: usize,
    aubry_representatives: &'a [usize],
}

fn weak_kam_settings(cfg: &RunConfig) -> WeakKamSettings {
    WeakKamSettings {
        t_max: cfg.plan.t_max,
        tol_c: cfg.tolerances.tol_c,
        cauchy_tol: cfg.tolerances.cauchy_tol,
        epsilon: cfg.tolerances.epsilon_aubry,
    }
}

fn cmd_weakkam(cfg: &RunConfig, name: &str, out: &Path) -> Result<WeakKamData, Failure> {
    let spec = cfg.hamiltonian(name)?;
    let p = Pipeline::build(spec, cfg.grid, cfg.plan, cfg.resolution)?;
    let data = WeakKamData::compute(&p, &weak_kam_settings(cfg))?;
    let reps = aubry_representatives(&data.aubry, &cfg.grid);
    let sols = reps
        .iter()
        .map(|&y| weak_kam_solution(&data.barrier, &data.aubry, y))
        .collect::<Result<Vec<_>>>()?;
    let crit = CriticalOut {
        hamiltonian: name,
        c_est: data.critical.c_est,
        c_history: &data.critical.c_history,
        converged: data.critical.converged,
        normalization: data.critical.normalization,
        barrier_converged: data.barrier.converged,
        barrier_cauchy_gap: data.barrier.cauchy_gap,
        barrier_t_final: data.barrier.t_final,
        barrier_triangle_defect: data.barrier.triangle_defect(),
        aubry_epsilon: data.aubry.epsilon,
        aubry_size: data.aubry.members.len(),
        aubry_representatives: &reps,
    };
    write(out, "critical.json", &(serde_json::to_string_pretty(&crit).expect("plain data serializes") + "\n"))?;
    write(out, "barrier.csv", &data.barrier.to_csv())?;
    write(out, "aubry.csv", &data.aubry.to_csv(&cfg.grid))?;
    write(out, "solutions.csv", &solutions_to_csv(&sols, &cfg.grid))?;
    if !data.barrier.converged {
        eprintln!("warning: barrier not Cauchy within t_max (gap {:e})", data.barrier.cauchy_gap);
    }
    Ok(data)
}

fn cmd_commute(cfg: &RunConfig, first: &str, second: &str, out: &Path) -> Result<(), Failure> {
    let setup = PairSetup {
        h: cfg.hamiltonian(first)?.clone(),
        g: cfg.hamiltonian(second)?.clone(),
        dim: cfg.grid.dim(),
        q_max: cfg.plan.q_max,
        t_max: cfg.plan.t_max,
        res: cfg.resolution,
        scheme: cfg.plan.scheme,
    };
    let pair = format!("{first}/{second}");
    let levels = cfg.ladder();
    let report = commutation_report(&pair, &setup, &levels, &cfg.probes, cfg.tolerances.tol_comm)?;
    let (h, g) = setup.build(levels[0])?;
    let settings = SuiteSettings {
        weak_kam: weak_kam_settings(cfg),
        probe: cfg.probes[0],
        tol_thm: cfg.tolerances.tol_thm,
        tol_fix: cfg.tolerances.tol_fix,
        max_iters: DEFAULT_MAX_ITERS,
        max_residual: report.refinement_trend[0].residual,
    };
    let suite = theorem_suite(&h, &g, &settings)?;
    write(out, "commutation.json", &(report.to_json() + "\n"))?;
    write(out, "residuals.csv", &report.residuals_csv())?;
    write(out, "theorem_verdicts.json", &(suite.to_json(&pair) + "\n"))?;
    write(out, "multitime.csv", &suite.multitime.to_csv())?;
    eprintln!("verdict: {}", serde_json::to_string(&report.verdict).expect("enum serializes"));
    Ok(())
}

fn cmd_report(cfg: &RunConfig, out: &Path) -> Result<(), Failure> {
    let mut summary = String::from("name,c_est,critical_converged,barrier_converged,aubry_size\n");
    let mut failed = Vec::new();
    for name in cfg.hamiltonians.keys() {
        let dir = out.join(name);
        std::fs::create_dir_all(&dir).map_err(Error::from)?;
        match cmd_weakkam(cfg, name, &dir) {
            Ok(d) => {
                let _ = writeln!(
                    summary,
                    "{name},{},{},{},{}",
                    fmt_csv(d.critical.c_est),
                    d.critical.converged,
                    d.barrier.converged,
                    d.aubry.members.len()
                );
            }
            Err(Failure::Config(m) | Failure::Numerical(m)) => {
                eprintln!("{name}: {m}");
                failed.push(name.as_str());
            }
        }
    }
    write(out, "summary.csv", &summary)?;
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Numerical(format!("failed: {}", failed.join(", "))))
    }
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(v) = std::env::var("WEAKKAM_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| Failure::Config(format!("WEAKKAM_THREADS must be a positive integer, got {v:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Config(e.to_string()))
}

fn run(cli: Cli) -> Result<(), Failure> {
    configure_threads()?;
    let path = cli.config.ok_or_else(|| Failure::Config("--config PATH is required".into()))?;
    let mut cfg = RunConfig::load(&path)?;
    if let Some(n) = cli.grid_n {
        cfg = cfg.with_grid_n(n)?;
    }
    if let Some(p) = &cli.probe {
        cfg = cfg.with_probes(p)?;
    }
    let out = cli.out.or_else(|| cfg.output.clone()).unwrap_or_else(|| PathBuf::from("out"));
    std::fs::create_dir_all(&out).map_err(|e| Failure::Config(format!("cannot create {}: {e}", out.display())))?;
    match &cli.command {
        Command::Legendre { name, check_involution } => cmd_legendre(&cfg, name, *check_involution, &out),
        Command::Weakkam { name } => cmd_weakkam(&cfg, name, &out).map(|_| ()),
        Command::Commute { first, second } => cmd_commute(&cfg, first, second, &out),
        Command::Report => cmd_report(&cfg, &out),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Numerical(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}
