//! `nitsche`: conditioning and convergence experiments for classical and
//! lifting-stabilized Nitsche discretizations.

mod table;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nitsche_core::experiment::{
    convergence, jump_sweep, lambda_sweep, parse_lambda_list, solve, Discretization, MethodChoice, ProblemChoice,
    RunConfig, SolutionChoice, TABLE_LAMBDAS,
};
use nitsche_core::linalg::Conditioning;
use nitsche_core::BBox;
use serde_json::{json, Value};

use table::{Cell, Table};

const EXIT_USAGE: u8 = 1;
const EXIT_UNSTABLE: u8 = 2;

#[derive(Parser, Debug)]
#[command(name = "nitsche", version, about = "Nitsche conditioning and convergence experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Assemble, solve and report errors and the condition number.
    Solve {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        method: MethodArgs,
    },
    /// Condition number of the classical method for a list of penalties,
    /// followed by the lifted method.
    LambdaSweep {
        #[command(flatten)]
        common: Common,
        /// Comma-separated penalties (default 1,2,4,...,8192).
        #[arg(long)]
        lambdas: Option<String>,
    },
    /// Errors and observed orders on uniformly refined meshes.
    Convergence {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        method: MethodArgs,
        /// Number of meshes, starting at --nx and doubling.
        #[arg(long, default_value_t = 4)]
        levels: usize,
        /// Interface jump against the classical penalty on the --nx mesh
        /// instead of a refinement study.
        #[arg(long, value_name = "LIST")]
        jump_lambdas: Option<String>,
    },
}

#[derive(Args, Debug)]
struct Common {
    #[arg(long, value_enum, default_value_t = Problem::Interface)]
    problem: Problem,
    #[arg(long, default_value_t = 16)]
    nx: usize,
    #[arg(long, num_args = 4, value_names = ["XMIN", "YMIN", "XMAX", "YMAX"], allow_negative_numbers = true)]
    bbox: Option<Vec<f64>>,
    /// Exact solution (default: kink for interface, smooth for fitted).
    #[arg(long, value_enum)]
    solution: Option<Solution>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Write the table here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct MethodArgs {
    #[arg(long, value_enum, default_value_t = Method::Lifted)]
    method: Method,
    /// Penalty parameter (classical method only).
    #[arg(long)]
    lambda: Option<f64>,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Problem {
    Fitted,
    Interface,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Method {
    Classical,
    Lifted,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Solution {
    Kink,
    Smooth,
    Affine,
    Planar,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq)]
enum Format {
    Csv,
    Json,
    Md,
}

/// Failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<nitsche_core::Error> for Failure {
    fn from(e: nitsche_core::Error) -> Self {
        Failure { code: EXIT_USAGE, message: e.to_string() }
    }
}

struct Report {
    table: Table,
    config: Value,
    meta: Value,
    unstable: bool,
}

fn run_config(common: &Common, method: Method, lambda: Option<f64>) -> Result<RunConfig, Failure> {
    let problem = match common.problem {
        Problem::Fitted => ProblemChoice::Fitted,
        Problem::Interface => ProblemChoice::Interface,
    };
    let method = match method {
        Method::Classical => MethodChoice::Classical,
        Method::Lifted => MethodChoice::Lifted,
    };
    let mut cfg = RunConfig::new(problem, method, lambda, common.nx)?;
    if let Some(b) = &common.bbox {
        cfg = cfg.with_bbox(BBox::new(b[0], b[1], b[2], b[3])?);
    }
    if let Some(s) = common.solution {
        cfg = cfg.with_solution(match s {
            Solution::Kink => SolutionChoice::Kink,
            Solution::Smooth => SolutionChoice::Smooth,
            Solution::Affine => SolutionChoice::Affine,
            Solution::Planar => SolutionChoice::Planar,
        });
    }
    cfg.validate()?;
    Ok(cfg)
}

fn config_json(cfg: &RunConfig, command: &str, extra: Value) -> Value {
    let mut v = serde_json::to_value(cfg).expect("config serializes");
    v["command"] = Value::from(command);
    if let Value::Object(extra) = extra {
        for (k, x) in extra {
            v[k] = x;
        }
    }
    v
}

fn cond_cells(c: Conditioning) -> [Cell; 2] {
    match c {
        Conditioning::Finite(v) => [v.into(), "ok".into()],
        Conditioning::Unstable => [Cell::Missing, "unstable".into()],
    }
}

fn cmd_solve(common: &Common, args: &MethodArgs) -> Result<Report, Failure> {
    let cfg = run_config(common, args.method, args.lambda)?;
    let out = solve(&cfg, true)?;
    let mut table = Table::new(vec![
        "problem", "method", "lambda", "nx", "n_dofs", "n_free", "h", "cond", "status", "l2", "h1", "jump", "cg_iterations",
    ]);
    let [cond, status] = match out.spectral {
        Some(s) => cond_cells(s.cond),
        None => [Cell::Missing, "ok".into()],
    };
    let errors = out.errors;
    table.push(vec![
        format!("{:?}", cfg.problem).to_lowercase().as_str().into(),
        format!("{:?}", cfg.method).to_lowercase().as_str().into(),
        cfg.lambda.into(),
        cfg.nx.into(),
        out.n_dofs.into(),
        out.n_free.into(),
        out.h.into(),
        cond,
        status,
        errors.map(|e| e.l2).into(),
        errors.map(|e| e.h1_broken).into(),
        errors.map(|e| e.jump_l2_gamma).into(),
        out.cg_iterations.into(),
    ]);
    Ok(Report {
        table,
        config: config_json(&cfg, "solve", json!({})),
        meta: json!({ "n_dofs": out.n_dofs }),
        unstable: out.is_unstable(),
    })
}

fn cmd_lambda_sweep(common: &Common, lambdas: Option<&str>) -> Result<Report, Failure> {
    let cfg = run_config(common, Method::Lifted, None)?;
    let lambdas = match lambdas {
        Some(text) => parse_lambda_list(text)?,
        None => TABLE_LAMBDAS.to_vec(),
    };
    let n_dofs = Discretization::from_config(&cfg)?.n_dofs();
    eprintln!("n_dofs={n_dofs}");
    let mut table = Table::new(vec!["lambda", "cond", "status"]);
    for row in lambda_sweep(&cfg, &lambdas)? {
        let label = row.lambda.map_or(Cell::Text("lifted".into()), Cell::Num);
        let [cond, status] = cond_cells(row.cond);
        table.push(vec![label, cond, status]);
    }
    Ok(Report {
        table,
        config: config_json(&cfg, "lambda-sweep", json!({ "lambdas": lambdas, "method": "classical" })),
        meta: json!({ "n_dofs": n_dofs }),
        unstable: false,
    })
}

fn cmd_convergence(common: &Common, args: &MethodArgs, levels: usize, jump: Option<&str>) -> Result<Report, Failure> {
    if let Some(text) = jump {
        let lambdas = parse_lambda_list(text)?;
        let cfg = run_config(common, Method::Classical, Some(lambdas[0]))?;
        let mut table = Table::new(vec!["lambda", "jump", "ratio", "l2", "h1"]);
        let rows = jump_sweep(&cfg, &lambdas)?;
        for (k, r) in rows.iter().enumerate() {
            let ratio = (k > 0).then(|| rows[k - 1].jump / r.jump);
            table.push(vec![r.lambda.into(), r.jump.into(), ratio.into(), r.l2.into(), r.h1.into()]);
        }
        return Ok(Report {
            table,
            config: config_json(&cfg, "convergence", json!({ "jump_lambdas": lambdas })),
            meta: json!({}),
            unstable: false,
        });
    }
    let cfg = run_config(common, args.method, args.lambda)?;
    let rows = convergence(&cfg, levels)?;
    let mut table = Table::new(vec!["nx", "h", "n_dofs", "l2", "eoc_l2", "h1", "eoc_h1", "jump", "eoc_jump"]);
    for r in &rows {
        table.push(vec![
            r.nx.into(),
            r.h.into(),
            r.n_dofs.into(),
            r.l2.into(),
            r.eoc_l2.into(),
            r.h1.into(),
            r.eoc_h1.into(),
            r.jump.into(),
            r.eoc_jump.into(),
        ]);
    }
    Ok(Report {
        table,
        config: config_json(&cfg, "convergence", json!({ "levels": levels })),
        meta: json!({}),
        unstable: false,
    })
}

fn render(report: &Report, format: Format) -> String {
    match format {
        Format::Csv => report.table.to_csv(),
        Format::Md => report.table.to_markdown(),
        Format::Json => {
            let mut meta = report.meta.clone();
            meta["version"] = Value::from(env!("CARGO_PKG_VERSION"));
            let doc = json!({ "config": report.config, "rows": report.table.json_rows(), "meta": meta });
            let mut s = serde_json::to_string_pretty(&doc).expect("json");
            s.push('\n');
            s
        }
    }
}

fn run(cli: Cli) -> Result<u8, Failure> {
    let (report, common) = match &cli.command {
        Command::Solve { common, method } => (cmd_solve(common, method)?, common),
        Command::LambdaSweep { common, lambdas } => (cmd_lambda_sweep(common, lambdas.as_deref())?, common),
        Command::Convergence { common, method, levels, jump_lambdas } => {
            (cmd_convergence(common, method, *levels, jump_lambdas.as_deref())?, common)
        }
    };
    let text = render(&report, common.format);
    match &common.out {
        Some(path) => fs::write(path, text)
            .map_err(|e| Failure { code: EXIT_USAGE, message: format!("cannot write {}: {e}", path.display()) })?,
        None => print!("{text}"),
    }
    if report.unstable {
        eprintln!("system is unstable (not positive definite)");
        return Ok(EXIT_UNSTABLE);
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
