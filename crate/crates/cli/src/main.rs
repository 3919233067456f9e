mod commands;
mod config;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use burgers_lab::Error;
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use commands::Outcome;

#[derive(Parser)]
#[command(name = "burgers-lab", version, about = "Exact solutions, symmetries and residual checks for the 2D Burgers system")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Commutation table and subalgebra lists.
    Algebra {
        #[command(subcommand)]
        command: AlgebraCommand,
    },
    /// The exact-solution catalog.
    Family {
        #[command(subcommand)]
        command: FamilyCommand,
    },
    /// Residual report of one family instance.
    Verify(VerifyArgs),
    /// Reductions by subalgebras.
    Reduce {
        #[command(subcommand)]
        command: ReduceCommand,
    },
    /// Point symmetry transformations.
    Group {
        #[command(subcommand)]
        command: GroupCommand,
    },
    /// Finite-difference cross-validation of a family instance.
    Evolve(EvolveArgs),
    /// Verify every family on its default parameter sets.
    CatalogVerifyAll(AllArgs),
    /// Run a command described by a JSON config file.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Subcommand)]
enum AlgebraCommand {
    Table {
        #[arg(long)]
        json: bool,
    },
    Subalgebras {
        #[arg(long)]
        dim: usize,
    },
}

#[derive(Subcommand)]
enum FamilyCommand {
    List,
    Eval {
        #[arg(long)]
        id: String,
        /// JSON text or @file; defaults to the first default set.
        #[arg(long)]
        params: Option<String>,
        /// `t0:t1:nt,x0:x1:nx,y0:y1:ny`; defaults to the family's grid.
        #[arg(long, allow_hyphen_values = true)]
        grid: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Add R1, R2 columns.
        #[arg(long)]
        residuals: bool,
    },
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    family: String,
    #[arg(long)]
    params: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    grid: Option<String>,
    #[arg(long, default_value = "burgers")]
    system: String,
    /// Override the family tolerance.
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Subcommand)]
enum ReduceCommand {
    Check {
        /// Ansatz id such as 1.3 or g2.1.
        #[arg(long)]
        ansatz: String,
        /// Reduced solution as JSON text or @file.
        #[arg(long)]
        solution: String,
    },
}

#[derive(Subcommand)]
enum GroupCommand {
    Apply {
        #[arg(long)]
        family: String,
        #[arg(long)]
        params: Option<String>,
        /// `{"sl2":[a,b,c,d],"angle":..,"reflect":..,"boost":[..],"shift":[..]}`
        #[arg(long)]
        element: String,
        /// Grid for the CSV export of the transformed field.
        #[arg(long, allow_hyphen_values = true)]
        grid: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    Sweep {
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 20)]
        elements: usize,
        /// Restrict to these families (repeatable).
        #[arg(long)]
        family: Vec<String>,
        /// Additional explicit elements (repeatable JSON).
        #[arg(long)]
        element: Vec<String>,
        #[arg(long)]
        identity_only: bool,
    },
}

#[derive(Args)]
struct EvolveArgs {
    #[arg(long)]
    family: String,
    #[arg(long)]
    params: Option<String>,
    /// `x0:x1,y0:y1,t0:t1`; defaults to the family's box over a time span of 0.1.
    #[arg(long = "box", allow_hyphen_values = true)]
    region: Option<String>,
    #[arg(long, default_value_t = 3)]
    levels: u32,
    /// Nodes per side on the coarsest level.
    #[arg(long, default_value_t = 17)]
    nodes: usize,
    /// Time step as a fraction of min(dx², dy²)/4.
    #[arg(long)]
    dt_fraction: Option<f64>,
    /// CSV of the final state on the finest level.
    #[arg(long)]
    snapshot: Option<PathBuf>,
}

#[derive(Args)]
struct AllArgs {
    #[arg(long)]
    family: Vec<String>,
    /// Override every family's residual tolerance.
    #[arg(long)]
    tol: Option<f64>,
}

fn exit_code(e: &Error) -> u8 {
    if e.is_numeric() {
        return 3;
    }
    match e {
        Error::InvalidInput(_)
        | Error::ParameterOutOfDomain(_)
        | Error::InvalidCase(_)
        | Error::CaseBoundary(_)
        | Error::ParameterPole(_)
        | Error::DegreeTooLarge(_)
        | Error::DegreeOverflow(_)
        | Error::ZeroDenominator(_) => 2,
        _ => 3,
    }
}

fn configure_threads() -> Result<(), Error> {
    let Ok(v) = std::env::var("BURGERS_LAB_THREADS") else { return Ok(()) };
    let n: usize = v.trim().parse().ok().filter(|n| *n > 0).ok_or_else(|| {
        Error::InvalidInput(format!("BURGERS_LAB_THREADS must be a positive integer, got {v:?}"))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))
}

fn dispatch(cli: Cli) -> Result<Outcome, Error> {
    match cli.command {
        Command::Algebra { command: AlgebraCommand::Table { json } } => commands::algebra_table(json),
        Command::Algebra { command: AlgebraCommand::Subalgebras { dim } } => commands::subalgebras(dim),
        Command::Family { command: FamilyCommand::List } => commands::family_list(),
        Command::Family { command: FamilyCommand::Eval { id, params, grid, out, residuals } } => {
            commands::family_eval(&id, params.as_deref(), grid.as_deref(), out.as_deref(), residuals)
        }
        Command::Verify(a) => commands::verify(&a.family, a.params.as_deref(), a.grid.as_deref(), &a.system, a.tol),
        Command::Reduce { command: ReduceCommand::Check { ansatz, solution } } => commands::reduce_check(&ansatz, &solution),
        Command::Group { command: GroupCommand::Apply { family, params, element, grid, out } } => {
            commands::group_apply(&family, params.as_deref(), &element, grid.as_deref(), out.as_deref())
        }
        Command::Group { command: GroupCommand::Sweep { seed, elements, family, element, identity_only } } => {
            commands::group_sweep(seed, if identity_only { 0 } else { elements }, &family, &element, identity_only)
        }
        Command::Evolve(a) => commands::evolve(
            &a.family,
            a.params.as_deref(),
            a.region.as_deref(),
            a.levels,
            a.nodes,
            a.dt_fraction,
            a.snapshot.as_deref(),
        ),
        Command::CatalogVerifyAll(a) => commands::catalog_verify_all(&a.family, a.tol),
        Command::Run { config } => config::run(&config),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|_| dispatch(cli));
    match result {
        Ok(out) => {
            let text = match &out.body {
                commands::Body::Json(v) => serde_json::to_string_pretty(v).expect("serializable report") + "\n",
                commands::Body::Text(t) => t.clone(),
            };
            // a closed pipe downstream is not an error of ours
            let _ = std::io::stdout().lock().write_all(text.as_bytes());
            ExitCode::from(if out.pass { 0 } else { 1 })
        }
        Err(e) => {
            let code = exit_code(&e);
            let kind = if code == 2 { "config" } else { "numeric" };
            let v: Value = json!({"schema": "1", "error": e.to_string(), "kind": kind});
            eprintln!("{v}");
            ExitCode::from(code)
        }
    }
}
