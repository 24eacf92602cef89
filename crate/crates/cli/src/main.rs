use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use homolink_cli::svg::parse_projection;
use homolink_cli::{run, CliError, Command, RunOptions};

#[derive(Parser)]
#[command(
    name = "homolink",
    version,
    about = "Homology-class invariants and homology-aware path planning"
)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Signatures of the scenario's candidate cycles.
    Invariant(Common),
    /// Least-cost paths in distinct homology classes.
    Plan(PlanArgs),
    /// Classes of paths ending in the subspace L, modulo cycles of L.
    QuotientPlan(QuotientArgs),
    /// Check skeletons and compare the general form against closed forms.
    Validate(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    scenario: PathBuf,
    /// Directory for result files; without it the result is printed.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, env = "HOMOLINK_THREADS")]
    threads: Option<usize>,
    #[arg(long)]
    quad_order: Option<usize>,
}

#[derive(Args)]
struct PlanArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    classes: Option<usize>,
    /// Comma-separated target signature.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    target_signature: Option<Vec<f64>>,
    /// Also write plot.svg.
    #[arg(long)]
    svg: bool,
    /// Axis pair for drawing scenes with D > 2, e.g. xy.
    #[arg(long)]
    project: Option<String>,
}

#[derive(Args)]
struct QuotientArgs {
    #[command(flatten)]
    plan: PlanArgs,
    /// Keep the part of each path outside L in one piece.
    #[arg(long)]
    connected: bool,
}

fn options(c: Common) -> RunOptions {
    RunOptions {
        scenario: c.scenario,
        out: c.out,
        threads: c.threads,
        quad_order: c.quad_order,
        ..RunOptions::default()
    }
}

fn plan_options(p: PlanArgs) -> Result<RunOptions, CliError> {
    let project = p.project.as_deref().map(parse_projection).transpose()?;
    Ok(RunOptions {
        classes: p.classes,
        target_signature: p.target_signature,
        svg: p.svg,
        project,
        ..options(p.common)
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let started = Instant::now();
    let parsed = match cli.command {
        Sub::Invariant(c) => Ok((Command::Invariant, options(c))),
        Sub::Validate(c) => Ok((Command::Validate, options(c))),
        Sub::Plan(p) => plan_options(p).map(|o| (Command::Plan, o)),
        Sub::QuotientPlan(q) => plan_options(q.plan).map(|o| {
            (
                Command::QuotientPlan,
                RunOptions {
                    connected: q.connected,
                    ..o
                },
            )
        }),
    };
    let result = parsed.and_then(|(cmd, opts)| {
        let out = run(cmd, &opts)?;
        if opts.out.is_none() {
            print!("{}", out.bundle.to_json());
        }
        for f in &out.files {
            eprintln!("wrote {}", f.display());
        }
        Ok(())
    });
    eprintln!("wall time {:.3} s", started.elapsed().as_secs_f64());
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
