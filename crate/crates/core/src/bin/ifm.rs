use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use ifm_core::oracle::{max_deviation, oracle_run};
use ifm_core::scenario::{canned, canned_names, parse_scenario, render_report, run, Format, Report, Scenario};

const CHECK_TOLERANCE: f64 = 1e-12;

#[derive(Parser)]
#[command(
    name = "ifm",
    version,
    about = "Single-photon interaction-free measurement simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one or more scenario files.
    Run(RunArgs),
}

#[derive(clap::Args)]
struct RunArgs {
    /// Scenario files (TOML).
    files: Vec<PathBuf>,

    #[arg(long, value_enum, default_value_t = OutputFormat::Table)]
    format: OutputFormat,

    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Print the names of the built-in scenarios and exit.
    #[arg(long)]
    list_canned: bool,

    /// Run a built-in scenario. May be repeated.
    #[arg(long = "canned", value_name = "NAME")]
    canned: Vec<String>,

    /// Compare each run with the dense reference and fail on any deviation above 1e-12.
    #[arg(long)]
    check: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputFormat {
    Table,
    Machine,
}

enum Failure {
    Invalid(String),
    Mismatch(String),
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
    let Command::Run(args) = cli.command;
    match execute(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Invalid(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Mismatch(msg)) => {
            eprintln!("oracle mismatch: {msg}");
            ExitCode::from(2)
        }
    }
}

fn load(args: &RunArgs) -> Result<Vec<(String, Scenario)>, Failure> {
    let mut out = Vec::new();
    for name in &args.canned {
        let sc = canned(name).ok_or_else(|| {
            let known: Vec<_> = canned_names().collect();
            Failure::Invalid(format!(
                "unknown canned scenario '{name}' (known: {})",
                known.join(", ")
            ))
        })?;
        out.push((name.clone(), sc));
    }
    for path in &args.files {
        let label = path.display().to_string();
        let text = std::fs::read_to_string(path).map_err(|e| Failure::Invalid(format!("{label}: {e}")))?;
        let sc = parse_scenario(&text).map_err(|e| Failure::Invalid(format!("{label}: {e}")))?;
        out.push((label, sc));
    }
    if out.is_empty() {
        return Err(Failure::Invalid(
            "no scenario given; pass a file or --canned <name>".into(),
        ));
    }
    Ok(out)
}

fn execute(args: &RunArgs) -> Result<(), Failure> {
    if args.list_canned {
        for name in canned_names() {
            println!("{name}");
        }
        return Ok(());
    }
    let scenarios = load(args)?;
    let mut reports: Vec<Report> = Vec::new();
    for (label, sc) in &scenarios {
        let report = run(sc).map_err(|e| Failure::Invalid(format!("{label}: {e}")))?;
        reports.push(report);
    }

    let text = match args.format {
        OutputFormat::Table => reports
            .iter()
            .map(|r| render_report(r, Format::Table))
            .collect::<Vec<_>>()
            .join("\n"),
        OutputFormat::Machine if reports.len() == 1 => render_report(&reports[0], Format::Machine),
        OutputFormat::Machine => {
            let mut s = serde_json::to_string_pretty(&reports).expect("report is plain data");
            s.push('\n');
            s
        }
    };
    match &args.out {
        Some(path) => std::fs::write(path, text).map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))?,
        None => print!("{text}"),
    }

    if args.check {
        let mut failures = Vec::new();
        for ((label, sc), report) in scenarios.iter().zip(&reports) {
            let reference = oracle_run(sc).map_err(|e| Failure::Invalid(format!("{label}: {e}")))?;
            match max_deviation(&report.outcomes, &reference) {
                Ok(d) if d <= CHECK_TOLERANCE => eprintln!("check {label}: ok (max deviation {d:.3e})"),
                Ok(d) => failures.push(format!("{label}: max deviation {d:.3e}")),
                Err(m) => failures.push(format!("{label}: {m}")),
            }
        }
        if !failures.is_empty() {
            return Err(Failure::Mismatch(failures.join("; ")));
        }
    }
    Ok(())
}
