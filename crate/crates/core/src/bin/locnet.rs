use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use locnet::capacity::CapacityRow;
use locnet::error::{Error, Result};
use locnet::harness::{
    emit_report, fit_rate, run_approx, run_capacity, run_learn, run_localize, run_rate_sweep, ExperimentConfig,
    Format, Task,
};

#[derive(Parser)]
#[command(name = "locnet", version, about = "Localized sigmoid-network experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check localization of every cell localizer on a grid
    Localize(Common),
    /// Check the sparse approximation bounds for seeded targets
    Approx(Common),
    /// Compare empirical covering numbers with the closed-form bound
    Capacity(Common),
    /// Fit once and report the error decomposition
    Learn(Common),
    /// Run a learning-rate sweep and fit its log-log slope
    Sweep(Common),
}

#[derive(Args)]
struct Common {
    /// JSON experiment config
    #[arg(long)]
    config: Option<PathBuf>,
    /// overrides the config seed
    #[arg(long)]
    seed: Option<u64>,
    /// overrides the config output path
    #[arg(long)]
    out: Option<PathBuf>,
    /// csv or json
    #[arg(long, value_parser = parse_format)]
    format: Option<Format>,
    /// also write a log-log SVG plot (sweep only)
    #[arg(long)]
    svg: bool,
}

fn parse_format(s: &str) -> std::result::Result<Format, String> {
    match s {
        "csv" => Ok(Format::Csv),
        "json" => Ok(Format::Json),
        _ => Err(format!("unknown format {s:?}, expected csv or json")),
    }
}

fn load(task: Task, c: &Common) -> Result<ExperimentConfig> {
    let mut cfg = match &c.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::new(task),
    };
    if cfg.task != task {
        return Err(Error::InvalidArgument(format!(
            "config is for task {:?}, not {:?}",
            cfg.task, task
        )));
    }
    if let Some(seed) = c.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &c.out {
        cfg.output = Some(out.clone());
    }
    if let Some(f) = c.format {
        cfg.format = f;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn write_or_print(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|source| Error::Io {
            path: p.to_path_buf(),
            source,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn json<T: serde::Serialize>(v: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

fn run(task: Task, c: &Common) -> Result<bool> {
    let cfg = load(task, c)?;
    let out = cfg.output.as_deref();
    match task {
        Task::Localize => {
            let reports = run_localize(&cfg)?;
            write_or_print(out, &json(&reports)?)?;
            Ok(reports.iter().all(|r| r.pass))
        }
        Task::Approx => {
            let reports = run_approx(&cfg)?;
            write_or_print(out, &json(&reports)?)?;
            Ok(reports.iter().all(|r| r.pass))
        }
        Task::Capacity => {
            let rows = run_capacity(&cfg)?;
            let text = match cfg.format {
                Format::Json => json(&rows)?,
                Format::Csv => {
                    let mut s = format!("{}\n", CapacityRow::CSV_HEADER);
                    for r in &rows {
                        s.push_str(&r.csv_line());
                        s.push('\n');
                    }
                    s
                }
            };
            write_or_print(out, &text)?;
            Ok(rows.iter().all(CapacityRow::consistent))
        }
        Task::Learn => {
            let report = run_learn(&cfg)?;
            write_or_print(out, &json(&report)?)?;
            Ok(report.decomposition.holds)
        }
        Task::Sweep => {
            let rows = run_rate_sweep(&cfg)?;
            let fit = fit_rate(&rows, cfg.r, cfg.d)?;
            match out {
                Some(p) => {
                    emit_report(&rows, &fit, &cfg, p, c.svg)?;
                }
                None => {
                    let text = match cfg.format {
                        Format::Csv => locnet::harness::sweep_csv(&rows),
                        Format::Json => locnet::harness::sweep_json(&rows, &fit, &cfg)? + "\n",
                    };
                    print!("{text}");
                }
            }
            let pass = fit.within(cfg.slope_tolerance);
            if let Some(slope) = fit.slope {
                eprintln!("slope {slope:.4}, theory {:.4}", fit.theory_exponent);
            }
            Ok(pass)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (task, common) = match &cli.command {
        Command::Localize(c) => (Task::Localize, c),
        Command::Approx(c) => (Task::Approx, c),
        Command::Capacity(c) => (Task::Capacity, c),
        Command::Learn(c) => (Task::Learn, c),
        Command::Sweep(c) => (Task::Sweep, c),
    };
    match run(task, common) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e @ (Error::InvalidArgument(_) | Error::Json(_))) => {
            eprintln!("invalid config: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
