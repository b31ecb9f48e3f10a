use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use manifold_ctrl::rigid_body::RigidVariant;
use manifold_ctrl_cli::runner::{self, Overrides};
use manifold_ctrl_cli::CliError;

#[derive(Parser)]
#[command(name = "manifold-ctrl", version, about = "Run tracking-controller scenarios and write CSV time series")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a built-in scenario or a JSON config file.
    Run {
        /// Scenario name (see `list`) or path to a config file.
        target: String,
        /// Rigid-body law: p1..p5 or lee.
        #[arg(long)]
        controller: Option<RigidVariant>,
        /// Transversal stabilisation gain.
        #[arg(long = "k-e")]
        k_e: Option<f64>,
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long = "t-end")]
        t_end: Option<f64>,
        /// Output directory [default: $MANIFOLD_CTRL_OUT or ./out].
        #[arg(long)]
        out: Option<PathBuf>,
        /// Apply the force disturbance on [3, 4] (quadcopter scenarios).
        #[arg(long)]
        disturb: bool,
        /// Omit the `#` metadata line from CSV files.
        #[arg(long = "no-meta")]
        no_meta: bool,
        /// Print the run report as JSON.
        #[arg(long)]
        json: bool,
    },
    /// List the built-in scenarios with their defaults.
    List {
        #[arg(long)]
        json: bool,
    },
}

/// Writes to stdout, ignoring a closed pipe.
fn emit(text: &str) {
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

fn list(json: bool) {
    let items = runner::listing();
    if json {
        emit(&(serde_json::to_string_pretty(&items).expect("listing is serialisable") + "\n"));
        return;
    }
    let mut text = String::new();
    for item in items {
        text += &format!("{:<22} {}\n", item.name, item.description);
        for (k, v) in &item.defaults {
            text += &format!("{:<22}   {k}: {v}\n", "");
        }
    }
    emit(&text);
}

fn run(target: &str, overrides: &Overrides, no_meta: bool, json: bool) -> Result<(), CliError> {
    let mut cfg = runner::load(target)?;
    overrides.apply(&mut cfg);
    let report = runner::run(&cfg, !no_meta)?;
    if json {
        emit(&(serde_json::to_string_pretty(&report).expect("report is serialisable") + "\n"));
    } else {
        for job in &report.jobs {
            let m = &job.metrics;
            emit(&format!(
                "{}: final error {:.3e}, settling time {}, wrote {} and {}\n",
                job.stem,
                m.final_total_error,
                m.settling_time.map_or("none".to_string(), |t| format!("{t}")),
                job.csv.display(),
                job.summary.display()
            ));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::List { json } => {
            list(json);
            ExitCode::SUCCESS
        }
        Command::Run {
            target,
            controller,
            k_e,
            dt,
            t_end,
            out,
            disturb,
            no_meta,
            json,
        } => {
            let overrides = Overrides {
                controller,
                k_e,
                dt,
                t_end,
                out,
                disturb,
            };
            match run(&target, &overrides, no_meta, json) {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => {
                    eprintln!("manifold-ctrl: {}: {e}", e.category());
                    if json {
                        let body = serde_json::json!({ "error": e.category(), "message": e.to_string() });
                        emit(&format!("{body}\n"));
                    }
                    ExitCode::from(e.exit_code() as u8)
                }
            }
        }
    }
}
