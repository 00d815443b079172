mod args;
mod commands;
mod output;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use swclab_core::Tolerances;

use args::Cli;
use commands::{command_name, run, CliError};
use output::Envelope;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let envelope = Envelope {
        command: command_name(&cli.command),
        config: serde_json::to_value(&cli).expect("config serializes"),
        tolerances: serde_json::to_value(Tolerances::default()).expect("tolerances serialize"),
    };
    let outcome = configure_threads(cli.global.jobs).and_then(|()| run(&cli.command, &cli.global));
    let (doc, code) = match outcome {
        Ok(result) => {
            if let Some(path) = &cli.global.csv {
                if let Err(msg) = output::write_csv(path, &output::stringify_floats(result.clone()))
                {
                    let e = CliError::invalid(msg);
                    emit(&envelope.failure(e.kind, &e.message), cli.global.pretty);
                    return ExitCode::from(2);
                }
            }
            (envelope.success(result), 0)
        }
        Err(e) => (envelope.failure(e.kind, &e.message), e.code),
    };
    emit(&doc, cli.global.pretty);
    ExitCode::from(code as u8)
}

fn configure_threads(jobs: Option<usize>) -> Result<(), CliError> {
    if let Some(j) = jobs {
        if j == 0 {
            return Err(CliError::invalid("--jobs must be >= 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build_global()
            .map_err(|e| CliError::invalid(e.to_string()))?;
    }
    Ok(())
}

fn emit(doc: &serde_json::Value, pretty: bool) {
    let text = if pretty {
        serde_json::to_string_pretty(doc)
    } else {
        serde_json::to_string(doc)
    }
    .expect("JSON values serialize");
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{text}");
}
