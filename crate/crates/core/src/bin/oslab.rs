use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use oslab::runner::{self, ExperimentConfig, ExperimentKind, RunOptions, OUT_ENV};

/// Run an experiment described by a TOML config and write CSVs plus a
/// manifest to the output directory.
#[derive(Debug, Parser)]
#[command(name = "oslab", version)]
struct Cli {
    /// geometry-check, orbit, trapped-set, quantize, gap-scan,
    /// resolvent-scan, spectrum, wave or contour-test
    kind: ExperimentKind,
    #[arg(long)]
    config: PathBuf,
    /// Also write SVG plots.
    #[arg(long)]
    plot: bool,
    /// Single worker thread, byte-identical outputs.
    #[arg(long, conflicts_with = "workers")]
    serial: bool,
    #[arg(long)]
    workers: Option<usize>,
    /// Output directory; overrides OSLAB_OUT and the config.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if e.use_stderr() => {
            let _ = e.print();
            return ExitCode::from(1);
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    let out_dir = cli
        .out
        .or_else(|| std::env::var_os(OUT_ENV).filter(|v| !v.is_empty()).map(PathBuf::from));
    let opts = RunOptions {
        plot: cli.plot,
        serial: cli.serial,
        workers: cli.workers,
        out_dir,
    };
    let result = ExperimentConfig::load(&cli.config, Some(cli.kind)).and_then(|cfg| {
        let dir = runner::output_dir(&cfg, &opts);
        runner::run(&cfg, &opts).map(|m| (m, dir))
    });
    match result {
        Ok((manifest, dir)) => {
            for o in &manifest.outputs {
                println!("{}", dir.join(&o.path).display());
            }
            for (k, v) in &manifest.summary {
                println!("{k} = {v}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("oslab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
