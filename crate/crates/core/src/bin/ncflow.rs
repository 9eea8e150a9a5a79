use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use ncflow::experiment::{run, ExperimentConfig};
use ncflow::Error;

/// Run one Möbius-disjointness experiment and write CSV + JSON results.
#[derive(Parser, Debug)]
#[command(name = "ncflow", version)]
struct Args {
    /// sieve (alias mertens), decay, matrix-flow, prop31, quantize, car-demo,
    /// counterexample, pure-point, free-clt, bsz-check
    #[arg(long)]
    experiment: Option<String>,

    /// JSON config; command-line flags override its fields
    #[arg(long)]
    config: Option<PathBuf>,

    #[arg(long)]
    seed: Option<u64>,

    #[arg(long = "n-max")]
    n_max: Option<u64>,

    /// Output directory (default: current directory)
    #[arg(long)]
    out: Option<PathBuf>,

    /// Worker threads for the averaging engine; output does not depend on it
    #[arg(long, default_value_t = 1)]
    workers: usize,
}

fn config_from(args: &Args) -> Result<ExperimentConfig, Error> {
    let mut config = match (&args.config, &args.experiment) {
        (Some(path), _) => ExperimentConfig::load(path)?,
        (None, Some(name)) => ExperimentConfig::new(name.parse()?),
        (None, None) => return Err(Error::Usage("pass --experiment <name> or --config <path>".into())),
    };
    if let Some(name) = &args.experiment {
        config.experiment = name.clone();
    }
    if args.seed.is_some() {
        config.seed = args.seed;
    }
    if args.n_max.is_some() {
        config.n_max = args.n_max;
    }
    if args.out.is_some() {
        config.out = args.out.clone();
    }
    config.validate()?;
    Ok(config)
}

fn main() -> ExitCode {
    let args = Args::parse();
    let result = config_from(&args).and_then(|config| {
        let out = config.out.clone().unwrap_or_else(|| PathBuf::from("."));
        run(&config, &out, args.workers)
    });
    match result {
        Ok(output) => {
            for path in output.csv.iter().chain(std::iter::once(&output.sidecar)) {
                println!("{}", path.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("ncflow: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
