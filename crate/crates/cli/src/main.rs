use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use skewlab_cli::run::{run_clt, run_gap, run_mix, run_norm, run_prop3, Outcome};
use skewlab_cli::{CliError, CliResult, ExperimentConfig};

#[derive(Parser)]
#[command(name = "skewlab", version, about = "Hecke gaps, correlation decay and CLT runs for SU(2) skew products")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Block norms of the Hecke operator up to J.
    Gap(Overrides),
    /// Correlation series C_n(F, G) and decay fit.
    Mix(Overrides),
    /// Decoupled bound on sup_x ||L^n G - int G|| for each n.
    Prop3(Overrides),
    /// Birkhoff sums, Green-Kubo variance and KS test.
    Clt(Overrides),
    /// Print ||F||_{theta,G}.
    Norm(Overrides),
}

#[derive(Args)]
struct Overrides {
    /// TOML config, or an output file with an embedded config block.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Print a JSON summary instead of text.
    #[arg(long)]
    json: bool,
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long = "j-max")]
    j_max: Option<String>,
    #[arg(long = "n-min")]
    n_min: Option<usize>,
    #[arg(long = "n-max")]
    n_max: Option<usize>,
    #[arg(long)]
    split: Option<String>,
    #[arg(long = "mc-samples")]
    mc_samples: Option<usize>,
    #[arg(long = "clt-n")]
    clt_n: Option<usize>,
    #[arg(long = "clt-samples")]
    clt_samples: Option<usize>,
    #[arg(long)]
    bins: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    cap: Option<u64>,
    #[arg(long)]
    f: Option<String>,
    #[arg(long)]
    g: Option<String>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long = "output-dir")]
    output_dir: Option<String>,
}

impl Overrides {
    fn resolve(&self) -> CliResult<ExperimentConfig> {
        let mut c = match &self.config {
            Some(p) => ExperimentConfig::load(p)?,
            None => ExperimentConfig::default(),
        };
        macro_rules! set {
            ($($field:ident),*) => {$(
                if let Some(v) = &self.$field {
                    c.$field = v.clone();
                }
            )*};
        }
        set!(preset, theta, j_max, n_min, n_max, split, mc_samples, clt_n, clt_samples, bins, seed, cap, f, g);
        if self.k.is_some() {
            c.k = self.k;
        }
        if self.workers.is_some() {
            c.workers = self.workers;
        }
        if self.output_dir.is_some() {
            c.output_dir = self.output_dir.clone();
        }
        Ok(c)
    }
}

fn dispatch(cmd: &Command) -> CliResult<(Outcome, bool)> {
    let (o, run): (&Overrides, fn(&ExperimentConfig) -> CliResult<Outcome>) = match cmd {
        Command::Gap(o) => (o, run_gap),
        Command::Mix(o) => (o, run_mix),
        Command::Prop3(o) => (o, run_prop3),
        Command::Clt(o) => (o, run_clt),
        Command::Norm(o) => (o, run_norm),
    };
    let cfg = o.resolve()?;
    cfg.resolve()?;
    if let Some(w) = cfg.workers {
        rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build_global()
            .map_err(|e| CliError::Internal(e.to_string()))?;
    }
    Ok((run(&cfg)?, o.json))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = std::panic::catch_unwind(|| dispatch(&cli.command))
        .unwrap_or_else(|_| Err(CliError::Internal("panic during run".into())));
    match result {
        Ok((out, json)) => {
            if json {
                println!("{}", serde_json::to_string_pretty(&out.summary).expect("summary serializes"));
            } else {
                println!("{}", out.text);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("skewlab: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
