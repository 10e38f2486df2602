use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use ntn_core::campaign::{reference_matrix, run_campaign, write_campaign, CampaignError};
use ntn_core::ScenarioConfig;

/// System-level Monte-Carlo simulator for a single LEO satellite NR cell cluster.
#[derive(Parser)]
#[command(name = "ntnsim", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario file over its seeds.
    Run {
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Run a built-in configuration matrix.
    Campaign {
        #[arg(long, value_enum)]
        preset: Preset,
        /// Scenario file whose parameters seed every matrix row.
        #[arg(long)]
        base: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    Paper,
}

#[derive(Args)]
struct Common {
    /// Seeds as `1,2,3` or `1..5` (inclusive).
    #[arg(long, value_parser = parse_seeds)]
    seeds: Option<Seeds>,
    /// Output directory, overriding the config's `output_dir`.
    #[arg(long, env = "NTNSIM_OUT")]
    out: Option<PathBuf>,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    /// Print the resolved configs and exit.
    #[arg(long)]
    dry_run: bool,
}

#[derive(Clone)]
struct Seeds(Vec<u64>);

fn parse_seeds(s: &str) -> Result<Seeds, String> {
    let seeds: Vec<u64> = if let Some((a, b)) = s.split_once("..") {
        let a: u64 = a.trim().parse().map_err(|e| format!("{a}: {e}"))?;
        let b: u64 = b.trim().parse().map_err(|e| format!("{b}: {e}"))?;
        (a..=b).collect()
    } else {
        s.split(',').map(|t| t.trim().parse().map_err(|e| format!("{t}: {e}"))).collect::<Result<_, _>>()?
    };
    if seeds.is_empty() {
        return Err("empty seed list".into());
    }
    Ok(Seeds(seeds))
}

enum Failure {
    Config(String),
    Run(String),
}

fn load(path: &Path) -> Result<ScenarioConfig, Failure> {
    ScenarioConfig::load(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
}

fn execute(configs: Vec<ScenarioConfig>, common: &Common) -> Result<(), Failure> {
    let configs: Vec<ScenarioConfig> = configs
        .into_iter()
        .map(|mut c| {
            if let Some(Seeds(seeds)) = &common.seeds {
                c.seeds = seeds.clone();
            }
            if let Some(out) = &common.out {
                c.output_dir = out.clone();
            }
            c
        })
        .collect();

    if common.dry_run {
        for c in &configs {
            println!("# {}\n{}", c.name, c.render());
        }
        return Ok(());
    }

    let out = configs[0].output_dir.clone();
    let reports = run_campaign(&configs, common.jobs).map_err(|e| match e {
        e @ CampaignError::Config { .. } => Failure::Config(e.to_string()),
        e => Failure::Run(e.to_string()),
    })?;
    let table = write_campaign(&out, &configs, &reports).map_err(|e| Failure::Run(e.to_string()))?;
    print!("{table}");
    eprintln!("results written to {}", out.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run { config, common } => load(config).and_then(|c| execute(vec![c], common)),
        Command::Campaign { preset: Preset::Paper, base, common } => {
            let base = match base {
                Some(p) => load(p),
                None => Ok(ScenarioConfig::default()),
            };
            base.and_then(|b| execute(reference_matrix(&b), common))
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Run(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Config(msg)) => {
            eprintln!("config error: {msg}");
            ExitCode::from(2)
        }
    }
}
