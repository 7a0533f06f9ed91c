use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gsph::io::{load_config, run_config};
use gsph::{setup, GsphError, SimConfig};

#[derive(Parser)]
#[command(name = "gsph", version, about = "Generalized-coordinate SPH solid solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a simulation and write snapshots.
    Run(RunArgs),
    /// Check a configuration without allocating particles.
    Validate { config: PathBuf },
    /// Build the particle system and print its size.
    Info(InfoArgs),
}

#[derive(Args)]
struct RunArgs {
    config: PathBuf,
    /// Overrides `output.dir`.
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Reserved; the solver has no stochastic components.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides `integrator.steps`.
    #[arg(long)]
    max_steps: Option<u64>,
}

#[derive(Args)]
struct InfoArgs {
    config: PathBuf,
    #[arg(long)]
    threads: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn thread_pool(threads: Option<usize>) -> Result<rayon::ThreadPool, GsphError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    builder
        .build()
        .map_err(|e| GsphError::Setup(format!("cannot start worker pool: {e}")))
}

fn execute(command: Command) -> Result<(), GsphError> {
    match command {
        Command::Validate { config } => {
            let cfg = load_config(&config)?;
            println!(
                "{}: ok ({} subdomain(s), {} material(s))",
                config.display(),
                cfg.subdomains.len(),
                cfg.materials.len()
            );
            Ok(())
        }
        Command::Info(args) => {
            let cfg = load_config(&args.config)?;
            thread_pool(args.threads)?.install(|| info(&cfg))
        }
        Command::Run(args) => {
            let cfg = load_config(&args.config)?;
            let out = args.output_dir.clone().unwrap_or_else(|| cfg.resolve(&cfg.output.dir));
            let steps = args.max_steps.unwrap_or(cfg.integrator.steps);
            let _ = args.seed;
            thread_pool(args.threads)?.install(|| {
                let sim = run_config(&cfg, &out, steps, |p| eprintln!("{p}"))?;
                eprintln!(
                    "finished {} step(s), t = {:e}, output in {}",
                    sim.step,
                    sim.time,
                    out.display()
                );
                Ok(())
            })
        }
    }
}

fn info(cfg: &SimConfig) -> Result<(), GsphError> {
    let sim = setup(cfg)?;
    println!("particles: {}", sim.particles.len());
    println!("pairs: {}", sim.pairs.len());
    for sd in &sim.subdomains {
        println!(
            "subdomain {} (rank {}): members {}, transients {}, h {}",
            sd.name,
            sd.rank,
            sd.members.len(),
            sd.transients.len(),
            sd.kernel.h
        );
    }
    println!("initial dt: {:e}", sim.stable_dt());
    Ok(())
}
