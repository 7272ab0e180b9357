use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use flga::harness::bench::{self, Solver};
use flga::harness::cases::{self, CollisionSpec};
use flga::harness::sweep::sweep_tau;
use flga::harness::{self, HarnessError, RunConfig};
use flga::lattice::{Model, Multiplicity};

/// Float lattice gas experiments.
#[derive(Debug, Parser)]
#[command(version)]
struct Cli {
    /// Root directory for all outputs.
    #[arg(long, global = true, env = "FLGA_OUTPUT_ROOT", default_value = "output")]
    output_root: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one configured case.
    Run(ConfigArgs),
    /// Measure tau over the config's `c_list`.
    SweepTau(ConfigArgs),
    /// Time the collision step over grid sizes.
    Bench {
        /// Square grid edges.
        #[arg(long, value_delimiter = ',', default_values_t = [32, 64, 128, 256, 512, 1024])]
        edges: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_values = ["lbm", "flga2", "flga3"])]
        solvers: Vec<Solver>,
        #[arg(long, default_value_t = 5)]
        reps: usize,
    },
    /// One shockwave step through the circuit emulator and the classical kernel.
    QflgaCompare {
        #[arg(long, default_value_t = 128)]
        length: usize,
        #[arg(long, default_value_t = 0.5)]
        c: f64,
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
        #[arg(long, default_value_t = 4.0)]
        rho1: f64,
        #[arg(long, default_value_t = 2.0)]
        rho2: f64,
    },
    /// Write the class and coefficient tables of one collision order.
    DumpTable {
        #[arg(long, default_value = "d2q9")]
        model: Model,
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
        #[arg(long, default_value_t = 1.0)]
        c: f64,
        /// Count every ordering of the input and output multisets.
        #[arg(long)]
        ordered: bool,
    },
}

#[derive(Debug, clap::Args)]
struct ConfigArgs {
    /// Key-value config file.
    config: PathBuf,
    /// Override one key, e.g. `--set steps=100`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

impl ConfigArgs {
    fn load(&self) -> Result<RunConfig, Failure> {
        let text = fs::read_to_string(&self.config)
            .with_context(|| format!("reading {}", self.config.display()))
            .map_err(Failure::Other)?;
        RunConfig::parse_with_overrides(&text, &self.overrides).map_err(|e| Failure::Harness(e.into()))
    }
}

enum Failure {
    Harness(HarnessError),
    Other(anyhow::Error),
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Failure {
        Failure::Harness(e)
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Failure {
        Failure::Other(e)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Harness(e)) => {
            eprintln!("error: {e}");
            match e {
                HarnessError::Config(_) => ExitCode::from(2),
                ref e if e.is_instability() => ExitCode::from(3),
                _ => ExitCode::FAILURE,
            }
        }
        Err(Failure::Other(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn execute(cli: Cli) -> Result<(), Failure> {
    let root = cli.output_root;
    match cli.command {
        Command::Run(args) => {
            let cfg = args.load()?;
            let report = harness::run_case(&cfg, &root)?;
            println!("{}", serde_json::to_string_pretty(&report).context("encoding report")?);
        }
        Command::SweepTau(args) => {
            let cfg = args.load()?;
            let result = sweep_tau(&cfg)?;
            let dir = root.join(&cfg.output_dir);
            create(&dir)?;
            harness::write_file(&dir.join("tau_sweep.csv"), |w| result.curve.write_csv(w))?;
            println!("gamma = {}, pi0 = {}", result.curve.gamma, result.curve.pi0);
            if !result.flagged.is_empty() {
                println!("unstable or unfitted at C = {:?}", result.flagged);
            }
        }
        Command::Bench { edges, solvers, reps } => {
            let rows = bench::bench_timing(&edges, &solvers, reps);
            create(&root)?;
            harness::write_file(&root.join("bench.csv"), |w| bench::write_csv(&rows, w))?;
            for s in solvers {
                if let Some(fit) = bench::scaling_fit(&rows, s) {
                    println!("{s}: slope {:.3}, r2 {:.4}", fit.slope, fit.r2);
                }
            }
        }
        Command::QflgaCompare { length, c, lambda, rho1, rho2 } => {
            let cmp = cases::qflga_compare(length, rho1, rho2, lambda, c)?;
            create(&root)?;
            harness::write_file(&root.join("qflga_compare.csv"), |w| {
                writeln!(w, "x,channel,classical,quantum")?;
                for x in 0..length {
                    for ch in 0..3 {
                        writeln!(w, "{x},{ch},{:?},{:?}", cmp.classical.site(x, 0)[ch], cmp.quantum.site(x, 0)[ch])?;
                    }
                }
                Ok(())
            })?;
            println!("max |f_classical - f_quantum| = {:e}", cmp.max_abs);
        }
        Command::DumpTable { model, k, lambda, c, ordered } => {
            let mut spec = CollisionSpec::new(model, &[(k, c)], lambda);
            if ordered {
                spec.multiplicity = Multiplicity::Ordered;
            }
            let collider = spec.collider().map_err(HarnessError::from)?;
            for p in harness::dump_table(&collider.tables()[0], &root)? {
                println!("{}", p.display());
            }
        }
    }
    Ok(())
}

fn create(dir: &Path) -> anyhow::Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}
