use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use dirichlet_tower::forms::QuadraticForm;
use dirichlet_tower::harness::{
    any_failures, converge_table, evolve_trajectory, parse_time_grid, run_suite,
    write_convergence_csv, write_reports, write_trajectory_csv, RunConfig, Suite,
};
use dirichlet_tower::superop::{certify_complete_positivity, LindbladJson, Semigroup, SuperOperator};
use dirichlet_tower::tower::{random_element, AlgebraElement, ElementKind};

/// Numerical checks for Dirichlet forms on the dyadic matrix tower.
#[derive(Debug, Parser)]
#[command(name = "dtower", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run randomized property suites and print one line per report.
    Verify {
        /// Suite name, comma-separated list, or `all`.
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = 4)]
        level: usize,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        /// Semigroup times as `start:step:stop` or a comma list.
        #[arg(long, default_value = "0.1,1,10")]
        times: String,
        #[arg(long, default_value_t = 3)]
        choi_max_level: usize,
        /// Certify the transpose map instead of the semigroup in the choi suite.
        #[arg(long)]
        inject_transpose: bool,
        /// Directory for reports.json and summary.csv.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Tabulate E(P_n a), E(Q_n a) and ||Q_n a||² for n = 1..N.
    Converge {
        /// Expected level of the input; must match the file.
        #[arg(long)]
        level: Option<usize>,
        #[arg(long)]
        input: PathBuf,
        /// CSV destination; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sample t ↦ Φ_t(a) on a time grid.
    Evolve {
        #[arg(long, default_value = "0:0.1:2")]
        t_grid: String,
        #[arg(long)]
        input: PathBuf,
        /// `diagonal` or `lindblad:<file.json>`.
        #[arg(long, default_value = "diagonal")]
        generator: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Form the Choi matrix of Φ_t and report its smallest eigenvalue.
    Choi {
        #[arg(long, default_value_t = 1)]
        level: usize,
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        /// `diagonal`, `transpose` or `lindblad:<file.json>`.
        #[arg(long, default_value = "diagonal")]
        generator: String,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        /// Write the certificate as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a random element as JSON.
    Sample {
        #[arg(long, default_value_t = 2)]
        level: usize,
        #[arg(long, value_enum, default_value_t = Kind::General)]
        kind: Kind,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Kind {
    Hermitian,
    General,
    Contraction,
    Psd,
}

impl From<Kind> for ElementKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Hermitian => ElementKind::Hermitian,
            Kind::General => ElementKind::General,
            Kind::Contraction => ElementKind::Contraction,
            Kind::Psd => ElementKind::Psd,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

/// Returns whether every check passed.
fn run(command: Command) -> Result<bool> {
    match command {
        Command::Verify {
            suite,
            level,
            samples,
            seed,
            tol,
            times,
            choi_max_level,
            inject_transpose,
            out_dir,
        } => {
            let cfg = RunConfig {
                level,
                suites: Suite::parse_list(&suite)?,
                samples,
                seed,
                tol,
                times: parse_time_grid(&times)?,
                choi_max_level,
                inject_transpose,
                out_dir,
            };
            let reports = run_suite(&cfg)?;
            let stdout = io::stdout();
            let mut out = stdout.lock();
            for r in &reports {
                writeln!(
                    out,
                    "{} {} level={} samples={} failures={} worst_margin={:e} seed={}",
                    if r.passed() { "PASS" } else { "FAIL" },
                    r.suite,
                    r.level,
                    r.samples,
                    r.failures,
                    r.worst_margin,
                    r.seed
                )?;
            }
            if let Some(dir) = &cfg.out_dir {
                write_reports(&reports, dir)?;
            }
            Ok(!any_failures(&reports))
        }
        Command::Converge { level, input, out } => {
            let a = read_element(&input)?;
            if let Some(n) = level {
                if n != a.level() {
                    bail!("--level {n} does not match the input level {}", a.level());
                }
            }
            let rows = converge_table(&QuadraticForm::diagonal(a.level())?, &a)?;
            match out {
                Some(path) => write_convergence_csv(&rows, create(&path)?)?,
                None => write_convergence_csv(&rows, io::stdout().lock())?,
            }
            Ok(true)
        }
        Command::Evolve {
            t_grid,
            input,
            generator,
            out,
        } => {
            let a = read_element(&input)?;
            let gen = parse_generator(&generator, a.level())?;
            if gen.level() != a.level() {
                bail!("generator level {} does not match input level {}", gen.level(), a.level());
            }
            let rows = evolve_trajectory(&gen, &a, &parse_time_grid(&t_grid)?)?;
            match out {
                Some(path) => write_trajectory_csv(&rows, create(&path)?)?,
                None => write_trajectory_csv(&rows, io::stdout().lock())?,
            }
            Ok(true)
        }
        Command::Choi {
            level,
            t,
            generator,
            tol,
            out,
        } => {
            let map = if generator == "transpose" {
                SuperOperator::transpose(level)?
            } else {
                let gen = parse_generator(&generator, level)?;
                Semigroup::new(&gen)?.map_at(t)?
            };
            let cert = certify_complete_positivity(&map, tol)?;
            println!(
                "{} level={} min_eigenvalue={:e} hermitian_deviation={:e}",
                if cert.completely_positive { "CP" } else { "NOT-CP" },
                cert.level,
                cert.min_eigenvalue,
                cert.hermitian_deviation
            );
            if let Some(path) = out {
                let mut text = serde_json::to_string_pretty(&cert)?;
                text.push('\n');
                fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
            }
            Ok(cert.completely_positive)
        }
        Command::Sample {
            level,
            kind,
            seed,
            out,
        } => {
            let mut text = random_element(level, kind.into(), seed)?.to_json()?;
            text.push('\n');
            match out {
                Some(path) => fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?,
                None => print!("{text}"),
            }
            Ok(true)
        }
    }
}

fn read_element(path: &Path) -> Result<AlgebraElement> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    AlgebraElement::from_json(&text).with_context(|| format!("parsing {}", path.display()))
}

fn create(path: &Path) -> Result<fs::File> {
    fs::File::create(path).with_context(|| format!("creating {}", path.display()))
}

fn parse_generator(spec: &str, level: usize) -> Result<SuperOperator> {
    if spec == "diagonal" {
        return Ok(SuperOperator::diagonal_complement(level)?);
    }
    if let Some(file) = spec.strip_prefix("lindblad:") {
        let text = fs::read_to_string(file).with_context(|| format!("reading {file}"))?;
        let spec: LindbladJson = serde_json::from_str(&text).with_context(|| format!("parsing {file}"))?;
        let gen = spec.into_generator(1e-10)?;
        if gen.level() != level {
            bail!("generator in {file} has level {}, expected {level}", gen.level());
        }
        return Ok(gen);
    }
    bail!("unknown generator {spec:?}; expected `diagonal` or `lindblad:<file.json>`")
}
