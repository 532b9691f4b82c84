use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use boxlab_cli::commands::{self, load_instance, Loaded, PseudoOptions};
use boxlab_cli::edge::EdgeArg;
use boxlab_cli::error::{CliError, CliResult};
use boxlab_cli::report::{CheckResult, RunReport, Timing};
use boxlab_cli::suite::run_suite;
use boxlab_cli::{configure_threads, THREADS_VAR};
use boxlab_core::box_norms::Method;
use boxlab_core::generators::{generate, Atoms, GenSpec, Kind};
use boxlab_core::{ExtendedExponent, SearchMode};
use clap::{Args, Parser, Subcommand, ValueEnum};

/// Exit code for usage, I/O and parse errors.
const ERROR_EXIT: u8 = 3;

#[derive(Parser)]
#[command(
    name = "boxlab",
    version,
    about = "Box norms, cut norms and pseudorandomness certificates for hypergraph systems"
)]
struct Cli {
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Include wall-clock timings in the report.
    #[arg(long, global = true)]
    timings: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Direct,
    Recursive,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Exact,
    Heuristic,
}

impl From<ModeArg> for SearchMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Exact => SearchMode::Exact,
            ModeArg::Heuristic => SearchMode::Heuristic,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Ones,
    #[value(alias = "perturbed_ones")]
    PerturbedOnes,
    #[value(alias = "product_weights")]
    ProductWeights,
    #[value(alias = "random_nonneg")]
    RandomNonneg,
    #[value(alias = "random_signed")]
    RandomSigned,
}

#[derive(Subcommand)]
enum Command {
    /// Box norm of one edge function, or of every edge.
    Norm {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        edge: Option<EdgeArg>,
        #[arg(long)]
        ell: u32,
        #[arg(long)]
        p: Option<ExtendedExponent>,
        #[arg(long, value_enum, default_value = "recursive")]
        method: MethodArg,
    },
    /// Cut norm with its witness sets.
    Cutnorm {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        edge: Option<EdgeArg>,
        #[arg(long, value_enum, default_value = "exact")]
        mode: ModeArg,
        #[arg(long, default_value_t = 32)]
        restarts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Gowers–Cauchy–Schwarz on one edge.
    Gcs {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        edge: EdgeArg,
        #[arg(long)]
        ell: u32,
    },
    /// Generalized von Neumann bound for the instance's functions.
    Vonneumann {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long = "C", visible_alias = "c")]
        c: f64,
        #[arg(long)]
        p: ExtendedExponent,
    },
    /// Counting lemma for two instances on one system.
    Counting {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, visible_alias = "other")]
        instance2: PathBuf,
        #[arg(long = "C", visible_alias = "c")]
        c: f64,
        #[arg(long)]
        p: ExtendedExponent,
    },
    /// Pseudorandomness conditions and theorem certificates.
    Pseudorandom {
        #[command(subcommand)]
        action: PseudoAction,
    },
    /// Writes a generated instance file.
    Gen {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        r: usize,
        /// One atom count for every space, or a comma-separated list.
        #[arg(long)]
        atoms: String,
        #[arg(long, value_enum)]
        kind: KindArg,
        #[arg(long, default_value_t = 0.01)]
        eps: f64,
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Runs a suite file.
    Suite { file: PathBuf },
}

#[derive(Args)]
struct PseudoArgs {
    /// ν for `check` and `thm43`, λ for `thm42`.
    #[arg(long)]
    instance: PathBuf,
    /// ψ for `check` and `thm43`, φ for `thm42`.
    #[arg(long, visible_alias = "phi")]
    psi: Option<PathBuf>,
    #[arg(long = "C", visible_alias = "c")]
    c: f64,
    #[arg(long)]
    eta: f64,
    #[arg(long)]
    p: ExtendedExponent,
    #[arg(long)]
    ell: Option<u32>,
    #[arg(long, value_enum, default_value = "exact")]
    mode: ModeArg,
    #[arg(long, default_value_t = 32)]
    budget: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl PseudoArgs {
    fn options(&self) -> PseudoOptions {
        PseudoOptions {
            c: self.c,
            eta: self.eta,
            p: self.p,
            ell: self.ell,
            mode: self.mode.into(),
            budget: self.budget,
            seed: self.seed,
        }
    }

    fn second(&self, what: &str) -> CliResult<Loaded> {
        match &self.psi {
            Some(p) => load_instance(p, "psi"),
            None => Err(CliError::Usage(format!("--psi is required for {what}"))),
        }
    }
}

#[derive(Subcommand)]
enum PseudoAction {
    /// Every condition for ν against ψ (constant 1 without `--psi`).
    Check(PseudoArgs),
    /// λ + φ from a pseudorandom λ and a bounded φ.
    Thm42(PseudoArgs),
    /// Pseudorandomness from a box-norm-close majorant pair.
    Thm43(PseudoArgs),
}

fn single(command: Vec<String>, loaded: &[&Loaded], checks: Vec<CheckResult>) -> RunReport {
    RunReport::new(command, loaded.iter().map(|l| l.digest()).collect(), checks)
}

fn gen_spec(n: usize, r: usize, atoms: &str, kind: KindArg, eps: f64, scale: f64, seed: u64) -> CliResult<GenSpec> {
    let counts = atoms
        .split(',')
        .map(|a| a.trim().parse::<usize>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|_| CliError::Usage(format!("bad --atoms {atoms:?}")))?;
    let atoms = match counts.as_slice() {
        [m] => Atoms::Uniform(*m),
        _ => Atoms::PerSpace(counts),
    };
    let kind = match kind {
        KindArg::Ones => Kind::Ones,
        KindArg::PerturbedOnes => Kind::PerturbedOnes { eps },
        KindArg::ProductWeights => Kind::ProductWeights,
        KindArg::RandomNonneg => Kind::RandomNonneg { scale },
        KindArg::RandomSigned => Kind::RandomSigned { scale },
    };
    Ok(GenSpec {
        n,
        r,
        atoms,
        kind,
        seed,
    })
}

fn write_output(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::io(path, e)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli, command: Vec<String>) -> CliResult<u8> {
    let start = Instant::now();
    let report = match cli.command {
        Command::Gen {
            n,
            r,
            atoms,
            kind,
            eps,
            scale,
            seed,
        } => {
            let spec = gen_spec(n, r, &atoms, kind, eps, scale, seed)?;
            let mut text = generate(&spec)?.to_json_string();
            text.push('\n');
            write_output(cli.out.as_deref(), &text)?;
            return Ok(0);
        }
        Command::Suite { file } => run_suite(&file, command, cli.timings)?,
        Command::Norm {
            instance,
            edge,
            ell,
            p,
            method,
        } => {
            let l = load_instance(&instance, "instance")?;
            let edge = edge.map(|e| e.resolve(&l.instance)).transpose()?;
            let method = match method {
                MethodArg::Direct => Method::Direct,
                MethodArg::Recursive => Method::Recursive,
            };
            let checks = commands::norm(&l.instance, edge.as_deref(), ell, p, method)?;
            single(command, &[&l], checks)
        }
        Command::Cutnorm {
            instance,
            edge,
            mode,
            restarts,
            seed,
        } => {
            let l = load_instance(&instance, "instance")?;
            let edge = edge.map(|e| e.resolve(&l.instance)).transpose()?;
            let checks = commands::cutnorm(&l.instance, edge.as_deref(), mode.into(), restarts, seed)?;
            single(command, &[&l], checks)
        }
        Command::Gcs { instance, edge, ell } => {
            let l = load_instance(&instance, "instance")?;
            let edge = edge.resolve(&l.instance)?;
            let check = commands::gcs(&l.instance, &edge, ell)?;
            single(command, &[&l], vec![check])
        }
        Command::Vonneumann { instance, c, p } => {
            let l = load_instance(&instance, "instance")?;
            let check = commands::vonneumann(&l.instance, c, p)?;
            single(command, &[&l], vec![check])
        }
        Command::Counting {
            instance,
            instance2,
            c,
            p,
        } => {
            let f = load_instance(&instance, "instance")?;
            let g = load_instance(&instance2, "instance2")?;
            let check = commands::counting(&f.instance, &g.instance, c, p)?;
            single(command, &[&f, &g], vec![check])
        }
        Command::Pseudorandom { action } => match action {
            PseudoAction::Check(a) => {
                let nu = load_instance(&a.instance, "nu")?;
                let psi = a.psi.as_ref().map(|p| load_instance(p, "psi")).transpose()?;
                let check = commands::pseudorandom(&nu.instance, psi.as_ref().map(|p| &p.instance), &a.options())?;
                let mut loaded = vec![&nu];
                loaded.extend(psi.as_ref());
                single(command, &loaded, vec![check])
            }
            PseudoAction::Thm42(a) => {
                let lambda = load_instance(&a.instance, "lambda")?;
                let mut phi = a.second("thm42")?;
                phi.label = "phi".into();
                let check = commands::thm42(&lambda.instance, &phi.instance, &a.options())?;
                single(command, &[&lambda, &phi], vec![check])
            }
            PseudoAction::Thm43(a) => {
                let nu = load_instance(&a.instance, "nu")?;
                let psi = a.second("thm43")?;
                let check = commands::thm43(&nu.instance, &psi.instance, &a.options())?;
                single(command, &[&nu, &psi], vec![check])
            }
        },
    };
    let mut report = report;
    if cli.timings && report.timings.is_none() {
        report.timings = Some(vec![Timing {
            name: "total".into(),
            seconds: start.elapsed().as_secs_f64(),
        }]);
    }
    write_output(cli.out.as_deref(), &report.to_json())?;
    Ok(report.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { ERROR_EXIT } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Err(e) = configure_threads(std::env::var(THREADS_VAR).ok()) {
        eprintln!("boxlab: {e}");
        return ExitCode::from(ERROR_EXIT);
    }
    let command: Vec<String> = std::env::args().skip(1).collect();
    match run(cli, command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("boxlab: {e}");
            ExitCode::from(ERROR_EXIT)
        }
    }
}
