use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use tia::exactnum::parse_rational;
use tia::fluid::{self, Augmentation, FluidFlow, Method, StateSidecar};
use tia::tensor::{self, ChainD};
use tia::tia1d::{self, Table};
use tia::verify::{self, SweepConfig};
use tia::{Chain, TiaError};

/// Exact transverse intersection algebra on cubical lattices.
///
/// Exit status: 0 success, 1 a checked identity or agreement failed,
/// 2 unreadable or malformed input, 3 invalid configuration.
/// Set TIA_LOG to error, info or debug for progress logging on stderr.
#[derive(Parser, Debug)]
#[command(name = "tia", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Transverse product of two chain files (1-D or d-dimensional JSON).
    Product {
        a: PathBuf,
        b: PathBuf,
        /// Output file; stdout when absent.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Boundary of a chain file.
    Boundary {
        a: PathBuf,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Sweep commutativity, associativity, Leibniz, boundary squared and the truncation ideal.
    Verify(VerifyArgs),
    /// Compare the closed-form tables with exact integration of the wiggled densities.
    OracleCheck(OracleArgs),
    /// Build the fluid algebra or integrate its Euler flow.
    Fluid {
        #[command(subcommand)]
        action: FluidCommand,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum VerifyFixture {
    /// Stick-endpoint coefficient replaced by its reciprocal.
    CorruptStickEndpoint,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum OracleFixture {
    /// Point-on-infinitesimal binomials with primed and unprimed decorations exchanged.
    SwappedBinomial,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Number of axes, 1 to 3.
    #[arg(long, default_value_t = 1)]
    dims: usize,
    /// Largest decoration entry, at most 4.
    #[arg(long, default_value_t = 2)]
    dec_bound: u32,
    /// Lattice sites per axis, at most 5.
    #[arg(long, default_value_t = 4)]
    window: i64,
    /// Period of every axis; the infinite line when absent.
    #[arg(long)]
    period: Option<u32>,
    /// Literal random pairs checked in addition to the class sweep (d > 1).
    #[arg(long, default_value_t = 2000)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Run against a deliberately broken product table.
    #[arg(long, value_enum)]
    fixture: Option<VerifyFixture>,
}

#[derive(Args, Debug)]
struct OracleArgs {
    /// Largest decoration entry, at most 4.
    #[arg(long, default_value_t = 4)]
    dec_bound: u32,
    /// Lattice sites on the line, at most 5.
    #[arg(long, default_value_t = 5)]
    window: i64,
    /// Check a deliberately broken product table.
    #[arg(long, value_enum)]
    fixture: Option<OracleFixture>,
}

#[derive(Args, Debug)]
struct LatticeArgs {
    /// Lattice size per axis, at least 3.
    #[arg(short, long, default_value_t = 3)]
    n: u32,
    /// Augmentation parameter in (0, 1], as a rational "p/q".
    #[arg(long, default_value = "1")]
    delta: String,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum MethodArg {
    Rk4,
    Midpoint,
}

#[derive(Subcommand, Debug)]
enum FluidCommand {
    /// Assemble the forms exactly and report dimension, checks and definiteness as JSON.
    Build {
        #[command(flatten)]
        lattice: LatticeArgs,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Integrate from a seeded random state of unit energy; writes step,time,energy,helicity CSV.
    Run {
        #[command(flatten)]
        lattice: LatticeArgs,
        #[arg(long, default_value_t = 0.01)]
        dt: f64,
        #[arg(long, default_value_t = 100)]
        steps: usize,
        #[arg(long, value_enum, default_value_t = MethodArg::Midpoint)]
        method: MethodArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// CSV output; stdout when absent.
        #[arg(short, long)]
        out: Option<PathBuf>,
        /// Final-state JSON; defaults to the CSV path with a .json extension.
        #[arg(long)]
        state: Option<PathBuf>,
    },
}

/// An error with the exit status it maps to.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Failure { code: 2, message: message.into() }
    }

    fn config(message: impl Into<String>) -> Self {
        Failure { code: 3, message: message.into() }
    }
}

impl From<TiaError> for Failure {
    fn from(e: TiaError) -> Self {
        let code = match e {
            TiaError::Parse(_) | TiaError::InvalidGenerator(_) | TiaError::NotAPointChain(_) | TiaError::NotInW(_) => 2,
            TiaError::LatticeMismatch(_) | TiaError::InvalidLattice(_) | TiaError::Config(_) | TiaError::SingularGram(_) => 3,
            TiaError::NotInBasis(_) | TiaError::MidpointDiverged { .. } => 1,
        };
        Failure { code, message: e.to_string() }
    }
}

type Outcome = Result<bool, Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn write(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Failure::input(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

enum AnyChain {
    Line(Chain),
    Tensor(ChainD),
}

fn load_chain(path: &Path) -> Result<AnyChain, Failure> {
    let text = read(path)?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    let tag = |e: TiaError| Failure { message: format!("{}: {e}", path.display()), ..Failure::from(e) };
    if value.get("lattices").is_some() {
        ChainD::from_json(&text).map(AnyChain::Tensor).map_err(tag)
    } else {
        Chain::from_json(&text).map(AnyChain::Line).map_err(tag)
    }
}

fn cmd_product(a: &Path, b: &Path, out: Option<&Path>) -> Outcome {
    let text = match (load_chain(a)?, load_chain(b)?) {
        (AnyChain::Line(x), AnyChain::Line(y)) => tia1d::intersect(&x, &y)?.to_json(),
        (AnyChain::Tensor(x), AnyChain::Tensor(y)) => tensor::intersect_d(&x, &y)?.to_json(),
        _ => return Err(Failure::config("lattice mismatch: cannot multiply a 1-D chain with a d-dimensional one")),
    };
    write(out, &(text + "\n"))?;
    Ok(true)
}

fn cmd_boundary(a: &Path, out: Option<&Path>) -> Outcome {
    let text = match load_chain(a)? {
        AnyChain::Line(x) => tia1d::boundary(&x).to_json(),
        AnyChain::Tensor(x) => tensor::boundary_d(&x).to_json(),
    };
    write(out, &(text + "\n"))?;
    Ok(true)
}

fn cmd_verify(args: &VerifyArgs) -> Outcome {
    if !(1..=3).contains(&args.dims) {
        return Err(Failure::config(format!("--dims must be 1, 2 or 3, got {}", args.dims)));
    }
    if args.dec_bound > 4 {
        return Err(Failure::config(format!("--dec-bound must be at most 4, got {}", args.dec_bound)));
    }
    if !(1..=5).contains(&args.window) {
        return Err(Failure::config(format!("--window must be between 1 and 5, got {}", args.window)));
    }
    let cfg = SweepConfig {
        dims: args.dims,
        dec_bound: args.dec_bound,
        window: args.window,
        period: args.period,
        table: match args.fixture {
            Some(VerifyFixture::CorruptStickEndpoint) => Table::CorruptStickEndpoint,
            None => Table::Standard,
        },
        samples: args.samples,
        seed: args.seed,
        ..SweepConfig::default()
    };
    let report = verify::verify(&cfg)?;
    println!(
        "verify: dims={} dec-bound={} window={} period={}",
        cfg.dims,
        cfg.dec_bound,
        cfg.window,
        cfg.period.map_or("none".to_string(), |p| p.to_string())
    );
    println!("{report}");
    Ok(report.passed())
}

fn cmd_oracle_check(args: &OracleArgs) -> Outcome {
    if args.dec_bound > 4 {
        return Err(Failure::config(format!("--dec-bound must be at most 4, got {}", args.dec_bound)));
    }
    if !(1..=5).contains(&args.window) {
        return Err(Failure::config(format!("--window must be between 1 and 5, got {}", args.window)));
    }
    let table = match args.fixture {
        Some(OracleFixture::SwappedBinomial) => Table::SwappedPointInfinitesimal,
        None => Table::Standard,
    };
    let report = verify::oracle_check(table, args.dec_bound, args.window);
    let count = |name: &str| report.check(name).map_or(0, |c| c.checked);
    if report.passed() {
        println!("AGREE: {} products, {} boundaries", count("products"), count("boundaries"));
    } else {
        println!("{report}");
        println!("DISAGREE");
    }
    Ok(report.passed())
}

fn augmentation(lattice: &LatticeArgs) -> Result<Augmentation, Failure> {
    let delta = parse_rational(&lattice.delta).map_err(|e| Failure::config(format!("--delta: {e}")))?;
    Ok(Augmentation::new(delta)?)
}

fn cmd_fluid(action: &FluidCommand) -> Outcome {
    match action {
        FluidCommand::Build { lattice, out } => {
            let aug = augmentation(lattice)?;
            let algebra = fluid::build_fluid_algebra(lattice.n, &aug)?;
            let summary = algebra.summary();
            eprintln!(
                "N={} delta={} dim V={} {}",
                summary.n,
                summary.delta,
                summary.dim_v,
                summary.definiteness.verdict()
            );
            let text = serde_json::to_string_pretty(&summary).expect("summary serializes");
            write(out.as_deref(), &(text + "\n"))?;
            Ok(true)
        }
        FluidCommand::Run { lattice, dt, steps, method, seed, out, state } => {
            let aug = augmentation(lattice)?;
            let algebra = fluid::build_fluid_algebra(lattice.n, &aug)?;
            let flow = FluidFlow::new(&algebra)?;
            let method = match method {
                MethodArg::Rk4 => Method::Rk4,
                MethodArg::Midpoint => Method::ImplicitMidpoint,
            };
            let x0 = flow.random_state(*seed);
            let run = fluid::integrate(&flow, &x0, *dt, *steps, method)?;
            write(out.as_deref(), &run.to_csv())?;
            let last = run.samples.last().expect("initial sample");
            let sidecar = StateSidecar {
                n: lattice.n,
                delta: lattice.delta.clone(),
                method,
                dt: *dt,
                steps: *steps,
                seed: *seed,
                time: last.time,
                energy: last.energy,
                helicity: last.helicity,
                state: run.state.iter().copied().collect(),
            };
            let state_path = state.clone().or_else(|| out.as_ref().map(|p| p.with_extension("json")));
            if let Some(p) = state_path {
                let text = serde_json::to_string_pretty(&sidecar).expect("state serializes");
                write(Some(&p), &(text + "\n"))?;
            }
            eprintln!(
                "max relative drift: energy {:.3e}, helicity {:.3e}",
                run.max_relative_energy_drift(),
                run.max_relative_helicity_drift()
            );
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("TIA_LOG", "error")).init();
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Product { a, b, out } => cmd_product(a, b, out.as_deref()),
        Command::Boundary { a, out } => cmd_boundary(a, out.as_deref()),
        Command::Verify(args) => cmd_verify(args),
        Command::OracleCheck(args) => cmd_oracle_check(args),
        Command::Fluid { action } => cmd_fluid(action),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
