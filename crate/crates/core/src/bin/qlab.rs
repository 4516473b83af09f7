use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use qlab::geometry::{Section, DEFAULT_CUBIC};
use qlab::harness::{self, format_summary, Harness, LadderSpec, Model, RunConfig, Suite};
use qlab::{Error, Result};

#[derive(Parser)]
#[command(
    name = "qlab",
    version,
    about = "Verification suites for star products, almost projectors and Toeplitz operators"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct Common {
    /// JSON run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Model(s): torus, sphere or patch, comma separated.
    #[arg(long)]
    model: Option<String>,
    /// k ladder, e.g. "8,16,32" or "8..64:8".
    #[arg(long)]
    k: Option<String>,
    /// Output directory for CSV tables and summary.json.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
    /// Torus E realization(s): flat or cubic[:c], comma separated.
    #[arg(long)]
    section: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Exact star-algebra identities and witness products.
    Star(Common),
    /// Gaussian moment expansions against quadrature.
    Laplace(Common),
    /// Conditions on E, volumes and Hamiltonian fields.
    GeometryCheck(Common),
    /// Spectra of P_k, rank, gap, projector laws and the χ_m series.
    BuildProjector(Common),
    /// Toeplitz algebra: closure, symbols, positivity, normalized operators, E-independence.
    Toeplitz(Common),
    /// ik[T_f, T_g] against the bracket.
    Commutator(Common),
    /// ‖T_k(f)‖ against sup|f|.
    NormLaw(Common),
    /// Locality of Toeplitz operators.
    Support(Common),
    /// Composed patch kernels against the star product.
    VerifySymbolProduct(Common),
    /// Every suite with its default ladder.
    All(Common),
    /// The suite named by --suite or by the configuration.
    Run {
        #[arg(long)]
        suite: Option<String>,
        #[command(flatten)]
        common: Common,
    },
}

fn parse_sections(s: &str) -> Result<Vec<Section>> {
    s.split(',')
        .map(|t| match t.trim() {
            "flat" => Ok(Section::TorusFlat),
            "cubic" => Ok(Section::TorusCubic { c: DEFAULT_CUBIC }),
            other => match other.strip_prefix("cubic:").map(str::parse::<f64>) {
                Some(Ok(c)) => Ok(Section::TorusCubic { c }),
                _ => Err(Error::Config(format!("unknown section '{other}'"))),
            },
        })
        .collect()
}

fn build_config(suite: Option<Suite>, c: &Common) -> Result<RunConfig> {
    let mut cfg = match &c.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::new(suite.ok_or_else(|| Error::Config("no suite given".into()))?),
    };
    if let Some(s) = suite {
        cfg.suite = s;
    }
    if let Some(m) = &c.model {
        cfg.models = m.split(',').map(|x| Model::parse(x.trim())).collect::<Result<_>>()?;
    }
    if let Some(k) = &c.k {
        cfg.ladder = LadderSpec::parse(k)?;
    }
    if let Some(o) = &c.out {
        cfg.out = Some(o.clone());
    }
    if let Some(s) = c.seed {
        cfg.seed = s;
    }
    if let Some(w) = c.workers {
        cfg.workers = w;
    }
    if let Some(s) = &c.section {
        cfg.sections = parse_sections(s)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn resolve(command: &Command) -> Result<RunConfig> {
    let (suite, common) = match command {
        Command::Star(c) => (Some(Suite::Star), c),
        Command::Laplace(c) => (Some(Suite::Laplace), c),
        Command::GeometryCheck(c) => (Some(Suite::GeometryCheck), c),
        Command::BuildProjector(c) => (Some(Suite::Projector), c),
        Command::Toeplitz(c) => (Some(Suite::Toeplitz), c),
        Command::Commutator(c) => (Some(Suite::Commutator), c),
        Command::NormLaw(c) => (Some(Suite::NormLaw), c),
        Command::Support(c) => (Some(Suite::Support), c),
        Command::VerifySymbolProduct(c) => (Some(Suite::VerifySymbolProduct), c),
        Command::All(c) => (Some(Suite::All), c),
        Command::Run { suite, common } => (suite.as_deref().map(Suite::parse).transpose()?, common),
    };
    build_config(suite, common)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = resolve(&cli.command).and_then(|cfg| Harness::new().run(&cfg));
    let code = match outcome {
        Ok(summary) => {
            print!("{}", format_summary(&summary));
            if summary.passed {
                harness::EXIT_PASS
            } else {
                harness::EXIT_FAIL
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            harness::exit_code(&e)
        }
    };
    ExitCode::from(code as u8)
}
