mod commands;
mod report;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use campana::counting::{CountCache, CACHE_DIR_ENV};
use campana::eulerprod::DEFAULT_PRIME_CUTOFF;
use campana::localdensity::{BinaryFormParams, FiberIndex};
use clap::{Args, Parser, Subcommand, ValueEnum};

use commands::RunConfig;
use report::{ConfigOut, Format, Report};

/// Leading constants and exact point counts for squareful Campana points.
#[derive(Parser)]
#[command(name = "campana", version)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Output format.
    #[arg(long, value_enum, default_value = "json", global = true)]
    format: Format,
    /// Largest prime used in Euler products.
    #[arg(long, default_value_t = DEFAULT_PRIME_CUTOFF, global = true)]
    prime_cutoff: u64,
    /// Truncation of the fiber sums (y0 y1 y2 for c_bv, v for the binary v-sum).
    #[arg(long, default_value_t = 10_000, global = true)]
    cbv_truncation: u64,
    /// Largest B (or T) any single count may use.
    #[arg(long, global = true)]
    count_budget: Option<u64>,
    /// Directory of the count cache.
    #[arg(long, env = CACHE_DIR_ENV, default_value = ".campana-cache", global = true)]
    cache_dir: PathBuf,
    /// Ignore cached counts; fresh results are still checked against the cache.
    #[arg(long, global = true)]
    recompute: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Predicted and fiber-sum constants.
    Constants {
        #[arg(value_enum)]
        target: ConstantTarget,
        #[command(flatten)]
        form: FormArgs,
    },
    /// Exact counts along a ladder of bounds.
    Count {
        #[command(subcommand)]
        problem: CountProblem,
    },
    /// Run a verification battery; exits with status 1 if any check fails.
    Verify {
        #[arg(value_enum)]
        battery: Battery,
        #[command(flatten)]
        form: FormArgs,
    },
    /// Thin-set counts for fibers with entries at most M.
    Thinset {
        #[arg(long)]
        m: u64,
        #[arg(long)]
        b: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ConstantTarget {
    Three,
    Binary,
}

#[derive(Clone, Copy, ValueEnum)]
enum Battery {
    Counterexample,
    Densities,
    Identities,
}

#[derive(Args)]
struct FormArgs {
    /// Coefficient a of a x^2 + b y^2.
    #[arg(long)]
    a: Option<u64>,
    /// Coefficient b of a x^2 + b y^2.
    #[arg(long)]
    b: Option<u64>,
}

impl FormArgs {
    fn params(&self, default: Option<(u64, u64)>) -> Result<BinaryFormParams> {
        let (a, b) = match (self.a, self.b, default) {
            (Some(a), Some(b), _) => (a, b),
            (None, None, Some(d)) => d,
            _ => anyhow::bail!("both --a and --b are required"),
        };
        Ok(BinaryFormParams::new(a, b)?)
    }
}

#[derive(Subcommand)]
enum CountProblem {
    /// N1(B) and its positive part.
    N1 {
        #[arg(long)]
        bmax: u64,
    },
    /// N(B) for a x^2 + b y^2.
    Binary {
        #[arg(long)]
        a: u64,
        #[arg(long)]
        b: u64,
        #[arg(long)]
        bmax: u64,
    },
    /// Points on the conic of a fiber, up to height T.
    Conic {
        /// Fiber entries, e.g. 1,1,1.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        y: Vec<i64>,
        #[arg(long)]
        t: u64,
    },
}

fn command_name(c: &Command) -> String {
    match c {
        Command::Constants { target, form } => match target {
            ConstantTarget::Three => "constants three".into(),
            ConstantTarget::Binary => format!(
                "constants binary --a {} --b {}",
                form.a.unwrap_or_default(),
                form.b.unwrap_or_default()
            ),
        },
        Command::Count { problem } => match problem {
            CountProblem::N1 { bmax } => format!("count n1 --bmax {bmax}"),
            CountProblem::Binary { a, b, bmax } => format!("count binary --a {a} --b {b} --bmax {bmax}"),
            CountProblem::Conic { y, t } => format!(
                "count conic --y {} --t {t}",
                y.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
            ),
        },
        Command::Verify { battery, .. } => format!(
            "verify {}",
            battery.to_possible_value().map(|v| v.get_name().to_string()).unwrap_or_default()
        ),
        Command::Thinset { m, b } => format!("thinset --m {m} --b {b}"),
    }
}

fn run(cli: Cli) -> Result<Report> {
    let g = &cli.global;
    if g.prime_cutoff < 4 {
        anyhow::bail!("--prime-cutoff must be at least 4");
    }
    if g.cbv_truncation == 0 {
        anyhow::bail!("--cbv-truncation must be positive");
    }
    let cfg = RunConfig {
        prime_cutoff: g.prime_cutoff,
        cbv_truncation: g.cbv_truncation,
        count_budget: g.count_budget,
        cache: CountCache::new(&g.cache_dir),
        recompute: g.recompute,
    };
    let mut report = Report::new(
        command_name(&cli.command),
        ConfigOut {
            prime_cutoff: cfg.prime_cutoff,
            cbv_truncation: cfg.cbv_truncation,
            count_budget: cfg.count_budget,
        },
    );
    match &cli.command {
        Command::Constants { target, form } => match target {
            ConstantTarget::Three => commands::constants_three(&cfg, &mut report)?,
            ConstantTarget::Binary => commands::constants_binary(&cfg, &mut report, &form.params(None)?)?,
        },
        Command::Count { problem } => match problem {
            CountProblem::N1 { bmax } => commands::count_n1_cmd(&cfg, &mut report, *bmax)?,
            CountProblem::Binary { a, b, bmax } => {
                let params = BinaryFormParams::new(*a, *b)?;
                commands::count_binary_cmd(&cfg, &mut report, &params, *bmax)?
            }
            CountProblem::Conic { y, t } => {
                if y.len() != 3 {
                    anyhow::bail!("--y takes exactly three comma-separated entries");
                }
                let y = FiberIndex::new(y[0], y[1], y[2])?;
                commands::count_conic_cmd(&cfg, &mut report, &y, *t)?
            }
        },
        Command::Verify { battery, form } => match battery {
            Battery::Counterexample => {
                commands::verify_counterexample(&cfg, &mut report, &form.params(Some((37, 109)))?)?
            }
            Battery::Densities => commands::verify_densities(&mut report)?,
            Battery::Identities => commands::verify_identities(&cfg, &mut report)?,
        },
        Command::Thinset { m, b } => commands::thinset(&cfg, &mut report, *m, *b)?,
    }
    Ok(report)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let format = cli.global.format;
    match run(cli) {
        Ok(report) => {
            let mut out = std::io::stdout().lock();
            if let Err(e) = report.render(format, &mut out).and_then(|_| Ok(out.flush()?)) {
                eprintln!("error: {e:#}");
                return ExitCode::from(2);
            }
            for c in report.checks.iter().filter(|c| !c.passed) {
                eprintln!("check failed: {}: {}", c.name, c.detail);
            }
            if report.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
