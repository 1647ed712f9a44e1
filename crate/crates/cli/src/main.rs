use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use sharp_poincare::geometry::{SpaceParams, MAX_DIMENSION};
use sharp_poincare::rearrangement::{hardy_check, hardy_power_family};
use sharp_poincare::selfcheck::{run_selfcheck, SelfCheckOptions};
use sharp_poincare::variational::{check_inequality, sharpness_sweep, Candidate, PoincareParams, TestFunction};
use sharp_poincare::Error;

mod table;

use table::{Cell, Format, Table};

#[derive(Debug, Parser)]
#[command(name = "sharp-poincare", version, about = "Sharp Poincaré constants on hyperbolic space")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Output format
    #[arg(long, value_enum, default_value_t = FormatArg::Csv, global = true)]
    format: FormatArg,

    /// Write to this file instead of stdout
    #[arg(long, global = true)]
    output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
    Table,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print C(n,m,p) and the conjugate exponent
    Constant(SpaceArgs),
    /// Check the inequality on seeded random test functions (m <= 2)
    VerifyInequality {
        #[command(flatten)]
        space: SpaceArgs,
        /// Number of test functions
        #[arg(long, default_value_t = 50)]
        count: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Rayleigh quotients of the extremizing family along ln(R/s0)
    SharpnessSweep {
        #[command(flatten)]
        space: SpaceArgs,
        /// Threshold ε; defaults to 0.01 for m = 1 and 0.05 otherwise
        #[arg(long)]
        eps: Option<f64>,
        #[command(flatten)]
        range: RangeArgs,
    },
    /// Hardy inequality on truncated power laws
    HardyDemo {
        /// Exponents (default 1.5,2,3)
        #[arg(long, value_delimiter = ',')]
        p: Vec<f64>,
        /// Values of ln(K) for the truncation [0, K]
        #[arg(long, value_delimiter = ',', default_value = "10,50,100,200")]
        truncations: Vec<f64>,
    },
    /// Run the invariant suites
    Selfcheck {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Scale ω_n by this factor (fault injection)
        #[arg(long, hide = true)]
        corrupt_omega: Option<f64>,
    },
}

#[derive(Debug, Args)]
struct SpaceArgs {
    /// Dimension of the hyperbolic space
    #[arg(long, default_value_t = 3)]
    n: u32,
    /// Derivative order
    #[arg(long, default_value_t = 1)]
    m: u32,
    /// Integrability exponent, p > 1
    #[arg(long, default_value_t = 2.0)]
    p: f64,
}

#[derive(Debug, Args)]
struct RangeArgs {
    /// Explicit list of ln(R/s0)
    #[arg(long, value_delimiter = ',', conflicts_with = "log_range")]
    log_ratios: Vec<f64>,
    /// LO:HI:COUNT, geometrically spaced values of ln(R/s0)
    #[arg(long)]
    log_range: Option<String>,
}

enum Failure {
    Usage(String),
    Other(anyhow::Error),
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Other(e.into())
    }
}

fn classify(e: Error) -> Failure {
    match e {
        Error::Domain { .. } | Error::InfeasibleGrid { .. } | Error::NoThreshold { .. } => Failure::Usage(e.to_string()),
        other => Failure::Other(other.into()),
    }
}

impl SpaceArgs {
    fn validate(&self) -> Result<PoincareParams, Failure> {
        if self.n > MAX_DIMENSION {
            return Err(Failure::Usage(format!("--n must be at most {MAX_DIMENSION}")));
        }
        PoincareParams::new(self.n, self.m, self.p).map_err(classify)
    }

    fn config(&self) -> Map<String, Value> {
        let mut m = Map::new();
        m.insert("n".into(), json!(self.n));
        m.insert("m".into(), json!(self.m));
        m.insert("p".into(), json!(self.p));
        m
    }
}

impl RangeArgs {
    fn values(&self) -> Result<Vec<f64>, Failure> {
        let vals = match &self.log_range {
            Some(spec) => parse_log_range(spec)?,
            None => self.log_ratios.clone(),
        };
        if vals.is_empty() {
            return Err(Failure::Usage("empty ln(R/s0) specification".into()));
        }
        if vals.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Failure::Usage("ln(R/s0) values must be finite and >= 0".into()));
        }
        Ok(vals)
    }
}

fn parse_log_range(spec: &str) -> Result<Vec<f64>, Failure> {
    let bad = || Failure::Usage(format!("--log-range expects LO:HI:COUNT, got {spec:?}"));
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(bad());
    }
    let lo: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let hi: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let count: usize = parts[2].trim().parse().map_err(|_| bad())?;
    if count == 0 {
        return Ok(Vec::new());
    }
    if !(lo > 0.0 && hi >= lo && hi.is_finite()) || (count > 1 && hi == lo) {
        return Err(bad());
    }
    if count == 1 {
        return Ok(vec![lo]);
    }
    let ratio = (hi / lo).ln() / (count - 1) as f64;
    Ok((0..count)
        .map(|k| if k + 1 == count { hi } else { lo * (ratio * k as f64).exp() })
        .collect())
}

struct Outcome {
    table: Table,
    config: Map<String, Value>,
    ok: bool,
    notes: Vec<String>,
}

fn cmd_constant(args: &SpaceArgs) -> Result<Outcome, Failure> {
    let pp = args.validate()?;
    let mut table = Table::new(&["n", "m", "p", "p_conj", "branch", "constant"]);
    table.push(vec![
        Cell::Int(pp.n() as i64),
        Cell::Int(pp.m() as i64),
        Cell::Num(pp.p()),
        Cell::Num(pp.p_conj()),
        Cell::Text(if pp.is_even() { "even" } else { "odd" }.into()),
        Cell::Num(pp.constant()),
    ]);
    Ok(Outcome {
        table,
        config: args.config(),
        ok: true,
        notes: Vec::new(),
    })
}

fn cmd_verify(args: &SpaceArgs, count: usize, seed: u64) -> Result<Outcome, Failure> {
    args.validate()?;
    if args.m > 2 {
        return Err(Failure::Usage("verify-inequality supports m <= 2".into()));
    }
    let sp = SpaceParams::new(args.n).map_err(classify)?;
    let mut table = Table::new(&["function_id", "lhs", "rhs", "margin", "holds"]);
    let mut ok = true;
    let mut notes = Vec::new();
    for (id, u) in TestFunction::family(seed, count, args.n, args.p).iter().enumerate() {
        let row = match check_inequality(Candidate::Test(u), args.m, args.p, &sp) {
            Ok(r) => {
                for c in r.corollary.iter().filter(|c| !c.holds) {
                    notes.push(format!("function {id}: order-{} bound {:e} > {:e}", c.l, c.lhs, c.rhs));
                }
                (r.lhs, r.rhs, r.margin, r.holds)
            }
            Err(e) => {
                notes.push(format!("function {id}: {e}"));
                (f64::NAN, f64::NAN, f64::NAN, false)
            }
        };
        ok &= row.3;
        table.push(vec![
            Cell::Int(id as i64),
            Cell::Num(row.0),
            Cell::Num(row.1),
            Cell::Num(row.2),
            Cell::Bool(row.3),
        ]);
    }
    let mut config = args.config();
    config.insert("count".into(), json!(count));
    config.insert("seed".into(), json!(seed));
    Ok(Outcome {
        table,
        config,
        ok,
        notes,
    })
}

fn cmd_sweep(args: &SpaceArgs, eps: Option<f64>, range: &RangeArgs) -> Result<Outcome, Failure> {
    args.validate()?;
    let eps = eps.unwrap_or(if args.m == 1 { 0.01 } else { 0.05 });
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Failure::Usage("--eps must be positive".into()));
    }
    let ratios = range.values()?;
    let sweep = sharpness_sweep(args.n, args.m, args.p, eps, &ratios).map_err(classify)?;
    let mut table = Table::new(&["R", "ln_R_over_s0", "quotient", "quotient_over_C"]);
    let mut ok = true;
    for row in &sweep.rows {
        ok &= row.quotient_over_c < 1.0;
        table.push(vec![
            Cell::Num(row.r),
            Cell::Num(row.log_ratio),
            Cell::Num(row.quotient),
            Cell::Num(row.quotient_over_c),
        ]);
    }
    let limit = sweep.extrapolated.unwrap_or(f64::NAN);
    table.push(vec![
        Cell::Text("extrapolated".into()),
        Cell::Num(f64::INFINITY),
        Cell::Num(limit * sweep.constant),
        Cell::Num(limit),
    ]);
    let mut config = args.config();
    config.insert("eps".into(), json!(eps));
    config.insert("log_ratios".into(), json!(ratios));
    config.insert("s0".into(), json!(sweep.s0));
    Ok(Outcome {
        table,
        config,
        ok,
        notes: Vec::new(),
    })
}

fn cmd_hardy(ps: &[f64], truncations: &[f64]) -> Result<Outcome, Failure> {
    let ps = if ps.is_empty() { vec![1.5, 2.0, 3.0] } else { ps.to_vec() };
    if truncations.is_empty() {
        return Err(Failure::Usage("empty truncation list".into()));
    }
    let mut table = Table::new(&["p", "log_truncation", "lhs", "rhs", "ratio", "holds"]);
    let mut ok = true;
    for &p in &ps {
        for &l in truncations {
            let r = hardy_power_family(p, l)
                .and_then(|v| hardy_check(&v, p))
                .map_err(classify)?;
            ok &= r.holds;
            table.push(vec![
                Cell::Num(p),
                Cell::Num(l),
                Cell::Num(r.lhs),
                Cell::Num(r.rhs),
                Cell::Num(r.ratio()),
                Cell::Bool(r.holds),
            ]);
        }
    }
    let mut config = Map::new();
    config.insert("p".into(), json!(ps));
    config.insert("truncations".into(), json!(truncations));
    Ok(Outcome {
        table,
        config,
        ok,
        notes: Vec::new(),
    })
}

fn cmd_selfcheck(seed: u64, corrupt_omega: Option<f64>) -> Result<Outcome, Failure> {
    let scale = corrupt_omega.unwrap_or(1.0);
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Failure::Usage("--corrupt-omega must be positive".into()));
    }
    let opts = SelfCheckOptions {
        seed,
        omega_scale: scale,
        ..Default::default()
    };
    let report = run_selfcheck(&opts);
    let mut table = Table::new(&["suite", "passed", "worst", "tolerance"]);
    let mut notes = vec![format!("tolerance version {}", report.tolerance_version)];
    for s in &report.suites {
        table.push(vec![
            Cell::Text(s.name.into()),
            Cell::Bool(s.passed),
            Cell::Num(s.worst),
            Cell::Num(s.tolerance),
        ]);
        let status = if s.passed { "PASS" } else { "FAIL" };
        notes.push(format!("{status} {}: {}", s.name, s.detail));
    }
    let mut config = Map::new();
    config.insert("seed".into(), json!(seed));
    config.insert("tolerance_version".into(), json!(report.tolerance_version));
    Ok(Outcome {
        table,
        config,
        ok: report.all_passed(),
        notes,
    })
}

fn run(cli: &Cli) -> Result<bool, Failure> {
    let (name, outcome) = match &cli.command {
        Command::Constant(a) => ("constant", cmd_constant(a)?),
        Command::VerifyInequality { space, count, seed } => ("verify-inequality", cmd_verify(space, *count, *seed)?),
        Command::SharpnessSweep { space, eps, range } => ("sharpness-sweep", cmd_sweep(space, *eps, range)?),
        Command::HardyDemo { p, truncations } => ("hardy-demo", cmd_hardy(p, truncations)?),
        Command::Selfcheck { seed, corrupt_omega } => ("selfcheck", cmd_selfcheck(*seed, *corrupt_omega)?),
    };
    let format = match cli.format {
        FormatArg::Csv => Format::Csv,
        FormatArg::Json => Format::Json,
        FormatArg::Table => Format::Table,
    };
    let mut config = outcome.config;
    config.insert("command".into(), json!(name));
    let text = outcome.table.render(format, &config);
    match &cli.output {
        Some(path) => File::create(path)?.write_all(text.as_bytes())?,
        None => io::stdout().lock().write_all(text.as_bytes())?,
    }
    for note in &outcome.notes {
        eprintln!("{note}");
    }
    Ok(outcome.ok)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Other(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
