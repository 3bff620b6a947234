//! Command-line front end.
//!
//! Every run prints one document: JSON (`{command, version, config, result}`),
//! CSV with a header row, or plain `key = value` text. Exit codes: 0 success,
//! 2 inconclusive within the step budget, 64 usage error, 65 violated
//! precondition, 1 I/O failure.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::Serialize;
use serde_json::{json, Value};

use crate::diagnostics::{self, SampleSpec};
use crate::dynamics::{self, Cycle, SearchOptions};
use crate::error::Error;
use crate::fpseries::{self, FpRationalFunction, FpSeriesApprox};
use crate::isometry::{self, PhiExact};
use crate::padic::{rational_from_digits, HenselDigits, PadicApprox, Params};
use crate::rational;

/// `(p, q)` pairs of the published table of negative integer cycles.
pub const TABLE_PAIRS: [(u64, u64); 26] = [
    (2, 3),
    (3, 11),
    (3, 13),
    (5, 7),
    (5, 13),
    (7, 17),
    (7, 19),
    (11, 13),
    (11, 19),
    (11, 37),
    (13, 19),
    (13, 47),
    (17, 29),
    (17, 37),
    (17, 41),
    (17, 73),
    (19, 29),
    (19, 83),
    (23, 29),
    (23, 53),
    (29, 47),
    (37, 47),
    (41, 53),
    (47, 83),
    (71, 97),
    (73, 97),
];

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_INCONCLUSIVE: i32 = 2;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_DOMAIN: i32 = 65;

#[derive(Parser, Debug)]
#[command(
    name = "padic-collatz",
    version,
    about = "Exact experiments with generalized Collatz maps on p-adic integers"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write the report to this file instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Render fractions as decimals.
    #[arg(long, global = true)]
    decimal: bool,
    /// Worker threads for parallel commands (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Json,
    Csv,
    Plain,
}

#[derive(Args, Debug, Clone, Serialize)]
struct PairArgs {
    #[arg(long)]
    p: u64,
    #[arg(long)]
    q: u64,
}

impl PairArgs {
    fn params(&self) -> Result<Params, Error> {
        Params::new(self.p, self.q)
    }
}

#[derive(Subcommand, Debug, Clone, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Command {
    /// Follow the orbit of u until it repeats.
    Orbit {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long, allow_hyphen_values = true)]
        u: String,
        #[arg(long, default_value_t = 100_000)]
        max_steps: usize,
    },
    /// Search integer seeds for cycles, for one or more (p, q) pairs.
    Table {
        /// `table` (the 26 pairs of the published cycle table) or
        /// a comma list such as `2:3,7:19`.
        #[arg(long, default_value = "table")]
        pairs: String,
        /// Inclusive seed range `a..b`.
        #[arg(long, allow_hyphen_values = true, default_value = "-6000..-1")]
        range: String,
        #[arg(long, default_value_t = 1_000_000)]
        max_steps: usize,
        #[arg(long, default_value_t = 512)]
        escape_bits: u64,
    },
    /// Digits of φ(u).
    Phi {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long, allow_hyphen_values = true)]
        u: String,
        #[arg(long, default_value_t = 32)]
        n: usize,
        /// Return the exact eventually periodic stream.
        #[arg(long)]
        exact: bool,
        #[arg(long, default_value_t = 100_000)]
        max_steps: usize,
    },
    /// φ⁻¹ of a digit stream: exact for `--preperiod/--period`, truncated
    /// for `--digits`.
    PhiInv {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long)]
        digits: Option<String>,
        #[arg(long, default_value = "")]
        preperiod: String,
        #[arg(long)]
        period: Option<String>,
    },
    /// All u with g^k(u) = u.
    Periodic {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long)]
        k: usize,
    },
    /// Solutions of q^ℓ − p^k = ±1 with k, ℓ ≤ bound.
    Catalan {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long, default_value_t = 64)]
        bound: u32,
    },
    /// Height statistics.
    Stats {
        #[command(subcommand)]
        stat: Stat,
    },
    /// Density witnesses w_1, …, w_n for u under (2, 3).
    Density {
        #[arg(long)]
        u: i64,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1_000_000)]
        max_steps: usize,
    },
    /// ψ'_ω(n) for n = 1, …, n_max.
    Psiprime {
        #[arg(long, default_value_t = 2)]
        p: u64,
        #[arg(long, default_value_t = 3)]
        q: u64,
        #[arg(long, allow_hyphen_values = true)]
        u: String,
        #[arg(long, allow_hyphen_values = true, default_value = "1")]
        omega: String,
        #[arg(long)]
        n_max: usize,
        #[arg(long, default_value_t = 1_000_000)]
        max_steps: usize,
    },
    /// The map S and the isometry φ on F_p[[T]].
    Series {
        #[command(subcommand)]
        op: SeriesOp,
    },
}

#[derive(Subcommand, Debug, Clone, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Stat {
    /// Mean of H(g^m(u)) − H(u) over residue classes mod p^m.
    MeanDrift {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long)]
        m: u32,
        /// Enumerate every class.
        #[arg(long, conflicts_with = "samples")]
        full: bool,
        /// Number of random classes (default: full when p^m ≤ 2^22, else 100000).
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long, default_value_t = 0)]
        rng_seed: u64,
    },
    /// H(u) and the naive height.
    Height {
        #[arg(long)]
        p: u64,
        #[arg(long, allow_hyphen_values = true)]
        u: String,
    },
    /// Tranche counts and drift bounds over m tranches.
    Tranche {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long, allow_hyphen_values = true)]
        u: String,
        #[arg(long)]
        m: usize,
    },
    /// H(u_m) − H(u) against α_nz − m.
    Nz {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long, allow_hyphen_values = true)]
        u: String,
        #[arg(long)]
        m: usize,
    },
    /// Running ratios r_n/n, ψ(n)/n, H(u_n)/n and the growth estimate.
    Ratios {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long, allow_hyphen_values = true)]
        u: String,
        #[arg(long, default_value_t = 1000)]
        n: usize,
    },
    /// Whether q^{p−1} < p^p, for one pair or a list.
    Candidate {
        #[arg(long)]
        p: Option<u64>,
        #[arg(long)]
        q: Option<u64>,
        #[arg(long)]
        pairs: Option<String>,
    },
}

#[derive(Subcommand, Debug, Clone, Serialize)]
#[serde(rename_all = "kebab-case")]
enum SeriesOp {
    /// First n coefficients of φ(P/Q).
    Phi {
        #[command(flatten)]
        f: RationalFunctionArgs,
        #[arg(long, default_value_t = 32)]
        n: usize,
    },
    /// The S-orbit of P/Q with its period.
    Orbit {
        #[command(flatten)]
        f: RationalFunctionArgs,
        #[arg(long, default_value_t = 1_000_000)]
        max_steps: usize,
    },
    /// φ⁻¹ of a coefficient stream.
    Inverse {
        #[arg(long)]
        p: u32,
        #[arg(long)]
        coeffs: Option<String>,
        #[arg(long, default_value = "")]
        preperiod: String,
        #[arg(long)]
        period: Option<String>,
    },
    /// max(deg P, deg Q).
    Height {
        #[command(flatten)]
        f: RationalFunctionArgs,
    },
}

#[derive(Args, Debug, Clone, Serialize)]
struct RationalFunctionArgs {
    #[arg(long)]
    p: u32,
    /// Numerator coefficients, constant term first, e.g. `1,0,1`.
    #[arg(long, allow_hyphen_values = true)]
    num: String,
    #[arg(long, allow_hyphen_values = true, default_value = "1")]
    den: String,
}

impl RationalFunctionArgs {
    fn build(&self) -> Result<FpRationalFunction, Error> {
        FpRationalFunction::from_coeffs(self.p, &parse_list(&self.num)?, &parse_list(&self.den)?)
    }
}

/// Result of one CLI invocation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CliOutcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// What a command produces before formatting.
struct Report {
    result: Value,
    table: Option<(Vec<&'static str>, Vec<Vec<String>>)>,
    code: i32,
}

impl Report {
    fn new(result: Value) -> Self {
        Report {
            result,
            table: None,
            code: EXIT_OK,
        }
    }

    fn with_table(mut self, header: Vec<&'static str>, rows: Vec<Vec<String>>) -> Self {
        self.table = Some((header, rows));
        self
    }

    fn with_code(mut self, code: i32) -> Self {
        self.code = code;
        self
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> CliOutcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    EXIT_OK
                }
                _ => EXIT_USAGE,
            };
            let text = e.render().to_string();
            return if code == EXIT_OK {
                CliOutcome {
                    code,
                    stdout: text,
                    stderr: String::new(),
                }
            } else {
                CliOutcome {
                    code,
                    stdout: String::new(),
                    stderr: text,
                }
            };
        }
    };
    let report = match cli.threads {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| dispatch(&cli.command)),
            Err(e) => Err(Error::Precondition(e.to_string())),
        },
        None => dispatch(&cli.command),
    };
    let report = match report {
        Ok(r) => r,
        Err(e) => {
            let code = match e {
                Error::BudgetExhausted(_) => EXIT_INCONCLUSIVE,
                Error::Parse(_) => EXIT_USAGE,
                _ => EXIT_DOMAIN,
            };
            return CliOutcome {
                code,
                stdout: String::new(),
                stderr: format!("error: {e}\n"),
            };
        }
    };
    let text = render(&cli, report.result, report.table, cli.decimal);
    match &cli.output {
        Some(path) => match std::fs::write(path, &text) {
            Ok(()) => CliOutcome {
                code: report.code,
                stdout: String::new(),
                stderr: String::new(),
            },
            Err(e) => CliOutcome {
                code: EXIT_FAILURE,
                stdout: String::new(),
                stderr: format!("error: cannot write {}: {e}\n", path.display()),
            },
        },
        None => CliOutcome {
            code: report.code,
            stdout: text,
            stderr: String::new(),
        },
    }
}

fn command_name(command: &Command) -> String {
    match command {
        Command::Orbit { .. } => "orbit".into(),
        Command::Table { .. } => "table".into(),
        Command::Phi { .. } => "phi".into(),
        Command::PhiInv { .. } => "phi-inv".into(),
        Command::Periodic { .. } => "periodic".into(),
        Command::Catalan { .. } => "catalan".into(),
        Command::Stats { stat } => format!(
            "stats {}",
            match stat {
                Stat::MeanDrift { .. } => "mean-drift",
                Stat::Height { .. } => "height",
                Stat::Tranche { .. } => "tranche",
                Stat::Nz { .. } => "nz",
                Stat::Ratios { .. } => "ratios",
                Stat::Candidate { .. } => "candidate",
            }
        ),
        Command::Density { .. } => "density".into(),
        Command::Psiprime { .. } => "psiprime".into(),
        Command::Series { op } => format!(
            "series {}",
            match op {
                SeriesOp::Phi { .. } => "phi",
                SeriesOp::Orbit { .. } => "orbit",
                SeriesOp::Inverse { .. } => "inverse",
                SeriesOp::Height { .. } => "height",
            }
        ),
    }
}

fn render(
    cli: &Cli,
    mut result: Value,
    table: Option<(Vec<&'static str>, Vec<Vec<String>>)>,
    decimal: bool,
) -> String {
    if decimal {
        decimalize(&mut result);
    }
    match cli.format {
        Format::Json => {
            let config = json!({
                "args": cli.command,
                "format": cli.format,
                "decimal": cli.decimal,
                "threads": cli.threads,
            });
            let doc = json!({
                "command": command_name(&cli.command),
                "version": crate::VERSION,
                "config": config,
                "result": result,
            });
            let mut s = serde_json::to_string_pretty(&doc).expect("JSON values serialize");
            s.push('\n');
            s
        }
        Format::Csv => {
            let (header, rows) = table.unwrap_or_else(|| flatten(&result));
            let mut out = String::new();
            writeln!(out, "{}", header.join(",")).unwrap();
            for row in rows {
                let cells: Vec<String> = row
                    .into_iter()
                    .map(|c| if decimal { decimal_cell(&c) } else { c })
                    .map(|c| csv_escape(&c))
                    .collect();
                writeln!(out, "{}", cells.join(",")).unwrap();
            }
            out
        }
        Format::Plain => {
            let mut out = String::new();
            writeln!(out, "{} (version {})", command_name(&cli.command), crate::VERSION).unwrap();
            match &result {
                Value::Object(map) => {
                    for (k, v) in map {
                        writeln!(out, "{k} = {}", plain_value(v)).unwrap();
                    }
                }
                Value::Array(items) => {
                    for v in items {
                        writeln!(out, "{}", plain_value(v)).unwrap();
                    }
                }
                other => writeln!(out, "{}", plain_value(other)).unwrap(),
            }
            out
        }
    }
}

fn plain_value(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Generic two-column CSV for reports without a natural table.
fn flatten(result: &Value) -> (Vec<&'static str>, Vec<Vec<String>>) {
    let rows = match result {
        Value::Object(map) => map
            .iter()
            .map(|(k, v)| vec![k.clone(), plain_value(v)])
            .collect(),
        other => vec![vec!["result".into(), plain_value(other)]],
    };
    (vec!["field", "value"], rows)
}

fn csv_escape(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn is_fraction(s: &str) -> bool {
    match s.split_once('/') {
        Some((a, b)) => {
            let a = a.strip_prefix('-').unwrap_or(a);
            !a.is_empty()
                && !b.is_empty()
                && a.bytes().all(|c| c.is_ascii_digit())
                && b.bytes().all(|c| c.is_ascii_digit())
        }
        None => false,
    }
}

/// `a/b` to 20 significant fractional digits.
fn to_decimal(u: &BigRational) -> String {
    let digits = 20;
    let neg = u.is_negative();
    let (int, mut rem) = u.numer().abs().div_rem(u.denom());
    let mut s = String::new();
    if neg {
        s.push('-');
    }
    s.push_str(&int.to_string());
    if !rem.is_zero() {
        s.push('.');
        for _ in 0..digits {
            rem *= 10;
            let (d, r) = rem.div_rem(u.denom());
            s.push_str(&d.to_string());
            rem = r;
            if rem.is_zero() {
                break;
            }
        }
    }
    s
}

fn decimal_cell(cell: &str) -> String {
    cell.split(';')
        .map(|part| {
            if is_fraction(part) {
                rational::parse(part).map(|u| to_decimal(&u)).unwrap_or_else(|_| part.into())
            } else {
                part.to_string()
            }
        })
        .collect::<Vec<_>>()
        .join(";")
}

fn decimalize(v: &mut Value) {
    match v {
        Value::String(s) if is_fraction(s) => {
            if let Ok(u) = rational::parse(s) {
                *s = to_decimal(&u);
            }
        }
        Value::Array(items) => items.iter_mut().for_each(decimalize),
        Value::Object(map) => map.values_mut().for_each(decimalize),
        _ => {}
    }
}

fn parse_list(s: &str) -> Result<Vec<i64>, Error> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|t| t.trim().parse().map_err(|_| Error::Parse(t.to_string())))
        .collect()
}

fn parse_digits(s: &str) -> Result<Vec<u32>, Error> {
    parse_list(s)?
        .into_iter()
        .map(|d| u32::try_from(d).map_err(|_| Error::Parse(d.to_string())))
        .collect()
}

fn parse_range(s: &str) -> Result<(i64, i64), Error> {
    let bad = || Error::Parse(s.to_string());
    let (a, b) = s.split_once("..").ok_or_else(bad)?;
    let a = a.trim().parse().map_err(|_| bad())?;
    let b = b.trim().parse().map_err(|_| bad())?;
    Ok((a, b))
}

fn parse_pairs(s: &str) -> Result<Vec<(u64, u64)>, Error> {
    if matches!(s, "table" | "paper") {
        return Ok(TABLE_PAIRS.to_vec());
    }
    s.split(',')
        .map(|item| {
            let bad = || Error::Parse(item.to_string());
            let (p, q) = item.split_once(':').ok_or_else(bad)?;
            Ok((p.trim().parse().map_err(|_| bad())?, q.trim().parse().map_err(|_| bad())?))
        })
        .collect()
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("reports serialize")
}

fn dispatch(command: &Command) -> Result<Report, Error> {
    match command {
        Command::Orbit { pair, u, max_steps } => cmd_orbit(&pair.params()?, u, *max_steps),
        Command::Table {
            pairs,
            range,
            max_steps,
            escape_bits,
        } => cmd_table(pairs, range, *max_steps, *escape_bits),
        Command::Phi {
            pair,
            u,
            n,
            exact,
            max_steps,
        } => cmd_phi(&pair.params()?, u, *n, *exact, *max_steps),
        Command::PhiInv {
            pair,
            digits,
            preperiod,
            period,
        } => cmd_phi_inv(&pair.params()?, digits.as_deref(), preperiod, period.as_deref()),
        Command::Periodic { pair, k } => cmd_periodic(&pair.params()?, *k),
        Command::Catalan { pair, bound } => {
            let s = dynamics::catalan_search(pair.p, pair.q, *bound, *bound);
            let rows = s
                .minus_one
                .iter()
                .map(|&(k, l)| vec![k.to_string(), l.to_string(), "-1".into()])
                .chain(s.plus_one.iter().map(|&(k, l)| vec![k.to_string(), l.to_string(), "1".into()]))
                .collect();
            Ok(Report::new(to_value(&s)).with_table(vec!["k", "ell", "difference"], rows))
        }
        Command::Stats { stat } => cmd_stats(stat),
        Command::Density { u, n, max_steps } => cmd_density(*u, *n, *max_steps),
        Command::Psiprime {
            p,
            q,
            u,
            omega,
            n_max,
            max_steps,
        } => {
            let params = Params::new(*p, *q)?;
            let s = isometry::psi_prime_omega(
                &rational::parse(u)?,
                &rational::parse(omega)?,
                &params,
                *n_max,
                *max_steps,
            )?;
            let rows = s
                .entries
                .iter()
                .map(|e| vec![e.n.to_string(), e.k.to_string(), e.ratio.to_string()])
                .collect();
            Ok(Report::new(to_value(&s)).with_table(vec!["n", "psi_prime", "ratio"], rows))
        }
        Command::Series { op } => cmd_series(op),
    }
}

fn cmd_orbit(params: &Params, u: &str, max_steps: usize) -> Result<Report, Error> {
    let rec = dynamics::orbit(&rational::parse(u)?, params, max_steps)?;
    let members = rec
        .cycle_states()
        .map(|s| Cycle::new(params, s.to_vec()))
        .transpose()?;
    let rows = rec
        .states
        .iter()
        .zip(&rec.digits)
        .zip(&rec.r)
        .enumerate()
        .map(|(i, ((s, d), r))| vec![i.to_string(), s.to_string(), d.to_string(), r.to_string()])
        .collect();
    let code = if rec.truncated { EXIT_INCONCLUSIVE } else { EXIT_OK };
    let mut result = to_value(&rec);
    result["canonical_cycle"] = members.map_or(Value::Null, |c| to_value(&c));
    Ok(Report::new(result)
        .with_table(vec!["n", "state", "digit", "r"], rows)
        .with_code(code))
}

fn cmd_table(pairs: &str, range: &str, max_steps: usize, escape_bits: u64) -> Result<Report, Error> {
    let pairs = parse_pairs(pairs)?;
    let (lo, hi) = parse_range(range)?;
    let options = SearchOptions {
        max_steps,
        escape_bits,
        ..SearchOptions::default()
    };
    let mut rows = Vec::new();
    let mut reports = Vec::new();
    for (p, q) in pairs {
        let params = Params::new(p, q)?;
        let report = dynamics::integer_cycle_search(&params, lo, hi, &options)?;
        for found in &report.cycles {
            rows.push(vec![
                p.to_string(),
                q.to_string(),
                found.cycle.representative().to_string(),
                found.cycle.joined(),
            ]);
        }
        reports.push(json!({
            "p": p,
            "q": q,
            "cycles": report.cycles.iter().map(|c| json!({
                "representative": c.cycle.representative().to_string(),
                "length": c.cycle.len(),
                "members": c.cycle.members().iter().map(|m| m.to_string()).collect::<Vec<_>>(),
                "seed_count": c.seed_count,
                "first_seed": c.first_seed,
            })).collect::<Vec<_>>(),
            "truncated_seeds": report.truncated_seeds.len(),
            "escaped_seeds": report.escaped_seeds.len(),
        }));
    }
    let result = json!({ "u_min": lo, "u_max": hi, "max_steps": max_steps, "escape_bits": escape_bits, "pairs": reports });
    Ok(Report::new(result).with_table(vec!["p", "q", "representative", "cycle"], rows))
}

fn cmd_phi(params: &Params, u: &str, n: usize, exact: bool, max_steps: usize) -> Result<Report, Error> {
    let u = rational::parse(u)?;
    if exact {
        return Ok(match isometry::phi_exact(&u, params, max_steps)? {
            PhiExact::Periodic { digits } => {
                let value = rational_from_digits(&digits);
                let result = json!({
                    "verdict": "periodic",
                    "digits": to_value(&digits),
                    "value": value.to_string(),
                });
                let rows = vec![vec![
                    join_digits(digits.preperiod()),
                    join_digits(digits.period()),
                    value.to_string(),
                ]];
                Report::new(result).with_table(vec!["preperiod", "period", "value"], rows)
            }
            undetermined => Report::new(to_value(&undetermined)).with_code(EXIT_INCONCLUSIVE),
        });
    }
    let approx = isometry::phi_qp(&u, params, n)?;
    let rows = approx
        .digits
        .iter()
        .enumerate()
        .map(|(i, d)| vec![i.to_string(), d.to_string()])
        .collect();
    Ok(Report::new(to_value(&approx)).with_table(vec!["index", "digit"], rows))
}

fn join_digits(d: &[u32]) -> String {
    d.iter().map(u32::to_string).collect::<Vec<_>>().join(";")
}

fn cmd_phi_inv(
    params: &Params,
    digits: Option<&str>,
    preperiod: &str,
    period: Option<&str>,
) -> Result<Report, Error> {
    match (digits, period) {
        (Some(d), None) => {
            let v = PadicApprox::new(params.p(), 0, parse_digits(d)?)?;
            let out = isometry::phi_inverse_approx(&v, params)?;
            let value = out.to_rational();
            let result = json!({ "digits": out.digits, "value_mod_p_n": value.to_string() });
            Ok(Report::new(result))
        }
        (None, Some(period)) => {
            let h = HenselDigits::new(params.p(), parse_digits(preperiod)?, parse_digits(period)?)?;
            let value = isometry::phi_inverse_exact(&h, params)?;
            let result = json!({ "digits": to_value(&h), "value": value.to_string() });
            Ok(Report::new(result).with_table(vec!["value"], vec![vec![value.to_string()]]))
        }
        _ => Err(Error::Parse(
            "give either --digits or --period (with optional --preperiod)".into(),
        )),
    }
}

fn cmd_periodic(params: &Params, k: usize) -> Result<Report, Error> {
    let values = dynamics::enumerate_periodic(k, params)?;
    let strings: Vec<String> = values.iter().map(|v| v.to_string()).collect();
    let rows = strings.iter().map(|s| vec![s.clone()]).collect();
    let result = json!({ "k": k, "count": values.len(), "values": strings });
    Ok(Report::new(result).with_table(vec!["value"], rows))
}

fn cmd_stats(stat: &Stat) -> Result<Report, Error> {
    match stat {
        Stat::MeanDrift {
            pair,
            m,
            full,
            samples,
            rng_seed,
        } => {
            let params = pair.params()?;
            let spec = match (full, samples) {
                (true, _) => SampleSpec::Full {
                    rng_seed: *rng_seed,
                },
                (false, Some(count)) => SampleSpec::Random {
                    count: *count,
                    rng_seed: *rng_seed,
                },
                (false, None) => SampleSpec::Auto {
                    count: 100_000,
                    rng_seed: *rng_seed,
                },
            };
            let rep = diagnostics::mean_drift(&params, *m, spec)?;
            let row = vec![
                rep.m.to_string(),
                rep.empirical_mean.to_string(),
                rep.lower_bound.to_string(),
                rep.upper_bound.to_string(),
                rep.sample_size.to_string(),
                rep.rng_seed.to_string(),
            ];
            Ok(Report::new(to_value(&rep)).with_table(
                vec!["m", "empirical", "lower", "upper", "samples", "rng_seed"],
                vec![row],
            ))
        }
        Stat::Height { p, u } => {
            let u = rational::parse(u)?;
            let h = diagnostics::height(&u, *p)?;
            let naive = diagnostics::height_naive(&u);
            Ok(Report::new(json!({
                "u": u.to_string(),
                "p": p,
                "height": h,
                "height_naive": naive.to_string(),
            })))
        }
        Stat::Tranche { pair, u, m } => {
            let s = diagnostics::tranche_stats(&rational::parse(u)?, &pair.params()?, *m)?;
            Ok(Report::new(to_value(&s)))
        }
        Stat::Nz { pair, u, m } => {
            let s = diagnostics::nz_drift_check(&rational::parse(u)?, &pair.params()?, *m)?;
            Ok(Report::new(to_value(&s)))
        }
        Stat::Ratios { pair, u, n } => {
            let rep = diagnostics::asymptotic_ratios(&rational::parse(u)?, &pair.params()?, *n)?;
            let opt = |x: Option<f64>| x.map_or(String::new(), |x| x.to_string());
            let rows = rep
                .rows
                .iter()
                .map(|r| {
                    vec![
                        r.n.to_string(),
                        r.r_over_n.to_string(),
                        opt(r.psi_over_n),
                        opt(r.height_over_n),
                        opt(r.growth),
                    ]
                })
                .collect();
            Ok(Report::new(to_value(&rep)).with_table(
                vec!["n", "r_over_n", "psi_over_n", "height_over_n", "growth"],
                rows,
            ))
        }
        Stat::Candidate { p, q, pairs } => {
            let list = match (p, q, pairs) {
                (Some(p), Some(q), None) => vec![(*p, *q)],
                (None, None, Some(s)) => parse_pairs(s)?,
                _ => return Err(Error::Parse("give --p and --q, or --pairs".into())),
            };
            let mut rows = Vec::new();
            let mut items = Vec::new();
            for (p, q) in list {
                let params = Params::new(p, q)?;
                let c = diagnostics::candidate_test(&params);
                let r = match diagnostics::tranche_r(&params) {
                    diagnostics::TrancheLength::Finite(r) => r.to_string(),
                    diagnostics::TrancheLength::Unbounded => "unbounded".into(),
                };
                rows.push(vec![p.to_string(), q.to_string(), c.to_string(), r.clone()]);
                items.push(json!({ "p": p, "q": q, "candidate": c, "tranche_r": r }));
            }
            Ok(Report::new(Value::Array(items)).with_table(vec!["p", "q", "candidate", "tranche_r"], rows))
        }
    }
}

fn cmd_density(u: i64, n: usize, max_steps: usize) -> Result<Report, Error> {
    let mut witnesses = Vec::with_capacity(n);
    let mut rows = Vec::with_capacity(n);
    for i in 1..=n {
        let w = isometry::density_approximant(u, i, max_steps)?;
        let opt = |x: Option<u64>| x.map_or(String::new(), |x| x.to_string());
        rows.push(vec![
            i.to_string(),
            opt(w.psi_prime_n),
            w.w_n.to_string(),
            opt(w.achieved_distance_exponent),
            opt(w.psi_n),
            w.w_orbit.is_periodic().to_string(),
        ]);
        witnesses.push(to_value(&w));
    }
    Ok(Report::new(Value::Array(witnesses)).with_table(
        vec!["n", "psi_prime", "w", "distance_exponent", "psi_n", "w_periodic"],
        rows,
    ))
}

fn series_row(s: &FpSeriesApprox) -> Vec<Vec<String>> {
    s.coeffs
        .iter()
        .enumerate()
        .map(|(i, c)| vec![i.to_string(), c.to_string()])
        .collect()
}

fn rf_value(f: &FpRationalFunction) -> Value {
    json!({
        "p": f.p(),
        "numerator": f.numerator().coeffs(),
        "denominator": f.denominator().coeffs(),
        "display": f.to_string(),
    })
}

fn cmd_series(op: &SeriesOp) -> Result<Report, Error> {
    match op {
        SeriesOp::Phi { f, n } => {
            let f = f.build()?;
            let s = fpseries::phi_series(&f, *n);
            let result = json!({ "input": rf_value(&f), "coeffs": s.coeffs });
            Ok(Report::new(result).with_table(vec!["index", "coeff"], series_row(&s)))
        }
        SeriesOp::Orbit { f, max_steps } => {
            let f = f.build()?;
            let orbit = fpseries::smap_orbit(&f, *max_steps);
            let rows = orbit
                .states
                .iter()
                .enumerate()
                .map(|(i, s)| vec![i.to_string(), s.to_string(), fpseries::series_height(s).to_string()])
                .collect();
            let result = json!({
                "states": orbit.states.iter().map(rf_value).collect::<Vec<_>>(),
                "cycle": orbit.cycle.map(|(pre, per)| json!({ "preperiod": pre, "period": per })),
            });
            let code = if orbit.cycle.is_some() { EXIT_OK } else { EXIT_INCONCLUSIVE };
            Ok(Report::new(result)
                .with_table(vec!["n", "state", "height"], rows)
                .with_code(code))
        }
        SeriesOp::Inverse {
            p,
            coeffs,
            preperiod,
            period,
        } => match (coeffs, period) {
            (Some(c), None) => {
                let g = FpSeriesApprox::new(*p, parse_digits(c)?)?;
                let s = fpseries::phi_series_inverse(&g);
                let result = json!({ "coeffs": s.coeffs });
                Ok(Report::new(result).with_table(vec!["index", "coeff"], series_row(&s)))
            }
            (None, Some(period)) => {
                let h = HenselDigits::new(u64::from(*p), parse_digits(preperiod)?, parse_digits(period)?)?;
                let f = fpseries::phi_series_inverse_exact(&h)?;
                Ok(Report::new(json!({ "value": rf_value(&f) })))
            }
            _ => Err(Error::Parse(
                "give either --coeffs or --period (with optional --preperiod)".into(),
            )),
        },
        SeriesOp::Height { f } => {
            let f = f.build()?;
            Ok(Report::new(json!({ "input": rf_value(&f), "height": fpseries::series_height(&f) })))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_ok(args: &[&str]) -> CliOutcome {
        let mut full = vec!["padic-collatz"];
        full.extend_from_slice(args);
        run(full)
    }

    #[test]
    fn parses_lists_and_ranges() {
        assert_eq!(parse_range("-3000..-1").unwrap(), (-3000, -1));
        assert!(parse_range("5").is_err());
        assert_eq!(parse_pairs("2:3,7:19").unwrap(), vec![(2, 3), (7, 19)]);
        assert_eq!(parse_pairs("paper").unwrap().len(), 26);
        assert_eq!(parse_list("1, -2,3").unwrap(), vec![1, -2, 3]);
        assert!(parse_list("1,x").is_err());
    }

    #[test]
    fn decimals() {
        assert_eq!(to_decimal(&rational::parse("-1/3").unwrap()), "-0.33333333333333333333");
        assert_eq!(to_decimal(&rational::parse("7/4").unwrap()), "1.75");
        assert_eq!(decimal_cell("-5;1/2"), "-5;0.5");
        assert!(is_fraction("-12/7") && !is_fraction("2:3") && !is_fraction("/3"));
    }

    #[test]
    fn exit_codes() {
        assert_eq!(run_ok(&["orbit", "--p", "2", "--q", "3", "--u", "27"]).code, 0);
        assert_eq!(
            run_ok(&["orbit", "--p", "2", "--q", "3", "--u", "27", "--max-steps", "5"]).code,
            2
        );
        assert_eq!(run_ok(&["orbit", "--p", "4", "--q", "3", "--u", "1"]).code, 65);
        assert_eq!(run_ok(&["orbit", "--p", "2"]).code, 64);
        assert_eq!(run_ok(&["frobnicate"]).code, 64);
        assert_eq!(run_ok(&["--version"]).code, 0);
    }
}
