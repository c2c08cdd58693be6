//! `hlav` — prime pair correlation counts, Hardy-Littlewood singular series
//! constants, and verification reports for their averaged asymptotics.
//!
//! Exit codes: 0 success, 1 a report failed its pass criterion, 2 usage or
//! precondition error, 3 I/O error.

use std::fmt::Display;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use hlav::averages::{
    conjecture2_scan, lemma1_margin, verify_ktuple_weighted, verify_long_average, verify_stride,
    verify_unweighted_short, verify_weighted_short, verify_window_average, ERule, ShiftSet,
    Thresholds, VerificationReport,
};
use hlav::correlation::{pair_counts, tuple_count, TupleSpec};
use hlav::error::Error;
use hlav::sieve::{build_sieve, PrimeBitmap, SieveConfig};
use hlav::singular::{
    gallagher_average, ktuple_gallagher_average, pair_constant, pair_constant_series,
    tuple_constant, weighted_singular_average,
};
use hlav::store::{bitmap_cache_path, load_bitmap, resolve_cache_dir, save_bitmap};

const EXIT_OK: i32 = 0;
const EXIT_FAILED_CHECK: i32 = 1;
const EXIT_USAGE: i32 = 2;
const EXIT_IO: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(
    name = "hlav",
    version,
    about = "Prime pair counting, singular series constants, and averaged-asymptotics reports"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Output format for stdout.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,

    /// Cache directory (overrides HLAV_CACHE_DIR and the platform default).
    #[arg(long, global = true, value_name = "DIR")]
    cache_dir: Option<PathBuf>,

    /// Worker thread count (default: all cores). Never affects output bytes.
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,

    /// Pass band LO,HI for ratio-based (asymptotic) checks.
    #[arg(long, global = true, value_name = "LO,HI", value_parser = parse_band)]
    ratio_band: Option<(f64, f64)>,

    /// Margin floor for lower-bound checks (default 0).
    #[arg(long, global = true, value_name = "F")]
    require_margin: Option<f64>,

    /// Bitmap limit override. By default each operation sieves exactly the
    /// limit its preconditions require. `sieve` requires this flag.
    #[arg(long, global = true, value_name = "N", value_parser = parse_human_u64)]
    limit: Option<u64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build a prime bitmap (to --limit) and store it.
    Sieve {
        /// Destination file; defaults to the cache location keyed by limit.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Pair counts over a window, with singular-series predictions.
    Paircount {
        #[arg(long, value_parser = parse_human_u64)]
        x: u64,
        /// Largest shift 2k to count (even).
        #[arg(long, value_parser = parse_human_u64)]
        max_shift: u64,
        /// Window lower end: counts primes in (lo, x].
        #[arg(long, default_value_t = 0, value_parser = parse_human_u64)]
        lo: u64,
        /// Euler product truncation for the prediction column.
        #[arg(long, default_value_t = 1_000_000, value_parser = parse_human_u64)]
        prime_bound: u64,
    },
    /// Count primes p <= x with p + s prime for every listed shift.
    Tuplecount {
        #[arg(long, value_parser = parse_human_u64)]
        x: u64,
        /// Even shifts, e.g. 2,6.
        #[arg(long, value_delimiter = ',')]
        shifts: Vec<u64>,
    },
    /// Singular series constants C_{2k} or C_{2h1,...,2hk}.
    Constants {
        /// Even shift 2k for the pair constant C_{2k}.
        #[arg(long, conflicts_with = "tuple")]
        shift: Option<u64>,
        /// Even shifts of a tuple constant, e.g. 2,6.
        #[arg(long, value_delimiter = ',')]
        tuple: Option<Vec<u64>>,
        #[arg(long, default_value_t = 1_000_000, value_parser = parse_human_u64)]
        prime_bound: u64,
    },
    /// Gallagher-type averages of the singular constants.
    Gallagher {
        /// Shift range: averages over 2k <= y (or tuples with 2h_i <= y).
        #[arg(long, value_parser = parse_human_u64)]
        y: Option<u64>,
        /// Compute the triangular-weighted average over k <= E instead.
        #[arg(long)]
        weighted: bool,
        #[arg(long = "E")]
        e: Option<f64>,
        /// Tuple length for the k-tuple average (1 or 2).
        #[arg(long, default_value_t = 1)]
        k: u64,
        #[arg(long, default_value_t = 1_000_000, value_parser = parse_human_u64)]
        prime_bound: u64,
    },
    /// Verify one averaged statement and emit a report.
    Verify {
        statement: Statement,
        #[arg(long, value_parser = parse_human_u64)]
        x: u64,
        /// Shift-range exponent for thm1/thm1w (M = floor(x^theta)).
        #[arg(long, default_value_t = 0.62)]
        theta: f64,
        /// Constant C > 1/2 for thm2/cor2/thm3.
        #[arg(long = "C")]
        c: Option<f64>,
        /// Averaging length E for thm2/cor2/thm3 (default C*ln x).
        #[arg(long = "E")]
        e: Option<f64>,
        /// Window length for thm1w; interval length for thm4.
        #[arg(long, value_parser = parse_human_u64)]
        h: Option<u64>,
        /// Stride for thm4: averages pi_{2mk}(x).
        #[arg(long, value_parser = parse_human_u64)]
        m: Option<u64>,
        /// Shift set for lemma1, e.g. 2,4,8.
        #[arg(long = "B", value_delimiter = ',')]
        b: Option<Vec<u64>>,
        /// Tuple length for thm3.
        #[arg(long, default_value_t = 2)]
        k: u64,
    },
    /// Weighted-average ratio series over an x grid (plot-ready).
    Scan {
        #[arg(long = "x-grid", value_delimiter = ',', value_parser = parse_human_u64)]
        x_grid: Vec<u64>,
        /// "log2" (E = ln^2 x), "sqrtlog" (E = ln x sqrt(ln x)), or a
        /// positive multiplier c (E = c ln^2 x).
        #[arg(long = "E-rule", default_value = "log2")]
        e_rule: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Statement {
    /// Long average of pi_2k(x) over 2k <= x^theta.
    Thm1,
    /// Windowed average over (x, x+h].
    Thm1w,
    /// Triangular-weighted short average lower bound.
    Thm2,
    /// Unweighted short average lower bound.
    Cor2,
    /// Weighted 2-tuple average lower bound.
    Thm3,
    /// Strided weighted average lower bound.
    Thm4,
    /// Pairwise coincidence lower bound for a shift set B.
    Lemma1,
}

fn parse_band(s: &str) -> Result<(f64, f64), String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        return Err("expected LO,HI".into());
    }
    let lo: f64 = parts[0].trim().parse().map_err(|e| format!("bad LO: {e}"))?;
    let hi: f64 = parts[1].trim().parse().map_err(|e| format!("bad HI: {e}"))?;
    if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
        return Err("need finite LO <= HI".into());
    }
    Ok((lo, hi))
}

/// Accepts plain integers and scientific notation ("1e6").
fn parse_human_u64(s: &str) -> Result<u64, String> {
    if let Ok(n) = s.parse::<u64>() {
        return Ok(n);
    }
    match s.parse::<f64>() {
        Ok(f) if f.is_finite() && f >= 0.0 && f == f.trunc() && f <= u64::MAX as f64 => Ok(f as u64),
        _ => Err(format!("{s:?} is not a nonnegative integer")),
    }
}

fn main() {
    let cli = Cli::parse();
    std::process::exit(run(cli));
}

fn run(cli: Cli) -> i32 {
    if let Some(n) = cli.threads {
        // Ignore failure: the global pool may already be initialized.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match execute(&cli) {
        Ok(outcome) => {
            if std::io::stdout().write_all(&outcome.bytes).is_err() {
                return EXIT_IO;
            }
            if outcome.all_pass {
                EXIT_OK
            } else {
                EXIT_FAILED_CHECK
            }
        }
        Err(err) => {
            eprintln!("error: {err}");
            match err {
                Error::Io { .. }
                | Error::CorruptMagic { .. }
                | Error::UnsupportedVersion { .. }
                | Error::ChecksumMismatch { .. }
                | Error::Truncated { .. } => EXIT_IO,
                _ => EXIT_USAGE,
            }
        }
    }
}

struct Outcome {
    bytes: Vec<u8>,
    all_pass: bool,
}

impl Outcome {
    fn plain(bytes: Vec<u8>) -> Self {
        Outcome {
            bytes,
            all_pass: true,
        }
    }
}

fn thresholds_from(cli: &Cli) -> Thresholds {
    let mut t = Thresholds::default();
    if let Some(band) = cli.ratio_band {
        t.ratio_band = band;
    }
    if let Some(margin) = cli.require_margin {
        t.min_margin = margin;
    }
    t
}

fn usage(msg: impl Into<String>) -> Error {
    Error::Precondition(msg.into())
}

/// Load the cached bitmap for the required limit or build and cache it.
/// `--limit` overrides the computed requirement (never silently shrinks it).
fn obtain_bitmap(cli: &Cli, required: u64) -> Result<PrimeBitmap, Error> {
    let limit = cli.limit.unwrap_or(required);
    if limit < required {
        return Err(usage(format!(
            "--limit {limit} is below the limit {required} required by this operation"
        )));
    }
    let dir = resolve_cache_dir(cli.cache_dir.as_deref());
    let path = bitmap_cache_path(&dir, limit);
    if path.exists() {
        match load_bitmap(&path) {
            Ok(pb) => return Ok(pb),
            Err(err) => eprintln!("warning: rebuilding over unusable cache {}: {err}", path.display()),
        }
    }
    let pb = build_sieve(limit, &SieveConfig::default())?;
    std::fs::create_dir_all(&dir).map_err(|e| Error::Io {
        path: dir.clone(),
        source: e,
    })?;
    save_bitmap(&pb, &path)?;
    Ok(pb)
}

fn reports_log_path(cli: &Cli) -> PathBuf {
    resolve_cache_dir(cli.cache_dir.as_deref()).join("reports.jsonl")
}

fn ln(x: u64) -> f64 {
    (x as f64).ln()
}

fn execute(cli: &Cli) -> Result<Outcome, Error> {
    match &cli.command {
        Command::Sieve { out } => {
            let limit = cli
                .limit
                .ok_or_else(|| usage("sieve requires --limit N"))?;
            let pb = obtain_bitmap(cli, limit)?;
            let prime_count = pb.prime_count_range(0, limit)?;
            let path = match out {
                Some(path) => {
                    save_bitmap(&pb, path)?;
                    path.clone()
                }
                None => bitmap_cache_path(&resolve_cache_dir(cli.cache_dir.as_deref()), limit),
            };
            let rows = vec![SieveRow {
                limit,
                prime_count,
                path: path.display().to_string(),
            }];
            Ok(Outcome::plain(rows_to_bytes(&rows, cli.format)))
        }

        Command::Paircount {
            x,
            max_shift,
            lo,
            prime_bound,
        } => {
            let (x, max_shift, lo) = (*x, *max_shift, *lo);
            if max_shift < 2 || max_shift % 2 != 0 {
                return Err(usage(format!("--max-shift {max_shift} must be even and >= 2")));
            }
            if lo >= x {
                return Err(usage(format!("--lo {lo} must be below --x {x}")));
            }
            let pb = obtain_bitmap(cli, x.saturating_add(max_shift))?;
            let table = pair_counts(&pb, lo, x, max_shift)?;
            let constants = pair_constant_series(max_shift / 2, *prime_bound)?;
            let window = (x - lo) as f64;
            let scale = window / (ln(x) * ln(x));
            let rows: Vec<PairRow> = table
                .entries()
                .zip(&constants)
                .map(|((shift, count), c)| PairRow {
                    shift,
                    count,
                    prediction: c.value * scale,
                })
                .collect();
            Ok(Outcome::plain(rows_to_bytes(&rows, cli.format)))
        }

        Command::Tuplecount { x, shifts } => {
            let spec = TupleSpec::new(shifts.clone())?;
            let pb = obtain_bitmap(cli, x.saturating_add(spec.max_shift()))?;
            let count = tuple_count(&pb, *x, &spec)?;
            let rows = vec![TupleRow {
                x: *x,
                shifts: spec.to_string(),
                count,
            }];
            Ok(Outcome::plain(rows_to_bytes(&rows, cli.format)))
        }

        Command::Constants {
            shift,
            tuple,
            prime_bound,
        } => {
            let row = match (shift, tuple) {
                (Some(shift), None) => {
                    if *shift < 2 || *shift % 2 != 0 {
                        return Err(usage(format!("--shift {shift} must be a positive even shift 2k")));
                    }
                    let v = pair_constant(*shift / 2, *prime_bound)?;
                    ConstantRow {
                        name: format!("C_{shift}"),
                        value: v.value,
                        tail_bound: v.tail_bound,
                        prime_bound: v.prime_bound,
                        exactly_zero: v.exactly_zero,
                    }
                }
                (None, Some(shifts)) => {
                    let spec = TupleSpec::new(shifts.clone())?;
                    let v = tuple_constant(&spec, *prime_bound)?;
                    ConstantRow {
                        name: format!("C_{{{spec}}}"),
                        value: v.value,
                        tail_bound: v.tail_bound,
                        prime_bound: v.prime_bound,
                        exactly_zero: v.exactly_zero,
                    }
                }
                _ => return Err(usage("constants requires exactly one of --shift K or --tuple 2,6")),
            };
            Ok(Outcome::plain(rows_to_bytes(&[row], cli.format)))
        }

        Command::Gallagher {
            y,
            weighted,
            e,
            k,
            prime_bound,
        } => {
            let row = if *weighted {
                if *k != 1 {
                    return Err(usage("--weighted applies to the pair average only (k = 1)"));
                }
                let e = e.ok_or_else(|| usage("--weighted requires --E"))?;
                AverageRow {
                    kind: "weighted".into(),
                    y: None,
                    k: 1,
                    e: Some(e),
                    prime_bound: *prime_bound,
                    value: weighted_singular_average(e, *prime_bound)?,
                }
            } else {
                let y = y.ok_or_else(|| usage("gallagher requires --y"))?;
                let value = if *k == 1 {
                    gallagher_average(y, *prime_bound)?
                } else {
                    ktuple_gallagher_average(y, *k, *prime_bound)?
                };
                AverageRow {
                    kind: if *k == 1 { "gallagher".into() } else { "ktuple".into() },
                    y: Some(y),
                    k: *k,
                    e: None,
                    prime_bound: *prime_bound,
                    value,
                }
            };
            Ok(Outcome::plain(rows_to_bytes(&[row], cli.format)))
        }

        Command::Verify {
            statement,
            x,
            theta,
            c,
            e,
            h,
            m,
            b,
            k,
        } => {
            let thresholds = thresholds_from(cli);
            let x = *x;
            let report = match statement {
                Statement::Thm1 => {
                    let m_cap = required_m(x, *theta)?;
                    let pb = obtain_bitmap(cli, x.saturating_add(m_cap))?;
                    verify_long_average(&pb, x, *theta, &thresholds)?
                }
                Statement::Thm1w => {
                    let h = h.ok_or_else(|| usage("thm1w requires --h"))?;
                    let m_cap = required_m(x, *theta)?;
                    let pb = obtain_bitmap(cli, x.saturating_add(h).saturating_add(m_cap))?;
                    verify_window_average(&pb, x, h, *theta, &thresholds)?
                }
                Statement::Thm2 | Statement::Cor2 | Statement::Thm3 => {
                    let c = c.ok_or_else(|| usage("this statement requires --C"))?;
                    if c.is_nan() || c <= 0.5 {
                        return Err(usage(format!("--C {c} rejected: the bound requires C > 1/2")));
                    }
                    let e = e.unwrap_or(c * ln(x));
                    if !e.is_finite() || e < c * ln(x) {
                        return Err(usage(format!("--E {e} must be at least C*ln x = {}", c * ln(x))));
                    }
                    let pb = obtain_bitmap(cli, x.saturating_add((2.0 * e).ceil() as u64))?;
                    match statement {
                        Statement::Thm2 => verify_weighted_short(&pb, x, c, e, &thresholds)?,
                        Statement::Cor2 => verify_unweighted_short(&pb, x, c, e, &thresholds)?,
                        _ => verify_ktuple_weighted(&pb, x, c, e, *k, &thresholds)?,
                    }
                }
                Statement::Thm4 => {
                    let m = m.ok_or_else(|| usage("thm4 requires --m"))?;
                    let h = h.ok_or_else(|| usage("thm4 requires --h"))?;
                    let big_m = h / 2u64.saturating_mul(m.max(1));
                    if m == 0 || big_m < 2 {
                        return Err(usage(format!("M = floor(h/(2m)) = {big_m} must be >= 2")));
                    }
                    let pb = obtain_bitmap(cli, x.saturating_add(2 * m * big_m))?;
                    verify_stride(&pb, x, m, h, &thresholds)?
                }
                Statement::Lemma1 => {
                    let mut elements = b.clone().ok_or_else(|| usage("lemma1 requires --B a,b,c"))?;
                    elements.sort_unstable();
                    elements.dedup();
                    let set = ShiftSet::new(elements)?;
                    let pb = obtain_bitmap(cli, x.saturating_add(set.max()))?;
                    lemma1_margin(&pb, x, &set, &thresholds)?
                }
            };
            hlav::store::append_reports(reports_log_path(cli), std::slice::from_ref(&report))?;
            let all_pass = report.pass;
            Ok(Outcome {
                bytes: reports_to_bytes(&[report], cli.format),
                all_pass,
            })
        }

        Command::Scan { x_grid, e_rule } => {
            let rule: ERule = e_rule.parse()?;
            if x_grid.is_empty() {
                return Ok(Outcome::plain(reports_to_bytes(&[], cli.format)));
            }
            let mut grid = x_grid.clone();
            grid.sort_unstable();
            grid.dedup();
            let required = grid
                .iter()
                .map(|&x| x.saturating_add((2.0 * rule.evaluate(x)).ceil() as u64))
                .max()
                .expect("grid is nonempty");
            let pb = obtain_bitmap(cli, required)?;
            let thresholds = thresholds_from(cli);
            let reports = conjecture2_scan(&pb, &grid, rule, &thresholds)?;
            hlav::store::append_reports(reports_log_path(cli), &reports)?;
            let all_pass = reports.iter().all(|r| r.pass);
            Ok(Outcome {
                bytes: reports_to_bytes(&reports, cli.format),
                all_pass,
            })
        }
    }
}

/// Validate theta and return `M = floor(x^theta)` for limit sizing.
fn required_m(x: u64, theta: f64) -> Result<u64, Error> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(usage(format!("--theta {theta} must lie in (0, 1)")));
    }
    let m = (x as f64).powf(theta).floor() as u64;
    if m < 2 {
        return Err(usage(format!("M = floor(x^theta) = {m} < 2")));
    }
    Ok(m)
}

#[derive(Serialize)]
struct SieveRow {
    limit: u64,
    prime_count: u64,
    path: String,
}

#[derive(Serialize)]
struct PairRow {
    shift: u64,
    count: u64,
    prediction: f64,
}

#[derive(Serialize)]
struct TupleRow {
    x: u64,
    shifts: String,
    count: u64,
}

#[derive(Serialize)]
struct ConstantRow {
    name: String,
    value: f64,
    tail_bound: f64,
    prime_bound: u64,
    exactly_zero: bool,
}

#[derive(Serialize)]
struct AverageRow {
    kind: String,
    y: Option<u64>,
    k: u64,
    #[serde(rename = "E")]
    e: Option<f64>,
    prime_bound: u64,
    value: f64,
}

/// Serialize plain rows: CSV with a header derived from the struct fields,
/// or JSON-lines.
fn rows_to_bytes<T: Serialize>(rows: &[T], format: Format) -> Vec<u8> {
    match format {
        Format::Csv => {
            let mut writer = csv::Writer::from_writer(Vec::new());
            for row in rows {
                writer.serialize(row).expect("csv serialization");
            }
            writer.into_inner().expect("csv flush")
        }
        Format::Json => {
            let mut out = Vec::new();
            for row in rows {
                serde_json::to_writer(&mut out, row).expect("json serialization");
                out.push(b'\n');
            }
            out
        }
    }
}

/// Reports use the fixed column order of the JSON-lines schema, with params
/// flattened to semicolon-joined key=value pairs in CSV.
fn reports_to_bytes(reports: &[VerificationReport], format: Format) -> Vec<u8> {
    match format {
        Format::Csv => {
            let mut writer = csv::Writer::from_writer(Vec::new());
            writer
                .write_record([
                    "statement_id",
                    "x",
                    "params",
                    "lhs",
                    "rhs",
                    "ratio",
                    "margin",
                    "pass",
                    "notes",
                ])
                .expect("csv header");
            for r in reports {
                let params: Vec<String> =
                    r.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
                writer
                    .write_record([
                        r.statement_id.as_str().to_string(),
                        r.x.to_string(),
                        params.join(";"),
                        display(r.lhs),
                        display(r.rhs),
                        display(r.ratio),
                        display(r.margin),
                        r.pass.to_string(),
                        r.notes.clone(),
                    ])
                    .expect("csv record");
            }
            writer.into_inner().expect("csv flush")
        }
        Format::Json => {
            let mut out = Vec::new();
            for r in reports {
                serde_json::to_writer(&mut out, r).expect("json serialization");
                out.push(b'\n');
            }
            out
        }
    }
}

fn display<T: Display>(value: T) -> String {
    value.to_string()
}
