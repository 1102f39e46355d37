//! Command-line front end.
//!
//! Every subcommand produces a [`Table`], printed as CSV with a header row
//! or as a JSON array of objects with the same field names. Numbers are
//! written as decimal strings so consumers never re-round a binary float.

use std::io::Write;

use clap::{Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::ser::{SerializeMap, SerializeSeq};
use serde::{Serialize, Serializer};

use crate::approx::{format_bound, Approx};
use crate::cheb::fixed_point_check;
use crate::error::{Error, Result};
use crate::eval::{
    self, binary_expansion, converge_table, invert_from_q, invert_from_value, limit_closed_form,
    partial_radical, partial_sine, Expansion, Inversion, PrecisionContext, QSource,
};
use crate::parity::{exact_q, q_digits, DyadicDigits};
use crate::seq::{minimal_period, parse_sequence, signs_to_string, Sign, SignSequence};

/// Largest `max_n` accepted by `check-lemma`.
pub const MAX_LEMMA_N: usize = 20;

/// Binary digits of `Q` shown when no closed form is printed.
const SHOWN_Q_DIGITS: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(
    name = "radical",
    version,
    about = "Limits of continued radicals a0*sqrt(2 + a1*sqrt(2 + ...)) with signs in {-1,+1}"
)]
pub struct Cli {
    /// Working precision in bits
    #[arg(long, global = true, env = "RADICAL_PRECISION_BITS", default_value_t = 128)]
    pub precision_bits: u32,

    /// Output format
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,

    /// Decimal digits printed for values
    #[arg(long, global = true, default_value_t = 30)]
    pub digits: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Limit of an infinite sequence, x = -2cos(Q*pi)
    Limit {
        #[arg(allow_hyphen_values = true)]
        seq: String,
    },
    /// Finite-depth radical next to its sine form
    Eval {
        #[arg(allow_hyphen_values = true)]
        seq: String,
        #[arg(long)]
        depth: usize,
    },
    /// Partial values against the limit for depths 1..=max-depth
    Converge {
        #[arg(allow_hyphen_values = true)]
        seq: String,
        #[arg(long)]
        max_depth: usize,
    },
    /// Sign sequence from a limit value or from Q
    Invert {
        /// Target limit in [-2, 2], as a decimal or a fraction
        #[arg(long, allow_hyphen_values = true, conflicts_with = "q", required_unless_present = "q")]
        value: Option<String>,
        /// Q in [0, 1], as a fraction, decimal, or binary digits "0b0.0101"
        #[arg(long)]
        q: Option<String>,
        /// Number of signs to report
        #[arg(long, default_value_t = 64)]
        terms: usize,
        /// Use 0.1000... instead of 0.0111... for dyadic Q
        #[arg(long)]
        trailing_zeros: bool,
    },
    /// Every sign pattern of a given period
    Enumerate {
        #[arg(long)]
        period: usize,
        #[arg(long, default_value_t = 16)]
        max_period: usize,
    },
    /// Exhaustive check of the radical/sine identity for all tuples up to max-n
    CheckLemma {
        #[arg(long)]
        max_n: usize,
    },
}

/// A rectangular result with named columns.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

struct RowRef<'a> {
    columns: &'a [&'static str],
    row: &'a [String],
}

impl Serialize for RowRef<'_> {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(self.columns.len()))?;
        for (k, v) in self.columns.iter().zip(self.row) {
            map.serialize_entry(k, v)?;
        }
        map.end()
    }
}

impl Serialize for Table {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.rows.len()))?;
        for row in &self.rows {
            seq.serialize_element(&RowRef {
                columns: &self.columns,
                row,
            })?;
        }
        seq.end()
    }
}

impl Table {
    fn new(columns: &[&'static str]) -> Self {
        Self {
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// Value of `column` in row `i`.
    pub fn get(&self, i: usize, column: &str) -> Option<&str> {
        let j = self.columns.iter().position(|c| *c == column)?;
        self.rows.get(i).map(|r| r[j].as_str())
    }

    pub fn write<W: Write>(&self, format: Format, out: W) -> std::io::Result<()> {
        match format {
            Format::Csv => {
                let mut w = csv::Writer::from_writer(out);
                w.write_record(&self.columns)?;
                for row in &self.rows {
                    w.write_record(row)?;
                }
                w.flush()
            }
            Format::Json => {
                let mut out = out;
                serde_json::to_writer_pretty(&mut out, self)?;
                writeln!(out)
            }
        }
    }

    pub fn render(&self, format: Format) -> String {
        let mut buf = Vec::new();
        self.write(format, &mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("tables are UTF-8")
    }
}

fn status(ok: bool) -> String {
    if ok { "PASS" } else { "FAIL" }.to_string()
}

fn sci(x: f64) -> String {
    format!("{x:.3e}")
}

/// Digit count `L` for `Q`: one per output bit plus a margin.
fn q_digit_count(ctx: &PrecisionContext, decimal_digits: usize) -> usize {
    let out_bits = (decimal_digits as f64 * std::f64::consts::LOG2_10).ceil() as usize;
    ctx.default_digit_count().max(out_bits + 8)
}

fn parse_seq(text: &str) -> Result<SignSequence> {
    parse_sequence(text)
}

fn show_q_binary(s: &SignSequence, q: Option<&BigRational>) -> Result<String> {
    if let Some(q) = q {
        if let Some((pre, period)) = binary_expansion(q, Expansion::TrailingOnes, SHOWN_Q_DIGITS) {
            return Ok(format!("0.{}({})", digits_text(&pre), digits_text(&period)));
        }
    }
    Ok(format!("{}...", q_digits(s, SHOWN_Q_DIGITS)?))
}

fn digits_text(d: &[u8]) -> String {
    d.iter().map(|b| char::from(b'0' + b)).collect()
}

fn show_q(q: Option<&BigRational>) -> String {
    q.map(eval::format_ratio).unwrap_or_default()
}

/// Runs a parsed command line.
pub fn run(cli: &Cli) -> Result<Table> {
    let ctx = PrecisionContext::with_bits(cli.precision_bits)?;
    let digits = cli.digits;
    match &cli.command {
        Command::Limit { seq } => cmd_limit(seq, digits, &ctx),
        Command::Eval { seq, depth } => cmd_eval(seq, *depth, digits, &ctx),
        Command::Converge { seq, max_depth } => cmd_converge(seq, *max_depth, digits, &ctx),
        Command::Invert {
            value,
            q,
            terms,
            trailing_zeros,
        } => {
            let conv = if *trailing_zeros {
                Expansion::TrailingZeros
            } else {
                Expansion::TrailingOnes
            };
            let target = match (value, q) {
                (Some(v), _) => InvertTarget::Value(v.clone()),
                (None, Some(q)) => InvertTarget::Q(q.clone()),
                (None, None) => return Err(Error::Domain("invert needs --value or --q".into())),
            };
            cmd_invert(&target, *terms, conv, digits, &ctx)
        }
        Command::Enumerate { period, max_period } => cmd_enumerate(*period, *max_period, digits, &ctx),
        Command::CheckLemma { max_n } => cmd_check_lemma(*max_n, &ctx),
    }
}

pub fn cmd_limit(seq: &str, digits: usize, ctx: &PrecisionContext) -> Result<Table> {
    let s = parse_seq(seq)?;
    let x = limit_closed_form(&s, ctx, q_digit_count(ctx, digits))?;
    let q = exact_q(&s);
    let mut t = Table::new(&[
        "sequence",
        "q_binary",
        "q_rational",
        "value",
        "bound",
        "precision_bits",
    ]);
    t.push(vec![
        s.to_text()?,
        show_q_binary(&s, q.as_ref())?,
        show_q(q.as_ref()),
        x.to_decimal(digits),
        format_bound(x.bound_f64()),
        ctx.working_bits().to_string(),
    ]);
    Ok(t)
}

pub fn cmd_eval(seq: &str, depth: usize, digits: usize, ctx: &PrecisionContext) -> Result<Table> {
    let s = parse_seq(seq)?;
    let radical = partial_radical(&s, depth, ctx)?;
    let sine = partial_sine(&s, depth, ctx)?;
    let diff = (radical.mid_ratio() - sine.mid_ratio()).abs();
    let mut t = Table::new(&[
        "sequence",
        "depth",
        "radical",
        "radical_bound",
        "sine",
        "sine_bound",
        "difference",
    ]);
    t.push(vec![
        s.to_text().unwrap_or_else(|_| seq.to_string()),
        depth.to_string(),
        radical.to_decimal(digits),
        format_bound(radical.bound_f64()),
        sine.to_decimal(digits),
        format_bound(sine.bound_f64()),
        sci(eval::ratio_to_f64(&diff)),
    ]);
    Ok(t)
}

pub fn cmd_converge(seq: &str, max_depth: usize, digits: usize, ctx: &PrecisionContext) -> Result<Table> {
    let s = parse_seq(seq)?;
    if !s.is_infinite() {
        return Err(Error::Domain(
            "converge needs an infinite sequence; use eval for finite ones".into(),
        ));
    }
    let rows = converge_table(&s, max_depth, ctx)?;
    let name = s.to_text()?;
    let mut t = Table::new(&["sequence", "depth", "partial", "gap", "tail_bound", "status", "detail"]);
    let mut failures = 0;
    for r in &rows {
        let ok = r.within_envelope();
        failures += usize::from(!ok);
        t.push(vec![
            name.clone(),
            r.depth.to_string(),
            r.partial.to_decimal(digits),
            sci(r.gap.to_f64()),
            sci(r.tail_bound),
            status(ok),
            String::new(),
        ]);
    }
    t.push(vec![
        name,
        "summary".into(),
        String::new(),
        String::new(),
        String::new(),
        status(failures == 0),
        format!("{} of {} rows within the envelope", rows.len() - failures, rows.len()),
    ]);
    Ok(t)
}

pub enum InvertTarget {
    Value(String),
    Q(String),
}

pub fn cmd_invert(
    target: &InvertTarget,
    terms: usize,
    conv: Expansion,
    digits: usize,
    ctx: &PrecisionContext,
) -> Result<Table> {
    let (input, inv) = match target {
        InvertTarget::Value(v) => {
            let x = eval::parse_rational(v)?;
            (format!("value={v}"), invert_from_value(&x, terms, ctx, conv)?)
        }
        InvertTarget::Q(q) => {
            let src = match q.strip_prefix("0b") {
                Some(bits) => QSource::Digits(DyadicDigits::parse(bits)?),
                None => QSource::Rational(eval::parse_rational(q)?),
            };
            (format!("q={q}"), invert_from_q(&src, terms, conv)?)
        }
    };
    let (limit, sequence) = reevaluate(&inv, terms, ctx)?;
    let q_text = match &inv.q_exact {
        Some(q) => eval::format_ratio(q),
        None => {
            let (lo, hi) = &inv.q_enclosure;
            let mid = (lo + hi) / BigRational::from_integer(BigInt::from(2));
            Approx::from_ratio(&mid, ctx.working_bits()).to_decimal(digits)
        }
    };
    let mut t = Table::new(&[
        "input",
        "q",
        "sequence",
        "closed_form",
        "signs",
        "limit",
        "bound",
    ]);
    t.push(vec![
        input,
        q_text,
        sequence,
        inv.closed_form.is_some().to_string(),
        signs_to_string(&inv.signs),
        limit.to_decimal(digits),
        format_bound(limit.bound_f64()),
    ]);
    Ok(t)
}

/// The limit of an inversion result, for confirmation: exact for a closed
/// form, otherwise the partial value of the recovered prefix widened by the
/// tail bound.
fn reevaluate(inv: &Inversion, terms: usize, ctx: &PrecisionContext) -> Result<(Approx, String)> {
    match &inv.closed_form {
        Some(s) => Ok((
            limit_closed_form(s, ctx, ctx.default_digit_count())?,
            s.to_text()?,
        )),
        None => {
            let prefix = SignSequence::finite(inv.signs.clone())?;
            let partial = partial_radical(&prefix, terms, ctx)?;
            let tail = eval::tail_bound_ratio(terms);
            Ok((partial.widen_by(&tail), signs_to_string(&inv.signs)))
        }
    }
}

/// The `2ⁿ` patterns of period `n`, `+` before `-` at every position.
fn patterns(n: usize) -> Vec<Vec<Sign>> {
    (0..1usize << n)
        .map(|i| {
            (0..n)
                .map(|k| {
                    if (i >> (n - 1 - k)) & 1 == 0 {
                        Sign::Plus
                    } else {
                        Sign::Minus
                    }
                })
                .collect()
        })
        .collect()
}

pub fn cmd_enumerate(period: usize, max_period: usize, digits: usize, ctx: &PrecisionContext) -> Result<Table> {
    if period == 0 || period > max_period {
        return Err(Error::Domain(format!(
            "period must be between 1 and {max_period}, got {period}"
        )));
    }
    struct Item {
        pattern: String,
        canonical: String,
        primitive: bool,
        q: BigRational,
        x: Approx,
        residual: Approx,
        tolerance: f64,
        passed: bool,
    }
    let items = patterns(period)
        .into_par_iter()
        .map(|p| {
            let pattern = format!("({})", signs_to_string(&p));
            let primitive = minimal_period(&p).len() == p.len();
            let s = SignSequence::purely_periodic(p)?;
            let q = exact_q(&s).expect("periodic");
            let report = fixed_point_check(&s, ctx)?;
            Ok(Item {
                pattern,
                canonical: s.to_text()?,
                primitive,
                q,
                passed: report.passed(),
                x: report.x,
                residual: report.residual,
                tolerance: report.tolerance,
            })
        })
        .collect::<Result<Vec<Item>>>()?;

    let mut t = Table::new(&[
        "pattern",
        "canonical",
        "primitive",
        "q_rational",
        "q_binary",
        "value",
        "bound",
        "cheb_residual",
        "cheb_tolerance",
        "status",
        "detail",
    ]);
    for it in &items {
        let (pre, per) = binary_expansion(&it.q, Expansion::TrailingOnes, usize::MAX)
            .expect("unbounded period");
        t.push(vec![
            it.pattern.clone(),
            it.canonical.clone(),
            it.primitive.to_string(),
            eval::format_ratio(&it.q),
            format!("0.{}({})", digits_text(&pre), digits_text(&per)),
            it.x.to_decimal(digits),
            format_bound(it.x.bound_f64()),
            sci(it.residual.to_f64()),
            sci(it.tolerance),
            status(it.passed),
            if it.primitive {
                String::new()
            } else {
                format!("same sequence as {}", it.canonical)
            },
        ]);
    }

    // distinct canonical descriptions, ordered by value
    let mut distinct: Vec<&Item> = Vec::new();
    for it in &items {
        if !distinct.iter().any(|d| d.canonical == it.canonical) {
            distinct.push(it);
        }
    }
    distinct.sort_by(|a, b| a.x.mid().cmp(b.x.mid()));
    let min_sep = distinct
        .windows(2)
        .map(|w| separation_lower_bound(&w[0].x, &w[1].x))
        .min_by(|a, b| a.partial_cmp(b).expect("finite"));
    let separated = min_sep.map_or(true, |m| m > 1e-9);
    let all_pass = items.iter().all(|i| i.passed);
    t.push(vec![
        "summary".into(),
        String::new(),
        String::new(),
        String::new(),
        String::new(),
        String::new(),
        String::new(),
        String::new(),
        String::new(),
        status(all_pass && separated),
        format!(
            "patterns={} distinct={} min_separation={}",
            items.len(),
            distinct.len(),
            min_sep.map_or_else(|| "n/a".to_string(), sci)
        ),
    ]);
    Ok(t)
}

/// A lower bound on the distance between two balls' contents.
fn separation_lower_bound(a: &Approx, b: &Approx) -> f64 {
    let d = a.sub(b);
    let gap = d.mid_ratio().abs() - d.bound_ratio();
    if gap.is_positive() {
        gap.to_f64().unwrap_or(0.0)
    } else {
        0.0
    }
}

/// Deviation allowed between the two finite forms at depth `n`:
/// `2^{−(w − 2n)}`, and never more than `10⁻¹²`.
pub fn lemma_threshold(ctx: &PrecisionContext, n: usize) -> f64 {
    let exp = ctx.working_bits() as i32 - 2 * n as i32;
    2f64.powi(-exp).min(1e-12)
}

/// Largest `|partial_radical − partial_sine|` over all `2ⁿ` sign tuples.
pub fn lemma_max_deviation(n: usize, ctx: &PrecisionContext) -> Result<BigRational> {
    patterns(n)
        .into_par_iter()
        .map(|p| {
            let s = SignSequence::finite(p)?;
            let r = partial_radical(&s, n, ctx)?;
            let sn = partial_sine(&s, n, ctx)?;
            Ok((r.mid_ratio() - sn.mid_ratio()).abs())
        })
        .try_reduce(BigRational::zero, |a, b| Ok(a.max(b)))
}

pub fn cmd_check_lemma(max_n: usize, ctx: &PrecisionContext) -> Result<Table> {
    if max_n == 0 || max_n > MAX_LEMMA_N {
        return Err(Error::Domain(format!(
            "max-n must be between 1 and {MAX_LEMMA_N}, got {max_n}"
        )));
    }
    let mut t = Table::new(&["n", "tuples", "max_deviation", "threshold", "status"]);
    let mut all = true;
    let mut worst = BigRational::zero();
    for n in 1..=max_n {
        let dev = lemma_max_deviation(n, ctx)?;
        let threshold = lemma_threshold(ctx, n);
        let ok = eval::ratio_to_f64(&dev) <= threshold;
        all &= ok;
        t.push(vec![
            n.to_string(),
            (1u64 << n).to_string(),
            sci(eval::ratio_to_f64(&dev)),
            sci(threshold),
            status(ok),
        ]);
        if dev > worst {
            worst = dev;
        }
    }
    let total: u64 = (1..=max_n).map(|n| 1u64 << n).sum();
    t.push(vec![
        "all".into(),
        total.to_string(),
        sci(eval::ratio_to_f64(&worst)),
        String::new(),
        status(all),
    ]);
    Ok(t)
}

/// Entry point shared by the binary: returns the exit code.
pub fn main_with(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> u8 {
    match run(cli) {
        Ok(table) => match table.write(cli.format, stdout) {
            Ok(()) => 0,
            Err(e) => {
                let _ = writeln!(stderr, "error: {e}");
                1
            }
        },
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}
