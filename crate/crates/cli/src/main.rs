//! `metafib`: command-line front end.
//!
//! Exit codes: 0 success, 2 bad input, 3 internal invariant violation,
//! 4 verification counterexample or failed comparison, 5 unbounded gap.

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use num_rational::BigRational;
use serde::Serialize;
use serde_json::json;

use metafib::automata::{AutomatonError, Dfao, Direction};
use metafib::dfaoguess::{compare_dfaos, guess_dfao, verify_ratio_dfao, GuessConfig, GuessError};
use metafib::dynamics::{classify_periodic_u, periodic_ratios};
use metafib::polyrat::{decimal_string, rational_string, InternTable, RatFn};
use metafib::seqcore::{
    compute_f_numeric, compute_f_symbolic, compute_f_tilde, compute_h_numeric, f_tilde_word, reset_set,
    reset_set_tilde, symbolic_ratio_ids, symbolic_tilde_ratio_ids, value_set, BinarySeq, MetaFibParams, RatioPoint,
    SeqError,
};
use metafib::transduce::{build_transducer, transduce_via_windows, TransduceError, WindowInput};

const MAX_RATIO_HORIZON: usize = 1 << 20;
const MAX_RESET_HORIZON: usize = 1 << 24;
const MAX_SYMBOLIC_F: usize = 256;

#[derive(Parser)]
#[command(name = "metafib", version, about = "Binary-driven Fibonacci-type recurrences: ratios, automata, dynamics")]
struct Cli {
    /// Seed for the fingerprint evaluation point.
    #[arg(long, global = true, env = "METAFIB_SEED", default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Dir {
    Lsd,
    Msd,
}

impl From<Dir> for Direction {
    fn from(d: Dir) -> Direction {
        match d {
            Dir::Lsd => Direction::Lsd,
            Dir::Msd => Direction::Msd,
        }
    }
}

#[derive(clap::Args)]
struct SeqArgs {
    /// Driving sequence: ptm, rs, pow2, squares, periodic:<pre>;<per>, scaled:<spec>/<d>,
    /// literal:<bits>;<spec> or dfao:<path>.
    #[arg(long)]
    seq: String,
    /// Second driving sequence for the two-sequence recurrence.
    #[arg(long)]
    v: Option<String>,
}

#[derive(clap::Args)]
struct Coeffs {
    #[arg(long, default_value_t = 1, allow_negative_numbers = true)]
    a: i64,
    #[arg(long, default_value_t = 1, allow_negative_numbers = true)]
    b: i64,
}

#[derive(Subcommand)]
enum Cmd {
    /// Terms f(0..=horizon).
    Compute {
        #[command(flatten)]
        seq: SeqArgs,
        #[command(flatten)]
        coeffs: Coeffs,
        #[arg(long, default_value_t = 64)]
        horizon: usize,
        /// Polynomials in a, b instead of integers (horizon at most 256).
        #[arg(long)]
        symbolic: bool,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Ratios h(n) = f(n+1)/f(n) for n < horizon.
    Ratios {
        #[command(flatten)]
        seq: SeqArgs,
        #[command(flatten)]
        coeffs: Coeffs,
        #[arg(long, default_value_t = 1 << 13)]
        horizon: usize,
        #[arg(long)]
        symbolic: bool,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Reset positions and gap statistics.
    Resets {
        #[command(flatten)]
        seq: SeqArgs,
        #[arg(long, default_value_t = 1 << 20)]
        horizon: usize,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Distinct ratio values with counts.
    Values {
        #[command(flatten)]
        seq: SeqArgs,
        #[command(flatten)]
        coeffs: Coeffs,
        #[arg(long, default_value_t = 1 << 13)]
        horizon: usize,
        #[arg(long)]
        symbolic: bool,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Guesses a DFAO for the symbolic ratio sequence.
    GuessDfao {
        #[command(flatten)]
        seq: SeqArgs,
        #[arg(long, default_value_t = 1 << 16)]
        horizon: usize,
        #[arg(long, default_value_t = 4096)]
        max_states: usize,
        #[arg(long, value_enum, default_value = "lsd")]
        direction: Dir,
        /// Walnut output file (stdout if absent).
        #[arg(long)]
        output: Option<PathBuf>,
        /// JSON file mapping output ids to rational functions.
        #[arg(long)]
        labels: Option<PathBuf>,
    },
    /// Proves a ratio DFAO correct from its base cases and the recurrence.
    VerifyDfao {
        #[command(flatten)]
        seq: SeqArgs,
        #[arg(long)]
        dfao: PathBuf,
        #[arg(long)]
        labels: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Compares two DFAOs up to a bijection of outputs.
    Compare {
        #[arg(long)]
        left: PathBuf,
        #[arg(long)]
        right: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Emits the depth-truncated ratio-pair transducer.
    Transducer {
        #[arg(long, default_value_t = 9)]
        c: usize,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long)]
        labels: Option<PathBuf>,
    },
    /// Builds the ratio DFAO from windows of the driving sequence.
    Transduce {
        #[command(flatten)]
        seq: SeqArgs,
        #[arg(long, default_value_t = 9)]
        c: usize,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long)]
        labels: Option<PathBuf>,
    },
    /// Realizable gaps between occurrences of a block.
    Gaps {
        #[command(flatten)]
        seq: SeqArgs,
        #[arg(long, default_value = "010")]
        pattern: String,
        #[arg(long, default_value_t = 16)]
        max_c: usize,
        /// Cross-check by scanning indices below this bound.
        #[arg(long)]
        scan: Option<usize>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Classifies V(f) for an eventually periodic driving sequence.
    Classify {
        #[arg(long, default_value = "")]
        pre: String,
        #[arg(long)]
        per: String,
        #[command(flatten)]
        coeffs: Coeffs,
        /// CSV file for the ratio orbit h(0..orbit_steps).
        #[arg(long)]
        orbit_output: Option<PathBuf>,
        #[arg(long, default_value_t = 200)]
        orbit_steps: usize,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Ratios for u_n = T_{⌊n/2⌋}, a = b = 1, n = 1..=horizon.
    Figure3 {
        #[arg(long, default_value_t = 4096)]
        horizon: usize,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

enum CliError {
    Input(String),
    Invariant(String),
    Counterexample(String),
    Unbounded(String),
    /// Downstream reader closed the pipe; not an error.
    Closed,
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Invariant(_) => 3,
            CliError::Counterexample(_) => 4,
            CliError::Unbounded(_) => 5,
            CliError::Closed => 0,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Input(m) | CliError::Invariant(m) | CliError::Counterexample(m) | CliError::Unbounded(m) => m,
            CliError::Closed => "",
        }
    }
}

impl From<SeqError> for CliError {
    fn from(e: SeqError) -> Self {
        match e {
            SeqError::Parse { .. } | SeqError::Io { .. } | SeqError::Automaton(AutomatonError::Syntax { .. }) => {
                CliError::Input(e.to_string())
            }
            _ => CliError::Invariant(e.to_string()),
        }
    }
}

impl From<AutomatonError> for CliError {
    fn from(e: AutomatonError) -> Self {
        match e {
            AutomatonError::Syntax { .. } | AutomatonError::NotTotal { .. } | AutomatonError::DanglingState { .. } => {
                CliError::Input(e.to_string())
            }
            _ => CliError::Invariant(e.to_string()),
        }
    }
}

impl From<GuessError> for CliError {
    fn from(e: GuessError) -> Self {
        match e {
            GuessError::Automaton(e) => e.into(),
            GuessError::MissingLabel(_) => CliError::Input(e.to_string()),
            _ => CliError::Invariant(e.to_string()),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        if e.kind() == io::ErrorKind::BrokenPipe {
            return CliError::Closed;
        }
        CliError::Input(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        if let csv::ErrorKind::Io(io) = e.kind() {
            if io.kind() == io::ErrorKind::BrokenPipe {
                return CliError::Closed;
            }
        }
        CliError::Invariant(e.to_string())
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn sink(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(io::BufWriter::new(fs::File::create(p)?)),
        None => Box::new(io::BufWriter::new(io::stdout().lock())),
    })
}

fn write_text(path: &Option<PathBuf>, text: &str) -> Result<()> {
    let mut w = sink(path)?;
    w.write_all(text.as_bytes())?;
    w.flush()?;
    Ok(())
}

fn write_json<T: Serialize>(path: &Option<PathBuf>, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Invariant(e.to_string()))?;
    write_text(path, &(text + "\n"))
}

fn write_csv<R: Serialize>(path: &Option<PathBuf>, header: &[&str], rows: impl IntoIterator<Item = R>) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(sink(path)?);
    w.write_record(header)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))
}

fn check_horizon(h: usize, max: usize) -> Result<()> {
    if h > max {
        return Err(CliError::Input(format!("horizon {h} exceeds the cap {max}")));
    }
    Ok(())
}

fn parse_seq(spec: &str) -> Result<BinarySeq> {
    Ok(BinarySeq::parse_spec(spec)?)
}

fn parse_bits(s: &str) -> Result<Vec<u8>> {
    s.trim()
        .chars()
        .map(|c| match c {
            '0' => Ok(0),
            '1' => Ok(1),
            _ => Err(CliError::Input(format!("`{s}` is not a bit string"))),
        })
        .collect()
}

fn decimal(x: &BigRational) -> String {
    decimal_string(x, 15)
}

fn exact(x: &Option<BigRational>) -> (String, String) {
    match x {
        Some(q) => (rational_string(q), decimal(q)),
        None => ("undefined".into(), "undefined".into()),
    }
}

/// Numeric ratios h(0..horizon).
fn numeric_ratios(seq: &SeqArgs, p: MetaFibParams, horizon: usize) -> Result<Vec<RatioPoint<BigRational>>> {
    let u = parse_seq(&seq.seq)?;
    let f = match &seq.v {
        Some(v) => compute_f_tilde(p, &u, &parse_seq(v)?, horizon),
        None => compute_f_numeric(p, &u, horizon),
    };
    Ok(compute_h_numeric(&f))
}

/// Symbolic ratio ids h(0..horizon).
fn symbolic_ids(seq: &SeqArgs, horizon: usize, table: &mut InternTable) -> Result<Vec<usize>> {
    let u = parse_seq(&seq.seq)?;
    Ok(match &seq.v {
        Some(v) => {
            let v = parse_seq(v)?;
            symbolic_tilde_ratio_ids(&u.prefix(horizon + 3), &v.prefix(horizon + 3), horizon, table)
        }
        None => symbolic_ratio_ids(&u.prefix(horizon + 3), horizon, table),
    })
}

/// Renumbers outputs densely in order of first occurrence and returns their labels.
fn densify(k: &Dfao<usize>, table: &InternTable) -> (Dfao<usize>, BTreeMap<usize, String>) {
    let mut order: Vec<(usize, u64)> = k
        .output_witnesses()
        .into_iter()
        .map(|(o, n)| (o, n.unwrap_or(u64::MAX)))
        .collect();
    order.sort_by_key(|&(o, n)| (n, o));
    let rank: BTreeMap<usize, usize> = order.iter().enumerate().map(|(i, &(o, _))| (o, i)).collect();
    let labels = order
        .iter()
        .enumerate()
        .map(|(i, &(o, _))| (i, table.get(o).to_string()))
        .collect();
    (k.map_outputs(|o| rank[o]).minimize(), labels)
}

fn write_labels(path: &Option<PathBuf>, labels: &BTreeMap<usize, String>) -> Result<()> {
    if path.is_some() {
        write_json(path, &json!({ "labels": labels }))?;
    }
    Ok(())
}

fn read_labels(path: &Path) -> Result<Vec<RatFn>> {
    let v: serde_json::Value =
        serde_json::from_str(&read(path)?).map_err(|e| CliError::Input(format!("labels: {e}")))?;
    let obj = v
        .get("labels")
        .and_then(|l| l.as_object())
        .ok_or_else(|| CliError::Input("labels: expected {\"labels\": {id: label}}".into()))?;
    let mut out = vec![None; obj.len()];
    for (k, val) in obj {
        let id: usize = k.parse().map_err(|_| CliError::Input(format!("labels: bad id `{k}`")))?;
        let text = val
            .as_str()
            .ok_or_else(|| CliError::Input(format!("labels: id {id} is not a string")))?;
        let r: RatFn = text
            .parse()
            .map_err(|e| CliError::Input(format!("labels: id {id}: {e}")))?;
        *out.get_mut(id)
            .ok_or_else(|| CliError::Input("labels: ids must be 0..n-1".into()))? = Some(r);
    }
    Ok(out.into_iter().map(|x| x.expect("dense ids")).collect())
}

fn seven_vs_nine_note(spec: &str, symbolic: bool, distinct: usize) -> Option<String> {
    (symbolic && spec.trim() == "ptm").then(|| {
        format!(
            "{distinct} distinct symbolic values (the quotients d_i/d_(i-1), 0 <= i <= 6); \
             a cardinality of 9 is sometimes quoted for this set, but only these 7 occur"
        )
    })
}

fn run(cli: Cli) -> Result<()> {
    let seed = cli.seed;
    match cli.cmd {
        Cmd::Compute {
            seq,
            coeffs,
            horizon,
            symbolic,
            format,
            output,
        } => {
            let p = MetaFibParams::new(coeffs.a, coeffs.b);
            let values: Vec<String> = if symbolic {
                check_horizon(horizon, MAX_SYMBOLIC_F)?;
                if seq.v.is_some() {
                    return Err(CliError::Input("--symbolic compute supports a single sequence".into()));
                }
                compute_f_symbolic(&parse_seq(&seq.seq)?, horizon)
                    .iter()
                    .map(|x| x.to_string())
                    .collect()
            } else {
                check_horizon(horizon, MAX_RATIO_HORIZON)?;
                let u = parse_seq(&seq.seq)?;
                let f = match &seq.v {
                    Some(v) => {
                        let v = parse_seq(v)?;
                        f_tilde_word(p, &u.prefix(horizon + 1), &v.prefix(horizon + 1), horizon)
                    }
                    None => compute_f_numeric(p, &u, horizon),
                };
                f.iter().map(BigInt::to_string).collect()
            };
            match format {
                Format::Csv => write_csv(&output, &["n", "f"], values.iter().enumerate()),
                Format::Json => write_json(&output, &json!({ "f": values })),
            }
        }
        Cmd::Ratios {
            seq,
            coeffs,
            horizon,
            symbolic,
            format,
            output,
        } => {
            check_horizon(horizon, MAX_RATIO_HORIZON)?;
            if symbolic {
                let mut table = InternTable::with_seed(seed);
                let ids = symbolic_ids(&seq, horizon, &mut table)?;
                let rows: Vec<(usize, usize, String)> = ids
                    .iter()
                    .enumerate()
                    .map(|(n, &id)| (n, id, table.get(id).to_string()))
                    .collect();
                eprintln!("distinct values: {}", table.len());
                match format {
                    Format::Csv => write_csv(&output, &["n", "id", "h"], rows),
                    Format::Json => write_json(&output, &json!({ "horizon": horizon, "ratios": rows })),
                }
            } else {
                let h = numeric_ratios(&seq, MetaFibParams::new(coeffs.a, coeffs.b), horizon)?;
                let h = &h[..horizon.min(h.len())];
                let vs = value_set(h);
                eprintln!("distinct values: {}", vs.len());
                let rows: Vec<(usize, String, String)> = h
                    .iter()
                    .map(|p| {
                        let (e, d) = exact(&p.value);
                        (p.n, e, d)
                    })
                    .collect();
                match format {
                    Format::Csv => write_csv(&output, &["n", "h", "decimal"], rows),
                    Format::Json => write_json(
                        &output,
                        &json!({ "horizon": horizon, "distinct": vs.len(), "undefined": vs.undefined, "ratios": rows }),
                    ),
                }
            }
        }
        Cmd::Resets {
            seq,
            horizon,
            format,
            output,
        } => {
            check_horizon(horizon, MAX_RESET_HORIZON)?;
            let u = parse_seq(&seq.seq)?;
            let report = match &seq.v {
                Some(v) => reset_set_tilde(&u, &parse_seq(v)?, horizon),
                None => reset_set(&u, horizon),
            };
            match format {
                Format::Csv => write_csv(&output, &["position"], report.positions.iter().map(|p| (p,))),
                Format::Json => write_json(
                    &output,
                    &json!({
                        "horizon": report.horizon,
                        "count": report.positions.len(),
                        "gaps": report.gaps,
                        "max_gap_seen": report.max_gap_seen,
                    }),
                ),
            }
        }
        Cmd::Values {
            seq,
            coeffs,
            horizon,
            symbolic,
            format,
            output,
        } => {
            check_horizon(horizon, MAX_RATIO_HORIZON)?;
            let rows: Vec<(String, String, usize, usize, usize)>;
            let undefined;
            if symbolic {
                let mut table = InternTable::with_seed(seed);
                let ids = symbolic_ids(&seq, horizon, &mut table)?;
                let pts: Vec<RatioPoint<usize>> = ids
                    .iter()
                    .enumerate()
                    .map(|(n, &id)| RatioPoint { n, value: Some(id) })
                    .collect();
                let vs = value_set(&pts);
                undefined = vs.undefined;
                rows = vs
                    .entries
                    .iter()
                    .map(|e| (table.get(e.value).to_string(), String::new(), e.count, e.first, e.last))
                    .collect();
            } else {
                let h = numeric_ratios(&seq, MetaFibParams::new(coeffs.a, coeffs.b), horizon)?;
                let vs = value_set(&h[..horizon.min(h.len())]);
                undefined = vs.undefined;
                rows = vs
                    .entries
                    .iter()
                    .map(|e| (rational_string(&e.value), decimal(&e.value), e.count, e.first, e.last))
                    .collect();
            }
            let note = seven_vs_nine_note(&seq.seq, symbolic, rows.len());
            if let Some(n) = &note {
                eprintln!("note: {n}");
            }
            match format {
                Format::Csv => write_csv(&output, &["value", "decimal", "count", "first", "last"], rows),
                Format::Json => {
                    let values: Vec<_> = rows
                        .iter()
                        .map(|(v, d, c, f, l)| json!({"value": v, "decimal": d, "count": c, "first": f, "last": l}))
                        .collect();
                    write_json(
                        &output,
                        &json!({
                            "horizon": horizon,
                            "distinct": rows.len(),
                            "undefined": undefined,
                            "values": values,
                            "notes": note.into_iter().collect::<Vec<_>>(),
                        }),
                    )
                }
            }
        }
        Cmd::GuessDfao {
            seq,
            horizon,
            max_states,
            direction,
            output,
            labels,
        } => {
            check_horizon(horizon, MAX_RATIO_HORIZON)?;
            let mut table = InternTable::with_seed(seed);
            let ids = symbolic_ids(&seq, horizon, &mut table)?;
            let cfg = GuessConfig {
                horizon,
                max_states,
                direction: direction.into(),
                ..GuessConfig::default()
            };
            let k = guess_dfao(&ids, &cfg)?;
            let (k, names) = densify(&k, &table);
            eprintln!("states: {}, outputs: {}", k.num_states(), names.len());
            write_text(&output, &k.to_walnut())?;
            write_labels(&labels, &names)
        }
        Cmd::VerifyDfao {
            seq,
            dfao,
            labels,
            output,
        } => {
            if seq.v.is_some() {
                return Err(CliError::Input("verify-dfao supports a single driving sequence".into()));
            }
            let k = Dfao::<usize>::parse_walnut(&read(&dfao)?)?;
            let labels = read_labels(&labels)?;
            let u = parse_seq(&seq.seq)?.to_dfao()?;
            let cert = verify_ratio_dfao(&k, &u, &labels)?;
            write_json(&output, &cert)?;
            if cert.proved {
                Ok(())
            } else {
                let c = cert.counterexample().expect("unproved certificate has a failed check");
                Err(CliError::Counterexample(format!(
                    "counterexample: ids {:?}: label {} but the recurrence gives {}",
                    c.ids, c.actual, c.expected
                )))
            }
        }
        Cmd::Compare { left, right, output } => {
            let a = Dfao::<usize>::parse_walnut(&read(&left)?)?;
            let b = Dfao::<usize>::parse_walnut(&read(&right)?)?;
            let cmp = compare_dfaos(&a, &b, None)?;
            write_json(&output, &cmp)?;
            if cmp.equal {
                Ok(())
            } else {
                Err(CliError::Counterexample("automata differ".into()))
            }
        }
        Cmd::Transducer { c, output, labels } => {
            let mut table = InternTable::with_seed(seed);
            let tr = build_transducer(c, &mut table).map_err(transduce_error)?;
            eprintln!("states: {}", tr.states.len());
            write_text(&output, &tr.to_walnut())?;
            if labels.is_some() {
                write_json(&labels, &tr.labels(&table))?;
            }
            Ok(())
        }
        Cmd::Transduce { seq, c, output, labels } => {
            let mut table = InternTable::with_seed(seed);
            let u = parse_seq(&seq.seq)?.to_dfao()?;
            let h = match &seq.v {
                Some(v) => {
                    let v = parse_seq(v)?.to_dfao()?;
                    transduce_via_windows(WindowInput::Pair(&u, &v), c, &mut table)
                }
                None => transduce_via_windows(WindowInput::Single(&u), c, &mut table),
            }
            .map_err(transduce_error)?;
            let (h, names) = densify(&h, &table);
            eprintln!("states: {}, outputs: {}", h.num_states(), names.len());
            write_text(&output, &h.to_walnut())?;
            write_labels(&labels, &names)
        }
        Cmd::Gaps {
            seq,
            pattern,
            max_c,
            scan,
            output,
        } => {
            let pat = parse_bits(&pattern)?;
            if pat.is_empty() {
                return Err(CliError::Input("empty pattern".into()));
            }
            let u = parse_seq(&seq.seq)?;
            let block = u.to_dfao()?.block_dfa(&pat)?;
            let infinite = block.is_infinite()?;
            let report = block.gap_values(max_c)?;
            let scanned = scan.map(|n| {
                let word = u.prefix(n + pat.len());
                let hits: Vec<usize> = (0..n).filter(|&i| word[i..i + pat.len()] == pat[..]).collect();
                let gaps: std::collections::BTreeSet<usize> = hits.windows(2).map(|w| w[1] - w[0]).collect();
                json!({ "horizon": n, "occurrences": hits.len(), "gaps": gaps })
            });
            let gaps: Vec<_> = report
                .gaps
                .iter()
                .map(|(g, w)| json!({ "gap": g, "witness": w }))
                .collect();
            write_json(
                &output,
                &json!({
                    "pattern": pattern,
                    "max_c": max_c,
                    "infinite": infinite,
                    "gaps": gaps,
                    "exceeds_max_c": report.exceeds_c_max.map(|w| json!({ "witness": w })),
                    "scan": scanned,
                }),
            )?;
            match report.exceeds_c_max {
                Some(w) => Err(CliError::Unbounded(format!(
                    "an occurrence at {} is not followed by another within {max_c}",
                    w.map_or("?".into(), |n| n.to_string())
                ))),
                None if !infinite => Err(CliError::Unbounded("the block occurs only finitely often".into())),
                None => Ok(()),
            }
        }
        Cmd::Classify {
            pre,
            per,
            coeffs,
            orbit_output,
            orbit_steps,
            output,
        } => {
            let (pre, per) = (parse_bits(&pre)?, parse_bits(&per)?);
            let res = classify_periodic_u(&pre, &per, coeffs.a, coeffs.b).map_err(|e| CliError::Input(e.to_string()))?;
            write_json(&output, &res)?;
            if orbit_output.is_some() {
                let h = periodic_ratios(&pre, &per, coeffs.a, coeffs.b, orbit_steps);
                let rows = h.iter().take(orbit_steps).enumerate().map(|(n, x)| {
                    let (e, d) = exact(x);
                    (n, e, d)
                });
                write_csv(&orbit_output, &["n", "h", "decimal"], rows)?;
            }
            Ok(())
        }
        Cmd::Figure3 { horizon, output } => {
            check_horizon(horizon, MAX_RATIO_HORIZON)?;
            let u = BinarySeq::scaled(BinarySeq::ThueMorse, 2)?;
            let f = compute_f_numeric(MetaFibParams::new(1, 1), &u, horizon + 1);
            let h = compute_h_numeric(&f);
            for p in &h[1..=horizon] {
                if !p.defined() {
                    return Err(CliError::Invariant(format!("f({}) = 0", p.n)));
                }
            }
            let rows = h[1..=horizon].iter().map(|p| {
                let (e, d) = exact(&p.value);
                (p.n, e, d)
            });
            write_csv(&output, &["n", "h", "decimal"], rows)
        }
    }
}

fn transduce_error(e: TransduceError) -> CliError {
    match e {
        TransduceError::DepthOutOfRange { .. } | TransduceError::Syntax { .. } => CliError::Input(e.to_string()),
        TransduceError::NoReset { .. } => CliError::Unbounded(e.to_string()),
        TransduceError::Automaton(e) => e.into(),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Closed) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}
