//! The `guesswork` command-line front end.
//!
//! Every command reads a source file, evaluates one of the library's
//! quantities and writes CSV with a `#`-prefixed `key = value` header.
//! Exit codes: 0 success, 1 I/O failure, 2 invalid source or arguments,
//! 3 numerical failure, 4 resource cap exceeded.

pub mod grid;
pub mod source_file;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use thiserror::Error;

use crate::error::Error;
use crate::oracle::{exact_table, fmt_float, DEFAULT_ENUMERATION_CAP};
use crate::rate::{ApproxQuery, RateFunction, RateValue, DEFAULT_ALPHA_MAX};
use crate::scgf::ScgfCurve;
use crate::sources::SourceSpec;

pub use grid::{Grid, KList, Ranks};
pub use source_file::{SourceFile, SourceKind};

pub const DEFAULT_ALPHA_GRID: &str = "-0.9:5:60";
pub const DEFAULT_RATE_POINTS: usize = 101;
pub const DEFAULT_RANKS: &str = "log-uniform:200";

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } => 1,
            CliError::Usage(_) => 2,
            CliError::Core(e) => match e {
                Error::Numerical(_) | Error::NoConvergence { .. } => 3,
                Error::CapExceeded { .. } => 4,
                _ => 2,
            },
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Unit {
    #[default]
    Nats,
    Bits,
}

impl Unit {
    /// Divisor applied to log-valued outputs.
    pub fn scale(&self) -> f64 {
        match self {
            Unit::Nats => 1.0,
            Unit::Bits => std::f64::consts::LN_2,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Unit::Nats => "nats",
            Unit::Bits => "bits",
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "guesswork", version, about = "Guesswork large deviations for i.i.d. and Markov sources")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    Scgf,
    Exact,
    Compare,
    Rate,
    Validate,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Lambda(alpha) and Lambda'(alpha) on an alpha grid, with gamma, the
    /// turn, the support rate and the Shannon slope in the header
    Scgf(RunArgs),
    /// Exact guesswork table for each k, with moment and entropy summaries
    Exact(RunArgs),
    /// Exact log P(G = n) against the rate-function approximations
    Compare(RunArgs),
    /// The rate function on an x grid with segment labels
    Rate(RunArgs),
    /// Check a source file and list any violated invariants
    Validate(RunArgs),
}

impl Command {
    fn split(self) -> (CommandKind, RunArgs) {
        match self {
            Command::Scgf(a) => (CommandKind::Scgf, a),
            Command::Exact(a) => (CommandKind::Exact, a),
            Command::Compare(a) => (CommandKind::Compare, a),
            Command::Rate(a) => (CommandKind::Rate, a),
            Command::Validate(a) => (CommandKind::Validate, a),
        }
    }
}

#[derive(Debug, Clone, Default, clap::Args)]
pub struct RunArgs {
    /// Source-spec TOML file
    #[arg(long)]
    pub source: Option<PathBuf>,
    /// Analysis config TOML file; command-line flags take precedence
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Word lengths, comma separated
    #[arg(long)]
    pub k: Option<KList>,
    /// alpha values as MIN:MAX:COUNT or a comma list
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<Grid>,
    /// x values (nats) as MIN:MAX:COUNT or a comma list
    #[arg(long, allow_hyphen_values = true)]
    pub x: Option<Grid>,
    /// Ranks as a comma list or log-uniform:COUNT
    #[arg(long)]
    pub ranks: Option<Ranks>,
    #[arg(long, value_enum)]
    pub unit: Option<Unit>,
    /// Output file; stdout when absent
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Cap on enumerated words or type classes
    #[arg(long)]
    pub cap: Option<u64>,
    /// Initial upper end of the alpha search for the conjugate
    #[arg(long)]
    pub alpha_max: Option<f64>,
    /// compare: emit k^-1 log P against x = k^-1 log n
    #[arg(long)]
    pub scaled: bool,
}

/// Config-file form of [`RunArgs`]. Paths are relative to the config file.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    source: Option<PathBuf>,
    k: Option<Vec<usize>>,
    alpha: Option<String>,
    x: Option<String>,
    ranks: Option<String>,
    unit: Option<Unit>,
    out: Option<PathBuf>,
    cap: Option<u64>,
    alpha_max: Option<f64>,
    scaled: Option<bool>,
}

/// A fully resolved run description.
#[derive(Debug, Clone)]
pub struct AnalysisConfig {
    pub source: PathBuf,
    pub k: Vec<usize>,
    pub alpha: Option<Grid>,
    pub x: Option<Grid>,
    pub ranks: Ranks,
    pub unit: Unit,
    pub out: Option<PathBuf>,
    pub cap: u64,
    pub alpha_max: f64,
    pub scaled: bool,
}

impl AnalysisConfig {
    pub fn resolve(args: RunArgs) -> Result<Self, CliError> {
        let file = match &args.config {
            Some(path) => {
                let text = fs::read_to_string(path).map_err(io_err(path))?;
                let cfg: ConfigFile = toml::from_str(&text)
                    .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
                let base = path.parent().unwrap_or(Path::new(""));
                ConfigFile {
                    source: cfg.source.map(|p| base.join(p)),
                    out: cfg.out.map(|p| base.join(p)),
                    ..cfg
                }
            }
            None => ConfigFile::default(),
        };
        let parse = |s: Option<String>, what: &str| -> Result<Option<Grid>, CliError> {
            s.map(|s| s.parse().map_err(|e| CliError::Usage(format!("config {what}: {e}"))))
                .transpose()
        };
        let source = args
            .source
            .or(file.source)
            .ok_or_else(|| CliError::Usage("--source is required".into()))?;
        let k = match (args.k, file.k) {
            (Some(KList(k)), _) => k,
            (None, Some(k)) => {
                if k.contains(&0) {
                    return Err(CliError::Usage("config k: word lengths must be >= 1".into()));
                }
                k
            }
            (None, None) => Vec::new(),
        };
        let ranks = match (args.ranks, file.ranks) {
            (Some(r), _) => r,
            (None, Some(s)) => s.parse().map_err(|e| CliError::Usage(format!("config ranks: {e}")))?,
            (None, None) => DEFAULT_RANKS.parse().expect("default ranks parse"),
        };
        let alpha_max = args.alpha_max.or(file.alpha_max).unwrap_or(DEFAULT_ALPHA_MAX);
        if !(alpha_max > 0.0 && alpha_max.is_finite()) {
            return Err(CliError::Usage(format!("alpha_max = {alpha_max} must be positive")));
        }
        Ok(Self {
            source,
            k,
            alpha: args.alpha.map_or_else(|| parse(file.alpha, "alpha"), |g| Ok(Some(g)))?,
            x: args.x.map_or_else(|| parse(file.x, "x"), |g| Ok(Some(g)))?,
            ranks,
            unit: args.unit.or(file.unit).unwrap_or_default(),
            out: args.out.or(file.out),
            cap: args.cap.or(file.cap).unwrap_or(DEFAULT_ENUMERATION_CAP),
            alpha_max,
            scaled: args.scaled || file.scaled.unwrap_or(false),
        })
    }
}

/// One CSV document; `suffix` distinguishes per-k files.
#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub suffix: Option<String>,
    pub text: String,
}

#[derive(Default)]
struct Csv {
    text: String,
}

impl Csv {
    fn meta(&mut self, key: &str, value: impl std::fmt::Display) -> &mut Self {
        let _ = writeln!(self.text, "# {key} = {value}");
        self
    }

    fn row<I: IntoIterator<Item = S>, S: AsRef<str>>(&mut self, cells: I) -> &mut Self {
        let cells: Vec<String> = cells.into_iter().map(|c| c.as_ref().to_string()).collect();
        let _ = writeln!(self.text, "{}", cells.join(","));
        self
    }
}

struct Loaded {
    kind: SourceKind,
    spec: SourceSpec,
}

fn load_source(path: &Path) -> Result<Loaded, CliError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let file = SourceFile::parse(&text)?;
    let kind = file.kind;
    Ok(Loaded {
        kind,
        spec: file.into_spec()?,
    })
}

fn source_meta(csv: &mut Csv, cmd: &str, src: &Loaded, unit: Unit) {
    csv.meta("command", cmd)
        .meta("source_type", src.kind.label())
        .meta("m", src.spec.alphabet().size())
        .meta("unit", unit.label());
}

fn curve_meta(csv: &mut Csv, curve: &ScgfCurve, unit: Unit) {
    let s = unit.scale();
    let turn = curve.turn();
    csv.meta("gamma", fmt_float(curve.gamma() / s))
        .meta("turn", fmt_float(turn.value / s))
        .meta("turn_converged", turn.converged)
        .meta("turn_classified", turn.class.map_or("none", |c| c.label()))
        .meta("support_rate", fmt_float(curve.support_rate() / s))
        .meta("shannon_slope", fmt_float(curve.shannon_slope() / s));
}

pub fn cmd_scgf(cfg: &AnalysisConfig) -> Result<Vec<Output>, CliError> {
    let src = load_source(&cfg.source)?;
    let curve = ScgfCurve::new(&src.spec)?;
    let s = cfg.unit.scale();
    let alphas = match &cfg.alpha {
        Some(g) => g.values(),
        None => DEFAULT_ALPHA_GRID.parse::<Grid>().expect("default grid").values(),
    };
    let mut csv = Csv::default();
    source_meta(&mut csv, "scgf", &src, cfg.unit);
    curve_meta(&mut csv, &curve, cfg.unit);
    csv.row(["alpha", "lambda", "lambda_prime"]);
    for a in alphas {
        // Lambda is flat below -1; at -1 itself this reports the left slope
        let slope = if a <= -1.0 { 0.0 } else { curve.lambda_prime(a)? };
        csv.row([
            fmt_float(a),
            fmt_float(curve.lambda(a)? / s),
            fmt_float(slope / s),
        ]);
    }
    Ok(vec![Output {
        suffix: None,
        text: csv.text,
    }])
}

fn resolve_ks(cfg: &AnalysisConfig, spec: &SourceSpec) -> Result<Vec<usize>, CliError> {
    match (spec.fixed_length(), cfg.k.is_empty()) {
        (Some(len), true) => Ok(vec![len]),
        (Some(len), false) => {
            if let Some(&bad) = cfg.k.iter().find(|&&k| k != len) {
                return Err(Error::InvalidParameter(format!(
                    "this source only defines words of length {len}, not {bad}"
                ))
                .into());
            }
            Ok(cfg.k.clone())
        }
        (None, true) => Err(CliError::Usage("--k is required for this source".into())),
        (None, false) => Ok(cfg.k.clone()),
    }
}

fn per_k_outputs(ks: &[usize], texts: Vec<String>) -> Vec<Output> {
    let many = ks.len() > 1;
    ks.iter()
        .zip(texts)
        .map(|(k, text)| Output {
            suffix: many.then(|| format!("_k{k}")),
            text,
        })
        .collect()
}

pub fn cmd_exact(cfg: &AnalysisConfig) -> Result<Vec<Output>, CliError> {
    let src = load_source(&cfg.source)?;
    let ks = resolve_ks(cfg, &src.spec)?;
    let s = cfg.unit.scale();
    let curve = match &src.spec {
        SourceSpec::Markov(_) => Some(ScgfCurve::new(&src.spec)?),
        _ => None,
    };
    let alphas = cfg.alpha.as_ref().map(Grid::values).unwrap_or_default();
    let mut texts = Vec::with_capacity(ks.len());
    for &k in &ks {
        let table = exact_table(&src.spec, k, cfg.cap)?;
        let mut csv = Csv::default();
        source_meta(&mut csv, "exact", &src, cfg.unit);
        csv.meta("k", k)
            .meta("levels", table.levels().len())
            .meta("total_words", table.total_words().display())
            .meta("zero_probability_words", table.zero_count().display());
        if let Some(c) = table.compositions() {
            csv.meta("type_classes", c);
        }
        csv.meta("top_level_count", table.empirical_turn_count().display());
        if let Some(curve) = &curve {
            csv.meta("critical_word_count", curve.critical_word_count(k)?.display());
        }
        csv.meta("expected_log_guesswork_per_letter", fmt_float(table.expected_log_guesswork() / s))
            .meta("shannon_entropy_per_letter", fmt_float(table.shannon_entropy() / s));
        for &a in &alphas {
            let m = table.scaled_log_moment(a);
            csv.meta(&format!("scaled_log_moment[alpha={a}]"), fmt_float(m.scaled_log_moment / s));
        }
        csv.text.push_str(&table.to_csv(s));
        texts.push(csv.text);
    }
    Ok(per_k_outputs(&ks, texts))
}

pub fn cmd_compare(cfg: &AnalysisConfig) -> Result<Vec<Output>, CliError> {
    let src = load_source(&cfg.source)?;
    if cfg.k.is_empty() {
        return Err(CliError::Usage("--k is required for compare".into()));
    }
    let rate = RateFunction::with_alpha_max(ScgfCurve::new(&src.spec)?, cfg.alpha_max);
    let s = cfg.unit.scale();
    let m = src.spec.alphabet().size();
    let mut texts = Vec::with_capacity(cfg.k.len());
    for &k in &cfg.k {
        let table = exact_table(&src.spec, k, cfg.cap)?;
        let mut csv = Csv::default();
        source_meta(&mut csv, "compare", &src, cfg.unit);
        csv.meta("k", k)
            .meta("gamma", fmt_float(rate.gamma() / s))
            .meta("turn", fmt_float(rate.turn() / s))
            .meta("scaled", cfg.scaled);
        if cfg.scaled {
            csv.row(["k", "n", "x", "exact_scaled", "curve"]);
        } else {
            csv.row(["k", "n", "log_n", "x", "exact", "approx", "estimate", "gap"]);
        }
        let kf = k as f64;
        for (n, log_n) in cfg.ranks.log_ranks(k, m) {
            let exact = match n {
                Some(n) => table.guesswork_pmf(n),
                None => table.guesswork_pmf_log_rank(log_n),
            };
            // ranks past the positive-probability words but within m^k
            let exact = match exact {
                Err(Error::RankOutOfRange(_)) if log_n <= kf * rate.log_m() + 1e-9 => f64::NEG_INFINITY,
                other => other?,
            };
            let q = ApproxQuery::from_log_rank(k, log_n)?;
            let n_cell = n.map(|n| n.to_string()).unwrap_or_default();
            if cfg.scaled {
                let curve = match rate.rate_at(q.x())? {
                    RateValue::Infinite => f64::NEG_INFINITY,
                    r => -q.x() - r.as_f64(),
                };
                csv.row([
                    k.to_string(),
                    n_cell,
                    fmt_float(q.x() / s),
                    fmt_float(exact / kf / s),
                    fmt_float(curve / s),
                ]);
            } else {
                let approx = rate.approx_pmf(&q)?;
                let estimate = rate.nth_word_prob_estimate(&q)?;
                csv.row([
                    k.to_string(),
                    n_cell,
                    fmt_float(log_n / s),
                    fmt_float(q.x() / s),
                    fmt_float(exact / s),
                    fmt_float(approx / s),
                    fmt_float(estimate / s),
                    fmt_float((exact - approx) / s),
                ]);
            }
        }
        texts.push(csv.text);
    }
    Ok(per_k_outputs(&cfg.k, texts))
}

pub fn cmd_rate(cfg: &AnalysisConfig) -> Result<Vec<Output>, CliError> {
    let src = load_source(&cfg.source)?;
    let curve = ScgfCurve::new(&src.spec)?;
    let rate = RateFunction::with_alpha_max(curve, cfg.alpha_max);
    let s = cfg.unit.scale();
    let xs = match &cfg.x {
        Some(g) => g.values(),
        None => Grid::Range {
            min: 0.0,
            max: rate.log_m(),
            count: DEFAULT_RATE_POINTS,
        }
        .values(),
    };
    let mut csv = Csv::default();
    source_meta(&mut csv, "rate", &src, cfg.unit);
    curve_meta(&mut csv, rate.curve(), cfg.unit);
    csv.row(["x", "rate", "segment"]);
    for (x, r) in rate.rate_curve(&xs)? {
        csv.row([fmt_float(x / s), fmt_float(r.as_f64() / s), r.segment().label().to_string()]);
    }
    Ok(vec![Output {
        suffix: None,
        text: csv.text,
    }])
}

pub fn cmd_validate(cfg: &AnalysisConfig) -> Result<Vec<Output>, CliError> {
    let src = load_source(&cfg.source)?;
    let mut csv = Csv::default();
    csv.meta("command", "validate")
        .meta("source_type", src.kind.label())
        .meta("m", src.spec.alphabet().size());
    if let Some(len) = src.spec.fixed_length() {
        csv.meta("k", len);
    }
    csv.meta("status", "valid");
    Ok(vec![Output {
        suffix: None,
        text: csv.text,
    }])
}

/// `out` with `suffix` inserted before the extension.
fn suffixed(out: &Path, suffix: &str) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let name = match out.extension() {
        Some(ext) => format!("{stem}{suffix}.{}", ext.to_string_lossy()),
        None => format!("{stem}{suffix}"),
    };
    out.with_file_name(name)
}

/// Run one command, returning the text that goes to stdout.
pub fn execute(command: Command) -> Result<String, CliError> {
    let (kind, args) = command.split();
    let cfg = AnalysisConfig::resolve(args)?;
    let outputs = match kind {
        CommandKind::Scgf => cmd_scgf(&cfg)?,
        CommandKind::Exact => cmd_exact(&cfg)?,
        CommandKind::Compare => cmd_compare(&cfg)?,
        CommandKind::Rate => cmd_rate(&cfg)?,
        CommandKind::Validate => cmd_validate(&cfg)?,
    };
    let mut stdout = String::new();
    for o in outputs {
        match (&cfg.out, &o.suffix) {
            (Some(out), suffix) => {
                let path = suffix.as_deref().map_or_else(|| out.clone(), |s| suffixed(out, s));
                fs::write(&path, &o.text).map_err(io_err(&path))?;
            }
            (None, _) => stdout.push_str(&o.text),
        }
    }
    Ok(stdout)
}
