//! The `lamcount` command line.
//!
//! Records go to stdout, diagnostics to stderr. Exit status: 0 success,
//! 2 invalid input, 3 resource cap reached, 4 self-check failure, 1 any
//! other error. A closed stdout ends the run quietly with status 0.

use std::collections::HashMap;
use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant, SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;
use serde::Serialize;
use thiserror::Error;

use crate::asymptotics::{self, AsymptoticsError, DEFAULT_TOL};
use crate::counting::{self, cache, CountError, Counter, Enumerator, Family, Filter, Scope};
use crate::sampler::{self, SamplerError, SizeWindow};
use crate::size_model::{SizeSpec, SpecError};
use crate::term::{self, RenderStyle, Term};

mod selfcheck;

pub use selfcheck::{run_selfcheck, CheckResult};

const DEFAULT_MAX_ATTEMPTS: u64 = 100_000_000;
const DEFAULT_SELFCHECK_N: u64 = 12;

#[derive(Debug, Parser)]
#[command(name = "lamcount", version, about = "Count, enumerate and sample De Bruijn lambda terms")]
pub struct Cli {
    /// Named size model: natural, less-natural or binary.
    #[arg(long, global = true)]
    preset: Option<String>,
    /// Size model as a,b,c,d.
    #[arg(long, global = true)]
    spec: Option<String>,
    /// Directory for cached count tables.
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,
    /// File of `key = value` defaults; command-line flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Omit the metadata record (and its timestamp).
    #[arg(long, global = true)]
    no_meta: bool,
    /// Largest size for exact counting; for `selfcheck`, the oracle range.
    #[arg(long, global = true)]
    max_n: Option<u64>,
    /// Sampler attempts per accepted term.
    #[arg(long, global = true)]
    max_attempts: Option<u64>,
    /// Wall-clock budget for sampling, in seconds.
    #[arg(long, global = true)]
    time_budget: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Exact counts.
    Count(CountArgs),
    /// Singularities and asymptotic constants.
    Asympt(AsymptArgs),
    /// Uniform random terms by Boltzmann sampling.
    Sample(SampleArgs),
    /// All terms of one size.
    Enumerate(EnumerateArgs),
    /// Term to binary lambda calculus.
    Encode(EncodeArgs),
    /// Binary lambda calculus to term.
    Decode(DecodeArgs),
    /// Structural statistics of a term.
    Stats(StatsArgs),
    /// Cross-validation of all modules.
    Selfcheck(SelfcheckArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Args)]
struct FamilyArgs {
    /// Openness bound.
    #[arg(long, default_value_t = 0)]
    m: u64,
    /// Exactly q abstractions.
    #[arg(long)]
    q: Option<u64>,
    /// At most q abstractions.
    #[arg(long)]
    upto_q: Option<u64>,
    /// Normal forms only.
    #[arg(long)]
    normal_form: bool,
    /// Every index at most h.
    #[arg(long, value_name = "H")]
    max_succ: Option<u64>,
    /// The superclass L_{m,N}.
    #[arg(long, value_name = "N")]
    superclass: Option<u64>,
    /// Ignore openness.
    #[arg(long)]
    unrestricted: bool,
    /// Terms that are not m-open.
    #[arg(long)]
    not_open: bool,
}

#[derive(Debug, Clone, Copy)]
enum Selector {
    Open,
    Q(u64),
    UptoQ(u64),
    NormalForm,
    MaxSucc(u64),
    Superclass(u64),
    Unrestricted,
    NotOpen,
}

impl FamilyArgs {
    fn selector(&self) -> Result<Selector, CliError> {
        let mut chosen = Vec::new();
        if let Some(q) = self.q {
            chosen.push(Selector::Q(q));
        }
        if let Some(q) = self.upto_q {
            chosen.push(Selector::UptoQ(q));
        }
        if self.normal_form {
            chosen.push(Selector::NormalForm);
        }
        if let Some(h) = self.max_succ {
            chosen.push(Selector::MaxSucc(h));
        }
        if let Some(n) = self.superclass {
            chosen.push(Selector::Superclass(n));
        }
        if self.unrestricted {
            chosen.push(Selector::Unrestricted);
        }
        if self.not_open {
            chosen.push(Selector::NotOpen);
        }
        match chosen.len() {
            0 => Ok(Selector::Open),
            1 => Ok(chosen[0]),
            _ => Err(CliError::Validation("choose at most one family selector".into())),
        }
    }
}

#[derive(Debug, Args)]
struct CountArgs {
    #[command(flatten)]
    family: FamilyArgs,
    /// Size (first size of a range with --n-max).
    #[arg(long)]
    n: u64,
    /// Last size of a range.
    #[arg(long)]
    n_max: Option<u64>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Series {
    RhoH,
    ClosedProportion,
}

#[derive(Debug, Args)]
struct AsymptArgs {
    /// Openness level of the leading constant.
    #[arg(long, default_value_t = 0)]
    m: u64,
    /// Truncation level of the superclass estimate.
    #[arg(long = "N")]
    top: Option<u64>,
    /// Emit a sequence instead of the constants.
    #[arg(long, value_enum)]
    series: Option<Series>,
    #[arg(long, default_value_t = 60)]
    h_max: u64,
    #[arg(long = "N-max", default_value_t = 100)]
    top_max: u64,
    /// Level of the reference constant for the closed proportion.
    #[arg(long = "N-ref", default_value_t = 200)]
    top_ref: u64,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TermFormat {
    Debruijn,
    Successors,
    Blc,
    Dot,
    Json,
}

#[derive(Debug, Args)]
struct SampleArgs {
    /// Openness bound of the sampled terms.
    #[arg(long, default_value_t = 0)]
    m: u64,
    /// Target size; the window is [(1-e) n, (1+e) n].
    #[arg(long)]
    size: Option<u64>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    min: Option<u64>,
    #[arg(long)]
    max: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 1)]
    count: u64,
    #[arg(long, value_enum)]
    format: Option<TermFormat>,
    /// Print batch statistics instead of the terms.
    #[arg(long)]
    stats: bool,
    /// Truncation level of the superclass.
    #[arg(long = "N")]
    top: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Style {
    Debruijn,
    Successors,
    Blc,
}

#[derive(Debug, Args)]
struct EnumerateArgs {
    #[command(flatten)]
    family: FamilyArgs,
    #[arg(long)]
    n: u64,
    #[arg(long, value_enum, default_value = "debruijn")]
    style: Style,
    /// Largest size that may be enumerated.
    #[arg(long, default_value_t = counting::enumerate::DEFAULT_ENUM_CAP)]
    cap: u64,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Debug, Args)]
struct EncodeArgs {
    term: String,
    /// Also write the packed binary form to this file.
    #[arg(long)]
    packed: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct DecodeArgs {
    /// Bit string of '0' and '1'.
    bits: Option<String>,
    /// Read the packed binary form from this file.
    #[arg(long)]
    packed: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "debruijn")]
    style: Style,
}

#[derive(Debug, Args)]
struct StatsArgs {
    term: String,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Debug, Args)]
struct SelfcheckArgs {
    #[arg(long, hide = true)]
    inject_fault: bool,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Resource(String),
    #[error("{0} self-check(s) failed")]
    SelfCheck(usize),
    #[error("{0}")]
    Numeric(String),
    #[error("{0}")]
    Io(#[from] io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Resource(_) => 3,
            CliError::SelfCheck(_) => 4,
            CliError::Numeric(_) | CliError::Io(_) => 1,
        }
    }
}

impl From<SpecError> for CliError {
    fn from(e: SpecError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<CountError> for CliError {
    fn from(e: CountError) -> Self {
        match e {
            CountError::ResourceLimit { .. } => CliError::Resource(e.to_string()),
            CountError::InvalidArgument(_) => CliError::Validation(e.to_string()),
        }
    }
}

impl From<AsymptoticsError> for CliError {
    fn from(e: AsymptoticsError) -> Self {
        match e {
            AsymptoticsError::InvalidArgument(_) => CliError::Validation(e.to_string()),
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<SamplerError> for CliError {
    fn from(e: SamplerError) -> Self {
        match e {
            SamplerError::AttemptsExhausted { .. } => CliError::Resource(e.to_string()),
            SamplerError::InvalidArgument(_) => CliError::Validation(e.to_string()),
            SamplerError::Asymptotics(e) => e.into(),
            SamplerError::NormalizationFailure { .. } => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<cache::CacheError> for CliError {
    fn from(e: cache::CacheError) -> Self {
        match e {
            cache::CacheError::Io(e) => CliError::Io(e),
            other => CliError::Validation(other.to_string()),
        }
    }
}

/// `key = value` lines; `#` starts a comment. Keys may use `-` or `_`.
#[derive(Debug, Default)]
struct ConfigFile {
    values: HashMap<String, String>,
}

impl ConfigFile {
    fn load(path: &Path) -> Result<ConfigFile, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("cannot read config {}: {e}", path.display())))?;
        let mut values = HashMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                CliError::Validation(format!("{}:{}: expected `key = value`", path.display(), i + 1))
            })?;
            values.insert(k.trim().replace('-', "_"), v.trim().to_string());
        }
        Ok(ConfigFile { values })
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    fn parse<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, CliError> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| CliError::Validation(format!("config: bad value {v:?} for `{key}`"))),
        }
    }

    fn value_enum<T: ValueEnum>(&self, key: &str) -> Result<Option<T>, CliError> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => T::from_str(v, true)
                .map(Some)
                .map_err(|_| CliError::Validation(format!("config: bad value {v:?} for `{key}`"))),
        }
    }
}

/// Settings shared by all commands after merging flags over the config.
struct Run {
    spec: SizeSpec,
    cache_dir: Option<PathBuf>,
    meta: bool,
    max_n: Option<u64>,
    max_attempts: u64,
    time_budget: Option<Duration>,
    config: ConfigFile,
}

fn resolve_spec(preset: Option<&str>, spec: Option<&str>) -> Result<Option<SizeSpec>, CliError> {
    match (preset, spec) {
        (Some(_), Some(_)) => Err(CliError::Validation("give either --preset or --spec, not both".into())),
        (Some(p), None) => Ok(Some(crate::size_model::preset_spec(p)?)),
        (None, Some(s)) => Ok(Some(s.parse()?)),
        (None, None) => Ok(None),
    }
}

impl Run {
    fn new(cli: &Cli) -> Result<Run, CliError> {
        let config = match &cli.config {
            Some(p) => ConfigFile::load(p)?,
            None => ConfigFile::default(),
        };
        let spec = match resolve_spec(cli.preset.as_deref(), cli.spec.as_deref())? {
            Some(s) => s,
            None => resolve_spec(config.get("preset"), config.get("spec"))?
                .unwrap_or_else(|| crate::size_model::Preset::Natural.spec()),
        };
        let cache_dir = cli
            .cache_dir
            .clone()
            .or_else(cache::env_cache_dir)
            .or_else(|| config.get("cache_dir").map(PathBuf::from));
        let max_n = cli.max_n.or(config.parse("max_n")?);
        let max_attempts = cli.max_attempts.or(config.parse("max_attempts")?).unwrap_or(DEFAULT_MAX_ATTEMPTS);
        if max_attempts == 0 || max_n == Some(0) {
            return Err(CliError::Validation("resource caps must be positive".into()));
        }
        let budget: Option<f64> = cli.time_budget.or(config.parse("time_budget")?);
        let time_budget = match budget {
            Some(s) if !(s > 0.0) || !s.is_finite() => {
                return Err(CliError::Validation("time budget must be positive".into()))
            }
            Some(s) => Some(Duration::from_secs_f64(s)),
            None => None,
        };
        let no_meta = cli.no_meta || config.parse::<bool>("no_meta")?.unwrap_or(false);
        Ok(Run { spec, cache_dir, meta: !no_meta, max_n, max_attempts, time_budget, config })
    }

    fn format(&self, flag: Option<Format>, default: Format) -> Result<Format, CliError> {
        Ok(flag.or(self.config.value_enum("format")?).unwrap_or(default))
    }

    fn meta(&self, out: &mut dyn Write, format: Format, command: &str) -> io::Result<()> {
        if !self.meta {
            return Ok(());
        }
        let timestamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        match format {
            Format::Json => {
                #[derive(Serialize)]
                struct Meta<'a> {
                    tool: &'static str,
                    version: &'static str,
                    command: &'a str,
                    spec: String,
                    timestamp: u64,
                }
                let meta = Meta {
                    tool: "lamcount",
                    version: env!("CARGO_PKG_VERSION"),
                    command,
                    spec: self.spec.to_string(),
                    timestamp,
                };
                writeln!(out, "{}", serde_json::json!({ "meta": meta }))
            }
            Format::Csv => writeln!(
                out,
                "# lamcount {} command={command} spec={} timestamp={timestamp}",
                env!("CARGO_PKG_VERSION"),
                self.spec
            ),
            Format::Text => Ok(()),
        }
    }
}

/// Parses the arguments, runs the command and returns the exit status.
pub fn main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    let result = run(&cli, &mut out).and_then(|()| out.flush().map_err(CliError::from));
    match result {
        Ok(()) => 0,
        Err(CliError::Io(e)) if e.kind() == io::ErrorKind::BrokenPipe => 0,
        Err(e) => {
            eprintln!("lamcount: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<(), CliError> {
    let run = Run::new(cli)?;
    match &cli.command {
        Command::Count(a) => cmd_count(&run, a, out),
        Command::Asympt(a) => cmd_asympt(&run, a, out),
        Command::Sample(a) => cmd_sample(&run, a, out),
        Command::Enumerate(a) => cmd_enumerate(&run, a, out),
        Command::Encode(a) => cmd_encode(a, out),
        Command::Decode(a) => cmd_decode(a, out),
        Command::Stats(a) => cmd_stats(&run, a, out),
        Command::Selfcheck(a) => cmd_selfcheck(&run, a, out),
    }
}

#[derive(Serialize)]
struct CountRecord {
    m: u64,
    n: u64,
    count: String,
}

/// Counter whose tables are read from and written back to the cache.
struct CachedCounter {
    counter: Counter,
    dir: Option<PathBuf>,
    loaded: HashMap<Family, (u64, u64)>,
}

impl CachedCounter {
    fn new(run: &Run) -> CachedCounter {
        let counter = match run.max_n {
            Some(cap) => Counter::with_cap(run.spec, cap),
            None => Counter::new(run.spec),
        };
        CachedCounter { counter, dir: run.cache_dir.clone(), loaded: HashMap::new() }
    }

    fn prepare(&mut self, family: Family) -> Result<(), CliError> {
        if self.loaded.contains_key(&family) {
            return Ok(());
        }
        let mut extent = (0, 0);
        if let Some(dir) = &self.dir {
            if let Some(t) = cache::load_table(dir, &self.counter.spec(), family)? {
                extent = (t.max_n(), t.max_level());
                self.counter.insert_table(t);
            }
        }
        self.loaded.insert(family, extent);
        Ok(())
    }

    fn save(&self) -> Result<(), CliError> {
        let Some(dir) = &self.dir else { return Ok(()) };
        for (family, &extent) in &self.loaded {
            if let Some(t) = self.counter.table(*family) {
                if (t.max_n(), t.max_level()) != extent {
                    cache::save_table(dir, t)?;
                }
            }
        }
        Ok(())
    }

    fn count(&mut self, sel: Selector, m: u64, n: u64) -> Result<BigUint, CliError> {
        let family = match sel {
            Selector::Open | Selector::NotOpen => Family::MOpen,
            Selector::Q(q) | Selector::UptoQ(q) => Family::QAbstractions { max_q: q },
            Selector::NormalForm => Family::NormalForm,
            Selector::MaxSucc(h) => Family::BoundedSuccessors { h },
            Selector::Superclass(top) => Family::Superclass { top },
            Selector::Unrestricted => Family::Unrestricted,
        };
        self.prepare(family)?;
        if let Selector::NotOpen = sel {
            self.prepare(Family::Unrestricted)?;
        }
        let c = &mut self.counter;
        Ok(match sel {
            Selector::Open => c.m_open(m, n)?,
            Selector::Q(q) => c.q_abstractions(m, q, n)?,
            Selector::UptoQ(q) => c.at_most_q(m, q, n)?,
            Selector::NormalForm => c.normal_form(m, n)?,
            Selector::MaxSucc(h) => c.bounded_successors(m, h, n)?,
            Selector::Superclass(top) => c.superclass(top, m, n)?,
            Selector::Unrestricted => c.unrestricted(n)?,
            Selector::NotOpen => c.not_m_open(m, n)?,
        })
    }
}

fn cmd_count(run: &Run, a: &CountArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let sel = a.family.selector()?;
    let format = run.format(a.format, Format::Json)?;
    let last = a.n_max.unwrap_or(a.n);
    if last < a.n {
        return Err(CliError::Validation(format!("--n-max {last} is below --n {}", a.n)));
    }
    let mut counter = CachedCounter::new(run);
    // fail on the cap before printing anything
    counter.count(sel, a.family.m, last)?;
    run.meta(out, format, "count")?;
    if format == Format::Csv {
        writeln!(out, "m,n,count")?;
    }
    for n in a.n..=last {
        let count = counter.count(sel, a.family.m, n)?.to_string();
        match format {
            Format::Json => {
                let rec = CountRecord { m: a.family.m, n, count };
                writeln!(out, "{}", serde_json::to_string(&rec).expect("serializable"))?
            }
            Format::Csv => writeln!(out, "{},{n},{count}", a.family.m)?,
            Format::Text => writeln!(out, "{} {n} {count}", a.family.m)?,
        }
    }
    counter.save()
}

#[derive(Serialize)]
struct AsymptRecord {
    rho: f64,
    a_inf: f64,
    b_inf: f64,
    rho_tilde: f64,
    ratio: f64,
    #[serde(rename = "C_estimate")]
    c_estimate: f64,
    #[serde(rename = "N")]
    top: u64,
    m: u64,
}

fn cmd_asympt(run: &Run, a: &AsymptArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let spec = run.spec;
    match a.series {
        Some(Series::RhoH) => {
            let format = run.format(a.format, Format::Csv)?;
            let rows = asymptotics::rho_h_series(&spec, a.h_max, DEFAULT_TOL)?;
            run.meta(out, format, "asympt")?;
            if format == Format::Csv {
                writeln!(out, "h,rho_h")?;
            }
            for (h, r) in rows {
                match format {
                    Format::Json => writeln!(out, "{}", serde_json::json!({ "h": h, "rho_h": r }))?,
                    Format::Csv => writeln!(out, "{h},{r}")?,
                    Format::Text => writeln!(out, "{h} {r}")?,
                }
            }
            return Ok(());
        }
        Some(Series::ClosedProportion) => {
            let format = run.format(a.format, Format::Csv)?;
            let rows = asymptotics::closed_proportion_series(&spec, a.top_max, a.top_ref)?;
            run.meta(out, format, "asympt")?;
            if format == Format::Csv {
                writeln!(out, "N,C,closed_proportion")?;
            }
            for r in rows {
                match format {
                    Format::Json => writeln!(
                        out,
                        "{}",
                        serde_json::json!({ "N": r.top, "C": r.constant, "closed_proportion": r.proportion })
                    )?,
                    Format::Csv => writeln!(out, "{},{},{}", r.top, r.constant, r.proportion)?,
                    Format::Text => writeln!(out, "{} {} {}", r.top, r.constant, r.proportion)?,
                }
            }
            return Ok(());
        }
        None => {}
    }
    let format = run.format(a.format, Format::Json)?;
    let top = match a.top {
        Some(t) => t,
        None => run.config.parse("N")?.unwrap_or(asymptotics::DEFAULT_N),
    };
    let sd = asymptotics::dominant_singularity(&spec, DEFAULT_TOL)?;
    let nf = asymptotics::normal_form_singularity(&spec, DEFAULT_TOL)?;
    let c = asymptotics::leading_constant_estimate(&spec, a.m, top)?;
    let rec = AsymptRecord {
        rho: sd.rho,
        a_inf: sd.a_inf,
        b_inf: sd.b_inf,
        rho_tilde: nf.rho_tilde,
        ratio: nf.ratio,
        c_estimate: c,
        top,
        m: a.m,
    };
    run.meta(out, format, "asympt")?;
    match format {
        Format::Json => writeln!(out, "{}", serde_json::to_string(&rec).expect("serializable"))?,
        Format::Csv => {
            writeln!(out, "rho,a_inf,b_inf,rho_tilde,ratio,C_estimate,N,m")?;
            writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                rec.rho, rec.a_inf, rec.b_inf, rec.rho_tilde, rec.ratio, rec.c_estimate, rec.top, rec.m
            )?
        }
        Format::Text => {
            writeln!(out, "rho        {}", rec.rho)?;
            writeln!(out, "a_inf      {}", rec.a_inf)?;
            writeln!(out, "b_inf      {}", rec.b_inf)?;
            writeln!(out, "rho_tilde  {}", rec.rho_tilde)?;
            writeln!(out, "ratio      {}", rec.ratio)?;
            writeln!(out, "C({}, {})   {}", rec.m, rec.top, rec.c_estimate)?;
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct SampleRecord {
    term: String,
    size: u64,
    attempts: u64,
    rejections: RejectionRecord,
    seed: u64,
    stream: u64,
}

#[derive(Serialize)]
struct RejectionRecord {
    oversize: u64,
    undersize: u64,
    unbound_index: u64,
}

impl From<sampler::Rejections> for RejectionRecord {
    fn from(r: sampler::Rejections) -> Self {
        RejectionRecord { oversize: r.oversize, undersize: r.undersize, unbound_index: r.unbound_index }
    }
}

#[derive(Serialize)]
struct StatsRecord {
    count: u64,
    mean_size: f64,
    mean_variables: f64,
    var_variables: f64,
    mean_abstractions: f64,
    var_abstractions: f64,
    variables_per_size: f64,
    variance_per_size: f64,
    variables_per_node: f64,
    attempts: u64,
    rejections: RejectionRecord,
    closed_proportion: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    seconds: Option<f64>,
}

fn cmd_sample(run: &Run, a: &SampleArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let window = match (a.size, a.min, a.max) {
        (Some(n), None, None) => {
            let eps = match a.epsilon {
                Some(e) => e,
                None => run.config.parse("epsilon")?.unwrap_or(sampler::DEFAULT_EPSILON),
            };
            SizeWindow::around(n, eps)?
        }
        (None, Some(lo), Some(hi)) if a.epsilon.is_none() => SizeWindow::new(lo, hi)?,
        _ => return Err(CliError::Validation("give either --size [--epsilon] or both --min and --max".into())),
    };
    if a.count == 0 {
        return Err(CliError::Validation("--count must be at least 1".into()));
    }
    let top = match a.top {
        Some(t) => t,
        None => run.config.parse("N")?.unwrap_or(sampler::DEFAULT_N),
    };
    let seed = match a.seed {
        Some(s) => s,
        None => run.config.parse("seed")?.unwrap_or(0),
    };
    let tables = sampler::build_tables(&run.spec, top, DEFAULT_TOL)?;
    let start = Instant::now();
    let check_budget = || match run.time_budget {
        Some(b) if start.elapsed() > b => {
            Err(CliError::Resource(format!("time budget of {:.3} s exceeded", b.as_secs_f64())))
        }
        _ => Ok(()),
    };

    if a.stats {
        let s = sampler::sample_batch_stats(&tables, a.m, window, a.count, seed, run.max_attempts)?;
        check_budget()?;
        let rec = StatsRecord {
            count: s.count,
            mean_size: s.mean_size,
            mean_variables: s.mean_variables,
            var_variables: s.var_variables,
            mean_abstractions: s.mean_abstractions,
            var_abstractions: s.var_abstractions,
            variables_per_size: s.variables_per_size,
            variance_per_size: s.variance_per_size,
            variables_per_node: s.variables_per_node,
            attempts: s.attempts,
            rejections: s.rejections.into(),
            closed_proportion: s.closed_proportion,
            seconds: run.meta.then_some(s.elapsed.as_secs_f64()),
        };
        run.meta(out, Format::Json, "sample")?;
        writeln!(out, "{}", serde_json::to_string(&rec).expect("serializable"))?;
        return Ok(());
    }

    let format = match a.format {
        Some(f) => f,
        None => run.config.value_enum("format")?.unwrap_or(TermFormat::Debruijn),
    };
    if format == TermFormat::Json {
        run.meta(out, Format::Json, "sample")?;
    }
    for i in 0..a.count {
        let r = sampler::sample_term(&tables, a.m, window, seed, i, run.max_attempts)?;
        match format {
            TermFormat::Debruijn => writeln!(out, "{}", term::render_term(&r.term, RenderStyle::Integers))?,
            TermFormat::Successors => writeln!(out, "{}", term::render_term(&r.term, RenderStyle::Successors))?,
            TermFormat::Blc => writeln!(out, "{}", term::encode_blc(&r.term))?,
            TermFormat::Dot => write!(out, "{}", term::render_dot(&r.term))?,
            TermFormat::Json => {
                let rec = SampleRecord {
                    term: r.term.to_string(),
                    size: r.size,
                    attempts: r.attempts,
                    rejections: r.rejections.into(),
                    seed: r.rng_seed,
                    stream: r.stream,
                };
                writeln!(out, "{}", serde_json::to_string(&rec).expect("serializable"))?
            }
        }
        check_budget()?;
    }
    Ok(())
}

fn render(t: &Term, style: Style) -> String {
    match style {
        Style::Debruijn => term::render_term(t, RenderStyle::Integers),
        Style::Successors => term::render_term(t, RenderStyle::Successors),
        Style::Blc => term::encode_blc(t),
    }
}

fn cmd_enumerate(run: &Run, a: &EnumerateArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let m = a.family.m;
    let (scope, filter) = match a.family.selector()? {
        Selector::Open => (Scope::Open(m), Filter::All),
        Selector::Q(q) => (Scope::Open(m), Filter::Abstractions(q)),
        Selector::NormalForm => (Scope::Open(m), Filter::NormalForm),
        Selector::MaxSucc(h) => (Scope::Open(m), Filter::MaxIndex(h)),
        Selector::Superclass(top) => {
            if m > top {
                return Err(CliError::Validation(format!("m = {m} exceeds N = {top}")));
            }
            (Scope::Open(m), Filter::Superclass(top))
        }
        Selector::Unrestricted => (Scope::Any, Filter::All),
        Selector::UptoQ(_) | Selector::NotOpen => {
            return Err(CliError::Validation("enumerate does not support --upto-q or --not-open".into()))
        }
    };
    let format = run.format(a.format, Format::Text)?;
    let e = Enumerator::new(run.spec, scope, filter).with_cap(a.cap);
    if a.n > a.cap {
        return Err(CountError::ResourceLimit { n: a.n, cap: a.cap }.into());
    }
    run.meta(out, format, "enumerate")?;
    if format == Format::Csv {
        writeln!(out, "term")?;
    }
    let mut failure = None;
    let _ = e.for_each(a.n, |t| {
        let s = render(t, a.style);
        let r = match format {
            Format::Json => writeln!(out, "{}", serde_json::json!({ "term": s })),
            Format::Csv | Format::Text => writeln!(out, "{s}"),
        };
        match r {
            Ok(()) => std::ops::ControlFlow::Continue(()),
            Err(err) => {
                failure = Some(err);
                std::ops::ControlFlow::Break(())
            }
        }
    })?;
    match failure {
        Some(e) => Err(e.into()),
        None => Ok(()),
    }
}

fn parse_term_arg(s: &str) -> Result<Term, CliError> {
    term::parse_term(s).map_err(|e| CliError::Validation(e.to_string()))
}

fn cmd_encode(a: &EncodeArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let t = parse_term_arg(&a.term)?;
    let bits = term::encode_blc(&t);
    if let Some(path) = &a.packed {
        let f = fs::File::create(path)?;
        term::write_packed(BufWriter::new(f), &bits).map_err(packed_error)?;
    }
    writeln!(out, "{bits}")?;
    Ok(())
}

fn packed_error(e: term::PackedError) -> CliError {
    match e {
        term::PackedError::Io(e) => CliError::Io(e),
        other => CliError::Validation(other.to_string()),
    }
}

fn cmd_decode(a: &DecodeArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let bits = match (&a.bits, &a.packed) {
        (Some(b), None) => b.trim().to_string(),
        (None, Some(path)) => {
            let f = fs::File::open(path)?;
            term::read_packed(io::BufReader::new(f)).map_err(packed_error)?
        }
        _ => return Err(CliError::Validation("give either a bit string or --packed FILE".into())),
    };
    let t = term::decode_blc(&bits).map_err(|e| CliError::Validation(e.to_string()))?;
    writeln!(out, "{}", render(&t, a.style))?;
    Ok(())
}

#[derive(Serialize)]
struct TermStats {
    term: String,
    spec: String,
    size: String,
    openness: u64,
    closed: bool,
    normal_form: bool,
    abstractions: u64,
    applications: u64,
    variables: u64,
    successors: u64,
    depth: u64,
    blc_bits: usize,
}

fn cmd_stats(run: &Run, a: &StatsArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let t = parse_term_arg(&a.term)?;
    let m = t.metrics();
    let openness = t.openness();
    let s = TermStats {
        term: t.to_string(),
        spec: run.spec.to_string(),
        size: run.spec.term_size(&t).to_string(),
        openness,
        closed: openness == 0,
        normal_form: t.is_normal_form(),
        abstractions: m.abstractions,
        applications: m.applications,
        variables: m.variables,
        successors: m.successors,
        depth: m.depth,
        blc_bits: term::encode_blc(&t).len(),
    };
    match run.format(a.format, Format::Json)? {
        Format::Json => writeln!(out, "{}", serde_json::to_string(&s).expect("serializable"))?,
        Format::Csv => {
            writeln!(out, "term,spec,size,openness,closed,normal_form,abstractions,applications,variables,successors,depth,blc_bits")?;
            writeln!(
                out,
                "\"{}\",\"{}\",{},{},{},{},{},{},{},{},{},{}",
                s.term,
                s.spec,
                s.size,
                s.openness,
                s.closed,
                s.normal_form,
                s.abstractions,
                s.applications,
                s.variables,
                s.successors,
                s.depth,
                s.blc_bits
            )?
        }
        Format::Text => {
            let v = serde_json::to_value(&s).expect("serializable");
            for (k, v) in v.as_object().expect("object") {
                let v = v.as_str().map(str::to_string).unwrap_or_else(|| v.to_string());
                writeln!(out, "{k}: {v}")?;
            }
        }
    }
    Ok(())
}

fn cmd_selfcheck(run: &Run, a: &SelfcheckArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let max_n = run.max_n.unwrap_or(DEFAULT_SELFCHECK_N);
    let results = run_selfcheck(max_n, a.inject_fault);
    let mut failed = 0;
    for r in &results {
        if !r.passed {
            failed += 1;
        }
        let status = if r.passed { "PASS" } else { "FAIL" };
        writeln!(out, "{status} {}: {}", r.name, r.detail)?;
    }
    if failed > 0 {
        Err(CliError::SelfCheck(failed))
    } else {
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (Result<(), CliError>, String) {
        let mut argv = vec!["lamcount", "--no-meta"];
        argv.extend_from_slice(args);
        let cli = Cli::try_parse_from(argv).unwrap();
        let mut out = Vec::new();
        let r = run(&cli, &mut out);
        (r, String::from_utf8(out).unwrap())
    }

    #[test]
    fn count_records() {
        let (r, out) = run_args(&["count", "--preset", "natural", "--m", "0", "--n", "4"]);
        r.unwrap();
        assert_eq!(out, "{\"m\":0,\"n\":4,\"count\":\"3\"}\n");
        let (_, out) = run_args(&["count", "--preset", "binary", "--n", "4"]);
        assert!(out.contains("\"count\":\"1\""));
    }

    #[test]
    fn invalid_spec_is_a_validation_error() {
        let (r, _) = run_args(&["count", "--spec", "0,2,2,2", "--m", "0", "--n", "1"]);
        let e = r.unwrap_err();
        assert_eq!(e.exit_code(), 2);
        assert!(e.to_string().contains("gcd"));
    }

    #[test]
    fn encode_and_enumerate() {
        let (_, out) = run_args(&["encode", "\\1"]);
        assert_eq!(out, "0010\n");
        let (_, out) = run_args(&["enumerate", "--preset", "natural", "--m", "0", "--n", "5"]);
        assert_eq!(out.lines().count(), 6);
    }

    #[test]
    fn resource_cap_exit_code() {
        let (r, out) = run_args(&["--max-n", "10", "count", "--n", "11"]);
        assert_eq!(r.unwrap_err().exit_code(), 3);
        assert!(out.is_empty());
    }
}
