use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};
use wtgf::bounds::{check_hypothesis, erasure_rates, FactorizationKG, SpecialCase};
use wtgf::channels::{classify, embed_parallel, ErasureParams, ProbeConfig, WtgfChannel};
use wtgf::optimize::{maximize, AuxCaps, Factors, Objective, RateReport, SearchConfig, SearchMode};
use wtgf::simkit::fixtures::{noiseless_session, tiny_leakage, SchemeFixture};
use wtgf::simkit::{
    build_codebook, derive_scheme_rates, estimate_error, exact_leakage_tiny, monte_carlo_leakage, random_messages,
    run_session, Slacks, Strategy, TypicalityConfig, ENUMERATION_BUDGET,
};

use crate::error::CliError;
use crate::report::{to_value, Report};
use crate::spec::{load_channel, Channel, ChannelSpecFile};

#[derive(Debug, Parser)]
#[command(name = "wtgf", version, about = "Rate bounds for wiretap channels with generalized feedback")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Channel spec file (JSON).
    #[arg(long)]
    pub channel: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 64)]
    pub restarts: usize,
    /// Grid step denominator.
    #[arg(long, default_value_t = 8)]
    pub grid: u32,
    /// Auxiliary cardinality caps, e.g. `q=1,u=2,v=2,t=1`.
    #[arg(long)]
    pub caps: Option<String>,
    /// Use the full cardinality bounds for uncapped auxiliaries.
    #[arg(long)]
    pub full_caps: bool,
    #[arg(long, value_enum, default_value_t = Mode::Random)]
    pub mode: Mode,
    /// Write the report here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Accepted deviation of each row sum from one.
    #[arg(long, default_value_t = 1e-9)]
    pub tolerance: f64,
    /// Random probes of the less-noisy test.
    #[arg(long, default_value_t = 512)]
    pub probes: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Random,
    Grid,
    Hybrid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Bound {
    Secrecy,
    Sk,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StrategyArg {
    Kg1,
    Kg2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Fixture {
    NoiselessSession,
    TinyLeakage,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LeakageMethodArg {
    Exact,
    MonteCarlo,
}

/// A coding scheme: a built-in fixture or a channel plus factors.
#[derive(Debug, Clone, Args)]
pub struct SchemeArgs {
    #[arg(long, value_enum)]
    pub fixture: Option<Fixture>,
    /// Eve's flip probability for the tiny-leakage fixture; omitted means Eve sees nothing.
    #[arg(long)]
    pub eve_flip: Option<f64>,
    /// Key-generation factors (JSON) for `--channel`.
    #[arg(long)]
    pub factors: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = StrategyArg::Kg1)]
    pub strategy: StrategyArg,
    /// Blocklength.
    #[arg(long, default_value_t = 12)]
    pub n: usize,
    /// Blocks per session.
    #[arg(long, default_value_t = 4)]
    pub b: usize,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Degradedness and less-noisy verdicts.
    Classify {
        #[command(flatten)]
        common: Common,
    },
    /// Maximize the key-generation inner bound.
    InnerKg {
        #[command(flatten)]
        common: Common,
        /// Force U = X.
        #[arg(long)]
        u_is_x: bool,
    },
    /// Maximize the secret-key inner bound.
    SkInner {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        u_is_x: bool,
    },
    /// Maximize an outer bound of the parallel-sources model.
    Outer {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = Bound::Secrecy)]
        bound: Bound,
    },
    /// Capacity of a closed-form special case of the parallel-sources model.
    SpecialCase {
        #[command(flatten)]
        common: Common,
        /// One of P1..P6.
        #[arg(long)]
        case: SpecialCase,
        /// Evaluate even when the hypothesis is refuted or unproven.
        #[arg(long)]
        assume_hypothesis: bool,
    },
    /// Secrecy rate with perfect output feedback.
    Thm5 {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        u_is_x: bool,
    },
    /// Secrecy rate of a state-dependent channel with causal state.
    Thm6 {
        #[command(flatten)]
        common: Common,
    },
    /// Closed-form rates of the binary erasure example.
    Erasure {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        delta_e: f64,
    },
    /// Estimate the session error probability of the coding scheme.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        scheme: SchemeArgs,
        #[arg(long, default_value_t = 200)]
        sessions: u64,
        /// Include the block trace of one session.
        #[arg(long)]
        trace: bool,
    },
    /// Leakage of a fixed codebook to Eve.
    Leakage {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        scheme: SchemeArgs,
        #[arg(long, value_enum, default_value_t = LeakageMethodArg::Exact)]
        method: LeakageMethodArg,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        /// Measure the leakage of the generated keys as well.
        #[arg(long)]
        key: bool,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Classify { .. } => "classify",
            Command::InnerKg { .. } => "inner-kg",
            Command::SkInner { .. } => "sk-inner",
            Command::Outer { .. } => "outer",
            Command::SpecialCase { .. } => "special-case",
            Command::Thm5 { .. } => "thm5",
            Command::Thm6 { .. } => "thm6",
            Command::Erasure { .. } => "erasure",
            Command::Simulate { .. } => "simulate",
            Command::Leakage { .. } => "leakage",
        }
    }

    fn common(&self) -> &Common {
        match self {
            Command::Classify { common }
            | Command::InnerKg { common, .. }
            | Command::SkInner { common, .. }
            | Command::Outer { common, .. }
            | Command::SpecialCase { common, .. }
            | Command::Thm5 { common, .. }
            | Command::Thm6 { common }
            | Command::Erasure { common, .. }
            | Command::Simulate { common, .. }
            | Command::Leakage { common, .. } => common,
        }
    }
}

/// Parse `q=1,u=2` into caps.
pub fn parse_caps(s: &str) -> Result<AuxCaps, CliError> {
    let mut caps = AuxCaps::default();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| CliError::Validation(format!("cap `{part}` is not of the form name=value")))?;
        let v: usize = v
            .trim()
            .parse()
            .map_err(|_| CliError::Validation(format!("cap `{part}` is not a count")))?;
        let slot = match k.trim().to_ascii_lowercase().as_str() {
            "q" => &mut caps.q,
            "u" => &mut caps.u,
            "v" => &mut caps.v,
            "t" => &mut caps.t,
            other => return Err(CliError::Validation(format!("unknown auxiliary `{other}` in --caps"))),
        };
        *slot = Some(v);
    }
    Ok(caps)
}

fn search_config(c: &Common, u_is_x: bool, assume_hypothesis: bool) -> Result<SearchConfig, CliError> {
    Ok(SearchConfig {
        seed: c.seed,
        restarts: c.restarts,
        grid_den: c.grid,
        caps: c.caps.as_deref().map(parse_caps).transpose()?.unwrap_or_default(),
        full_caps: c.full_caps,
        mode: match c.mode {
            Mode::Random => SearchMode::RandomRestart,
            Mode::Grid => SearchMode::ExhaustiveGrid,
            Mode::Hybrid => SearchMode::Hybrid,
        },
        u_is_x,
        probe: probe_config(c),
        assume_hypothesis,
        ..SearchConfig::default()
    })
}

fn probe_config(c: &Common) -> ProbeConfig {
    ProbeConfig {
        probes: c.probes,
        seed: c.seed,
        ..ProbeConfig::default()
    }
}

fn require_channel(c: &Common) -> Result<(&Path, ChannelSpecFile, Channel), CliError> {
    let path = c
        .channel
        .as_deref()
        .ok_or_else(|| CliError::Validation("--channel is required".into()))?;
    let (spec, ch) = load_channel(path, c.tolerance)?;
    Ok((path, spec, ch))
}

fn channel_echo(path: &Path, spec: &ChannelSpecFile, ch: &Channel) -> Value {
    let kind = to_value(&spec.body).ok().and_then(|v| v.get("kind").cloned()).unwrap_or(Value::Null);
    json!({
        "path": path.display().to_string(),
        "kind": kind,
        "family": ch.family(),
        "name": spec.name,
    })
}

fn wtgf_of(ch: &Channel) -> Result<WtgfChannel, CliError> {
    match ch {
        Channel::Wtgf(w) => Ok(w.clone()),
        Channel::Parallel(p) => Ok(embed_parallel(p)),
        Channel::State(_) => Err(CliError::Validation("this command needs a WTC-GF or parallel-sources channel".into())),
    }
}

/// Move the run-dependent fields of a rate report into the diagnostics.
fn split_rate_report(r: &RateReport, report: &mut Report) -> Result<(), CliError> {
    let Value::Object(mut result) = to_value(r)? else {
        unreachable!("a struct serializes to an object")
    };
    for key in ["evaluations", "per_restart_bests", "label", "wall_time_secs"] {
        if let Some(v) = result.remove(key) {
            report.diagnostics.insert(key.into(), v);
        }
    }
    report.result = result;
    Ok(())
}

fn optimize(
    objective: Objective,
    c: &Common,
    cfg: SearchConfig,
    extra: Map<String, Value>,
    report: &mut Report,
) -> Result<Option<String>, CliError> {
    let (path, spec, ch) = require_channel(c)?;
    report.channel = channel_echo(path, &spec, &ch);
    report.config.insert("search".into(), to_value(&cfg)?);
    report.config.insert("objective".into(), to_value(&objective)?);
    report.config.extend(extra);
    let r = maximize(objective, ch.as_ref(), &cfg)?;
    split_rate_report(&r, report)?;
    Ok(r.best_bits.is_none().then(|| "no feasible point was found".to_string()))
}

fn classify_command(c: &Common, report: &mut Report) -> Result<(), CliError> {
    let (path, spec, ch) = require_channel(c)?;
    report.channel = channel_echo(path, &spec, &ch);
    let probe = probe_config(c);
    report.config.insert("probe".into(), to_value(&probe)?);
    match &ch {
        Channel::Wtgf(w) => {
            let cls = classify(&w.bob_kernel(), &w.eve_kernel(), &probe)?;
            report.result.insert("main".into(), to_value(&cls)?);
            report.result.insert("output_feedback".into(), Value::Bool(w.has_output_feedback()));
        }
        Channel::Parallel(p) => {
            let cls = classify(&p.bob_kernel(), &p.eve_kernel(), &probe)?;
            report.result.insert("main".into(), to_value(&cls)?);
            report
                .result
                .insert("same_side_information".into(), Value::Bool(p.feedback_equals_bob_source()));
            let mut cases = Map::new();
            for case in SpecialCase::ALL {
                let status = match check_hypothesis(case, p, &probe, false) {
                    Ok(s) => to_value(&s)?,
                    Err(wtgf::Error::HypothesisViolated { detail, witness, .. }) => {
                        json!({ "status": "refuted", "detail": detail, "witness": witness })
                    }
                    Err(e) => return Err(e.into()),
                };
                cases.insert(case.to_string(), status);
            }
            report.result.insert("hypotheses".into(), Value::Object(cases));
        }
        Channel::State(_) => {
            return Err(CliError::Validation("classify needs a WTC-GF or parallel-sources channel".into()));
        }
    }
    Ok(())
}

fn read_factors(path: &Path) -> Result<FactorizationKG, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let value: Value = serde_json::from_str(&text).map_err(|e| CliError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let bad = |e: serde_json::Error| CliError::Validation(format!("{}: {e}", path.display()));
    // Accept either bare factors or the `best_factors` object of an inner-bound report.
    if value.get("family").is_some() {
        match serde_json::from_value::<Factors>(value).map_err(bad)? {
            Factors::Kg(f) => Ok(f),
            _ => Err(CliError::Validation("factors must be of the key-generation family".into())),
        }
    } else {
        serde_json::from_value(value).map_err(bad)
    }
}

fn scheme(c: &Common, s: &SchemeArgs, report: &mut Report) -> Result<SchemeFixture, CliError> {
    let strategy = match s.strategy {
        StrategyArg::Kg1 => Strategy::Kg1,
        StrategyArg::Kg2 => Strategy::Kg2,
    };
    let fixture = match (s.fixture, &c.channel) {
        (Some(_), Some(_)) => return Err(CliError::Validation("give either --fixture or --channel, not both".into())),
        (Some(Fixture::NoiselessSession), None) => {
            report.channel = json!({ "fixture": "noiseless-session" });
            noiseless_session()?
        }
        (Some(Fixture::TinyLeakage), None) => {
            report.channel = json!({ "fixture": "tiny-leakage", "eve_flip": s.eve_flip });
            tiny_leakage(s.eve_flip)?
        }
        (None, Some(_)) => {
            let (path, spec, ch) = require_channel(c)?;
            report.channel = channel_echo(path, &spec, &ch);
            let channel = wtgf_of(&ch)?;
            let fpath = s
                .factors
                .as_deref()
                .ok_or_else(|| CliError::Validation("--factors is required with --channel".into()))?;
            let factors = read_factors(fpath)?;
            report.config.insert("factors_path".into(), json!(fpath.display().to_string()));
            let rates = derive_scheme_rates(&factors, &channel, strategy, s.n, s.b, Slacks::default())?;
            SchemeFixture {
                channel,
                factors,
                rates,
                typicality: TypicalityConfig::default(),
            }
        }
        (None, None) => return Err(CliError::Validation("give --fixture or --channel".into())),
    };
    report.config.insert("codebook_seed".into(), json!(c.seed));
    report.config.insert("rates".into(), to_value(&fixture.rates)?);
    report.config.insert("typicality".into(), to_value(&fixture.typicality)?);
    Ok(fixture)
}

/// Run a parsed command; `Ok(Some(reason))` marks a report whose computation
/// produced no rate.
pub fn execute(cmd: &Command, report: &mut Report) -> Result<Option<String>, CliError> {
    let c = cmd.common();
    report.config.insert("seed".into(), json!(c.seed));
    report.config.insert("tolerance".into(), json!(c.tolerance));
    if !(c.tolerance >= 0.0 && c.tolerance < 1.0) {
        return Err(CliError::Validation(format!("--tolerance {} must lie in [0, 1)", c.tolerance)));
    }
    let started = Instant::now();
    let outcome = match cmd {
        Command::Classify { common } => classify_command(common, report).map(|_| None),
        Command::InnerKg { common, u_is_x } => {
            optimize(Objective::InnerKg, common, search_config(common, *u_is_x, false)?, Map::new(), report)
        }
        Command::SkInner { common, u_is_x } => {
            optimize(Objective::SkInner, common, search_config(common, *u_is_x, false)?, Map::new(), report)
        }
        Command::Outer { common, bound } => {
            let objective = match bound {
                Bound::Secrecy => Objective::OuterSecrecy,
                Bound::Sk => Objective::OuterSk,
            };
            optimize(objective, common, search_config(common, false, false)?, Map::new(), report)
        }
        Command::SpecialCase {
            common,
            case,
            assume_hypothesis,
        } => optimize(
            Objective::SpecialCase(*case),
            common,
            search_config(common, false, *assume_hypothesis)?,
            Map::new(),
            report,
        ),
        Command::Thm5 { common, u_is_x } => {
            optimize(Objective::Thm5, common, search_config(common, *u_is_x, false)?, Map::new(), report)
        }
        Command::Thm6 { common } => {
            optimize(Objective::Thm6, common, search_config(common, false, false)?, Map::new(), report)
        }
        Command::Erasure { delta, delta_e, .. } => {
            let p = ErasureParams::new(*delta, *delta_e)?;
            report.config.insert("delta".into(), json!(delta));
            report.config.insert("delta_e".into(), json!(delta_e));
            report.channel = json!({ "kind": "erasure", "delta": delta, "delta_e": delta_e });
            let r = erasure_rates(p);
            report.result.insert("inner_kg".into(), json!(r.inner_kg));
            report.result.insert("capacity".into(), json!(r.capacity));
            Ok(None)
        }
        Command::Simulate {
            common,
            scheme: s,
            sessions,
            trace,
        } => {
            let f = scheme(common, s, report)?;
            report.config.insert("sessions".into(), json!(sessions));
            let cb = build_codebook(&f.rates, &f.factors, &f.channel, common.seed, f.typicality)?;
            report.result.insert("sizes".into(), to_value(cb.sizes())?);
            let est = estimate_error(&cb, &f.channel, *sessions, common.seed)?;
            report.result.insert("error".into(), to_value(&est)?);
            if *trace {
                let msgs = random_messages(&cb, common.seed);
                let t = run_session(&cb, &f.channel, &msgs, common.seed)?;
                report.result.insert("trace".into(), to_value(&t)?);
            }
            Ok(None)
        }
        Command::Leakage {
            common,
            scheme: s,
            method,
            trials,
            key,
        } => {
            let f = scheme(common, s, report)?;
            let name = match method {
                LeakageMethodArg::Exact => "exact",
                LeakageMethodArg::MonteCarlo => "monte-carlo",
            };
            report.config.insert("method".into(), json!(name));
            report.config.insert("key_mode".into(), json!(key));
            let cb = build_codebook(&f.rates, &f.factors, &f.channel, common.seed, f.typicality)?;
            let r = match method {
                LeakageMethodArg::Exact => {
                    exact_leakage_tiny(&cb, &f.channel, cb.deterministic_encoder(), *key, ENUMERATION_BUDGET)?
                }
                LeakageMethodArg::MonteCarlo => {
                    report.config.insert("trials".into(), json!(trials));
                    monte_carlo_leakage(&cb, &f.channel, *trials, common.seed, *key)?
                }
            };
            report.result.insert("leakage".into(), to_value(&r)?);
            Ok(None)
        }
    };
    report
        .diagnostics
        .insert("wall_time_secs".into(), json!(started.elapsed().as_secs_f64()));
    outcome
}

/// What a run printed and how it ended.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Parse `args` (program name first), run the command and emit its report.
pub fn run_args<I, S>(args: I) -> Outcome
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let argv: Vec<String> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            let code = if e.use_stderr() { 2 } else { 0 };
            return if code == 0 {
                Outcome { code, stdout: text, stderr: String::new() }
            } else {
                Outcome { code, stdout: String::new(), stderr: text }
            };
        }
    };
    let mut report = Report::new(cli.command.name(), &argv[1..]);
    let (code, stderr) = match execute(&cli.command, &mut report) {
        Ok(None) => (0, String::new()),
        Ok(Some(reason)) => (3, format!("wtgf: {reason}\n")),
        Err(e) => return Outcome { code: e.exit_code(), stdout: String::new(), stderr: format!("wtgf: {e}\n") },
    };
    let text = report.render();
    match &cli.command.common().out {
        Some(path) => match std::fs::write(path, &text) {
            Ok(()) => Outcome { code, stdout: String::new(), stderr },
            Err(e) => Outcome {
                code: 2,
                stdout: String::new(),
                stderr: format!("wtgf: i/o error: {}: {e}\n", path.display()),
            },
        },
        None => Outcome { code, stdout: text, stderr },
    }
}
