//! Argument handling and the `qutrng` subcommands.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use qutrng_core::biphoton::{
    chsh_operator, chsh_spin, chsh_symmetrized, gamma, sym_embed, sym_restrict, ChshSettings,
};
use qutrng_core::generator::{run_session_with_jobs, GeneratorConfig, SessionReport, Verdict};
use qutrng_core::qutrit::{
    born, check_observable, concurrence, expectation, fidelity_to_unbiased, spin_basic, Axis, QutritState,
};
use qutrng_core::sampler::{labels, RandomStream, SourceModel};
use qutrng_core::stats::{analyze, StreamStats};
use qutrng_core::verify::{all_passed, run_suite, SpinTable, SuiteConfig, DEFAULT_RESOLUTION};
use serde::Serialize;
use thiserror::Error;

use crate::config::parse_config;
use crate::format::{decode_ascii, encode_ascii, encode_json, encode_raw, StreamFormat};
use crate::parse::{parse_ensemble, parse_observables, parse_seed, parse_source, parse_state, SourceSpec};

pub mod exit {
    pub const OK: i32 = 0;
    pub const FAILED: i32 = 1;
    pub const REJECT: i32 = 2;
    pub const INCONCLUSIVE: i32 = 3;
    pub const USAGE: i32 = 64;
    pub const NO_INPUT: i32 = 66;
    pub const CANT_CREATE: i32 = 73;
    pub const IO: i32 = 74;
}

/// Smallest search resolution accepted by `verify`.
pub const MIN_RESOLUTION: usize = 16;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("cannot read {path}: {source}")]
    NoInput { path: PathBuf, source: io::Error },
    #[error("cannot write {path}: {source}")]
    CantCreate { path: PathBuf, source: io::Error },
    #[error("write failed: {0}")]
    Io(#[from] io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Usage(_) => exit::USAGE,
            Self::NoInput { .. } => exit::NO_INPUT,
            Self::CantCreate { .. } => exit::CANT_CREATE,
            Self::Io(_) => exit::IO,
        }
    }
}

fn usage(e: impl ToString) -> CliError {
    CliError::Usage(e.to_string())
}

fn read_file(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|source| CliError::NoInput { path: path.to_path_buf(), source })
}

fn read_text(path: &Path) -> Result<String, CliError> {
    let bytes = read_file(path)?;
    String::from_utf8(bytes).map_err(|_| usage(format!("{} is not valid UTF-8", path.display())))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|source| CliError::CantCreate { path: path.to_path_buf(), source })
}

fn seed_arg(s: &str) -> Result<u64, String> {
    parse_seed(s).map_err(|e| e.to_string())
}

#[derive(Debug, Parser)]
#[command(name = "qutrng", version, about = "Self-testing qutrit random number generator simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a generation session and emit the certified trits.
    Generate(Box<GenerateArgs>),
    /// Run the spin-algebra self-test suite.
    Verify(VerifyArgs),
    /// Evaluate CHSH operators on the biphoton embedding of a qutrit state.
    Chsh(ChshArgs),
    /// Print outcome probabilities and entanglement figures of a state.
    StateTest(StateTestArgs),
}

#[derive(Debug, Args)]
struct GenerateArgs {
    /// `key = value` file; flags given on the command line override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Number of output trits.
    #[arg(long)]
    count: Option<usize>,
    /// Master seed, decimal or 0x-hex.
    #[arg(long, value_parser = seed_arg)]
    seed: Option<u64>,
    /// Seed for the public setting stream (default: the master seed).
    #[arg(long, value_parser = seed_arg, conflicts_with = "public_file")]
    public_seed: Option<u64>,
    /// File of public setting trits in ascii format.
    #[arg(long)]
    public_file: Option<PathBuf>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    check_rate: Option<f64>,
    /// Fidelity acceptance threshold.
    #[arg(long)]
    threshold: Option<f64>,
    /// ideal | state:<spec> | ensemble:<file>
    #[arg(long)]
    source: Option<String>,
    #[arg(long, value_enum)]
    format: Option<StreamFormat>,
    /// Output file (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Report file (default: stderr).
    #[arg(long)]
    report: Option<PathBuf>,
    /// Worker threads for measurement.
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// Grid resolution of the unbiased-state search.
    #[arg(long, default_value_t = DEFAULT_RESOLUTION)]
    resolution: usize,
    #[arg(long, value_parser = seed_arg)]
    seed: Option<u64>,
    #[arg(long, hide = true, value_parser = ["flip-sy"])]
    inject_fault: Option<String>,
}

#[derive(Debug, Args)]
struct ChshArgs {
    /// Qutrit state: unbiased0..3, plus, zero, minus, or a,b,c / are,aim,bre,bim,cre,cim.
    #[arg(long)]
    state: String,
    /// `default` or a file of `A1|A2|B1|B2 = m00 m01 m10 m11` lines.
    #[arg(long, default_value = "default")]
    observables: String,
}

#[derive(Debug, Args)]
struct StateTestArgs {
    /// Qutrit state, same syntax as `chsh --state`.
    #[arg(long)]
    state: String,
}

#[derive(Debug, Clone, PartialEq)]
enum PublicInput {
    Seed(u64),
    File(PathBuf),
}

/// Fully resolved `generate` settings.
#[derive(Debug, Clone, PartialEq)]
struct GenerateSettings {
    count: Option<usize>,
    seed: u64,
    public: Option<PublicInput>,
    epsilon: f64,
    delta: f64,
    check_rate: f64,
    threshold: f64,
    source: String,
    format: StreamFormat,
    out: Option<PathBuf>,
    report: Option<PathBuf>,
    jobs: usize,
}

impl Default for GenerateSettings {
    fn default() -> Self {
        let g = GeneratorConfig::default();
        Self {
            count: None,
            seed: 0,
            public: None,
            epsilon: g.epsilon,
            delta: g.delta,
            check_rate: g.check_rate,
            threshold: g.fidelity_threshold,
            source: "ideal".into(),
            format: StreamFormat::Ascii,
            out: None,
            report: None,
            jobs: 1,
        }
    }
}

fn config_value<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, CliError> {
    v.parse().map_err(|_| usage(format!("config: invalid value {v:?} for {key}")))
}

impl GenerateSettings {
    fn apply_config(&mut self, map: &BTreeMap<String, String>) -> Result<(), CliError> {
        if map.contains_key("public-seed") && map.contains_key("public-file") {
            return Err(usage("config: public-seed and public-file are mutually exclusive"));
        }
        for (k, v) in map {
            match k.as_str() {
                "count" => self.count = Some(config_value(k, v)?),
                "seed" => self.seed = parse_seed(v).map_err(usage)?,
                "public-seed" => self.public = Some(PublicInput::Seed(parse_seed(v).map_err(usage)?)),
                "public-file" => self.public = Some(PublicInput::File(v.into())),
                "epsilon" => self.epsilon = config_value(k, v)?,
                "delta" => self.delta = config_value(k, v)?,
                "check-rate" => self.check_rate = config_value(k, v)?,
                "threshold" => self.threshold = config_value(k, v)?,
                "source" => self.source = v.clone(),
                "format" => self.format = v.parse().map_err(|e| usage(format!("config: {e}")))?,
                "out" => self.out = Some(v.into()),
                "report" => self.report = Some(v.into()),
                "jobs" => self.jobs = config_value(k, v)?,
                _ => return Err(usage(format!("config: unknown key {k:?}"))),
            }
        }
        Ok(())
    }

    fn apply_flags(&mut self, a: &GenerateArgs) {
        if let Some(v) = a.count {
            self.count = Some(v);
        }
        if let Some(v) = a.seed {
            self.seed = v;
        }
        if let Some(v) = a.public_seed {
            self.public = Some(PublicInput::Seed(v));
        }
        if let Some(v) = &a.public_file {
            self.public = Some(PublicInput::File(v.clone()));
        }
        for (slot, flag) in [
            (&mut self.epsilon, a.epsilon),
            (&mut self.delta, a.delta),
            (&mut self.check_rate, a.check_rate),
            (&mut self.threshold, a.threshold),
        ] {
            if let Some(v) = flag {
                *slot = v;
            }
        }
        if let Some(v) = &a.source {
            self.source = v.clone();
        }
        if let Some(v) = a.format {
            self.format = v;
        }
        if let Some(v) = &a.out {
            self.out = Some(v.clone());
        }
        if let Some(v) = &a.report {
            self.report = Some(v.clone());
        }
        if let Some(v) = a.jobs {
            self.jobs = v;
        }
    }
}

#[derive(Serialize)]
struct GenerateReport<'a> {
    #[serde(flatten)]
    session: &'a SessionReport,
    public_seed: Option<u64>,
    public_file: Option<String>,
    source: &'a str,
    jobs: usize,
    stats: Option<StreamStats>,
}

fn resolve_source(spec: &str) -> Result<SourceModel, CliError> {
    match parse_source(spec).map_err(usage)? {
        SourceSpec::Ideal => Ok(SourceModel::Ideal),
        SourceSpec::State(s) => Ok(SourceModel::FixedState(s)),
        SourceSpec::EnsembleFile(path) => {
            let path = PathBuf::from(path);
            let text = read_text(&path)?;
            parse_ensemble(&text).map_err(|e| usage(format!("{}: {e}", path.display())))
        }
    }
}

fn generate(a: &GenerateArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32, CliError> {
    let mut s = GenerateSettings::default();
    if let Some(path) = &a.config {
        let map = parse_config(&read_text(path)?).map_err(|e| usage(format!("{}: {e}", path.display())))?;
        s.apply_config(&map)?;
    }
    s.apply_flags(a);

    let count = s.count.ok_or_else(|| usage("--count is required (flag or config)"))?;
    if s.jobs == 0 {
        return Err(usage("--jobs must be at least 1"));
    }
    let source = resolve_source(&s.source)?;
    let cfg = GeneratorConfig {
        epsilon: s.epsilon,
        delta: s.delta,
        check_rate: s.check_rate,
        target_output: count,
        fidelity_threshold: s.threshold,
    };
    cfg.validate().map_err(usage)?;

    let rng = RandomStream::new(s.seed);
    let (session, public_seed, public_file) = match &s.public {
        Some(PublicInput::File(path)) => {
            let trits = decode_ascii(&read_file(path)?).map_err(|e| usage(format!("{}: {e}", path.display())))?;
            let session = run_session_with_jobs(&source, trits, &cfg, &rng, s.jobs).map_err(usage)?;
            (session, None, Some(path.display().to_string()))
        }
        other => {
            let ps = match other {
                Some(PublicInput::Seed(v)) => *v,
                _ => s.seed,
            };
            let public = RandomStream::new(ps).split(labels::SETTINGS).trits();
            (run_session_with_jobs(&source, public, &cfg, &rng, s.jobs).map_err(usage)?, Some(ps), None)
        }
    };

    let report = GenerateReport {
        session: &session.report,
        public_seed,
        public_file,
        source: &s.source,
        jobs: s.jobs,
        stats: analyze(&session.output).ok(),
    };
    let body = match s.format {
        StreamFormat::Ascii => encode_ascii(&session.output).into_bytes(),
        StreamFormat::Raw => encode_raw(&session.output),
        StreamFormat::Json => encode_json(&session.output, &report).map_err(io::Error::from)?,
    };
    match &s.out {
        Some(path) => write_file(path, &body)?,
        None => stdout.write_all(&body)?,
    }
    let mut report_json = serde_json::to_vec_pretty(&report).map_err(io::Error::from)?;
    report_json.push(b'\n');
    match &s.report {
        Some(path) => write_file(path, &report_json)?,
        None => stderr.write_all(&report_json)?,
    }

    Ok(match session.report.verdict {
        Verdict::Accept => exit::OK,
        Verdict::Reject => exit::REJECT,
        Verdict::Inconclusive => exit::INCONCLUSIVE,
    })
}

fn verify(a: &VerifyArgs, stdout: &mut dyn Write) -> Result<i32, CliError> {
    if a.resolution < MIN_RESOLUTION {
        return Err(usage(format!("--resolution must be at least {MIN_RESOLUTION}, got {}", a.resolution)));
    }
    let mut cfg = SuiteConfig { resolution: a.resolution, ..SuiteConfig::default() };
    if let Some(seed) = a.seed {
        cfg.seed = seed;
    }
    let table = match a.inject_fault.as_deref() {
        Some("flip-sy") => SpinTable::with_flipped_sy(),
        _ => SpinTable::default(),
    };
    let results = run_suite(&cfg, &table);
    for r in &results {
        writeln!(stdout, "{} {:<44} {}", if r.passed { "PASS" } else { "FAIL" }, r.name, r.detail)?;
    }
    let passed = results.iter().filter(|r| r.passed).count();
    writeln!(stdout, "{passed}/{} checks passed", results.len())?;
    Ok(if all_passed(&results) { exit::OK } else { exit::FAILED })
}

/// Fixed 12-decimal rendering with negative zero folded to zero.
pub fn fmt12(x: f64) -> String {
    let s = format!("{x:.12}");
    if s.trim_start_matches('-').bytes().all(|b| b == b'0' || b == b'.') {
        s.trim_start_matches('-').to_string()
    } else {
        s
    }
}

/// `(qubit pair, symmetrized, spin form)` CHSH values on `sym_embed(state)`.
pub fn chsh_values(state: &QutritState, settings: &ChshSettings) -> Result<[f64; 3], CliError> {
    let v = sym_embed(state);
    let pair = chsh_operator(settings).map_err(usage)?.expectation(&v);
    let symmetrized = chsh_symmetrized(settings).map_err(usage)?.expectation(&v);
    let u = sym_restrict(&gamma(&settings.a1)).map_err(usage)?;
    let w = sym_restrict(&gamma(&settings.a2)).map_err(usage)?;
    let spin = expectation(state, &chsh_spin(&u, &w)).map_err(usage)?;
    Ok([pair, symmetrized, spin])
}

fn chsh(a: &ChshArgs, stdout: &mut dyn Write) -> Result<i32, CliError> {
    let state = parse_state(&a.state).map_err(usage)?;
    let settings = if a.observables == "default" {
        ChshSettings::tsirelson()
    } else {
        let path = PathBuf::from(&a.observables);
        parse_observables(&read_text(&path)?).map_err(|e| usage(format!("{}: {e}", path.display())))?
    };
    let [pair, symmetrized, spin] = chsh_values(&state, &settings)?;
    writeln!(stdout, "qubit-pair   {}", fmt12(pair))?;
    writeln!(stdout, "symmetrized  {}", fmt12(symmetrized))?;
    writeln!(stdout, "spin-form    {}", fmt12(spin))?;
    Ok(exit::OK)
}

fn state_test(a: &StateTestArgs, stdout: &mut dyn Write) -> Result<i32, CliError> {
    let state = parse_state(&a.state).map_err(usage)?;
    let amp = |z: num_complex::Complex64| format!("{}{:+}i", fmt12(z.re), z.im);
    writeln!(stdout, "state        ({}, {}, {})", amp(state.alpha()), amp(state.beta()), amp(state.gamma()))?;
    for (name, axis) in [("S_Z", Axis::Z), ("S_X", Axis::X), ("S_Y", Axis::Y)] {
        let p = born(&state, &spin_basic(axis));
        writeln!(
            stdout,
            "{name}          p(+1)={} p(0)={} p(-1)={}",
            fmt12(p.p_plus),
            fmt12(p.p_zero),
            fmt12(p.p_minus)
        )?;
    }
    let s2 = expectation(&state, &check_observable().square()).map_err(usage)?;
    writeln!(stdout, "concurrence  {}", fmt12(concurrence(&state)))?;
    writeln!(stdout, "fidelity     {}", fmt12(fidelity_to_unbiased(&state)))?;
    writeln!(stdout, "check <S^2>  {}", fmt12(s2))?;
    Ok(exit::OK)
}

/// Runs `qutrng` with the given arguments (program name first) and returns
/// the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { exit::USAGE } else { exit::OK };
            let rendered = e.render().to_string();
            let _ = if e.use_stderr() { stderr.write_all(rendered.as_bytes()) } else { stdout.write_all(rendered.as_bytes()) };
            return code;
        }
    };
    let result = match &cli.command {
        Command::Generate(a) => generate(a, stdout, stderr),
        Command::Verify(a) => verify(a, stdout),
        Command::Chsh(a) => chsh(a, stdout),
        Command::StateTest(a) => state_test(a, stdout),
    };
    let _ = stdout.flush();
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "qutrng: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_capture(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(std::iter::once("qutrng").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn fmt12_folds_negative_zero() {
        assert_eq!(fmt12(-1e-17), "0.000000000000");
        assert_eq!(fmt12(-0.5), "-0.500000000000");
        assert_eq!(fmt12(std::f64::consts::SQRT_2), "1.414213562373");
    }

    #[test]
    fn flags_override_config() {
        let mut s = GenerateSettings::default();
        let map = parse_config("count = 10\nseed = 0x10\npublic-seed = 5\ncheck-rate = 0.3\nformat = raw\n").unwrap();
        s.apply_config(&map).unwrap();
        assert_eq!((s.count, s.seed, s.check_rate, s.format), (Some(10), 16, 0.3, StreamFormat::Raw));
        let cli = Cli::try_parse_from(["qutrng", "generate", "--count", "20", "--public-file", "p.txt"]).unwrap();
        let Command::Generate(a) = cli.command else { panic!() };
        s.apply_flags(&a);
        assert_eq!(s.count, Some(20));
        assert_eq!(s.public, Some(PublicInput::File("p.txt".into())));
        assert_eq!(s.seed, 16);
    }

    #[test]
    fn exit_codes_for_usage_errors() {
        assert_eq!(run_capture(&["generate", "--count", "x"]).0, exit::USAGE);
        assert_eq!(run_capture(&["generate"]).0, exit::USAGE);
        assert_eq!(run_capture(&["generate", "--count", "5", "--epsilon", "0.7"]).0, exit::USAGE);
        assert_eq!(run_capture(&["generate", "--count", "5", "--public-seed", "1", "--public-file", "f"]).0, exit::USAGE);
        assert_eq!(run_capture(&["verify", "--resolution", "8"]).0, exit::USAGE);
        assert_eq!(run_capture(&["bogus"]).0, exit::USAGE);
        assert_eq!(run_capture(&["--help"]).0, exit::OK);
        assert_eq!(run_capture(&["--version"]).0, exit::OK);
    }

    #[test]
    fn ideal_session_accepts() {
        let (code, out, err) = run_capture(&["generate", "--count", "200", "--seed", "7", "--check-rate", "0.5"]);
        assert_eq!(code, exit::OK, "{err}");
        assert_eq!(decode_ascii(out.as_bytes()).unwrap().len(), 200);
        let report: serde_json::Value = serde_json::from_str(&err).unwrap();
        assert_eq!(report["verdict"], "Accept");
        assert_eq!(report["public_seed"], 7);
        assert_eq!(report["stats"]["n"], 200);
    }

    #[test]
    fn zero_state_rejects() {
        let (code, _, err) = run_capture(&["generate", "--count", "100", "--source", "state:zero", "--check-rate", "0.5"]);
        assert_eq!(code, exit::REJECT, "{err}");
    }

    #[test]
    fn chsh_default_settings() {
        let (code, out, _) = run_capture(&["chsh", "--state", "1,0,1"]);
        assert_eq!(code, exit::OK);
        let lines: Vec<&str> = out.lines().collect();
        assert_eq!(lines[0], "qubit-pair   2.828427124746");
        assert_eq!(lines[2], "spin-form    2.828427124746");
    }

    #[test]
    fn state_test_unbiased() {
        let (code, out, _) = run_capture(&["state-test", "--state", "unbiased0"]);
        assert_eq!(code, exit::OK);
        assert!(out.contains("p(+1)=0.333333333333 p(0)=0.333333333333 p(-1)=0.333333333333"), "{out}");
        assert!(out.contains("fidelity     1.000000000000"));
        assert!(out.contains("check <S^2>  0.000000000000"));
    }
}
