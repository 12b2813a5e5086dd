//! `mcstudy` command-line front end.
//!
//! Exit codes:
//!
//! | code | meaning |
//! |---|---|
//! | 0 | success |
//! | 2 | usage error (unknown flag, missing argument) |
//! | 3 | I/O error (missing input, unwritable output) |
//! | 4 | solver or model error (infeasible coupling, no fault current, divergence) |
//! | 5 | input format or validation error |
//! | 6 | `--strict` study with at least one failed row |
//! | 7 | conflicting options |

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use mcstudy_core::emt::{simulate, EmtConfig, Inception};
use mcstudy_core::fault::solve_fault;
use mcstudy_core::line_constants::{coupling_vs_separation, GeometryFile, LineConstants};
use mcstudy_core::network::load_network;
use mcstudy_core::study::{
    render_reach, render_report, run_goc_sweep, run_line_end_study, run_pilot_study,
    run_reach_study, LineEndSpec, PilotSpec, ReachSpec, SweepSpec,
};
use mcstudy_core::{Error, FaultKind, FaultSpec, Network, ReportFormat};
use serde::Serialize;

pub mod emt_report;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_SOLVER: i32 = 4;
pub const EXIT_INPUT: i32 = 5;
pub const EXIT_STRICT: i32 = 6;
pub const EXIT_CONFLICT: i32 = 7;

#[derive(Debug, Parser)]
#[command(name = "mcstudy", version, about = "Zero-sequence mutual coupling protection studies")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Phase and sequence impedances of a tower geometry.
    LineConstants(LineConstantsArgs),
    /// Solve one fault and print the sequence phasors as JSON.
    Fault(FaultArgs),
    /// With/without-coupling relay studies.
    Study(StudyArgs),
    /// Time-domain fault simulation.
    Emt(EmtArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LcFormat {
    Json,
    Table,
}

#[derive(Debug, Args)]
pub struct LineConstantsArgs {
    /// Geometry file (JSON).
    pub geometry: PathBuf,
    #[arg(long, value_enum, default_value = "json")]
    pub format: LcFormat,
    /// Force the transposed result regardless of the file.
    #[arg(long)]
    pub transposed: bool,
    /// Force the untransposed result regardless of the file.
    #[arg(long)]
    pub untransposed: bool,
    /// Also report z0m between two copies of the first circuit at these
    /// horizontal separations (m).
    #[arg(long, value_delimiter = ',')]
    pub separation: Vec<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FaultArgs {
    /// Network file (JSON).
    pub network: PathBuf,
    /// SLG, LLG, LL or 3PH.
    #[arg(long)]
    pub kind: String,
    /// Faulted branch; `--at` is then the position from its from-bus.
    #[arg(long)]
    pub branch: Option<String>,
    /// Faulted bus, or with `--branch` a fraction (`0.3`) or percent (`30%`).
    #[arg(long)]
    pub at: String,
    /// Fault resistance, pu.
    #[arg(long, default_value_t = 0.0)]
    pub rf: f64,
    /// Disable zero-sequence mutual coupling.
    #[arg(long)]
    pub no_mc: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutFormat {
    Csv,
    Json,
    Markdown,
}

impl From<OutFormat> for ReportFormat {
    fn from(f: OutFormat) -> Self {
        match f {
            OutFormat::Csv => ReportFormat::Csv,
            OutFormat::Json => ReportFormat::Json,
            OutFormat::Markdown => ReportFormat::Markdown,
        }
    }
}

#[derive(Debug, Args)]
pub struct StudyArgs {
    /// GOC sweep along the monitored line of this network.
    #[arg(long, value_name = "NETWORK")]
    pub sweep: Option<PathBuf>,
    /// Line-end-open study on this network.
    #[arg(long, value_name = "NETWORK")]
    pub line_end: Option<PathBuf>,
    /// Zone 1 reach study on this network.
    #[arg(long, value_name = "NETWORK")]
    pub reach: Option<PathBuf>,
    /// Pilot scheme study on this network.
    #[arg(long, value_name = "NETWORK")]
    pub pilot: Option<PathBuf>,
    /// Monitored (or, for --pilot, faulted) branch; overrides the network's study section.
    #[arg(long)]
    pub branch: Option<String>,
    #[arg(long)]
    pub primary: Option<String>,
    #[arg(long)]
    pub backup: Option<String>,
    /// Relay for --reach and --pilot.
    #[arg(long)]
    pub relay: Option<String>,
    /// Fault positions, comma separated fractions.
    #[arg(long, value_delimiter = ',')]
    pub fractions: Option<Vec<f64>>,
    #[arg(long)]
    pub kind: Option<String>,
    #[arg(long, default_value_t = 0.0)]
    pub rf: f64,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: OutFormat,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Exit with code 6 if any row failed.
    #[arg(long)]
    pub strict: bool,
    /// Stamp the report metadata with this timestamp.
    #[arg(long)]
    pub timestamp: Option<String>,
}

#[derive(Debug, Args)]
pub struct EmtArgs {
    /// Network file (JSON).
    pub network: PathBuf,
    /// `KIND@BUS` or `KIND@BRANCH:FRACTION`, e.g. `SLG@L1:0.3`.
    #[arg(long)]
    pub fault: String,
    #[arg(long, default_value_t = 0.0)]
    pub rf: f64,
    #[arg(long)]
    pub no_mc: bool,
    /// Requested time step, s.
    #[arg(long, default_value_t = mcstudy_core::emt::DEFAULT_DT)]
    pub dt: f64,
    /// Record length, s. Defaults to the fault time plus ten cycles.
    #[arg(long)]
    pub duration: Option<f64>,
    /// Fault time, s.
    #[arg(long)]
    pub fault_time: Option<f64>,
    /// Point on wave of the phase-a prefault fault-bus voltage, degrees.
    #[arg(long)]
    pub inception_angle: Option<f64>,
    /// Waveform CSV destination; skipped when absent.
    #[arg(long)]
    pub waveform: Option<PathBuf>,
    /// Metrics JSON destination; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// A failure with its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }

    fn conflict(message: impl Into<String>) -> Self {
        Self::new(EXIT_CONFLICT, message)
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io { .. } => EXIT_IO,
        Error::Parse { .. }
        | Error::Invalid(_)
        | Error::DanglingReference { .. }
        | Error::Unknown { .. }
        | Error::Geometry(_)
        | Error::Parameter(_)
        | Error::Shape(_) => EXIT_INPUT,
        Error::SingularReduction { .. }
        | Error::InfeasibleCoupling { .. }
        | Error::NoFaultCurrent(_)
        | Error::UnsupportedDecomposition(_)
        | Error::NoMeasurement { .. }
        | Error::Singular(_)
        | Error::Divergence { .. }
        | Error::MetricsUndefined(_) => EXIT_SOLVER,
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Self::new(exit_code(&e), e.to_string())
    }
}

/// Parse `argv` and run, writing normal output to `stdout` and diagnostics
/// to `stderr`. Returns the process exit code.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK {
                stdout.write_all(text.as_bytes())
            } else {
                stderr.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match dispatch(&cli.command, stdout) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message);
            f.code
        }
    }
}

pub fn dispatch(cmd: &Command, stdout: &mut dyn Write) -> Result<(), Failure> {
    match cmd {
        Command::LineConstants(a) => line_constants(a, stdout),
        Command::Fault(a) => fault(a, stdout),
        Command::Study(a) => study(a, stdout),
        Command::Emt(a) => emt(a, stdout),
    }
}

/// Write to `path` through a temporary file in the same directory, or to
/// stdout when no path is given.
pub fn emit(path: Option<&Path>, text: &str, stdout: &mut dyn Write) -> Result<(), Failure> {
    let io = |p: &Path, e: std::io::Error| Failure::new(EXIT_IO, format!("{}: {e}", p.display()));
    match path {
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|e| Failure::new(EXIT_IO, format!("stdout: {e}"))),
        Some(p) => {
            let dir = match p.parent() {
                Some(d) if !d.as_os_str().is_empty() => d,
                _ => Path::new("."),
            };
            let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| io(p, e))?;
            tmp.write_all(text.as_bytes()).map_err(|e| io(p, e))?;
            tmp.as_file().sync_all().map_err(|e| io(p, e))?;
            tmp.persist(p).map_err(|e| io(p, e.error))?;
            Ok(())
        }
    }
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn parse_kind(s: &str) -> Result<FaultKind, Failure> {
    s.parse::<FaultKind>()
        .map_err(|e| Failure::new(EXIT_USAGE, format!("--kind: {e}")))
}

/// `0.3` or `30%`.
pub fn parse_fraction(s: &str) -> Result<f64, Failure> {
    let bad = || Failure::new(EXIT_USAGE, format!("`{s}` is not a fraction or percent"));
    let v = match s.strip_suffix('%') {
        Some(p) => p.trim().parse::<f64>().map_err(|_| bad())? / 100.0,
        None => s.trim().parse::<f64>().map_err(|_| bad())?,
    };
    if !v.is_finite() {
        return Err(bad());
    }
    Ok(v)
}

fn network(path: &Path) -> Result<Network, Failure> {
    Ok(load_network(path)?)
}

#[derive(Serialize)]
struct SeparationPoint {
    separation_m: f64,
    z0m: mcstudy_core::Complex64,
}

#[derive(Serialize)]
struct LineConstantsOutput<'a> {
    #[serde(flatten)]
    constants: &'a LineConstants,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    separation: Vec<SeparationPoint>,
}

fn line_constants(a: &LineConstantsArgs, stdout: &mut dyn Write) -> Result<(), Failure> {
    if a.transposed && a.untransposed {
        return Err(Failure::conflict("--transposed and --untransposed are exclusive"));
    }
    let g = GeometryFile::load(&a.geometry)?;
    let transposed = if a.transposed {
        true
    } else if a.untransposed {
        false
    } else {
        g.transposed
    };
    let lc = LineConstants::compute(&g.geometry, &g.earth, transposed)?;
    let separation = if a.separation.is_empty() {
        Vec::new()
    } else {
        coupling_vs_separation(&g.geometry, &g.geometry, &a.separation, &g.earth)?
            .into_iter()
            .map(|(s, z)| SeparationPoint {
                separation_m: s,
                z0m: z,
            })
            .collect()
    };
    let text = match a.format {
        LcFormat::Json => to_json(&LineConstantsOutput {
            constants: &lc,
            separation,
        }),
        LcFormat::Table => line_constants_table(&lc, &separation),
    };
    emit(a.out.as_deref(), &text, stdout)
}

fn cell(z: mcstudy_core::Complex64) -> String {
    format!("{:>10.6} {:>+10.6}j", z.re, z.im)
}

fn line_constants_table(lc: &LineConstants, sep: &[SeparationPoint]) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "Phase impedance matrix (ohm/km){}",
        if lc.transposed { ", transposed" } else { "" }
    );
    let _ = writeln!(
        s,
        "{:>6} {}",
        "",
        lc.phases.iter().map(|p| format!("{p:>23}")).collect::<String>()
    );
    for (i, p) in lc.phases.iter().enumerate() {
        let row: String = (0..lc.phases.len()).map(|k| format!(" {}", cell(lc.phase.get(i, k)))).collect();
        let _ = writeln!(s, "{p:>6}{row}");
    }
    let _ = writeln!(s, "\nSequence impedances (ohm/km)");
    for c in &lc.sequence.circuits {
        let _ = writeln!(s, "{:>6}  z0 {}  z1 {}  z2 {}", c.name, cell(c.z0), cell(c.z1), cell(c.z2));
    }
    for m in &lc.sequence.mutuals {
        let self0 = lc.sequence.circuit(&m.a).map(|c| c.z0.norm()).unwrap_or(f64::NAN);
        let _ = writeln!(
            s,
            "{:>6}  z0m {}  |z0m|/|z0| {:.3}",
            format!("{}~{}", m.a, m.b),
            cell(m.z0m),
            m.z0m.norm() / self0
        );
    }
    if !sep.is_empty() {
        let _ = writeln!(s, "\nCorridor coupling (first circuit vs shifted copy)");
        for p in sep {
            let _ = writeln!(s, "{:>8.1} m  z0m {}", p.separation_m, cell(p.z0m));
        }
    }
    s
}

fn fault(a: &FaultArgs, stdout: &mut dyn Write) -> Result<(), Failure> {
    let kind = parse_kind(&a.kind)?;
    let n = network(&a.network)?;
    let spec = match &a.branch {
        Some(b) => FaultSpec::on_branch(kind, b, parse_fraction(&a.at)?),
        None => FaultSpec::at_bus(kind, &a.at),
    }
    .with_resistance(a.rf)
    .with_coupling(!a.no_mc);
    let sol = solve_fault(&n, &spec)?;
    emit(a.out.as_deref(), &to_json(&sol), stdout)
}

enum StudyMode<'a> {
    Sweep(&'a Path),
    LineEnd(&'a Path),
    Reach(&'a Path),
    Pilot(&'a Path),
}

fn study_mode(a: &StudyArgs) -> Result<StudyMode<'_>, Failure> {
    let mut modes = Vec::new();
    if let Some(p) = &a.sweep {
        modes.push(StudyMode::Sweep(p));
    }
    if let Some(p) = &a.line_end {
        modes.push(StudyMode::LineEnd(p));
    }
    if let Some(p) = &a.reach {
        modes.push(StudyMode::Reach(p));
    }
    if let Some(p) = &a.pilot {
        modes.push(StudyMode::Pilot(p));
    }
    match modes.len() {
        0 => Err(Failure::new(
            EXIT_USAGE,
            "one of --sweep, --line-end, --reach, --pilot is required",
        )),
        1 => Ok(modes.pop().expect("one")),
        _ => Err(Failure::conflict(
            "--sweep, --line-end, --reach and --pilot are exclusive",
        )),
    }
}

fn study(a: &StudyArgs, stdout: &mut dyn Write) -> Result<(), Failure> {
    let mode = study_mode(a)?;
    let kind = a.kind.as_deref().map(parse_kind).transpose()?;
    let format: ReportFormat = a.format.into();
    let stamp = |m: &mut mcstudy_core::study::ReportMetadata| m.timestamp = a.timestamp.clone();
    let (text, failed) = match mode {
        StudyMode::Sweep(p) => {
            let n = network(p)?;
            let mut spec = defaults_or_flags(&n, a, SweepSpec::from_defaults, |b, pr, bk| SweepSpec::new(b, pr, bk))?;
            if let Some(f) = &a.fractions {
                spec.fractions = f.clone();
            }
            if let Some(k) = kind {
                spec.kind = k;
            }
            spec.fault_resistance = a.rf;
            let mut r = run_goc_sweep(&n, &spec)?;
            stamp(&mut r.metadata);
            (render_report(&r, format), r.failed_rows())
        }
        StudyMode::LineEnd(p) => {
            let n = network(p)?;
            let mut spec =
                defaults_or_flags(&n, a, LineEndSpec::from_defaults, |b, pr, bk| LineEndSpec::new(b, pr, bk))?;
            if a.fractions.is_some() {
                return Err(Failure::conflict("--fractions does not apply to --line-end"));
            }
            if let Some(k) = kind {
                spec.kind = k;
            }
            spec.fault_resistance = a.rf;
            let mut r = run_line_end_study(&n, &spec)?;
            stamp(&mut r.metadata);
            (render_report(&r, format), r.failed_rows())
        }
        StudyMode::Reach(p) => {
            let n = network(p)?;
            if a.fractions.is_some() || kind.is_some() {
                return Err(Failure::conflict(
                    "--fractions and --kind do not apply to --reach",
                ));
            }
            let relay = a
                .relay
                .clone()
                .or_else(|| n.study.as_ref().and_then(|s| s.reach_relay.clone()))
                .ok_or_else(|| Failure::new(EXIT_INPUT, "no --relay and no reach_relay in the network"))?;
            let mut r = run_reach_study(&n, &ReachSpec::new(relay))?;
            r.metadata.timestamp = a.timestamp.clone();
            (render_reach(&r, format), r.failed_rows())
        }
        StudyMode::Pilot(p) => {
            let n = network(p)?;
            let relay = a
                .relay
                .clone()
                .or_else(|| n.study.as_ref().and_then(|s| s.pilot_relay.clone()))
                .ok_or_else(|| Failure::new(EXIT_INPUT, "no --relay and no pilot_relay in the network"))?;
            let branch = match &a.branch {
                Some(b) => b.clone(),
                None => n
                    .relay(&relay)
                    .map(|r| r.point.branch.clone())
                    .ok_or_else(|| Failure::from(Error::Unknown { kind: "relay", id: relay.clone() }))?,
            };
            let mut spec = PilotSpec::new(branch, relay);
            if let Some(f) = &a.fractions {
                spec.fractions = f.clone();
            }
            if let Some(k) = kind {
                spec.kind = k;
            }
            spec.fault_resistance = a.rf;
            let mut r = run_pilot_study(&n, &spec)?;
            stamp(&mut r.metadata);
            (render_report(&r, format), r.failed_rows())
        }
    };
    emit(a.out.as_deref(), &text, stdout)?;
    if a.strict && failed > 0 {
        return Err(Failure::new(EXIT_STRICT, format!("{failed} row(s) failed")));
    }
    Ok(())
}

/// Spec from the network's study section, overridden by any of
/// `--branch/--primary/--backup`; all three are needed when the section is
/// missing.
fn defaults_or_flags<S>(
    n: &Network,
    a: &StudyArgs,
    from_defaults: impl Fn(&Network) -> mcstudy_core::Result<S>,
    build: impl Fn(String, String, String) -> S,
) -> Result<S, Failure> {
    if a.branch.is_none() && a.primary.is_none() && a.backup.is_none() {
        return Ok(from_defaults(n)?);
    }
    let d = n.study.clone().unwrap_or_default();
    let pick = |flag: &Option<String>, dflt: Option<String>, name: &str| {
        flag.clone()
            .or(dflt)
            .ok_or_else(|| Failure::new(EXIT_USAGE, format!("--{name} is required")))
    };
    Ok(build(
        pick(&a.branch, d.monitored_branch, "branch")?,
        pick(&a.primary, d.primary_relay, "primary")?,
        pick(&a.backup, d.backup_relay, "backup")?,
    ))
}

/// `KIND@BUS` or `KIND@BRANCH:FRACTION`.
pub fn parse_fault_arg(s: &str) -> Result<FaultSpec, Failure> {
    let (kind, loc) = s
        .split_once('@')
        .ok_or_else(|| Failure::new(EXIT_USAGE, format!("--fault `{s}`: expected KIND@LOCATION")))?;
    let kind = parse_kind(kind)?;
    Ok(match loc.split_once(':') {
        Some((branch, m)) => FaultSpec::on_branch(kind, branch, parse_fraction(m)?),
        None => FaultSpec::at_bus(kind, loc),
    })
}

fn emt(a: &EmtArgs, stdout: &mut dyn Write) -> Result<(), Failure> {
    if a.fault_time.is_some() && a.inception_angle.is_some() {
        return Err(Failure::conflict("--fault-time and --inception-angle are exclusive"));
    }
    let spec = parse_fault_arg(&a.fault)?
        .with_resistance(a.rf)
        .with_coupling(!a.no_mc);
    let n = network(&a.network)?;
    let mut cfg = EmtConfig::new(n.frequency_hz);
    cfg.dt = a.dt;
    let cycle = 1.0 / n.frequency_hz;
    let earliest = 2.0 * cycle;
    cfg.inception = match (a.fault_time, a.inception_angle) {
        (Some(t), _) => Inception::Time(t),
        (None, Some(deg)) => Inception::Angle {
            degrees: deg,
            after_s: earliest,
        },
        (None, None) => cfg.inception,
    };
    let start = match cfg.inception {
        Inception::Time(t) => t,
        Inception::Angle { after_s, .. } => after_s + cycle,
    };
    cfg.duration = a.duration.unwrap_or(start + 10.0 * cycle);
    let res = simulate(&n, &spec, &cfg)?;
    if let Some(p) = &a.waveform {
        emit(Some(p), &res.record.to_csv(), stdout)?;
    }
    let report = emt_report::build(&n, &spec, &res)?;
    emit(a.out.as_deref(), &to_json(&report), stdout)
}
