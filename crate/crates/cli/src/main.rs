//! weavesim: command-line front end for the physical-layer pipeline.
//!
//! Subcommands cover scenario validation, SINR trace generation, CDF
//! reports, effective-SINR compression, beta calibration, PER prediction,
//! AWGN reference curves, link-level Monte Carlo runs, and plot-ready
//! figure bundles. Every command that writes files also writes a JSON run
//! manifest next to them; transform commands print CSV to stdout when no
//! output path is given.
//!
//! Exit codes: 0 success, 2 usage error, 3 input validation failure,
//! 4 runtime failure. Errors print as a single line on stderr.

mod figures;
mod manifest;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use weavesim_core::abstraction::{
    calibrate_beta, compress, BetaGrid, BetaTable, CompressionMethod, RefCurve,
};
use weavesim_core::io;
use weavesim_core::linksim::{awgn_reference_curve, simulate_per, Mcs, DEFAULT_INFO_BITS};
use weavesim_core::rng::RngFactory;
use weavesim_core::scenario::load_scenario;
use weavesim_core::sinr::{empirical_cdf, generate_trace, generate_trace_dumping};
use weavesim_core::{db_to_linear, linear_to_db, Error as CoreError, Scenario64};

use manifest::{sha256_hex, write_atomic, write_manifest, ManifestPlan};

#[derive(Parser)]
#[command(
    name = "weavesim",
    version,
    about = "Physical-layer abstraction toolkit: SINR traces, EESM compression, PER prediction",
    propagate_version = true
)]
struct Cli {
    /// Base RNG seed for stochastic commands.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Worker thread cap. This build runs single-threaded; the flag is
    /// accepted for interface stability and recorded in manifests.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Directory relative output paths are resolved against.
    #[arg(long, global = true, default_value = ".")]
    out_dir: PathBuf,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Scenario configuration utilities.
    Scenario {
        #[command(subcommand)]
        cmd: ScenarioCmd,
    },
    /// SINR trace generation.
    Sinr {
        #[command(subcommand)]
        cmd: SinrCmd,
    },
    /// Aggregate reports over traces.
    Report {
        #[command(subcommand)]
        cmd: ReportCmd,
    },
    /// Effective-SINR compression and beta calibration.
    Eesm {
        #[command(subcommand)]
        cmd: EesmCmd,
    },
    /// PER prediction from a reference curve.
    Per {
        #[command(subcommand)]
        cmd: PerCmd,
    },
    /// AWGN reference curves.
    Ref {
        #[command(subcommand)]
        cmd: RefCmd,
    },
    /// Link-level Monte Carlo simulation.
    Linksim {
        #[command(subcommand)]
        cmd: LinksimCmd,
    },
    /// Emit the CSV bundle behind a named figure.
    Figure {
        /// Figure to reproduce.
        #[arg(value_enum)]
        name: FigureName,
        /// Problem-size preset (see the README preset table).
        #[arg(long, value_enum, default_value_t = Scale::Desk)]
        scale: Scale,
    },
    /// Beta table utilities.
    Beta {
        #[command(subcommand)]
        cmd: BetaCmd,
    },
}

#[derive(Subcommand)]
enum ScenarioCmd {
    /// Parse and validate a scenario file.
    Validate {
        /// Scenario TOML file.
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Subcommand)]
enum SinrCmd {
    /// Generate a per-(user, block, subcarrier) SINR trace.
    Generate {
        /// Scenario TOML file.
        #[arg(long)]
        config: PathBuf,
        /// Number of coherence blocks to draw.
        #[arg(long)]
        blocks: usize,
        /// Trace CSV to write (user,block,subcarrier,sinr_db).
        #[arg(long)]
        out: PathBuf,
        /// Also dump accepted channel matrices to this CSV
        /// (block,subcarrier,m,k,re,im). Intended for small runs.
        #[arg(long)]
        dump_channels: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum ReportCmd {
    /// Empirical CDF over all SINR samples of a trace.
    Cdf {
        /// Input trace CSV.
        #[arg(long)]
        trace: PathBuf,
        /// CDF CSV to write (sinr_db,prob).
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum EesmCmd {
    /// Compress each (user, block) profile of a trace to an effective SINR.
    Compress {
        /// Input trace CSV.
        #[arg(long)]
        trace: PathBuf,
        /// Compression beta. Exactly one of --beta/--mcs for eesm and
        /// capacity; the average method ignores beta.
        #[arg(long, conflicts_with = "mcs")]
        beta: Option<f64>,
        /// Look the beta up by MCS name in the active beta table.
        #[arg(long)]
        mcs: Option<String>,
        #[arg(long, value_enum, default_value_t = MethodArg::Eesm)]
        method: MethodArg,
        /// Output CSV (user,block,gamma_eff_db); stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit beta against a reference curve from a calibration set.
    Calibrate {
        /// Calibration set CSV (profile,subcarrier,sinr_db,per_sim).
        #[arg(long)]
        calset: PathBuf,
        /// Reference curve CSV (snr_db,per).
        #[arg(long)]
        curve: PathBuf,
        #[arg(long, value_enum, default_value_t = MethodArg::Eesm)]
        method: MethodArg,
        /// Bottom of the log-spaced beta search grid.
        #[arg(long, default_value_t = 0.05)]
        beta_lo: f64,
        /// Top of the beta search grid.
        #[arg(long, default_value_t = 20.0)]
        beta_hi: f64,
        /// Grid size before golden-section refinement.
        #[arg(long, default_value_t = 200)]
        beta_points: usize,
        /// PER window LO:HI; samples outside it are dropped.
        #[arg(long, default_value = "1e-3:0.9", value_parser = parse_window)]
        per_window: (f64, f64),
        /// Output CSV (beta,residual_rms,n_used,n_windowed_out);
        /// stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum PerCmd {
    /// Predict PER for each (user, block) profile of a trace.
    Predict {
        /// Input trace CSV.
        #[arg(long)]
        trace: PathBuf,
        /// Reference curve CSV (searched in WEAVESIM_DATA as a fallback).
        #[arg(long)]
        curve: PathBuf,
        /// Compression beta (see eesm compress).
        #[arg(long, conflicts_with = "mcs")]
        beta: Option<f64>,
        /// Look the beta up by MCS name in the active beta table.
        #[arg(long)]
        mcs: Option<String>,
        #[arg(long, value_enum, default_value_t = MethodArg::Eesm)]
        method: MethodArg,
        /// Output CSV (user,block,gamma_eff_db,per_pred); stdout when
        /// omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum RefCmd {
    /// Monte Carlo an AWGN reference curve on an SNR grid.
    Gen {
        /// MCS name (bpsk_r12_conv, qpsk_r12_conv, qam16_r12_conv).
        #[arg(long)]
        mcs: String,
        /// SNR grid in dB as START:STEP:STOP, inclusive.
        #[arg(long, value_parser = parse_grid, allow_hyphen_values = true)]
        grid: Grid,
        /// Packets per grid point.
        #[arg(long)]
        packets: u64,
        /// Information bits per packet.
        #[arg(long, default_value_t = DEFAULT_INFO_BITS)]
        info_bits: usize,
        /// Curve CSV to write (snr_db,per).
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum LinksimCmd {
    /// Simulate coded PER on one SINR profile.
    Per {
        /// Profile CSV (subcarrier,sinr_db).
        #[arg(long)]
        profile: PathBuf,
        /// MCS name.
        #[arg(long)]
        mcs: String,
        /// Number of packets.
        #[arg(long)]
        packets: u64,
        /// Information bits per packet.
        #[arg(long, default_value_t = DEFAULT_INFO_BITS)]
        info_bits: usize,
        /// Output CSV (mcs,n_packets,n_errors,per); stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum BetaCmd {
    /// Write the active beta table (WEAVESIM_DATA override or builtin).
    Export {
        /// Beta table CSV to write.
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Eesm,
    Capacity,
    Average,
}

impl MethodArg {
    fn to_core(self) -> CompressionMethod {
        match self {
            MethodArg::Eesm => CompressionMethod::Eesm,
            MethodArg::Capacity => CompressionMethod::Capacity,
            MethodArg::Average => CompressionMethod::Average,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FigureName {
    Fig2,
    Fig3,
    Fig4,
    Fig5,
    Fig6,
}

impl FigureName {
    fn dir_name(self) -> &'static str {
        match self {
            FigureName::Fig2 => "fig2",
            FigureName::Fig3 => "fig3",
            FigureName::Fig4 => "fig4",
            FigureName::Fig5 => "fig5",
            FigureName::Fig6 => "fig6",
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Scale {
    Desk,
    Full,
}

#[derive(Clone, Debug)]
struct Grid(Vec<f64>);

fn parse_grid(s: &str) -> Result<Grid, String> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err("grid must be START:STEP:STOP".into());
    }
    let num = |p: &str| -> Result<f64, String> {
        p.parse::<f64>().map_err(|e| format!("bad grid number '{p}': {e}"))
    };
    let (start, step, stop) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
    if !start.is_finite() || !step.is_finite() || !stop.is_finite() {
        return Err("grid endpoints must be finite".into());
    }
    if step <= 0.0 {
        return Err("grid STEP must be positive".into());
    }
    if stop < start {
        return Err("grid STOP must not be below START".into());
    }
    let n = ((stop - start) / step).round() as usize;
    if ((start + n as f64 * step) - stop).abs() > 1e-6 * step {
        return Err("grid STOP must equal START plus a whole number of steps".into());
    }
    Ok(Grid((0..=n).map(|i| start + i as f64 * step).collect()))
}

fn parse_window(s: &str) -> Result<(f64, f64), String> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 2 {
        return Err("window must be LO:HI".into());
    }
    let lo = parts[0].parse::<f64>().map_err(|e| e.to_string())?;
    let hi = parts[1].parse::<f64>().map_err(|e| e.to_string())?;
    if !(lo > 0.0 && lo < hi && hi <= 1.0) {
        return Err("window needs 0 < LO < HI <= 1".into());
    }
    Ok((lo, hi))
}

// ---------------------------------------------------------------------------
// Error handling
// ---------------------------------------------------------------------------

enum ErrorKind {
    Validation,
    Runtime,
}

struct CliError {
    kind: ErrorKind,
    message: String,
}

impl CliError {
    fn validation(message: impl Into<String>) -> Self {
        CliError { kind: ErrorKind::Validation, message: message.into() }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        let kind = match e {
            CoreError::InvalidScenario(_)
            | CoreError::ConfigParse(_)
            | CoreError::CurveTooShort(_)
            | CoreError::InvalidCurve(_)
            | CoreError::UnknownMcs(_)
            | CoreError::LlrLength(_)
            | CoreError::InvalidArgument(_)
            | CoreError::BetaNotFound { .. }
            | CoreError::CsvSchema { .. } => ErrorKind::Validation,
            _ => ErrorKind::Runtime,
        };
        CliError { kind, message: e.to_string() }
    }
}

type CliResult<A> = Result<A, CliError>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let started = manifest::unix_now();
    let argv: Vec<String> = std::env::args().collect();
    let seed = cli.seed;
    match run(cli) {
        Ok(None) => ExitCode::SUCCESS,
        Ok(Some(plan)) => match write_manifest(&plan, argv, seed, started) {
            Ok(()) => {
                eprintln!("wrote {}", plan.manifest_path.display());
                ExitCode::SUCCESS
            }
            Err(e) => fail(&CliError::from(e)),
        },
        Err(e) => fail(&e),
    }
}

fn fail(e: &CliError) -> ExitCode {
    let one_line: String = e
        .message
        .chars()
        .map(|c| if c == '\n' { ' ' } else { c })
        .collect();
    match e.kind {
        ErrorKind::Validation => {
            eprintln!("error: validation: {one_line}");
            ExitCode::from(3)
        }
        ErrorKind::Runtime => {
            eprintln!("error: runtime: {one_line}");
            ExitCode::from(4)
        }
    }
}

fn run(cli: Cli) -> CliResult<Option<ManifestPlan>> {
    if cli.threads == Some(0) {
        return Err(CliError::validation("--threads must be positive"));
    }
    let out_dir = cli.out_dir;
    let seed = cli.seed;
    match cli.command {
        Command::Scenario { cmd: ScenarioCmd::Validate { config } } => {
            let scenario = load_scenario_file(&config)?;
            let direction = match scenario.link.direction {
                weavesim_core::scenario::Direction::Dl => "dl",
                weavesim_core::scenario::Direction::Ul => "ul",
            };
            println!(
                "scenario ok: M={} K={} subcarriers={} direction={}",
                scenario.antenna_count(),
                scenario.user_count,
                scenario.active_subcarriers().len(),
                direction,
            );
            Ok(None)
        }
        Command::Sinr { cmd } => run_sinr(cmd, &out_dir, seed).map(Some),
        Command::Report { cmd: ReportCmd::Cdf { trace, out } } => {
            let t = io::read_trace::<f64>(&trace)?;
            let cdf = empirical_cdf(&t.values_db());
            let out = resolve_out(&out_dir, &out);
            write_atomic(&out, |tmp| io::write_cdf(tmp, &cdf))?;
            eprintln!("wrote {}", out.display());
            Ok(Some(plan_for(&out, vec![trace], None)))
        }
        Command::Eesm { cmd } => run_eesm(cmd, &out_dir),
        Command::Per { cmd } => run_per(cmd, &out_dir),
        Command::Ref { cmd: RefCmd::Gen { mcs, grid, packets, info_bits, out } } => {
            let mcs = Mcs::parse(&mcs)?;
            let factory = RngFactory::new(seed);
            let curve = awgn_reference_curve(mcs, &grid.0, info_bits, packets, &factory)?;
            let out = resolve_out(&out_dir, &out);
            write_atomic(&out, |tmp| io::write_ref_curve(tmp, &curve))?;
            eprintln!(
                "wrote {} ({} points, {} floored)",
                out.display(),
                curve.points().len(),
                curve.floored_count()
            );
            Ok(Some(plan_for(&out, Vec::new(), None)))
        }
        Command::Linksim { cmd: LinksimCmd::Per { profile, mcs, packets, info_bits, out } } => {
            let mcs = Mcs::parse(&mcs)?;
            let profile_db = io::read_profile::<f64>(&profile)?;
            let gammas: Vec<f64> = profile_db.iter().map(|&db| db_to_linear(db)).collect();
            let factory = RngFactory::new(seed);
            let result = simulate_per(&gammas, mcs, info_bits, packets, &factory)?;
            let text = format!(
                "mcs,n_packets,n_errors,per\n{},{},{},{:?}\n",
                mcs.name(),
                result.n_packets,
                result.n_errors,
                result.per()
            );
            emit(&out_dir, out, text, vec![profile], None)
        }
        Command::Figure { name, scale } => {
            let plan = figures::run(&out_dir, seed, name, scale)?;
            for p in &plan.outputs {
                eprintln!("wrote {}", p.display());
            }
            Ok(Some(plan))
        }
        Command::Beta { cmd: BetaCmd::Export { out } } => {
            let table = active_beta_table()?;
            let out = resolve_out(&out_dir, &out);
            write_atomic(&out, |tmp| io::write_beta_table(tmp, &table))?;
            eprintln!("wrote {}", out.display());
            Ok(Some(plan_for(&out, Vec::new(), None)))
        }
    }
}

fn run_sinr(cmd: SinrCmd, out_dir: &Path, seed: u64) -> CliResult<ManifestPlan> {
    let SinrCmd::Generate { config, blocks, out, dump_channels } = cmd;
    if blocks == 0 {
        return Err(CliError::validation("--blocks must be positive"));
    }
    let (scenario, config_text) = load_scenario_file_with_text(&config)?;
    let factory = RngFactory::new(seed);
    let out = resolve_out(out_dir, &out);
    let mut plan = plan_for(&out, vec![config.clone()], Some(sha256_hex(config_text.as_bytes())));
    match dump_channels {
        None => {
            let trace = generate_trace(&scenario, blocks, &factory)?;
            write_atomic(&out, |tmp| io::write_trace(tmp, &trace))?;
            eprintln!("wrote {} ({} rows)", out.display(), trace.rows.len());
        }
        Some(dump_path) => {
            let (trace, dump) = generate_trace_dumping(&scenario, blocks, &factory)?;
            write_atomic(&out, |tmp| io::write_trace(tmp, &trace))?;
            eprintln!("wrote {} ({} rows)", out.display(), trace.rows.len());
            let mut rows = Vec::new();
            for (block, subcarrier, g) in &dump {
                for m in 0..g.rows() {
                    for k in 0..g.cols() {
                        let z = g[(m, k)];
                        rows.push(io::ChannelDumpRow {
                            block: *block,
                            subcarrier: *subcarrier,
                            m,
                            k,
                            re: z.re,
                            im: z.im,
                        });
                    }
                }
            }
            let dump_path = resolve_out(out_dir, &dump_path);
            write_atomic(&dump_path, |tmp| io::write_channel_dump(tmp, &rows))?;
            eprintln!("wrote {} ({} rows)", dump_path.display(), rows.len());
            plan.outputs.push(dump_path);
        }
    }
    Ok(plan)
}

fn run_eesm(cmd: EesmCmd, out_dir: &Path) -> CliResult<Option<ManifestPlan>> {
    match cmd {
        EesmCmd::Compress { trace, beta, mcs, method, out } => {
            let beta = resolve_beta(beta, mcs.as_deref(), method)?;
            let t = io::read_trace::<f64>(&trace)?;
            let mut text = String::from("user,block,gamma_eff_db\n");
            for p in t.profiles() {
                let gammas: Vec<f64> = p.sinr_db.iter().map(|&db| db_to_linear(db)).collect();
                let gamma_eff = compress(&gammas, method.to_core(), beta);
                writeln!(text, "{},{},{:?}", p.user, p.block, linear_to_db(gamma_eff))
                    .expect("string write");
            }
            emit(out_dir, out, text, vec![trace], None)
        }
        EesmCmd::Calibrate {
            calset,
            curve,
            method,
            beta_lo,
            beta_hi,
            beta_points,
            per_window,
            out,
        } => {
            if !(beta_lo > 0.0 && beta_hi > beta_lo) {
                return Err(CliError::validation("need 0 < --beta-lo < --beta-hi"));
            }
            if beta_points < 2 {
                return Err(CliError::validation("--beta-points must be at least 2"));
            }
            let samples = io::read_calset::<f64>(&calset)?;
            let curve_path = resolve_data(&curve);
            let ref_curve = io::read_ref_curve::<f64>(&curve_path)?;
            let grid = BetaGrid {
                lo: beta_lo,
                hi: beta_hi,
                n_points: beta_points,
                per_window,
            };
            let fit = calibrate_beta(&samples, &ref_curve, method.to_core(), grid)?;
            let text = format!(
                "beta,residual_rms,n_used,n_windowed_out\n{:?},{:?},{},{}\n",
                fit.beta, fit.residual_rms, fit.n_used, fit.n_windowed_out
            );
            emit(out_dir, out, text, vec![calset, curve_path], None)
        }
    }
}

fn run_per(cmd: PerCmd, out_dir: &Path) -> CliResult<Option<ManifestPlan>> {
    let PerCmd::Predict { trace, curve, beta, mcs, method, out } = cmd;
    let beta = resolve_beta(beta, mcs.as_deref(), method)?;
    let t = io::read_trace::<f64>(&trace)?;
    let curve_path = resolve_data(&curve);
    let ref_curve: RefCurve<f64> = io::read_ref_curve(&curve_path)?;
    let mut text = String::from("user,block,gamma_eff_db,per_pred\n");
    for p in t.profiles() {
        let gammas: Vec<f64> = p.sinr_db.iter().map(|&db| db_to_linear(db)).collect();
        let gamma_eff_db = linear_to_db(compress(&gammas, method.to_core(), beta));
        let per = ref_curve.predict_per(gamma_eff_db);
        writeln!(text, "{},{},{:?},{:?}", p.user, p.block, gamma_eff_db, per)
            .expect("string write");
    }
    emit(out_dir, out, text, vec![trace, curve_path], None)
}

/// Beta table with the WEAVESIM_DATA override applied when present.
pub(crate) fn active_beta_table() -> weavesim_core::Result<BetaTable> {
    if let Some(dir) = std::env::var_os("WEAVESIM_DATA") {
        let path = Path::new(&dir).join("beta_table.csv");
        if path.exists() {
            return io::read_beta_table(path);
        }
    }
    Ok(BetaTable::builtin())
}

/// Resolves a read-only data file: literal path first, then WEAVESIM_DATA.
fn resolve_data(path: &Path) -> PathBuf {
    if path.exists() {
        return path.to_path_buf();
    }
    if let Some(dir) = std::env::var_os("WEAVESIM_DATA") {
        let candidate = Path::new(&dir).join(path);
        if candidate.exists() {
            return candidate;
        }
    }
    path.to_path_buf()
}

fn resolve_out(out_dir: &Path, out: &Path) -> PathBuf {
    if out.is_absolute() {
        out.to_path_buf()
    } else {
        out_dir.join(out)
    }
}

fn resolve_beta(beta: Option<f64>, mcs: Option<&str>, method: MethodArg) -> CliResult<f64> {
    match (beta, mcs) {
        (Some(b), None) => {
            if !(b.is_finite() && b > 0.0) {
                return Err(CliError::validation("--beta must be positive and finite"));
            }
            Ok(b)
        }
        (None, Some(name)) => Ok(active_beta_table()?.lookup(name)?),
        (None, None) if method == MethodArg::Average => Ok(1.0),
        (None, None) => Err(CliError::validation(format!(
            "method {} needs --beta or --mcs",
            method.to_core().name()
        ))),
        (Some(_), Some(_)) => unreachable!("clap rejects --beta with --mcs"),
    }
}

fn load_scenario_file(path: &Path) -> CliResult<Scenario64> {
    Ok(load_scenario_file_with_text(path)?.0)
}

fn load_scenario_file_with_text(path: &Path) -> CliResult<(Scenario64, String)> {
    let text = fs::read_to_string(path).map_err(|e| {
        CliError::from(CoreError::Io { path: path.display().to_string(), source: e })
    })?;
    let scenario = load_scenario::<f64>(&text)?;
    Ok((scenario, text))
}

fn plan_for(out: &Path, inputs: Vec<PathBuf>, config_sha256: Option<String>) -> ManifestPlan {
    let mut name = out.file_name().map(|n| n.to_os_string()).unwrap_or_else(|| "out".into());
    name.push(".manifest.json");
    ManifestPlan {
        manifest_path: out.with_file_name(name),
        config_sha256,
        inputs,
        outputs: vec![out.to_path_buf()],
    }
}

/// Writes `text` to `out` (with a manifest) or to stdout when no path is
/// given.
fn emit(
    out_dir: &Path,
    out: Option<PathBuf>,
    text: String,
    inputs: Vec<PathBuf>,
    config_sha256: Option<String>,
) -> CliResult<Option<ManifestPlan>> {
    match out {
        None => {
            print!("{text}");
            Ok(None)
        }
        Some(out) => {
            let out = resolve_out(out_dir, &out);
            write_atomic(&out, |tmp| {
                fs::write(tmp, &text).map_err(|e| CoreError::Io {
                    path: tmp.display().to_string(),
                    source: e,
                })
            })?;
            eprintln!("wrote {}", out.display());
            Ok(Some(plan_for(&out, inputs, config_sha256)))
        }
    }
}
