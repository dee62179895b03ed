//! Batch front door: config ingestion, scenario execution and
//! deterministic artifact emission (CSV/JSON traces, summary statistics,
//! SVG line plots).
//!
//! Exit codes: 0 success, 2 config validation failure, 3 numerical
//! validation failure (e.g. a non-unitary coupler; the residual is
//! reported as JSON on stderr), 1 I/O failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::codes::{code_inner_product, random_binary_code, walsh_hadamard_code, Code};
use crate::coupler::{balanced_2x2, dft_coupler, hadamard_coupler, CouplerMatrix};
use crate::error::{QcdmaError, Result};
use crate::experiments::{
    mc_peak_stats, mc_receiver_mean, run_ook, spreading_factor, EngineKind,
};
use crate::io::{
    load_simulate_config, save_json, write_plot_svg, write_traces_csv, CodeDoc, CouplerDoc,
    PartitionDoc, ScenarioConfig, SCHEMA_VERSION,
};
use crate::qstate::{
    fock_network_trace, glauber_network_trace, reference_peak_intensity, IntensityTrace,
};
use crate::wavepacket::gaussian_spectral;

#[derive(Parser)]
#[command(name = "qcdma", about = "Spectrally phase-encoded quantum CDMA network simulator")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a network or OOK scenario from a JSON config.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Overrides every random-code seed in the config.
        #[arg(long)]
        seed: Option<u64>,
        /// Comma list of artifacts to emit: csv, json, svg.
        #[arg(long, default_value = "csv,json")]
        format: String,
    },
    /// Emit a code document; prints the inner-product table for walsh.
    Codes {
        #[arg(long)]
        nc: usize,
        #[arg(long, value_enum)]
        kind: CodeKindArg,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        index: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Emit a coupler document with its unitarity residual.
    Coupler {
        #[arg(long)]
        m: usize,
        #[arg(long, value_enum)]
        kind: CouplerKindArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte-Carlo statistics with pass/fail against documented values.
    Mc {
        #[arg(long, value_enum)]
        stat: StatArg,
        #[arg(long)]
        nc: usize,
        #[arg(long, default_value_t = 2000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Engine for receiver-mean.
        #[arg(long, value_enum, default_value_t = EngineArg::Glauber)]
        engine: EngineArg,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum CodeKindArg {
    Random,
    Walsh,
}

#[derive(Clone, Copy, ValueEnum)]
enum CouplerKindArg {
    #[value(name = "balanced2x2")]
    Balanced2x2,
    Dft,
    Hadamard,
}

#[derive(Clone, Copy, ValueEnum)]
enum StatArg {
    Peak,
    ReceiverMean,
    Spreading,
}

#[derive(Clone, Copy, ValueEnum)]
enum EngineArg {
    Glauber,
    Fock,
}

enum CliError {
    Validation(QcdmaError),
    Io(std::io::Error),
}

impl From<QcdmaError> for CliError {
    fn from(e: QcdmaError) -> Self {
        CliError::Validation(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

/// Entry point used by the binary.
pub fn main_entry() -> ExitCode {
    if let Ok(v) = std::env::var("QCDMA_THREADS") {
        if let Ok(n) = v.parse::<usize>() {
            if n >= 1 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
        }
    }
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Io(e)) => {
            eprintln!("{{\"error\":{}}}", serde_json::to_string(&e.to_string()).unwrap());
            ExitCode::from(1)
        }
        Err(CliError::Validation(e)) => {
            let code = match &e {
                QcdmaError::NotUnitary { .. }
                | QcdmaError::Resolution { .. }
                | QcdmaError::DegenerateSuperposition(_) => 3u8,
                _ => 2u8,
            };
            if let QcdmaError::NotUnitary { residual } = &e {
                eprintln!(
                    "{{\"error\":{},\"residual\":{residual}}}",
                    serde_json::to_string(&e.to_string()).unwrap()
                );
            } else {
                eprintln!("{{\"error\":{}}}", serde_json::to_string(&e.to_string()).unwrap());
            }
            ExitCode::from(code)
        }
    }
}

fn run(cli: Cli) -> std::result::Result<(), CliError> {
    match cli.command {
        Command::Simulate { config, out, seed, format } => cmd_simulate(&config, &out, seed, &format),
        Command::Codes { nc, kind, seed, index, out } => cmd_codes(nc, kind, seed, index, out.as_deref()),
        Command::Coupler { m, kind, out } => cmd_coupler(m, kind, out.as_deref()),
        Command::Mc { stat, nc, trials, seed, out, engine } => {
            cmd_mc(stat, nc, trials, seed, out.as_deref(), engine)
        }
    }
}

#[derive(Serialize)]
struct ReceiverSummary {
    receiver: usize,
    /// Intensity at the sample nearest the decoded user's pulse center.
    sampled: f64,
    sampled_normalized: f64,
    integrated: f64,
    argmax_t: f64,
}

#[derive(Serialize)]
struct EnergySummary {
    input: f64,
    output: f64,
    residual: f64,
}

#[derive(Serialize)]
struct NetworkSummary {
    schema_version: u32,
    kind: &'static str,
    engine: EngineKind,
    n_chips: usize,
    seed_override: Option<u64>,
    receivers: Vec<ReceiverSummary>,
    energy: EnergySummary,
    partition: PartitionDoc,
}

#[derive(Serialize)]
struct OokSummary {
    schema_version: u32,
    kind: &'static str,
    engine: EngineKind,
    n_chips: usize,
    seed_override: Option<u64>,
    bit_period_snapped: f64,
    reference_peak: f64,
    slots: Vec<crate::experiments::SlotStats>,
}

fn parse_formats(format: &str) -> Result<(bool, bool, bool)> {
    let mut csv = false;
    let mut json = false;
    let mut svg = false;
    for part in format.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        match part {
            "csv" => csv = true,
            "json" => json = true,
            "svg" => svg = true,
            other => {
                return Err(QcdmaError::Config(format!(
                    "unknown format {other:?} (expected csv, json, svg)"
                )))
            }
        }
    }
    Ok((csv, json, svg))
}

fn cmd_simulate(
    config_path: &Path,
    out_dir: &Path,
    seed: Option<u64>,
    format: &str,
) -> std::result::Result<(), CliError> {
    let (want_csv, want_json, want_svg) = parse_formats(format)?;
    let config = load_simulate_config(config_path)?;
    std::fs::create_dir_all(out_dir)?;

    let (trace, summary_json): (IntensityTrace, serde_json::Value) = match &config.scenario {
        ScenarioConfig::Network(nc) => {
            let (net, engine) = nc.build(seed)?;
            let trace = match engine {
                EngineKind::Glauber => glauber_network_trace(&net)?,
                EngineKind::Fock => fock_network_trace(&net)?,
            };
            let grid = net.partition().grid();
            let reference = gaussian_spectral(grid, 0.0)?;
            let reference_peak = reference_peak_intensity(&reference, 0.0);
            let receivers: Vec<ReceiverSummary> = (0..net.n_users())
                .map(|r| {
                    let d = net.decode_assignment()[r];
                    let center = nc.transmitters[d].t0 + nc.transmitters[d].t_offset;
                    let sampled = trace.value_nearest(r, center);
                    ReceiverSummary {
                        receiver: r,
                        sampled,
                        sampled_normalized: sampled / reference_peak,
                        integrated: trace.integrated(r),
                        argmax_t: trace.argmax_time(r),
                    }
                })
                .collect();
            let input = net.total_input_intensity();
            let output = trace.total_integrated();
            let summary = NetworkSummary {
                schema_version: SCHEMA_VERSION,
                kind: "network",
                engine,
                n_chips: nc.n_chips,
                seed_override: seed,
                receivers,
                energy: EnergySummary { input, output, residual: (output - input).abs() },
                partition: PartitionDoc::from_partition(net.partition()),
            };
            (trace, serde_json::to_value(summary).expect("serializable"))
        }
        ScenarioConfig::Ook(oc) => {
            let scenario = oc.build(seed)?;
            let result = run_ook(&scenario)?;
            let summary = OokSummary {
                schema_version: SCHEMA_VERSION,
                kind: "ook",
                engine: scenario.state_kind,
                n_chips: scenario.n_chips,
                seed_override: seed,
                bit_period_snapped: result.bit_period_snapped,
                reference_peak: result.reference_peak,
                slots: result.slots.clone(),
            };
            (result.trace, serde_json::to_value(summary).expect("serializable"))
        }
    };

    if want_csv {
        write_traces_csv(&out_dir.join("traces.csv"), &trace)?;
    }
    if want_json {
        save_json(&out_dir.join("summary.json"), &summary_json)?;
    }
    if want_svg {
        write_plot_svg(&out_dir.join("plot.svg"), &trace)?;
    }
    Ok(())
}

fn write_or_print<T: Serialize>(out: Option<&Path>, value: &T) -> std::result::Result<(), CliError> {
    match out {
        Some(path) => save_json(path, value).map_err(CliError::Io),
        None => {
            println!("{}", serde_json::to_string_pretty(value).expect("serializable"));
            Ok(())
        }
    }
}

fn cmd_codes(
    nc: usize,
    kind: CodeKindArg,
    seed: Option<u64>,
    index: Option<usize>,
    out: Option<&Path>,
) -> std::result::Result<(), CliError> {
    match kind {
        CodeKindArg::Random => {
            let code = random_binary_code(nc, seed.unwrap_or(0))?;
            write_or_print(out, &CodeDoc::from_code(&code))
        }
        CodeKindArg::Walsh => {
            let idx = index.unwrap_or(0);
            let code = walsh_hadamard_code(nc, idx)?;
            // Inner-product table of all row pairs: Nc on the diagonal,
            // zero elsewhere.
            let rows: Result<Vec<Code>> = (0..nc).map(|i| walsh_hadamard_code(nc, i)).collect();
            let rows = rows?;
            println!("walsh inner-product table (Nc = {nc}):");
            for i in 0..nc {
                let mut line = String::new();
                for j in 0..nc {
                    let ip = code_inner_product(&rows[i], &rows[j])?;
                    line.push_str(&format!("{:>5}", ip.re.round() as i64));
                }
                println!("{line}");
            }
            write_or_print(out, &CodeDoc::from_code(&code))
        }
    }
}

fn cmd_coupler(
    m: usize,
    kind: CouplerKindArg,
    out: Option<&Path>,
) -> std::result::Result<(), CliError> {
    let coupler: CouplerMatrix = match kind {
        CouplerKindArg::Balanced2x2 => {
            if m != 2 {
                return Err(CliError::Validation(QcdmaError::Config(format!(
                    "balanced2x2 requires m = 2, got {m}"
                ))));
            }
            balanced_2x2()
        }
        CouplerKindArg::Dft => dft_coupler(m)?,
        CouplerKindArg::Hadamard => hadamard_coupler(m)?,
    };
    write_or_print(out, &CouplerDoc::from_coupler(&coupler))
}

#[derive(Serialize)]
struct McPeakReport {
    schema_version: u32,
    stat: &'static str,
    #[serde(flatten)]
    stats: crate::experiments::PeakStats,
    /// Nominal large-Nc suppression 1/Nc.
    expected_nominal: f64,
    /// Expectation of the estimator on this grid: sum of squared chip
    /// amplitude weights (equals 1/Nc only for equal-amplitude chips).
    expected_grid: f64,
    within_3se_of_nominal: bool,
    within_3se_of_grid: bool,
}

#[derive(Serialize)]
struct McReceiverReport {
    schema_version: u32,
    stat: &'static str,
    #[serde(flatten)]
    stats: crate::experiments::ReceiverMeanStats,
    within_3se_receiver_1: bool,
    within_3se_receiver_2: bool,
}

#[derive(Serialize)]
struct McSpreadingReport {
    schema_version: u32,
    stat: &'static str,
    n_chips: usize,
    trials: usize,
    seed: u64,
    mean_ratio: f64,
    min_ratio: f64,
    max_ratio: f64,
    /// Fraction of seeds with ratio inside [0.3 Nc, 3 Nc].
    fraction_in_band: f64,
    pass: bool,
}

/// Expectation of the peak-suppression estimator on the default grid:
/// `sum_k w_k^2` with `w_k` the chip amplitude-integral weights.
fn peak_ratio_grid_expectation(n_chips: usize) -> Result<f64> {
    let grid = crate::wavepacket::FrequencyGrid::default_grid();
    let wp = gaussian_spectral(&grid, 0.0)?;
    let p = crate::codes::partition_equal_energy(&wp, n_chips)?;
    let sums: Vec<f64> = (0..n_chips)
        .map(|k| {
            let lo = p.boundary_indices()[k];
            let hi = p.boundary_indices()[k + 1];
            wp.amplitudes()[lo..hi].iter().map(|a| a.norm()).sum::<f64>()
        })
        .collect();
    let total: f64 = sums.iter().sum();
    Ok(sums.iter().map(|s| (s / total).powi(2)).sum())
}

fn cmd_mc(
    stat: StatArg,
    nc: usize,
    trials: usize,
    seed: u64,
    out: Option<&Path>,
    engine: EngineArg,
) -> std::result::Result<(), CliError> {
    match stat {
        StatArg::Peak => {
            let stats = mc_peak_stats(nc, trials, seed)?;
            let expected_nominal = 1.0 / nc as f64;
            let expected_grid = peak_ratio_grid_expectation(nc)?;
            let report = McPeakReport {
                schema_version: SCHEMA_VERSION,
                stat: "peak",
                within_3se_of_nominal: (stats.mean_peak_ratio - expected_nominal).abs()
                    <= 3.0 * stats.se_peak_ratio,
                within_3se_of_grid: (stats.mean_peak_ratio - expected_grid).abs()
                    <= 3.0 * stats.se_peak_ratio,
                expected_nominal,
                expected_grid,
                stats,
            };
            write_or_print(out, &report)
        }
        StatArg::ReceiverMean => {
            let kind = match engine {
                EngineArg::Glauber => EngineKind::Glauber,
                EngineArg::Fock => EngineKind::Fock,
            };
            let stats = mc_receiver_mean(nc, trials, seed, kind)?;
            let report = McReceiverReport {
                schema_version: SCHEMA_VERSION,
                stat: "receiver_mean",
                within_3se_receiver_1: (stats.mean_receiver_1 - stats.nominal).abs()
                    <= 3.0 * stats.se_receiver_1,
                within_3se_receiver_2: (stats.mean_receiver_2 - stats.nominal).abs()
                    <= 3.0 * stats.se_receiver_2,
                stats,
            };
            write_or_print(out, &report)
        }
        StatArg::Spreading => {
            let grid = crate::wavepacket::FrequencyGrid::default_grid();
            let wp = gaussian_spectral(&grid, 0.0)?;
            let partition = crate::codes::partition_equal_energy(&wp, nc)?;
            let mut ratios = Vec::with_capacity(trials);
            for k in 0..trials {
                let mut stream = crate::rng::stream(seed, k as u64);
                let code =
                    crate::codes::random_binary_code_from(nc, &mut stream, format!("mc-{k}"))?;
                ratios.push(spreading_factor(&wp, &code, &partition)?);
            }
            let in_band = ratios
                .iter()
                .filter(|&&r| r >= 0.3 * nc as f64 && r <= 3.0 * nc as f64)
                .count();
            let fraction = in_band as f64 / trials.max(1) as f64;
            let report = McSpreadingReport {
                schema_version: SCHEMA_VERSION,
                stat: "spreading",
                n_chips: nc,
                trials,
                seed,
                mean_ratio: ratios.iter().sum::<f64>() / trials.max(1) as f64,
                min_ratio: ratios.iter().copied().fold(f64::INFINITY, f64::min),
                max_ratio: ratios.iter().copied().fold(0.0, f64::max),
                fraction_in_band: fraction,
                pass: fraction >= 0.95,
            };
            write_or_print(out, &report)
        }
    }
}
